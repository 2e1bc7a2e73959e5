from __future__ import annotations

import csv
import io
import json
import math

import numpy as np
import pytest

from macrosup import cli, sweeps
from macrosup.sweeps import Table1Row

HEADER = "family,n,instance,s,e_max,max_variance,gap,seed"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- sweeps -----------------------------------------------------------------------------


def test_golden_header_and_row_count(capsys):
    code, out, _ = run_cli(capsys, "grover", "--n-min", "4", "--n-max", "5", "--instances", "random:2",
                           "--seed", "3")
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == HEADER
    assert out.endswith("\n") and "\r" not in out
    rows = parse_csv(out)
    assert len(rows) == 2 * 2 * 21


def test_grover_row_count_per_instance(capsys):
    code, out, _ = run_cli(capsys, "grover", "--n-min", "4", "--n-max", "8", "--instances", "random:1",
                           "--seed", "0")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 105  # 5 n values x 21 s points, one instance each
    assert {int(r["n"]) for r in rows} == set(range(4, 9))


def test_exhaustive_default_sampling(capsys):
    _, out, _ = run_cli(capsys, "bv", "--n-min", "3", "--n-max", "3", "--s-points", "2")
    rows = parse_csv(out)
    assert sorted({int(r["instance"]) for r in rows}) == list(range(8))


def test_numeric_format_round_trips(capsys):
    _, out, _ = run_cli(capsys, "grover", "--n-min", "4", "--n-max", "4", "--instances", "random:1",
                        "--seed", "1", "--s-points", "3")
    for r in parse_csv(out):
        text = r["gap"]
        assert text == format(float(text), ".16e")
        mant = text.split("e")[0].replace("-", "").replace(".", "")
        assert len(mant) == 17


def test_dj_sweep_emax_constant(capsys):
    _, out, _ = run_cli(capsys, "dj", "--n-min", "2", "--n-max", "7")
    rows = parse_csv(out)
    assert len(rows) == 6 * 2 * 21
    assert all(abs(float(r["e_max"]) - 2.0) <= 1e-9 for r in rows)


def test_bv_sweep_endpoint(capsys):
    _, out, _ = run_cli(capsys, "bv", "--n-min", "2", "--n-max", "5")
    seen = 0
    for r in parse_csv(out):
        if float(r["s"]) == 1.0:
            a = int(r["instance"])
            # a = 0 leaves a product state, whose e_max is 2
            want = 1 + bin(a).count("1") if a else 2
            assert float(r["e_max"]) == pytest.approx(want, abs=1e-9)
            seen += 1
    assert seen == sum(2 ** n for n in range(2, 6))


def test_glued_sweep_and_single_point(capsys):
    _, out, _ = run_cli(capsys, "glued", "--n-min", "3", "--n-max", "3", "--s0", "0.2",
                        "--instances", "random:3", "--seed", "2")
    rows = parse_csv(out)
    assert len(rows) == 3 and all(float(r["s"]) == 0.2 for r in rows)
    _, out, _ = run_cli(capsys, "glued", "--n-min", "11", "--n-max", "11", "--s-points", "2",
                        "--instances", "random:1", "--seed", "2")
    assert all(r["e_max"] == "nan" for r in parse_csv(out))


def test_determinism_byte_identical(tmp_path):
    paths = [tmp_path / f"run{k}.csv" for k in range(2)]
    for p in paths:
        assert cli.main(["simon", "--n-min", "2", "--n-max", "4", "--s-points", "5",
                         "--instances", "random:3", "--seed", "11", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_parallel_equivalence(tmp_path):
    a, b = tmp_path / "w1.csv", tmp_path / "w2.csv"
    base = ["grover", "--n-min", "3", "--n-max", "5", "--s-points", "6", "--seed", "4"]
    assert cli.main(base + ["--workers", "1", "--out", str(a)]) == 0
    assert cli.main(base + ["--workers", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_random_sampling_is_seeded():
    s = sweeps.Sampling.parse("random:5")
    l1 = sweeps.instance_labels("bv", 12, s, 7)
    assert l1 == sweeps.instance_labels("bv", 12, s, 7)
    assert l1 != sweeps.instance_labels("bv", 12, s, 8)
    assert len(set(l1)) == 5


def test_json_output(capsys):
    code, out, _ = run_cli(capsys, "dj", "--n-min", "2", "--n-max", "3", "--s-points", "3",
                           "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert list(doc) == ["config", "rows", "fits"]
    assert doc["config"]["command"] == "dj"
    assert len(doc["rows"]) == 2 * 2 * 3
    assert list(doc["rows"][0]) == list(sweeps.ROW_FIELDS)


# -- scaling ---------------------------------------------------------------------------------


def test_scaling_bv_exhaustive_oracle(tmp_path):
    out = tmp_path / "bv.csv"
    assert cli.main(["scaling", "--family", "bv", "--n-min", "4", "--n-max", "7",
                     "--instances", "all", "--out", str(out)]) == 0
    fits = {r["key"]: r["value"] for r in parse_csv((tmp_path / "bv.csv.fits.csv").read_text())}
    ns = np.arange(4, 8)
    oracle = np.polyfit(np.log(ns), np.log(ns / 2 + 1), 1)[0] + 1  # medians are n/2 + 1
    assert float(fits["p_e"]) == pytest.approx(oracle, abs=1e-12)
    assert fits["verdict"] == "2"
    rows = parse_csv(out.read_text())
    assert len(rows) == sum(2 ** n for n in range(4, 8))


def test_scaling_dj(tmp_path):
    out = tmp_path / "dj.csv"
    assert cli.main(["scaling", "--family", "dj", "--n-min", "2", "--n-max", "10",
                     "--out", str(out)]) == 0
    fits = {r["key"]: r["value"] for r in parse_csv((tmp_path / "dj.csv.fits.csv").read_text())}
    assert 0.95 <= float(fits["p_e"]) <= 1.05
    assert fits["verdict"] == "1"


def test_scaling_glued_variance_slope(capsys):
    code, out, _ = run_cli(capsys, "scaling", "--family", "glued", "--n-min", "4", "--n-max", "16",
                           "--format", "json")
    assert code == 0
    doc = json.loads(out)
    fit = doc["fits"]["glued"]
    assert 1.7 <= fit["p_e"] <= 2.2
    assert len(doc["rows"]) == 13 * sweeps.DEFAULT_GLUED_SEEDS


def test_scaling_needs_three_points(capsys):
    code, _, err = run_cli(capsys, "scaling", "--family", "grover", "--n-min", "4", "--n-max", "5")
    assert code == 2 and "3 n values" in err


def test_verdict_rule():
    assert sweeps.verdict(1.9, 0.1) == "2"
    assert sweeps.verdict(1.0, 0.05) == "1"
    assert sweeps.verdict(1.5, 0.3) == "indeterminate"
    assert sweeps.verdict(1.6, 0.4) == "indeterminate"  # CI reaches 1
    assert sweeps.verdict(1.4, 0.4) == "indeterminate"  # CI reaches 2


# -- summary table ----------------------------------------------------------------------------


def test_table1_short_range_reports_row_errors(capsys):
    code, out, _ = run_cli(capsys, "table1", "--n-min", "4", "--n-max", "5")
    assert code == 0
    rows = parse_csv(out)
    assert [r["family"] for r in rows] == list(sweeps.FAMILIES)
    assert all(r["error"] and r["p_e"] == "" for r in rows)


def test_table1_json_round_trip(tmp_path):
    out = tmp_path / "t1.json"
    cfg = cli.config_from_args(["table1", "--n-min", "3", "--n-max", "6", "--format", "json",
                                "--out", str(out)])
    report = cli.run(cfg)
    doc = json.loads(out.read_text())
    parsed = [Table1Row(**r) for r in doc["rows"]]
    assert parsed == report
    assert doc["config"] == json.loads(json.dumps(cli.asdict(cfg)))


def test_table1_default_verdicts(tmp_path):
    out = tmp_path / "t1.csv"
    assert cli.main(["table1", "--out", str(out)]) == 0
    rows = {r["family"]: r for r in parse_csv(out.read_text())}
    want = {"grover": "2", "dj": "1", "bv": "2", "simon": "2", "glued": "2"}
    assert {f: rows[f]["verdict"] for f in want} == want
    assert all(not math.isnan(float(rows[f]["p_e"])) for f in want)


# -- evolve ------------------------------------------------------------------------------------


def test_evolve_trace(capsys):
    code, out, _ = run_cli(capsys, "evolve", "--family", "grover", "--n-min", "3", "--record", "5")
    assert code == 0
    rows = parse_csv(out)
    assert list(rows[0]) == list(cli.TRACE_FIELDS)
    assert len(rows) == 5
    assert float(rows[-1]["s"]) == 1.0 and float(rows[-1]["ground_overlap"]) >= 0.9


def test_evolve_json_reports_integration(capsys):
    code, out, _ = run_cli(capsys, "evolve", "--family", "glued", "--n-min", "3", "--factor", "8",
                           "--record", "3", "--format", "json")
    assert code == 0
    info = json.loads(out)["fits"]["evolve"]
    assert info["total_time"] == pytest.approx(3 ** 6 / 8)
    assert info["norm_drift"] <= 1e-8


# -- errors ------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["grover", "--n-min", "5", "--n-max", "4"],
        ["bv", "--n-min", "12", "--n-max", "12", "--instances", "random:4"],
        ["bv", "--instances", "some"],
        ["nonsense"],
        ["grover", "--format", "xml"],
        ["glued", "--alpha", "0.6"],
        ["scaling", "--n-min", "4", "--n-max", "8"],
        ["evolve", "--family", "dj", "--instance", "3"],
        ["evolve", "--family", "grover", "--n-min", "12"],
        ["glued", "--s0", "1.5"],
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, _, _ = run_cli(capsys, *argv)
    assert code == 2


def test_numeric_failure_exit_3(capsys):
    code, _, err = run_cli(capsys, "evolve", "--family", "grover", "--n-min", "3", "--dt", "1.0")
    assert code == 3 and "numeric failure" in err


def test_io_failure_before_compute(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise AssertionError("computation started")

    monkeypatch.setattr(sweeps, "run_tasks", boom)
    bad = tmp_path / "missing" / "out.csv"
    code, _, err = run_cli(capsys, "grover", "--out", str(bad))
    assert code == 4 and "I/O error" in err
    code, _, _ = run_cli(capsys, "grover", "--out", str(tmp_path))
    assert code == 4


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "macrosup", "dj", "--n-min", "2", "--n-max", "2",
                          "--s-points", "1"], capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == HEADER
