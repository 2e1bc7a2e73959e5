"""``macrosup`` command-line entry point.

Exit codes: 0 success, 2 bad configuration, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import evolve as ev
from . import sweeps
from .algos import BV, DJ, Grover, Simon
from .errors import CapabilityError, NumericError
from .gluedtrees import GluedTreesSpec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("grover", "dj", "bv", "simon", "glued", "scaling", "evolve", "table1")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_min: int | None
    n_max: int | None
    s_points: int = 21
    instances: str = "auto"
    seed: int | None = None
    alpha: float = 0.4
    format: str = "csv"
    out: str = "-"
    workers: int = 1
    family: str | None = None
    s0: float | None = None
    total_time: float | None = None
    delta: float | None = None
    factor: float | None = None
    dt: float | None = None
    record: int = 11
    instance: int | None = None

    def sampling(self) -> sweeps.Sampling:
        return sweeps.Sampling.parse(self.instances)

    def run_seed(self) -> int:
        return 0 if self.seed is None else self.seed

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command == "table1" and self.n_min is None and self.n_max is None:
            pass  # per-family default ranges
        elif self.n_min is None or self.n_max is None:
            raise ConfigError("--n-min and --n-max must be given together")
        elif self.n_min < 1 or self.n_max < self.n_min:
            raise ConfigError(f"empty or invalid n-range {self.n_min}..{self.n_max}")
        if self.s_points < 1:
            raise ConfigError("--s-points must be >= 1")
        try:
            samp = self.sampling()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if samp.mode == "random" and self.seed is None:
            raise ConfigError("random instance sampling requires an explicit --seed")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError("--alpha must lie in (0, 1/2)")
        if self.format not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        if self.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if self.command in ("scaling", "evolve") and self.family not in sweeps.FAMILIES:
            raise ConfigError(f"--family must be one of {', '.join(sweeps.FAMILIES)}")
        if self.command == "scaling" and self.n_max - self.n_min < 2:
            raise ConfigError("scaling needs at least 3 n values")
        if self.s0 is not None and not 0.0 <= self.s0 <= 1.0:
            raise ConfigError("--s0 must lie in [0, 1]")
        if self.command == "evolve" and self.family == "dj" and self.instance not in (None, 0, 1):
            raise ConfigError("dj instance must be 0 or 1")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".16e")
    return "" if v is None else str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def json_text(config: RunConfig, rows: list[dict], fits: dict) -> str:
    doc = {
        "config": asdict(config),
        "rows": [{k: _json_value(v) for k, v in r.items()} for r in rows],
        "fits": fits,
    }
    return json.dumps(doc, indent=2) + "\n"


def check_writable(path: str) -> None:
    if path == "-":
        return
    target = os.path.abspath(path)
    parent = os.path.dirname(target) or "."
    if os.path.isdir(target):
        raise OSError(f"output path {path!r} is a directory")
    if not os.path.isdir(parent):
        raise OSError(f"output directory {parent!r} does not exist")
    if os.path.exists(target):
        if not os.access(target, os.W_OK):
            raise OSError(f"output file {path!r} is not writable")
    elif not os.access(parent, os.W_OK):
        raise OSError(f"output directory {parent!r} is not writable")


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _fits_path(out: str) -> str:
    return "-" if out == "-" else out + ".fits.csv"


# -- commands -----------------------------------------------------------------------


def _ns(cfg: RunConfig):
    return range(cfg.n_min, cfg.n_max + 1)


def _row_dicts(rows):
    return [asdict(r) for r in rows]


def _emit_rows(cfg: RunConfig, rows, fits: dict, fit_rows=None) -> None:
    if cfg.format == "json":
        _write(cfg.out, json_text(cfg, _row_dicts(rows), fits))
        return
    _write(cfg.out, csv_text(sweeps.ROW_FIELDS, [tuple(asdict(r).values()) for r in rows]))
    if fit_rows is not None:
        _write(_fits_path(cfg.out), csv_text(("family", "key", "value"), fit_rows))


def cmd_sweep(cfg: RunConfig) -> list:
    tasks = sweeps.sweep_tasks(cfg.command, _ns(cfg), cfg.s_points, cfg.sampling(),
                               cfg.run_seed(), cfg.alpha)
    if cfg.command == "glued" and cfg.s0 is not None:
        # a single annealing point instead of the grid
        tasks = sorted({replace(t, s=cfg.s0) for t in tasks})
    rows = sweeps.run_tasks(tasks, cfg.workers)
    _emit_rows(cfg, rows, {})
    return rows


def _fit_record(fit: sweeps.FitResult) -> dict:
    return {
        "p_e": fit.p_e,
        "stderr": fit.stderr,
        "verdict": fit.verdict,
        "exceptional_fraction": {str(n): f for n, f in fit.exceptional_fraction.items()},
    }


def cmd_scaling(cfg: RunConfig) -> sweeps.FitResult:
    tasks = sweeps.scaling_tasks(cfg.family, _ns(cfg), cfg.sampling(), cfg.run_seed(),
                                 cfg.alpha, cfg.s_points, cfg.s0)
    rows = sweeps.run_tasks(tasks, cfg.workers)
    try:
        fit = sweeps.fit_family(cfg.family, rows)
    except ValueError as exc:
        raise ConfigError(f"scaling fit failed: {exc}") from exc
    fit_rows = [(fit.family, "p_e", fit.p_e), (fit.family, "stderr", fit.stderr),
                (fit.family, "verdict", fit.verdict)]
    fit_rows += [(fit.family, f"exceptional_fraction_n{n}", f)
                 for n, f in fit.exceptional_fraction.items()]
    _emit_rows(cfg, rows, {cfg.family: _fit_record(fit)}, fit_rows)
    return fit


TABLE1_FIELDS = ("family", "speedup", "p_e", "stderr", "verdict", "error")


def cmd_table1(cfg: RunConfig, ranges: dict | None = None) -> list:
    if ranges is None and cfg.n_min is not None:
        ranges = {f: (cfg.n_min, cfg.n_max) for f in sweeps.FAMILIES}
        ranges["simon"] = (max(2, cfg.n_min), cfg.n_max)
    report = sweeps.table1(ranges, cfg.sampling(), cfg.run_seed(), cfg.alpha,
                           cfg.workers, min(cfg.s_points, 11))
    rows = [asdict(r) for r in report]
    if cfg.format == "json":
        _write(cfg.out, json_text(cfg, rows, {}))
    else:
        _write(cfg.out, csv_text(TABLE1_FIELDS, [tuple(r.values()) for r in rows]))
    return report


def _evolve_spec(cfg: RunConfig):
    n = cfg.n_min
    label = cfg.instance
    fam = cfg.family
    if fam == "glued":
        return GluedTreesSpec(n, cfg.alpha, label or 0)
    if fam == "grover":
        return Grover(n, 0 if label is None else label)
    if fam == "dj":
        return DJ(n, 0 if label is None else label)
    if fam == "bv":
        return BV(n, (1 << n) - 1 if label is None else label)
    return Simon(n, 1 if label is None else label)


def _evolve_schedule(cfg: RunConfig, spec) -> ev.Schedule:
    if cfg.total_time is not None:
        return ev.Schedule.linear(cfg.total_time)
    if cfg.family == "grover":
        return ev.local_adiabatic_schedule_grover(spec.n, cfg.delta or 0.1)
    if cfg.family == "glued":
        return ev.glued_linear_schedule(spec, cfg.factor or 256.0)
    return ev.Schedule.linear(20.0)


TRACE_FIELDS = ("t", "s", "ground_overlap", "first_excited_overlap", "energy_expectation")


def cmd_evolve(cfg: RunConfig):
    try:
        spec = _evolve_spec(cfg)
        schedule = _evolve_schedule(cfg, spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _, trace = ev.evolve(spec, schedule, cfg.dt, record=cfg.record)
    rows = [asdict(r) for r in trace.rows]
    info = {"total_time": schedule.total_time, "dt": trace.dt, "steps": trace.steps,
            "norm_drift": trace.norm_drift}
    if cfg.format == "json":
        _write(cfg.out, json_text(cfg, rows, {"evolve": info}))
    else:
        _write(cfg.out, csv_text(TRACE_FIELDS, [tuple(r.values()) for r in rows]))
    return trace


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="macrosup", description=(
        "Index-p analysis of adiabatic algorithms: VCM sweeps, scaling fits, "
        "evolution traces and the summary verdict table."))
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        default_n = {"table1": (None, None), "evolve": (4, None)}.get(name, (4, 8))
        sp.add_argument("--n-min", type=int, default=default_n[0])
        sp.add_argument("--n-max", type=int, default=default_n[1])
        sp.add_argument("--s-points", type=int, default=21)
        sp.add_argument("--instances", default="auto", help="all | random:K")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--alpha", type=float, default=0.4)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", default="-")
        sp.add_argument("--workers", type=int, default=1)
        if name in ("scaling", "evolve"):
            sp.add_argument("--family", choices=sweeps.FAMILIES, required=True)
        if name in ("scaling", "glued"):
            sp.add_argument("--s0", type=float, default=None)
        if name == "evolve":
            sp.add_argument("--instance", type=int, default=None)
            sp.add_argument("--total-time", type=float, default=None)
            sp.add_argument("--delta", type=float, default=None)
            sp.add_argument("--factor", type=float, default=None)
            sp.add_argument("--dt", type=float, default=None)
            sp.add_argument("--record", type=int, default=11)
    return p


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    names = {f.name for f in fields(RunConfig)}
    args = {k: v for k, v in vars(ns).items() if k in names}
    if ns.command == "evolve" and args["n_max"] is None:
        args["n_max"] = args["n_min"]  # a single register size
    return RunConfig(**args)


def run(cfg: RunConfig):
    cfg.validate()
    check_writable(cfg.out)
    if cfg.command in sweeps.FAMILIES:
        return cmd_sweep(cfg)
    if cfg.command == "scaling":
        check_writable(_fits_path(cfg.out))
        return cmd_scaling(cfg)
    if cfg.command == "evolve":
        return cmd_evolve(cfg)
    return cmd_table1(cfg)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        run(cfg)
    except (ConfigError, CapabilityError) as exc:
        print(f"macrosup: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"macrosup: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"macrosup: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"macrosup: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
