"""Task enumeration and per-task computations driven by the command line.

Every task is a small frozen record; ``compute_row`` is a pure function of
it, so tasks can be farmed out to worker processes and the sorted results
are independent of scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import algos, gluedtrees
from .vcm import ScalingSeries, build_vcm, fit_loglog, fit_p_e, max_eigenpair

FAMILIES = ("grover", "dj", "bv", "simon", "glued")
EXHAUSTIVE_LIMIT = 256
DEFAULT_RANDOM_COUNT = 64
DEFAULT_GLUED_SEEDS = 20
GLUED_EMAX_MAX_N = 10

SPEEDUP_NOTES = {
    "grover": "quadratic",
    "dj": "exponential",
    "bv": "polynomial",
    "simon": "exponential",
    "glued": "exponential",
}


@dataclass(frozen=True)
class Sampling:
    """``mode`` is ``auto``, ``all`` or ``random`` (with ``count``)."""

    mode: str = "auto"
    count: int = DEFAULT_RANDOM_COUNT

    @classmethod
    def parse(cls, text: str | None) -> "Sampling":
        if text is None or text == "auto":
            return cls()
        if text == "all":
            return cls("all")
        if text.startswith("random:"):
            k = int(text.split(":", 1)[1])
            if k < 1:
                raise ValueError("random:K needs K >= 1")
            return cls("random", k)
        raise ValueError(f"instance sampling must be all or random:K, got {text!r}")


def instance_labels(family: str, n: int, sampling: Sampling, seed: int) -> list[int]:
    """Instance labels: w*, mu_f, a, a, or the glued name seed."""
    if family == "dj":
        return [0, 1]
    if family == "glued":
        count = DEFAULT_GLUED_SEEDS if sampling.mode != "random" else sampling.count
        return list(range(count))
    lo = 1 if family == "simon" else 0
    space = (1 << n) - lo
    if sampling.mode == "all" or (sampling.mode == "auto" and space <= EXHAUSTIVE_LIMIT):
        return list(range(lo, 1 << n))
    k = min(sampling.count, space)
    rng = np.random.default_rng([seed, n, FAMILIES.index(family)])
    picks = rng.choice(space, size=k, replace=False) + lo
    return sorted(int(x) for x in picks)


def make_spec(family: str, n: int, label: int, alpha: float = 0.4):
    if family == "grover":
        return algos.Grover(n, label)
    if family == "dj":
        return algos.DJ(n, label)
    if family == "bv":
        return algos.BV(n, label)
    if family == "simon":
        return algos.Simon(n, label)
    if family == "glued":
        return gluedtrees.GluedTreesSpec(n, alpha, label)
    raise ValueError(f"unknown family {family!r}")


def simon_w_star(n: int, a: int, seed: int) -> int:
    """Measured register-1 value used for the post-measurement state."""
    return int(np.random.default_rng([seed, n, a, 3]).integers(1 << n))


@dataclass(frozen=True, order=True)
class Task:
    family: str
    n: int
    instance: int
    s: float
    seed: int
    alpha: float = 0.4
    # "ground": H(s) ground state; "post": Simon post-measurement state
    kind: str = "ground"


@dataclass(frozen=True, order=True)
class Row:
    family: str
    n: int
    instance: int
    s: float
    e_max: float
    max_variance: float
    gap: float
    seed: int


ROW_FIELDS = ("family", "n", "instance", "s", "e_max", "max_variance", "gap", "seed")


def _emax(state) -> float:
    return max_eigenpair(build_vcm(state))[0]


def compute_row(task: Task) -> Row:
    spec = make_spec(task.family, task.n, task.instance, task.alpha)
    if task.family == "glued":
        s = task.s
        col = gluedtrees.column_state(spec, s)
        _, var = gluedtrees.observable_stats(spec, col)
        e = gluedtrees.glued_emax(spec, col) if task.n <= GLUED_EMAX_MAX_N else math.nan
        return Row("glued", task.n, task.instance, s, e, var, gluedtrees.gap_at(spec, s), task.seed)
    if task.kind == "post":
        w = simon_w_star(task.n, task.instance, task.seed)
        state = algos.simon_post_measurement_state(task.n, task.instance, w)
        gap = algos.spectral_gap(spec, 1.0)
    else:
        state = algos.ground_state(spec, task.s)
        gap = algos.spectral_gap(spec, task.s)
    e = _emax(state)
    return Row(task.family, task.n, task.instance, task.s, e, e * spec.num_qubits, gap, task.seed)


def run_tasks(tasks: Sequence[Task], workers: int = 1) -> list[Row]:
    if workers <= 1 or len(tasks) <= 1:
        rows = [compute_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(compute_row, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return sorted(rows)


def s_grid(points: int) -> list[float]:
    if points < 1:
        raise ValueError("need at least one s point")
    if points == 1:
        return [0.5]
    return [float(x) for x in np.linspace(0.0, 1.0, points)]


def sweep_tasks(family: str, ns: Iterable[int], s_points: int, sampling: Sampling,
                seed: int, alpha: float = 0.4) -> list[Task]:
    grid = s_grid(s_points)
    return [
        Task(family, n, label, s, seed, alpha)
        for n in ns
        for label in instance_labels(family, n, sampling, seed)
        for s in grid
    ]


# -- scaling ---------------------------------------------------------------------


def scaling_point(family: str, alpha: float = 0.4, s0: float | None = None) -> float:
    if family == "grover":
        return 0.5
    if family in ("bv", "simon"):
        return 1.0
    if family == "glued":
        return alpha / math.sqrt(2.0) if s0 is None else s0
    raise ValueError(f"no single scaling point for {family!r}")


def scaling_tasks(family: str, ns: Iterable[int], sampling: Sampling, seed: int,
                  alpha: float = 0.4, s_points: int = 11, s0: float | None = None) -> list[Task]:
    """Tasks at the point where each family's fluctuation is largest.

    DJ has no such point, so its whole grid is swept and the per-instance
    maximum is taken afterwards.
    """
    if family == "dj":
        return sweep_tasks("dj", ns, s_points, sampling, seed, alpha)
    s = scaling_point(family, alpha, s0)
    kind = "post" if family == "simon" else "ground"
    return [
        Task(family, n, label, s, seed, alpha, kind)
        for n in ns
        for label in instance_labels(family, n, sampling, seed)
    ]


def scaling_series(family: str, rows: Sequence[Row]) -> ScalingSeries:
    """One value per (n, instance): e_max, or the variance of A for glued trees."""
    best: dict[tuple[int, int], float] = {}
    for r in rows:
        v = r.max_variance if family == "glued" else r.e_max
        key = (r.n, r.instance)
        best[key] = max(best.get(key, -math.inf), v)
    return ScalingSeries.from_rows((n, str(i), v) for (n, i), v in sorted(best.items()))


@dataclass(frozen=True)
class FitResult:
    family: str
    p_e: float
    stderr: float
    verdict: str
    exceptional_fraction: dict = field(default_factory=dict)


def verdict(p_e: float, stderr: float) -> str:
    """"2", "1" or "indeterminate" from a fitted index and its standard error."""
    lo, hi = p_e - 1.96 * stderr, p_e + 1.96 * stderr
    if p_e >= 1.5 and lo > 1.0:
        return "2"
    if p_e <= 1.5 and hi < 2.0:
        return "1"
    return "indeterminate"


def fit_family(family: str, rows: Sequence[Row]) -> FitResult:
    series = scaling_series(family, rows)
    if family == "glued":
        med = series.medians()
        p, err = fit_loglog(list(med), list(med.values()))
    else:
        p, err = fit_p_e(series)
    exc = {int(n): f for n, f in series.exceptional_fraction(0.5).items()}
    return FitResult(family, p, err, verdict(p, err), exc)


# -- summary table -------------------------------------------------------------------

DEFAULT_TABLE1_RANGES = {
    "grover": (4, 12),
    "dj": (2, 10),
    "bv": (4, 10),
    "simon": (3, 7),
    "glued": (4, 16),
}


@dataclass(frozen=True)
class Table1Row:
    family: str
    speedup: str
    p_e: float | None
    stderr: float | None
    verdict: str | None
    error: str | None = None


def table1(ranges: dict | None = None, sampling: Sampling = Sampling(), seed: int = 0,
           alpha: float = 0.4, workers: int = 1, s_points: int = 11) -> list[Table1Row]:
    ranges = dict(DEFAULT_TABLE1_RANGES if ranges is None else ranges)
    out = []
    for fam in FAMILIES:
        lo, hi = ranges[fam]
        try:
            tasks = scaling_tasks(fam, range(lo, hi + 1), sampling, seed, alpha, s_points)
            fit = fit_family(fam, run_tasks(tasks, workers))
            out.append(Table1Row(fam, SPEEDUP_NOTES[fam], fit.p_e, fit.stderr, fit.verdict))
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            out.append(Table1Row(fam, SPEEDUP_NOTES[fam], None, None, None, f"{type(exc).__name__}: {exc}"))
    return out
