"""Schrodinger evolution along an annealing schedule.

``i d|psi>/dt = H(s(t)) |psi>`` is integrated with the classical fourth-order
Runge-Kutta stepper, with ``H`` evaluated at each stage time.  RK4 is not
exactly unitary: for a step ``z = dt * |E|`` the norm shrinks by about
``z**6 / 72``, so the default step is chosen from the run length to keep the
total drift well below 1e-8.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from . import algos
from .algos import BV, DJ, Grover, InstanceSpec, Simon
from .errors import CapabilityError, StepSizeError
from .gluedtrees import GluedTreesSpec, column_hamiltonian, oracle_matrix
from .qstate import PureState, measure_pauli_x, measure_subsystem_x, measure_subsystem_z

AnySpec = Union[InstanceSpec, GluedTreesSpec]

DENSE_MAX_DIM = 1 << 11
EIGSH_MAX_DIM = 1 << 14
NORM_DRIFT_TARGET = 1e-9
NORM_DRIFT_LIMIT = 1e-6
LEVEL_TOL = 1e-9


class ScheduleKind(str, enum.Enum):
    LINEAR = "linear"
    LOCAL_ADIABATIC_GROVER = "local_adiabatic_grover"


@dataclass(frozen=True)
class Schedule:
    """Map from physical time ``t in [0, T]`` to the annealing parameter."""

    kind: ScheduleKind
    total_time: float
    delta: float | None = None
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if not self.total_time > 0:
            raise ValueError(f"total time must be > 0, got {self.total_time}")
        if self.kind is ScheduleKind.LOCAL_ADIABATIC_GROVER:
            if self.delta is None or self.delta <= 0 or self.n is None:
                raise ValueError("local Grover schedule needs delta > 0 and n")

    @classmethod
    def linear(cls, total_time: float) -> "Schedule":
        return cls(ScheduleKind.LINEAR, float(total_time))

    def s_at(self, t: float) -> float:
        T = self.total_time
        if t <= 0:
            return 0.0
        if t >= T:
            return 1.0
        if self.kind is ScheduleKind.LINEAR:
            return t / T
        big_n = 2.0 ** self.n
        r = math.sqrt(big_n - 1.0)
        u = math.tan(2.0 * self.delta * r * t / big_n - math.atan(r)) / r
        return min(max(0.5 * (1.0 + u), 0.0), 1.0)

    def ds_dt(self, s: float) -> float:
        if self.kind is ScheduleKind.LINEAR:
            return 1.0 / self.total_time
        return self.delta * algos.grover_gap(self.n, s) ** 2


def grover_local_time(n: int, delta: float) -> float:
    """Closed form of ``int_0^1 ds / (delta * gap(s)**2)`` for Grover."""
    big_n = 2.0 ** n
    r = math.sqrt(big_n - 1.0)
    return big_n * math.atan(r) / (delta * r)


def local_adiabatic_schedule_grover(n: int, delta: float) -> Schedule:
    """Schedule with ``ds/dt = delta * gap(s)**2``."""
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    return Schedule(ScheduleKind.LOCAL_ADIABATIC_GROVER, grover_local_time(n, delta), delta, n)


# -- Hamiltonian access ---------------------------------------------------------


def _glued_parts(spec: GluedTreesSpec):
    d = spec.dim
    e0 = np.zeros((d, d))
    e0[0, 0] = 1.0
    e1 = np.zeros((d, d))
    e1[d - 1, d - 1] = 1.0
    t = oracle_matrix(spec.n)
    # H(s) = h0 + s h1 + s^2 h2
    h0 = -spec.alpha * e0
    h1 = spec.alpha * e0 - spec.alpha * e1 - t
    h2 = t
    return h0, h1, h2


@dataclass(frozen=True, eq=False)
class _Operator:
    spec: AnySpec
    dim: int
    norm_bound: float
    parts: tuple | None = None

    def apply(self, s: float, psi: np.ndarray) -> np.ndarray:
        if self.parts is not None:
            h0, h1, h2 = self.parts
            return (h0 + s * (h1 + s * h2)) @ psi
        return algos.hamiltonian_apply(self.spec, s, psi)

    def dense(self, s: float) -> np.ndarray:
        if isinstance(self.spec, GluedTreesSpec):
            return column_hamiltonian(self.spec, s)
        return algos.hamiltonian_dense(self.spec, s)


def _operator(spec: AnySpec) -> _Operator:
    if isinstance(spec, GluedTreesSpec):
        parts = _glued_parts(spec)
        # Gershgorin bound over s in [0, 1]
        bound = spec.alpha + 0.25 * (2.0 + math.sqrt(2.0))
        return _Operator(spec, spec.dim, bound, parts)
    if isinstance(spec, Simon):
        bound = float(spec.n - 1)
    elif isinstance(spec, (Grover, DJ, BV)):
        bound = 1.0
    else:
        raise TypeError(f"unsupported spec {spec!r}")
    return _Operator(spec, 1 << spec.num_qubits, bound)


def initial_vector(spec: AnySpec) -> np.ndarray:
    if isinstance(spec, GluedTreesSpec):
        v = np.zeros(spec.dim, dtype=np.complex128)
        v[0] = 1.0
        return v
    return algos.initial_state(spec).amplitudes.copy()


# -- instantaneous eigenstates ----------------------------------------------------


def instantaneous_eigenstates(spec: AnySpec, s: float, k: int = 2):
    """Lowest ``k`` eigenpairs of ``H(s)``, energies ascending.

    With dense diagonalization a degenerate level cut by ``k`` is completed,
    so each returned level comes with a full orthonormal basis.  Larger
    registers (up to 2**14 amplitudes) go through Lanczos without that
    completion.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    op = _operator(spec)
    if op.dim > EIGSH_MAX_DIM:
        raise CapabilityError(
            f"dimension {op.dim} exceeds the eigensolver limit {EIGSH_MAX_DIM}"
        )
    if op.dim <= DENSE_MAX_DIM:
        w, v = np.linalg.eigh(op.dense(s))
        k = min(k, w.size)
        while k < w.size and w[k] - w[k - 1] < LEVEL_TOL:
            k += 1
        return [(float(w[i]), v[:, i]) for i in range(k)]
    lin = LinearOperator(
        (op.dim, op.dim), matvec=lambda x: op.apply(s, x), dtype=np.complex128
    )
    w, v = eigsh(lin, k=k, which="SA")
    order = np.argsort(w)
    return [(float(w[i]), v[:, i]) for i in order]


def _levels(spec: AnySpec, s: float):
    """Orthonormal bases of the lowest two energy levels (clusters)."""
    op = _operator(spec)
    if op.dim > DENSE_MAX_DIM:
        raise CapabilityError(
            f"overlap tracking needs dense diagonalization; dimension {op.dim} "
            f"exceeds {DENSE_MAX_DIM}"
        )
    w, v = np.linalg.eigh(op.dense(s))
    lvl = np.concatenate([[0], np.cumsum(np.diff(w) > LEVEL_TOL)])
    return w, v[:, lvl == 0], v[:, lvl == 1]


# -- integrator ---------------------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    t: float
    s: float
    ground_overlap: float
    first_excited_overlap: float
    energy_expectation: float


@dataclass(frozen=True)
class EvolutionTrace:
    rows: tuple[TraceRow, ...] = field(default_factory=tuple)
    norm_drift: float = 0.0
    dt: float = 0.0
    steps: int = 0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def default_dt(spec: AnySpec, schedule: Schedule) -> float:
    op = _operator(spec)
    z_norm = (72.0 * NORM_DRIFT_TARGET / (schedule.total_time * op.norm_bound)) ** 0.2
    return min(0.1, z_norm) / op.norm_bound


def _rk4_step(op: _Operator, schedule: Schedule, t: float, dt: float, psi):
    s1 = schedule.s_at(t)
    s2 = schedule.s_at(t + 0.5 * dt)
    s3 = schedule.s_at(t + dt)
    k1 = -1j * op.apply(s1, psi)
    k2 = -1j * op.apply(s2, psi + 0.5 * dt * k1)
    k3 = -1j * op.apply(s2, psi + 0.5 * dt * k2)
    k4 = -1j * op.apply(s3, psi + dt * k3)
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _trace_row(op: _Operator, t: float, s: float, psi: np.ndarray) -> TraceRow:
    _, g, e = _levels(op.spec, s)
    og = float(np.sum(np.abs(g.conj().T @ psi) ** 2))
    oe = float(np.sum(np.abs(e.conj().T @ psi) ** 2)) if e.size else 0.0
    energy = float(np.vdot(psi, op.apply(s, psi)).real)
    return TraceRow(t, s, og, oe, energy)


def evolve(
    spec: AnySpec,
    schedule: Schedule,
    dt: float | None = None,
    record: Sequence[float] | int = 0,
    initial: np.ndarray | None = None,
):
    """Integrate from ``t = 0`` to ``T``.

    ``record`` is either a count of evenly spaced trace points (including
    both ends) or explicit times in ``[0, T]``.  Returns ``(final, trace)``
    where ``final`` is a PureState, or for the glued-trees column model the
    complex column amplitude vector.
    """
    op = _operator(spec)
    if dt is None:
        dt = default_dt(spec, schedule)
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if dt * op.norm_bound > 0.1 + 1e-12:
        raise StepSizeError(
            f"dt={dt} violates dt*|H| <= 0.1 (|H| <= {op.norm_bound})",
            suggested_dt=0.1 / op.norm_bound,
        )
    T = schedule.total_time
    steps = max(1, math.ceil(T / dt - 1e-9))
    h = T / steps
    if isinstance(record, int):
        rec_times = list(np.linspace(0.0, T, record)) if record > 0 else []
    else:
        rec_times = sorted(float(x) for x in record)
    rec_steps = sorted({min(steps, max(0, round(x / h))) for x in rec_times})

    psi = initial_vector(spec) if initial is None else np.array(initial, dtype=np.complex128)
    rows = []
    ri = 0
    for k in range(steps + 1):
        while ri < len(rec_steps) and rec_steps[ri] == k:
            rows.append(_trace_row(op, k * h, schedule.s_at(k * h), psi))
            ri += 1
        if k < steps:
            psi = _rk4_step(op, schedule, k * h, h, psi)
    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if drift > NORM_DRIFT_LIMIT:
        z = h * op.norm_bound
        raise StepSizeError(
            f"norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT:g} with dt={h:.4g}",
            suggested_dt=0.5 * h * min(1.0, (NORM_DRIFT_LIMIT / drift) ** 0.2)
            if z > 0 else h,
        )
    trace = EvolutionTrace(tuple(rows), drift, h, steps)
    if isinstance(spec, GluedTreesSpec):
        return psi, trace
    return PureState(spec.num_qubits, psi / np.linalg.norm(psi)), trace


@functools.lru_cache(maxsize=32)
def _final_state(spec, schedule: Schedule, dt: float | None) -> PureState:
    return evolve(spec, schedule, dt)[0]


# -- end-to-end runs ------------------------------------------------------------


@dataclass(frozen=True)
class BVRunStats:
    n: int
    a: int
    runs: int
    minus_count: int
    recovered_count: int
    minus_probability: float  # exact probability of ancilla outcome -1

    @property
    def minus_frequency(self) -> float:
        return self.minus_count / self.runs

    @property
    def conditional_recovery(self) -> float:
        return self.recovered_count / self.minus_count if self.minus_count else math.nan


def run_bv_end_to_end(n: int, a: int, schedule: Schedule, seeds: Sequence[int], dt=None) -> BVRunStats:
    spec = BV(n, a)
    final = _final_state(spec, schedule, dt)
    minus = recovered = 0
    p_minus = None
    for seed in seeds:
        rng = np.random.default_rng(seed)
        anc = measure_pauli_x(final, n + 1, rng)
        if anc.value == 1:
            p_minus = 1.0 - anc.probability
            continue
        p_minus = anc.probability
        minus += 1
        read = measure_subsystem_x(anc.post_state, range(1, n + 1), rng)
        recovered += int(read.value == a)
    if p_minus is None:
        p_minus = math.nan
    return BVRunStats(n, a, len(seeds), minus, recovered, p_minus)


@dataclass(frozen=True)
class SimonRunStats:
    n: int
    a: int
    runs_to_recovery: tuple[int, ...]  # 0 where recovery never happened
    samples: tuple[tuple[int, ...], ...]
    recovered: tuple[int | None, ...]

    @property
    def median_runs(self) -> float:
        return float(np.median(self.runs_to_recovery))

    @property
    def success_rate(self) -> float:
        return float(np.mean([r == self.a for r in self.recovered]))

    def all_orthogonal(self) -> bool:
        return all(
            algos.parity(x & self.a) == 0 for seq in self.samples for x in seq
        )


def run_simon_end_to_end(
    n: int, a: int, schedule: Schedule, seeds: Sequence[int], dt=None, max_runs: int = 200
) -> SimonRunStats:
    spec = Simon(n, a)
    final = _final_state(spec, schedule, dt)
    reg1 = list(range(1, n + 1))
    reg2 = list(range(n + 1, 2 * n))
    counts, samples, found = [], [], []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        xs: list[int] = []
        got = None
        for run in range(1, max_runs + 1):
            post = measure_subsystem_z(final, reg2, rng).post_state
            xs.append(measure_subsystem_x(post, reg1, rng).value)
            try:
                got = algos.simon_recover(xs, n)
            except algos.OracleViolation:
                got = None
                break
            if got is not None:
                break
        counts.append(len(xs) if got is not None else 0)
        samples.append(tuple(xs))
        found.append(got)
    return SimonRunStats(n, a, tuple(counts), tuple(samples), tuple(found))


def glued_linear_schedule(spec: GluedTreesSpec, factor: float) -> Schedule:
    """Constant-rate schedule with ``T = n**6 / factor``."""
    if not factor > 0:
        raise ValueError("factor must be > 0")
    return Schedule.linear(spec.n ** 6 / factor)
