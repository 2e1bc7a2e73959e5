"""Adiabatic Grover, Deutsch-Jozsa, Bernstein-Vazirani and Simon instances.

Each family is ``H(s) = s * H_p + (1 - s) * H_d``.  Hamiltonians are applied
matrix-free to amplitude vectors; the ground states used by the index-p
analysis are built in closed form (Grover, DJ) or block by block (BV, Simon,
whose ``H(s)`` is block diagonal in the first register).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .qstate import PauliAxis, PureState, bit, bits_of, uniform_superposition
from .vcm import AdditiveObservable

SQRT2 = math.sqrt(2.0)


def popcount(x: int) -> int:
    return bin(x).count("1")


def parity(x: int) -> int:
    return popcount(x) & 1


def _check_s(s: float) -> None:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"annealing parameter s={s} outside [0, 1]")


# -- instances --------------------------------------------------------------


@dataclass(frozen=True)
class Grover:
    n: int
    w_star: int
    family = "grover"

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.w_star < (1 << self.n):
            raise ValueError(f"bad Grover instance n={self.n}, w*={self.w_star}")

    @property
    def num_qubits(self) -> int:
        return self.n

    @property
    def label(self) -> str:
        return str(self.w_star)


@dataclass(frozen=True)
class DJ:
    n: int
    mu_f: int
    family = "dj"

    def __post_init__(self):
        if self.n < 1 or self.mu_f not in (0, 1):
            raise ValueError(f"bad Deutsch-Jozsa instance n={self.n}, mu_f={self.mu_f}")

    @property
    def num_qubits(self) -> int:
        return self.n

    @property
    def label(self) -> str:
        return str(self.mu_f)


@dataclass(frozen=True)
class BV:
    n: int
    a: int
    family = "bv"

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.a < (1 << self.n):
            raise ValueError(f"bad Bernstein-Vazirani instance n={self.n}, a={self.a}")

    @property
    def num_qubits(self) -> int:
        return self.n + 1

    @property
    def label(self) -> str:
        return str(self.a)


@dataclass(frozen=True)
class Simon:
    n: int
    a: int
    family = "simon"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Simon instances need n >= 2")
        if not 0 < self.a < (1 << self.n):
            raise ValueError(f"Simon hidden string must be nonzero and < 2^n, got {self.a}")

    @property
    def num_qubits(self) -> int:
        return 2 * self.n - 1

    @property
    def label(self) -> str:
        return str(self.a)


InstanceSpec = Union[Grover, DJ, BV, Simon]


# -- Hamiltonians -----------------------------------------------------------


def _bv_f(n: int, a: int) -> np.ndarray:
    w = np.arange(1 << n, dtype=np.int64)
    return np.bitwise_count(w & a).astype(np.int64) & 1


def hamiltonian_apply(spec: InstanceSpec, s: float, state) -> np.ndarray:
    """``H(s)|psi>`` for ``state`` a PureState or raw amplitude vector."""
    _check_s(s)
    psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
    psi = psi.astype(np.complex128, copy=False)
    dim = 1 << spec.num_qubits
    if psi.shape != (dim,):
        raise ValueError(
            f"state of length {psi.size} does not match {spec.num_qubits} qubits"
        )
    if isinstance(spec, Grover):
        out = psi.copy()
        out[spec.w_star] -= s * psi[spec.w_star]
        out -= (1.0 - s) * psi.sum() / dim
        return out
    if isinstance(spec, DJ):
        beta = dj_beta(spec.n, spec.mu_f).amplitudes
        return (
            psi
            - s * beta * np.vdot(beta, psi)
            - (1.0 - s) * psi.sum() / dim
        )
    if isinstance(spec, BV):
        p = psi.reshape(1 << spec.n, 2)
        sign = 1.0 - 2.0 * _bv_f(spec.n, spec.a)  # (-1)^f(w)
        out = np.empty_like(p)
        # problem: (1 - (-1)^f sz)/2 ; driver: (1 - sx)/2 on the ancilla
        hp0 = 0.5 * (1.0 - sign)
        hp1 = 0.5 * (1.0 + sign)
        out[:, 0] = s * hp0 * p[:, 0] + 0.5 * (1.0 - s) * (p[:, 0] - p[:, 1])
        out[:, 1] = s * hp1 * p[:, 1] + 0.5 * (1.0 - s) * (p[:, 1] - p[:, 0])
        return out.reshape(-1)
    if isinstance(spec, Simon):
        n2 = spec.n - 1
        g = simon_oracle(spec.n, spec.a).table
        p = psi.reshape((1 << spec.n,) + (2,) * n2)
        out = np.zeros_like(p)
        for k in range(n2):
            gk = (g >> (n2 - 1 - k)) & 1
            sign = (1.0 - 2.0 * gk).reshape((-1,) + (1,) * (n2 - 1))
            ax = k + 1
            lo = [slice(None)] * p.ndim
            hi = [slice(None)] * p.ndim
            lo[ax], hi[ax] = 0, 1
            lo, hi = tuple(lo), tuple(hi)
            # (1 - (-1)^g sz)/2 is diag((1 - sign)/2, (1 + sign)/2)
            out[lo] += s * 0.5 * (1.0 - sign) * p[lo]
            out[hi] += s * 0.5 * (1.0 + sign) * p[hi]
            out[lo] += 0.5 * (1.0 - s) * (p[lo] - p[hi])
            out[hi] += 0.5 * (1.0 - s) * (p[hi] - p[lo])
        return out.reshape(-1)
    raise TypeError(f"unsupported instance {spec!r}")


def hamiltonian_dense(spec: InstanceSpec, s: float) -> np.ndarray:
    """Dense matrix of ``H(s)``, assembled column by column (test oracle)."""
    dim = 1 << spec.num_qubits
    eye = np.eye(dim, dtype=np.complex128)
    cols = [hamiltonian_apply(spec, s, eye[:, k]) for k in range(dim)]
    h = np.array(cols).T
    return 0.5 * (h + h.conj().T)


def initial_state(spec: InstanceSpec) -> PureState:
    """Ground state of the driver used to start the anneal (all ``|+>``)."""
    return uniform_superposition(spec.num_qubits)


# -- Grover -----------------------------------------------------------------


@dataclass(frozen=True)
class GroverAnalytic:
    s: float
    theta_s: float
    a_s: float
    b_s: float
    gap: float


def grover_gap(n: int, s: float) -> float:
    big_n = float(1 << n)
    return math.sqrt(1.0 - 4.0 * s * (1.0 - s) * (big_n - 1.0) / big_n)


def _grover_theta(n: int, s: float) -> float:
    big_n = float(1 << n)
    gap = grover_gap(n, s)
    sin_t = 2.0 * (1.0 - s) * math.sqrt(big_n - 1.0) / (gap * big_n)
    # 1 - 2(1-s)(N-1)/N regrouped to avoid cancellation near s = 1/2
    bracket = ((2.0 * s - 1.0) * big_n + 2.0 * (1.0 - s)) / big_n
    cos_t = -bracket / gap
    return math.atan2(sin_t, cos_t)


def grover_analytic(n: int, s: float) -> GroverAnalytic:
    _check_s(s)
    th = _grover_theta(n, s)
    th0 = _grover_theta(n, 0.0)
    a_s = math.sin(th / 2) - math.cos(th / 2) * math.tan(th0 / 2)
    b_s = math.cos(th / 2) / math.cos(th0 / 2)
    return GroverAnalytic(s, th, a_s, b_s, grover_gap(n, s))


def grover_ground_state(n: int, w_star: int, s: float) -> PureState:
    g = grover_analytic(n, s)
    dim = 1 << n
    amps = np.full(dim, g.b_s / math.sqrt(dim), dtype=np.complex128)
    amps[w_star] += g.a_s
    return PureState.from_amplitudes(amps)


def grover_mx_variance_analytic(n: int, s: float) -> float:
    g = grover_analytic(n, s)
    a, b = g.a_s, g.b_s
    rt = math.sqrt(float(1 << n))
    return (
        b * b * (1 - b * b) * n * n
        + a * a * n
        + 2 * a * b * (1 - 2 * b * b) * n * n / rt
        - 4 * a * a * b * b * n * n / (rt * rt)
    )


# -- Deutsch-Jozsa ----------------------------------------------------------


def dj_mu_f(f_values: Sequence[int]) -> int:
    """``mu_f`` from an explicit truth table; rejects non-promise functions."""
    f = np.asarray(f_values, dtype=np.int64)
    big_n = f.size
    if big_n < 2 or big_n & (big_n - 1):
        raise ValueError("truth table length must be a power of two >= 2")
    total = int(np.sum(1 - 2 * f))
    if abs(total) == big_n:
        return 1
    if total == 0:
        return 0
    raise ValueError("function is neither constant nor balanced")


def dj_beta(n: int, mu_f: int) -> PureState:
    """Final state ``[mu|0> + (1-mu)|1>]_1 (x) |+>^(n-1)``; site 1 carries parity."""
    first = np.array([mu_f, 1 - mu_f], dtype=np.complex128)
    rest = np.full(1 << (n - 1), 2.0 ** (-(n - 1) / 2), dtype=np.complex128)
    return PureState(n, np.kron(first, rest))


def _dj_effective(s: float) -> np.ndarray:
    # basis (|beta>, |beta_perp>), with <phi|beta> = <phi|beta_perp> = 1/sqrt2
    return (
        np.eye(2)
        - s * np.array([[1.0, 0.0], [0.0, 0.0]])
        - 0.5 * (1.0 - s) * np.ones((2, 2))
    )


def dj_coefficients(s: float) -> tuple[float, float, float]:
    """``(c_beta, c_perp, gap)`` of the DJ ground state at ``s``."""
    _check_s(s)
    w, v = np.linalg.eigh(_dj_effective(s))
    c = v[:, 0]
    if c.sum() < 0:
        c = -c
    return float(c[0]), float(c[1]), float(w[1] - w[0])


def dj_theta(s: float) -> float:
    c_beta, c_perp, _ = dj_coefficients(s)
    return 2.0 * math.atan2(c_beta, c_perp)


def dj_ground_state(n: int, mu_f: int, s: float) -> PureState:
    c_beta, c_perp, _ = dj_coefficients(s)
    m = np.array([mu_f, 1 - mu_f], dtype=np.complex128)
    m_bar = np.array([1 - mu_f, mu_f], dtype=np.complex128)
    first = c_beta * m + c_perp * m_bar
    rest = np.full(1 << (n - 1), 2.0 ** (-(n - 1) / 2), dtype=np.complex128)
    return PureState.from_amplitudes(np.kron(first, rest))


def dj_gap(n: int, s: float) -> float:
    w = np.linalg.eigvalsh(_dj_effective(s))
    if n == 1:
        return float(w[1] - w[0])
    # eigenvalue 1 on the (N-2)-dim complement of span{beta, phi}
    return float(min(w[1], 1.0) - w[0])


# -- Bernstein-Vazirani and Simon: single-qubit blocks ----------------------


def _qubit_ground(s: float, f: int) -> np.ndarray:
    """Ground vector of s(1 - (-1)^f sz)/2 + (1-s)(1 - sx)/2, sign fixed so
    its overlap with |+> is positive (the branch connected to |+> at s=0)."""
    sign = 1.0 - 2.0 * f
    h = 0.5 * s * (np.eye(2) - sign * np.diag([1.0, -1.0])) + 0.5 * (1.0 - s) * (
        np.eye(2) - np.array([[0.0, 1.0], [1.0, 0.0]])
    )
    _, v = np.linalg.eigh(h)
    g = v[:, 0]
    return g if g.sum() > 0 else -g


def block_gap(s: float) -> float:
    """Gap of one ancilla block; independent of n for both BV and Simon."""
    return math.sqrt(s * s + (1.0 - s) ** 2)


def bv_ground_state(n: int, a: int, s: float) -> PureState:
    """Ground state adiabatically connected to ``|+>^(n+1)``."""
    _check_s(s)
    f = _bv_f(n, a)
    g0, g1 = _qubit_ground(s, 0), _qubit_ground(s, 1)
    amps = np.where(f[:, None] == 0, g0[None, :], g1[None, :]) / math.sqrt(1 << n)
    return PureState.from_amplitudes(amps.reshape(-1))


def bv_state_s1(n: int, a: int) -> PureState:
    big_n = 1 << n
    amps = np.zeros((big_n, 2), dtype=np.complex128)
    amps[np.arange(big_n), _bv_f(n, a)] = 1.0 / math.sqrt(big_n)
    return PureState(n + 1, amps.reshape(-1))


def bv_minus_state(n: int, a: int) -> PureState:
    """``(x)_l (|0> + (-1)^a_l |1>) (x) |->``, the solution read-out state."""
    vecs = [np.array([1.0, (-1.0) ** bit(a, l, n)]) for l in range(1, n + 1)]
    vecs.append(np.array([1.0, -1.0]))
    amps = np.ones(1, dtype=np.complex128)
    for v in vecs:
        amps = np.kron(amps, v / SQRT2)
    return PureState(n + 1, amps)


def bv_emax_formula(n: int, a: int) -> float:
    return 2.0 if a == 0 else 1.0 + popcount(a)


def bv_observable(n: int, a: int) -> AdditiveObservable:
    w = np.append(bits_of(a, n), 1).astype(float)
    return AdditiveObservable.collective(n + 1, PauliAxis.X, w)


@dataclass(frozen=True, eq=False)
class SimonOracle:
    n: int
    a: int
    pivot: int  # site index (1-based, MSB first) of the leading 1 of a
    table: np.ndarray = field(repr=False)

    def __call__(self, w: int) -> int:
        return int(self.table[w])


def simon_oracle(n: int, a: int) -> SimonOracle:
    """Two-to-one ``g`` constant on the cosets ``{w, w ^ a}``.

    ``g(w)`` is ``min(w, w ^ a)`` with the bit at the leading 1 of ``a``
    (always 0 in the smaller coset member) deleted.
    """
    if a == 0:
        raise ValueError("Simon's hidden string must be nonzero")
    if not 0 < a < (1 << n):
        raise ValueError(f"a={a} out of range for n={n}")
    p = a.bit_length() - 1  # integer bit position, = site n - p
    w = np.arange(1 << n, dtype=np.int64)
    r = np.minimum(w, w ^ a)
    low = r & ((1 << p) - 1)
    g = ((r >> (p + 1)) << p) | low
    return SimonOracle(n, a, n - p, g)


def simon_ground_state(n: int, a: int, s: float) -> PureState:
    _check_s(s)
    n2 = n - 1
    g = simon_oracle(n, a).table
    table = np.array([_qubit_ground(s, 0), _qubit_ground(s, 1)])  # [f, y]
    gbits = (g[:, None] >> np.arange(n2 - 1, -1, -1)[None, :]) & 1  # (N, n2)
    y = np.arange(1 << n2)
    ybits = (y[:, None] >> np.arange(n2 - 1, -1, -1)[None, :]) & 1  # (2^n2, n2)
    amps = np.prod(table[gbits[:, None, :], ybits[None, :, :]], axis=2)
    amps = amps / math.sqrt(1 << n)
    return PureState.from_amplitudes(amps.reshape(-1))


def simon_state_s1(n: int, a: int) -> PureState:
    g = simon_oracle(n, a).table
    big_n = 1 << n
    amps = np.zeros((big_n, 1 << (n - 1)), dtype=np.complex128)
    amps[np.arange(big_n), g] = 1.0 / math.sqrt(big_n)
    return PureState(2 * n - 1, amps.reshape(-1))


def simon_post_measurement_state(n: int, a: int, w_star: int) -> PureState:
    g = simon_oracle(n, a)
    amps = np.zeros((1 << n, 1 << (n - 1)), dtype=np.complex128)
    amps[w_star, g(w_star)] = 1.0 / SQRT2
    amps[w_star ^ a, g(w_star)] = 1.0 / SQRT2
    return PureState(2 * n - 1, amps.reshape(-1))


def simon_emax_formula(n: int, a: int) -> float:
    if a == 0:
        raise ValueError("a = 0 is not a Simon instance")
    k = popcount(a)
    return 2.0 if k == 1 else float(k)


def simon_observable(n: int, a: int, w_star: int) -> AdditiveObservable:
    wb = bits_of(w_star, n)
    ab = bits_of(a, n)
    weights = np.zeros(2 * n - 1)
    weights[:n] = ((-1.0) ** wb) * ab
    return AdditiveObservable.collective(2 * n - 1, PauliAxis.Z, weights)


class OracleViolation(ValueError):
    """Samples span all of GF(2)^n, so no nonzero hidden string exists."""


def gf2_rank_reduce(rows: Sequence[int], n: int) -> list[int]:
    """Reduced row echelon basis of the GF(2) span of ``rows`` (bitmasks)."""
    basis: list[int] = []
    for r in rows:
        r = int(r)
        if not 0 <= r < (1 << n):
            raise ValueError(f"sample {r} does not fit in {n} bits")
        for b in basis:
            if r & (1 << (b.bit_length() - 1)):
                r ^= b
        if r:
            lead = 1 << (r.bit_length() - 1)
            basis = [b ^ r if b & lead else b for b in basis]
            basis.append(r)
    basis.sort(reverse=True)
    return basis


def simon_recover(samples: Sequence[int], n: int) -> int | None:
    """Hidden string orthogonal to all samples, or None if underdetermined."""
    basis = gf2_rank_reduce(samples, n)
    if len(basis) == n:
        raise OracleViolation("samples have full rank; no nonzero a is orthogonal")
    if len(basis) < n - 1:
        return None
    pivots = {b.bit_length() - 1: b for b in basis}
    free = next(p for p in range(n) if p not in pivots)
    a = 1 << free
    for p, b in pivots.items():
        if b & (1 << free):
            a |= 1 << p
    return a


# -- reconstructed observables ----------------------------------------------


def predicted_observable(spec: InstanceSpec, w_star: int | None = None):
    if isinstance(spec, BV):
        return bv_observable(spec.n, spec.a)
    if isinstance(spec, Simon):
        if w_star is None:
            raise ValueError("Simon prediction needs the measured w*")
        return simon_observable(spec.n, spec.a, w_star)
    if isinstance(spec, Grover):
        return AdditiveObservable.collective(spec.n, PauliAxis.X)
    raise ValueError(f"no predicted observable for {type(spec).__name__}")


def reconstructed_observable_check(
    spec: InstanceSpec,
    u_max: AdditiveObservable,
    w_star: int | None = None,
    tol: float = 1e-6,
) -> bool | None:
    """Compare a VCM top eigenvector with the expected fluctuating observable.

    Returns None when the top eigenspace is degenerate.  For Grover only the
    structure is predicted: equal nonzero x-axis weight on every site, with
    the x axes carrying at least as much weight as any other axis.
    """
    if u_max.degenerate:
        return None
    u = u_max.normalized().coeffs
    if isinstance(spec, Grover):
        x = np.abs(u[:, 0])
        axis_weight = np.sum(np.abs(u) ** 2, axis=0)
        return bool(
            np.ptp(x) <= tol
            and x.min() > tol
            and axis_weight[0] >= axis_weight.max() - tol
        )
    pred = predicted_observable(spec, w_star).normalized().coeffs
    overlap = np.vdot(pred.reshape(-1), u.reshape(-1))
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return bool(np.max(np.abs(u - phase * pred)) <= tol)


def ground_state(spec: InstanceSpec, s: float) -> PureState:
    """Closed-form (or block-built) ground state followed by the algorithm."""
    if isinstance(spec, Grover):
        return grover_ground_state(spec.n, spec.w_star, s)
    if isinstance(spec, DJ):
        return dj_ground_state(spec.n, spec.mu_f, s)
    if isinstance(spec, BV):
        return bv_ground_state(spec.n, spec.a, s)
    if isinstance(spec, Simon):
        return simon_ground_state(spec.n, spec.a, s)
    raise TypeError(f"unsupported instance {spec!r}")


def spectral_gap(spec: InstanceSpec, s: float) -> float:
    """Gap above the (possibly degenerate) ground space of ``H(s)``."""
    if isinstance(spec, Grover):
        return grover_gap(spec.n, s)
    if isinstance(spec, DJ):
        return dj_gap(spec.n, s)
    if isinstance(spec, (BV, Simon)):
        return block_gap(s)
    raise TypeError(f"unsupported instance {spec!r}")


def ground_degeneracy(spec: InstanceSpec) -> int:
    return 1 << spec.n if isinstance(spec, (BV, Simon)) else 1
