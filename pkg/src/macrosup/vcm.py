"""Variance-covariance matrix of local Pauli operators and scaling fits.

For a pure state on ``n`` qubits the VCM is the ``3n x 3n`` Hermitian matrix

    V[(l, a), (l', a')] = <sigma_a(l) sigma_a'(l')> - <sigma_a(l)><sigma_a'(l')>

with row index ``3 * (l - 1) + (a - 1)``.  Its largest eigenvalue grows
linearly in ``n`` exactly when some additive observable has a fluctuation of
order ``n**2``; the top eigenvector gives that observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericError
from .qstate import AXES, PauliAxis, PureState, apply_pauli_tensor

DEGENERACY_GAP = 1e-8


@dataclass(frozen=True, eq=False)
class Vcm:
    n_sites: int
    matrix: np.ndarray

    def block(self, l: int, l2: int) -> np.ndarray:
        """3x3 block between sites ``l`` and ``l2`` (1-based)."""
        i, j = 3 * (l - 1), 3 * (l2 - 1)
        return self.matrix[i:i + 3, j:j + 3]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True, eq=False)
class AdditiveObservable:
    """``A = sum_l sum_a coeffs[l-1, a-1] * sigma_a(l)``.

    ``top_gap`` is set when the observable came from a VCM eigenvector and
    records the distance from e_max to the next eigenvalue.
    """

    coeffs: np.ndarray
    top_gap: float | None = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 2 or c.shape[1] != 3:
            raise ValueError(f"coeffs must have shape (n_sites, 3), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_sites(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degenerate(self) -> bool:
        return self.top_gap is not None and self.top_gap < DEGENERACY_GAP

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "AdditiveObservable":
        return replace(self, coeffs=self.coeffs / self.norm())

    def vector(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    @classmethod
    def collective(cls, n_sites: int, axis: PauliAxis, weights=None):
        """``sum_l weights[l] sigma_axis(l)``; all-ones weights by default."""
        c = np.zeros((n_sites, 3), dtype=np.complex128)
        c[:, int(axis) - 1] = 1.0 if weights is None else np.asarray(weights)
        return cls(c)


def _pauli_images(state: PureState) -> np.ndarray:
    psi = state.tensor()
    rows = [
        apply_pauli_tensor(psi, l, alpha).reshape(-1)
        for l in range(state.num_qubits)
        for alpha in AXES
    ]
    return np.array(rows)


def build_vcm(state: PureState) -> Vcm:
    imgs = _pauli_images(state)  # row (l, a) holds sigma_a(l)|psi>
    gram = imgs.conj() @ imgs.T
    means = (imgs @ state.amplitudes.conj()).real
    v = gram - np.outer(means, means)
    v = 0.5 * (v + v.conj().T)
    return Vcm(state.num_qubits, v)


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    mags = np.abs(vec)
    k = int(np.flatnonzero(mags >= mags.max() - 1e-9)[0])
    return vec * (np.conj(vec[k]) / mags[k])


def max_eigenpair(v: Vcm) -> tuple[float, AdditiveObservable]:
    try:
        w, u = np.linalg.eigh(v.matrix)
    except np.linalg.LinAlgError as exc:
        finite = bool(np.all(np.isfinite(v.matrix)))
        raise NumericError(
            f"Hermitian eigensolve failed for {v.matrix.shape} VCM "
            f"(finite entries: {finite}): {exc}"
        ) from exc
    top_gap = float(w[-1] - w[-2]) if w.size > 1 else math.inf
    vec = _fix_phase(u[:, -1])
    return float(w[-1]), AdditiveObservable(vec.reshape(v.n_sites, 3), top_gap)


def apply_observable(state: PureState, A: AdditiveObservable) -> np.ndarray:
    if A.n_sites != state.num_qubits:
        raise ValueError(
            f"observable acts on {A.n_sites} sites, state has {state.num_qubits}"
        )
    psi = state.tensor()
    out = np.zeros_like(psi)
    for l in range(A.n_sites):
        for alpha in AXES:
            c = A.coeffs[l, int(alpha) - 1]
            if c != 0:
                out += c * apply_pauli_tensor(psi, l, alpha)
    return out.reshape(-1)


def observable_mean(state: PureState, A: AdditiveObservable) -> complex:
    return complex(np.vdot(state.amplitudes, apply_observable(state, A)))


def observable_variance(state: PureState, A: AdditiveObservable) -> float:
    """``<dA^dag dA>`` evaluated on the statevector (no VCM involved)."""
    a_psi = apply_observable(state, A)
    mean = np.vdot(state.amplitudes, a_psi)
    delta = a_psi - mean * state.amplitudes
    return float(np.vdot(delta, delta).real)


def mean_distance(
    state1: PureState, state2: PureState, A: AdditiveObservable
) -> float:
    if state1.num_qubits != state2.num_qubits:
        raise ValueError("states have different sizes")
    return abs(observable_mean(state1, A) - observable_mean(state2, A))


# -- scaling fits -----------------------------------------------------------


@dataclass(frozen=True)
class ScalingRow:
    n: int
    label: str
    value: float


@dataclass(frozen=True)
class ScalingSeries:
    rows: tuple[ScalingRow, ...] = field(default_factory=tuple)
    fit_exponent: float | None = None
    fit_stderr: float | None = None

    @classmethod
    def from_rows(cls, rows: Iterable) -> "ScalingSeries":
        return cls(tuple(r if isinstance(r, ScalingRow) else ScalingRow(*r)
                         for r in rows))

    def distinct_n(self) -> list[int]:
        return sorted({r.n for r in self.rows})

    def medians(self) -> dict[int, float]:
        out = {}
        for n in self.distinct_n():
            out[n] = float(np.median([r.value for r in self.rows if r.n == n]))
        return out

    def exceptional_fraction(self, epsilon: float = 0.5) -> dict[int, float]:
        """Per n, fraction of instances further than ``epsilon * median``
        from the median."""
        out = {}
        for n, med in self.medians().items():
            vals = np.array([r.value for r in self.rows if r.n == n])
            out[n] = float(np.mean(np.abs(vals - med) > epsilon * med))
        return out

    def with_fit(self) -> "ScalingSeries":
        p_e, err = fit_p_e(self)
        return replace(self, fit_exponent=p_e, fit_stderr=err)


def fit_loglog(ns: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """OLS slope of ``log(values)`` on ``log(ns)`` and its standard error."""
    x = np.log(np.asarray(ns, dtype=float))
    vals = np.asarray(values, dtype=float)
    if np.any(vals <= 0):
        raise ValueError("log-log fit needs strictly positive values")
    y = np.log(vals)
    if x.size < 3 or len(np.unique(x)) < 3:
        raise ValueError("log-log fit needs at least 3 distinct n values")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("degenerate fit: no spread in log n")
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = x.size - 2
    stderr = math.sqrt(max(float(resid @ resid), 0.0) / dof / sxx)
    return slope, stderr


def fit_exponent(series: ScalingSeries) -> tuple[float, float]:
    """Slope of log(per-n median) against log n."""
    if any(r.value <= 0 for r in series.rows):
        raise ValueError("scaling series contains non-positive values")
    if len(series.distinct_n()) < 3:
        raise ValueError("need at least 3 distinct n values to fit")
    med = series.medians()
    return fit_loglog(list(med), list(med.values()))


def fit_p_e(series: ScalingSeries) -> tuple[float, float]:
    """Index p_e from ``e_max ~ n**(p_e - 1)``."""
    slope, err = fit_exponent(series)
    return slope + 1.0, err
