"""Dense pure-state engine for small qubit registers.

Site convention: sites are numbered ``1..n_q`` and site 1 is the most
significant bit of the basis index, so ``|w> = |w_1>|w_2>...|w_n>`` with
``w = sum_l w_l 2**(n_q - l)``.  Internally the amplitude vector is viewed as
an ``(2,) * n_q`` tensor whose axis ``l - 1`` belongs to site ``l``; every
Pauli action is an index permutation / sign on that view, never a matrix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-12


class PauliAxis(enum.IntEnum):
    X = 1
    Y = 2
    Z = 3


AXES = (PauliAxis.X, PauliAxis.Y, PauliAxis.Z)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over the ``n_q``-qubit computational basis."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n_q = int(self.num_qubits)
        if n_q < 1:
            raise ValueError(f"num_qubits must be >= 1, got {n_q}")
        if n_q > MAX_QUBITS:
            raise ValueError(
                f"{n_q} qubits exceeds the dense-storage cap of {MAX_QUBITS}"
            )
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 1 << n_q:
            raise ValueError(
                f"amplitude vector has length {amps.size}, expected {1 << n_q}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "num_qubits", n_q)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        n_q = int(amps.size).bit_length() - 1
        if amps.size == 0 or (1 << n_q) != amps.size:
            raise ValueError(f"length {amps.size} is not a power of two")
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / nrm
        return cls(n_q, amps)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __repr__(self):
        return f"PureState(num_qubits={self.num_qubits})"


@dataclass(frozen=True)
class MeasurementOutcome:
    value: int
    probability: float
    post_state: PureState


def _check_site(n_q: int, l: int) -> None:
    if not 1 <= l <= n_q:
        raise ValueError(f"site {l} out of range 1..{n_q}")


def basis_state(n_q: int, w: int) -> PureState:
    if not 0 <= w < (1 << n_q):
        raise ValueError(f"basis index {w} out of range for {n_q} qubits")
    amps = np.zeros(1 << n_q, dtype=np.complex128)
    amps[w] = 1.0
    return PureState(n_q, amps)


def uniform_superposition(n_q: int) -> PureState:
    if n_q < 1:
        raise ValueError("n_q must be >= 1")
    dim = 1 << n_q
    return PureState(n_q, np.full(dim, dim ** -0.5, dtype=np.complex128))


def product_state(site_states: Sequence) -> PureState:
    """Tensor product of single-qubit vectors, site 1 first."""
    amps = np.ones(1, dtype=np.complex128)
    for v in site_states:
        v = np.asarray(v, dtype=np.complex128)
        amps = np.kron(amps, v / np.linalg.norm(v))
    return PureState.from_amplitudes(amps)


def bit(w: int, l: int, n_q: int) -> int:
    """Value of site ``l`` (1-based, MSB first) in basis index ``w``."""
    return (w >> (n_q - l)) & 1


def bits_of(w: int, n_q: int) -> np.ndarray:
    return np.array([bit(w, l, n_q) for l in range(1, n_q + 1)], dtype=np.int64)


def apply_pauli_tensor(psi: np.ndarray, axis: int, alpha: PauliAxis) -> np.ndarray:
    """Apply one Pauli to tensor-view ``psi`` along ``axis``; returns a new array."""
    lo = [slice(None)] * psi.ndim
    hi = [slice(None)] * psi.ndim
    lo[axis] = 0
    hi[axis] = 1
    lo, hi = tuple(lo), tuple(hi)
    out = np.empty_like(psi)
    if alpha == PauliAxis.X:
        out[lo] = psi[hi]
        out[hi] = psi[lo]
    elif alpha == PauliAxis.Y:
        out[lo] = -1j * psi[hi]
        out[hi] = 1j * psi[lo]
    elif alpha == PauliAxis.Z:
        out[lo] = psi[lo]
        out[hi] = -psi[hi]
    else:
        raise ValueError(f"unknown Pauli axis {alpha!r}")
    return out


def apply_pauli(state: PureState, l: int, alpha: PauliAxis) -> PureState:
    _check_site(state.num_qubits, l)
    out = apply_pauli_tensor(state.tensor(), l - 1, PauliAxis(alpha))
    return PureState(state.num_qubits, out.reshape(-1))


def pauli_expectation(state: PureState, l: int, alpha: PauliAxis) -> float:
    _check_site(state.num_qubits, l)
    psi = state.tensor()
    phi = apply_pauli_tensor(psi, l - 1, PauliAxis(alpha))
    return float(np.vdot(psi, phi).real)


def pauli_correlation(
    state: PureState, l: int, alpha: PauliAxis, l2: int, alpha2: PauliAxis
) -> complex:
    """``<psi| sigma_alpha(l) sigma_alpha2(l2) |psi>``."""
    _check_site(state.num_qubits, l)
    _check_site(state.num_qubits, l2)
    psi = state.tensor()
    # <psi|A B|psi> = <A psi | B psi> for Hermitian A
    a = apply_pauli_tensor(psi, l - 1, PauliAxis(alpha))
    b = apply_pauli_tensor(psi, l2 - 1, PauliAxis(alpha2))
    return complex(np.vdot(a, b))


def inner_product(a: PureState, b: PureState) -> complex:
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _project(psi: np.ndarray, axis: int, bit_value: int) -> np.ndarray:
    out = np.zeros_like(psi)
    idx = [slice(None)] * psi.ndim
    idx[axis] = bit_value
    idx = tuple(idx)
    out[idx] = psi[idx]
    return out


def measure_pauli_x(state: PureState, l: int, rng=None) -> MeasurementOutcome:
    """Projective sigma_x measurement on site ``l``; value is +1 or -1."""
    _check_site(state.num_qubits, l)
    psi = state.tensor()
    sx = apply_pauli_tensor(psi, l - 1, PauliAxis.X)
    plus = 0.5 * (psi + sx)
    p_plus = min(max(float(np.vdot(plus, plus).real), 0.0), 1.0)
    r = _as_rng(rng).random()
    if r < p_plus:
        value, prob, post = 1, p_plus, plus
    else:
        value, prob, post = -1, 1.0 - p_plus, 0.5 * (psi - sx)
    return MeasurementOutcome(
        value, prob, PureState.from_amplitudes(post.reshape(-1))
    )


def measure_subsystem_z(
    state: PureState, sites: Sequence[int], rng=None
) -> MeasurementOutcome:
    """Computational-basis measurement of ``sites``.

    The outcome value packs the measured bits in the order given, first site
    most significant.
    """
    sites = [int(l) for l in sites]
    if len(set(sites)) != len(sites):
        raise ValueError(f"duplicate sites in {sites}")
    for l in sites:
        _check_site(state.num_qubits, l)
    n_q = state.num_qubits
    psi = state.tensor()
    others = [ax for ax in range(n_q) if ax + 1 not in sites]
    axes = [l - 1 for l in sites]
    moved = np.transpose(psi, axes + others)
    k = len(sites)
    marg = np.sum(np.abs(moved.reshape(1 << k, -1)) ** 2, axis=1)
    marg = marg / marg.sum()
    value = int(_as_rng(rng).choice(1 << k, p=marg))
    mask = np.zeros(1 << k, dtype=bool)
    mask[value] = True
    keep = np.where(mask[:, None], moved.reshape(1 << k, -1), 0.0)
    inv = np.argsort(axes + others)
    post = np.transpose(keep.reshape((2,) * n_q), inv).reshape(-1)
    return MeasurementOutcome(
        value, float(marg[value]), PureState.from_amplitudes(post)
    )


def hadamard_all(psi: np.ndarray, sites: Sequence[int]) -> np.ndarray:
    """Apply H on each listed site of tensor-view ``psi``."""
    out = psi
    for l in sites:
        out = np.moveaxis(out, l - 1, 0)
        out = np.stack([out[0] + out[1], out[0] - out[1]]) / np.sqrt(2.0)
        out = np.moveaxis(out, 0, l - 1)
    return out


def measure_subsystem_x(
    state: PureState, sites: Sequence[int], rng=None
) -> MeasurementOutcome:
    """x-basis measurement of ``sites``; bit 1 in the value means outcome -1."""
    rotated = hadamard_all(state.tensor(), sites).reshape(-1)
    res = measure_subsystem_z(PureState.from_amplitudes(rotated), sites, rng)
    back = hadamard_all(res.post_state.tensor(), sites).reshape(-1)
    return MeasurementOutcome(
        res.value, res.probability, PureState.from_amplitudes(back)
    )
