from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macrosup.qstate import (
    MAX_QUBITS,
    PauliAxis,
    PureState,
    apply_pauli,
    basis_state,
    bit,
    inner_product,
    measure_pauli_x,
    measure_subsystem_x,
    measure_subsystem_z,
    pauli_correlation,
    pauli_expectation,
    product_state,
    uniform_superposition,
)

X, Y, Z = PauliAxis.X, PauliAxis.Y, PauliAxis.Z

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)
PAULI = {X: SX, Y: SY, Z: SZ}


def kron_pauli(n_q, l, alpha):
    """Dense sigma_alpha(l) via Kronecker products (oracle only)."""
    out = np.eye(1)
    for site in range(1, n_q + 1):
        out = np.kron(out, PAULI[alpha] if site == l else np.eye(2))
    return out


def random_state(rng, n_q):
    v = rng.normal(size=1 << n_q) + 1j * rng.normal(size=1 << n_q)
    return PureState.from_amplitudes(v)


def ghz_x(n_q):
    plus = np.full(1 << n_q, 1.0)
    minus = np.array([(-1.0) ** bin(w).count("1") for w in range(1 << n_q)])
    return PureState.from_amplitudes(plus + minus)


# -- construction -----------------------------------------------------------------


def test_basis_state_ordering():
    assert np.allclose(basis_state(2, 0b10).amplitudes, [0, 0, 1, 0])
    assert np.allclose(basis_state(1, 0).amplitudes, [1, 0])
    s = basis_state(3, 5)
    assert inner_product(s, s) == pytest.approx(1.0)


def test_site_one_is_most_significant_bit():
    # |w> with w = 0b100 has site 1 in |1>
    s = basis_state(3, 0b100)
    assert pauli_expectation(s, 1, Z) == -1.0
    assert pauli_expectation(s, 2, Z) == 1.0
    assert bit(0b100, 1, 3) == 1 and bit(0b100, 3, 3) == 0


def test_basis_state_out_of_range():
    with pytest.raises(ValueError):
        basis_state(2, 4)
    with pytest.raises(ValueError):
        basis_state(2, -1)


def test_uniform_superposition():
    assert np.allclose(uniform_superposition(1).amplitudes, [2 ** -0.5] * 2)
    assert np.allclose(uniform_superposition(2).amplitudes, [0.5] * 4)
    s = uniform_superposition(5)
    for l in range(1, 6):
        assert pauli_expectation(s, l, X) == pytest.approx(1.0, abs=1e-12)
    plus = np.array([1.0, 1.0])
    assert abs(inner_product(s, product_state([plus] * 5))) == pytest.approx(1.0)


def test_state_validation():
    with pytest.raises(ValueError):
        PureState(2, np.ones(3))
    with pytest.raises(ValueError):
        PureState(1, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        PureState(MAX_QUBITS + 1, np.zeros(2))
    with pytest.raises(ValueError):
        PureState.from_amplitudes(np.zeros(4))
    s = basis_state(2, 1)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1.0


# -- Pauli algebra -------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [X, Y, Z])
def test_apply_pauli_matches_kronecker_oracle(alpha):
    rng = np.random.default_rng(3)
    s = random_state(rng, 4)
    for l in range(1, 5):
        expect = kron_pauli(4, l, alpha) @ s.amplitudes
        assert np.allclose(apply_pauli(s, l, alpha).amplitudes, expect, atol=1e-14)


def test_expectations_simple():
    assert pauli_expectation(basis_state(1, 0), 1, Z) == 1.0
    assert pauli_expectation(uniform_superposition(1), 1, Z) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        pauli_expectation(basis_state(2, 0), 3, Z)


def test_ghz_x_expectations_and_correlations():
    g = ghz_x(4)
    for l in range(1, 5):
        for a in (X, Y, Z):
            assert pauli_expectation(g, l, a) == pytest.approx(0.0, abs=1e-12)
    assert pauli_correlation(g, 1, X, 3, X) == pytest.approx(1.0)
    assert pauli_correlation(g, 1, Z, 3, Z) == pytest.approx(0.0, abs=1e-12)


def test_same_site_correlation_algebra():
    # sigma_a sigma_b = delta_ab + i eps_abc sigma_c on one site
    s = random_state(np.random.default_rng(5), 3)
    for l in (1, 2, 3):
        ez = pauli_expectation(s, l, Z)
        assert pauli_correlation(s, l, X, l, Y) == pytest.approx(1j * ez, abs=1e-12)
        for a in (X, Y, Z):
            assert pauli_correlation(s, l, a, l, a) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_q=st.integers(1, 5), data=st.data())
def test_correlation_hermitian_symmetry(seed, n_q, data):
    s = random_state(np.random.default_rng(seed), n_q)
    l = data.draw(st.integers(1, n_q))
    l2 = data.draw(st.integers(1, n_q))
    a = data.draw(st.sampled_from([X, Y, Z]))
    b = data.draw(st.sampled_from([X, Y, Z]))
    c1 = pauli_correlation(s, l, a, l2, b)
    c2 = pauli_correlation(s, l2, b, l, a)
    assert abs(c1 - np.conj(c2)) <= 1e-12
    assert abs(pauli_correlation(s, l, a, l, a) - 1.0) <= 1e-12
    assert -1 - 1e-12 <= pauli_expectation(s, l, a) <= 1 + 1e-12


def test_inner_product():
    n = 4
    phi = uniform_superposition(n)
    assert inner_product(phi, basis_state(n, 9)) == pytest.approx(1 / math.sqrt(16))
    assert inner_product(basis_state(1, 0), basis_state(1, 1)) == 0
    with pytest.raises(ValueError):
        inner_product(basis_state(1, 0), basis_state(2, 0))


# -- measurements -------------------------------------------------------------------


def test_measure_x_deterministic_on_plus():
    s = product_state([[1, 1], [1, 0], [0, 1]])
    for seed in range(20):
        out = measure_pauli_x(s, 1, seed)
        assert out.value == 1 and out.probability == pytest.approx(1.0)


def test_measure_x_on_zero_is_fair():
    s = basis_state(1, 0)
    out = measure_pauli_x(s, 1, 0)
    assert out.probability == pytest.approx(0.5)
    assert abs(pauli_expectation(out.post_state, 1, X) - out.value) < 1e-12


def test_measure_subsystem_z_on_basis_state():
    s = basis_state(5, 0b10110)
    out = measure_subsystem_z(s, [2, 4, 5], 0)
    assert out.value == 0b010
    assert out.probability == pytest.approx(1.0)
    out = measure_subsystem_z(s, [4, 1], 0)  # first listed site is most significant
    assert out.value == 0b11


def test_measure_subsystem_duplicate_sites():
    with pytest.raises(ValueError):
        measure_subsystem_z(basis_state(2, 0), [1, 1], 0)


def test_measure_subsystem_x_reads_signs():
    # |+>|->|-> reads 0b011 in the x basis (bit 1 = outcome -1)
    s = product_state([[1, 1], [1, -1], [1, -1]])
    out = measure_subsystem_x(s, [1, 2, 3], 7)
    assert out.value == 0b011 and out.probability == pytest.approx(1.0)


@pytest.mark.parametrize("sampler", ["z", "x"])
def test_born_rule_frequencies(sampler):
    rng = np.random.default_rng(11)
    s = random_state(np.random.default_rng(2), 3)
    trials = 10_000
    if sampler == "z":
        p = float(np.sum(np.abs(s.tensor()[1]) ** 2))  # site 1 reads 1
        hits = sum(measure_subsystem_z(s, [1], rng).value for _ in range(trials))
    else:
        p = 0.5 * (1 - pauli_expectation(s, 2, X))
        hits = sum(measure_pauli_x(s, 2, rng).value == -1 for _ in range(trials))
    sigma = math.sqrt(p * (1 - p) / trials)
    assert abs(hits / trials - p) <= 5 * sigma


def test_measurement_outcome_probability_and_post_state():
    s = random_state(np.random.default_rng(8), 3)
    out = measure_subsystem_z(s, [1, 3], 4)
    amps = s.tensor()
    b1, b3 = out.value >> 1, out.value & 1
    p = float(np.sum(np.abs(amps[b1, :, b3]) ** 2))
    assert out.probability == pytest.approx(p, abs=1e-12)
    assert out.post_state.norm() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.abs(out.post_state.tensor()[b1, :, b3]) ** 2,
                       np.abs(amps[b1, :, b3]) ** 2 / p)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_q=st.integers(1, 6))
def test_operations_preserve_norm(seed, n_q):
    rng = np.random.default_rng(seed)
    s = random_state(rng, n_q)
    l = int(rng.integers(1, n_q + 1))
    for out in (
        apply_pauli(s, l, Y),
        measure_pauli_x(s, l, rng).post_state,
        measure_subsystem_z(s, [l], rng).post_state,
        measure_subsystem_x(s, [l], rng).post_state,
    ):
        assert abs(out.norm() - 1.0) <= 1e-12
