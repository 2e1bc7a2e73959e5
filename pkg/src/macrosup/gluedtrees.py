"""Glued-trees adiabatic algorithm in the column basis.

The ``2n + 2`` column states ``|col(j)>`` span an invariant subspace of the
annealing Hamiltonian

    H(s) = (1 - s) * alpha * H_ini + s * alpha * H_fin - s * (1 - s) * H_ora

so every production computation here works with ``(2n+2)``-dim real vectors.
Vertex names are random ``2n``-bit strings; the additive observable
``A = sum_l (-1)**w_l(0) sigma_z(l)`` is diagonal with ``A|w> = (2n - 2 d)|w>``
where ``d`` is the Hamming distance of ``w`` to the left root's name, so only
those distances matter for its statistics.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import NumericError

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GluedTreesSpec:
    n: int
    alpha: float = 0.4
    name_seed: int = 0
    family = "glued"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("tree height n must be >= 1")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 1/2), got {self.alpha}")

    @property
    def num_vertices(self) -> int:
        return (1 << (self.n + 2)) - 2

    @property
    def dim(self) -> int:
        return 2 * self.n + 2

    @property
    def name_bits(self) -> int:
        return 2 * self.n

    @property
    def s_c(self) -> float:
        return self.alpha / SQRT2

    @property
    def label(self) -> str:
        return str(self.name_seed)

    def column_sizes(self) -> np.ndarray:
        j = np.arange(self.dim)
        return np.where(j <= self.n, 2.0 ** j, 2.0 ** (2 * self.n + 1 - j))

    def column_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.column_sizes().astype(np.int64))])


def _check_s(s):
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"annealing parameter s={s} outside [0, 1]")


def oracle_matrix(n: int) -> np.ndarray:
    """Column-basis adjacency (scaled by 1/sqrt2): 1 on links, sqrt2 mid-link."""
    d = 2 * n + 2
    off = np.ones(d - 1)
    off[n] = SQRT2
    return np.diag(off, 1) + np.diag(off, -1)


def column_hamiltonian(spec: GluedTreesSpec, s: float) -> np.ndarray:
    _check_s(s)
    d = spec.dim
    h = -s * (1.0 - s) * oracle_matrix(spec.n)
    h[0, 0] -= (1.0 - s) * spec.alpha
    h[d - 1, d - 1] -= s * spec.alpha
    return h


@dataclass(frozen=True)
class SpectrumPoint:
    s: float
    e0: float
    e1: float

    @property
    def gap(self) -> float:
        return max(self.e1 - self.e0, 0.0)


def spectrum_sweep(spec: GluedTreesSpec, s_grid) -> list[SpectrumPoint]:
    out = []
    for s in s_grid:
        w = np.linalg.eigvalsh(column_hamiltonian(spec, float(s)))
        out.append(SpectrumPoint(float(s), float(w[0]), float(w[1])))
    return out


def gap_at(spec: GluedTreesSpec, s: float) -> float:
    return spectrum_sweep(spec, [s])[0].gap


def gap_minima(points: list[SpectrumPoint]) -> list[float]:
    """``s`` values of interior local minima of the gap along a sweep."""
    g = np.array([p.gap for p in points])
    idx = [k for k in range(1, len(g) - 1) if g[k] < g[k - 1] and g[k] <= g[k + 1]]
    return [points[k].s for k in idx]


def predicted_crossing_gap(spec: GluedTreesSpec) -> float:
    """Leading-order gap ``s_c (1 - s_c) 2**(-n/2) / 2`` at the crossing."""
    sc = spec.s_c
    return sc * (1.0 - sc) * 2.0 ** (-spec.n / 2) / 2.0


# -- ansatz solutions --------------------------------------------------------


@dataclass(frozen=True)
class AnsatzSolution:
    """Root ``x = e**q > 1`` of ``det M = 0`` and the matching eigenvector.

    ``a, b, c, d`` are the coefficients of the exponential profile, scaled
    so that the column amplitudes ``gammas`` have unit norm and
    ``gammas[0] > 0``.  ``residual`` is ``|M' v| / |v|`` for the
    row/column-rescaled matrix ``M'`` (entries O(1)).
    """

    s: float
    q: float
    x: float
    E_rescaled: float
    a: float
    b: float
    c: float
    d: float
    gammas: np.ndarray
    residual: float

    @property
    def energy(self) -> float:
        return self.s * (1.0 - self.s) * self.E_rescaled


def det_m_lhs(spec: GluedTreesSpec, s: float, x):
    """Left-hand side of the ``det M = 0`` condition, divided by ``x**4``."""
    n = spec.n
    ap = spec.alpha / s
    bp = spec.alpha / (1.0 - s)
    x = np.asarray(x, dtype=float)
    return (
        (1 - ap * x) * (x - bp) * x ** (-2 * n - 1)
        + (x - ap) * (1 - bp * x) * x ** (-2 * n - 1)
        + (1 + SQRT2 * x) * (1 - SQRT2 * x) * (1 - ap * x) * (1 - bp * x)
        * x ** (-4 * n - 4)
        + (x + SQRT2) * (x - SQRT2) * (x - ap) * (x - bp)
    )


def scaled_ansatz_matrix(spec: GluedTreesSpec, s: float, x: float) -> np.ndarray:
    """``M`` with unknowns rescaled to ``(a x**n, b, c x**n, d)``."""
    n = spec.n
    ap = spec.alpha / s
    bp = spec.alpha / (1.0 - s)
    xn = x ** (-n)
    return np.array([
        [(1 / x - ap) * xn, x - ap, 0.0, 0.0],
        [0.0, 0.0, (1 / x - bp) * xn, x - bp],
        [x, x ** (-(n + 1)), -SQRT2, -SQRT2 * xn],
        [-SQRT2, -SQRT2 * xn, x, x ** (-(n + 1))],
    ])


def _profile(n: int, x: float, coef: np.ndarray) -> np.ndarray:
    A, B, C, D = coef
    j = np.arange(2 * n + 2, dtype=float)
    left = A * x ** (j - n) + B * x ** (-j)
    r = 2 * n + 1 - j
    right = C * x ** (r - n) + D * x ** (-r)
    return np.where(j <= n, left, right)


def _solution_from_root(spec: GluedTreesSpec, s: float, x: float) -> AnsatzSolution:
    m = scaled_ansatz_matrix(spec, s, x)
    _, sv, vt = np.linalg.svd(m)
    v = vt[-1]
    gam = _profile(spec.n, x, v)
    nrm = np.linalg.norm(gam)
    if gam[0] < 0:
        nrm = -nrm
    v = v / nrm
    gam = gam / nrm
    res = float(np.linalg.norm(m @ v) / np.linalg.norm(v))
    xn = x ** (-spec.n)
    return AnsatzSolution(
        s=s, q=math.log(x), x=x, E_rescaled=-(x + 1.0 / x),
        a=float(v[0] * xn), b=float(v[1]), c=float(v[2] * xn), d=float(v[3]),
        gammas=gam, residual=res,
    )


def _candidate_grid(spec: GluedTreesSpec, s: float) -> np.ndarray:
    ap = spec.alpha / s
    hi = 2.0 * max(ap, SQRT2)
    base = 1.0 + np.geomspace(1e-6, hi - 1.0, 4000)
    eps = 2.0 ** (-spec.n / 2)
    pieces = [base]
    for c in (SQRT2, ap):
        for w in (eps, 10 * eps, (c / SQRT2) ** -spec.n if c > SQRT2 else eps):
            pieces.append(c + np.linspace(-4 * w, 4 * w, 801))
    g = np.concatenate(pieces)
    return np.unique(g[g > 1.0 + 1e-7])


def ansatz_root(spec: GluedTreesSpec, s: float, tol: float = 1e-6) -> list[AnsatzSolution]:
    """All bound-state roots ``x > 1`` of ``det M = 0`` for ``0 < s < alpha``.

    Sign changes of the determinant condition are bracketed on a grid
    refined around the asymptotic root locations ``sqrt2`` and ``alpha/s``,
    then polished with Brent's method.  A root is kept only if its profile
    is an eigenvector of the column Hamiltonian (relative residual < tol).
    """
    if not 0.0 < s < spec.alpha:
        raise ValueError(f"ansatz needs 0 < s < alpha={spec.alpha}, got s={s}")
    grid = _candidate_grid(spec, s)
    f = det_m_lhs(spec, s, grid)
    brackets = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
    if brackets.size == 0:
        raise NumericError(
            f"no sign change of det M on [{grid[0]:.6g}, {grid[-1]:.6g}] "
            f"({grid.size} points) at s={s}, n={spec.n}"
        )
    h = column_hamiltonian(spec, s)
    sols = []
    for k in brackets:
        x = brentq(lambda t: float(det_m_lhs(spec, s, t)), grid[k], grid[k + 1],
                   xtol=1e-15, rtol=1e-15, maxiter=200)
        sol = _solution_from_root(spec, s, x)
        r = np.linalg.norm(h @ sol.gammas - sol.energy * sol.gammas)
        if r <= tol * max(abs(sol.energy), 1e-300) or r <= 1e-10:
            sols.append(sol)
    sols.sort(key=lambda z: -z.x)  # largest x = lowest energy first
    return sols


# -- column states -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ColumnState:
    gammas: np.ndarray

    def __post_init__(self):
        g = np.array(self.gammas, dtype=float)
        if abs(g @ g - 1.0) > 1e-10:
            raise ValueError("column amplitudes are not normalized")
        g.setflags(write=False)
        object.__setattr__(self, "gammas", g)

    @classmethod
    def normalized(cls, gammas) -> "ColumnState":
        g = np.asarray(gammas, dtype=float)
        g = g / np.linalg.norm(g)
        if g[np.argmax(np.abs(g))] < 0:
            g = -g
        return cls(g)


class BranchAmbiguityError(ValueError):
    pass


def _closed_form_profile(spec: GluedTreesSpec, s: float) -> np.ndarray:
    j = np.arange(spec.dim)
    return np.where(j <= spec.n, (spec.alpha / s) ** (-j.astype(float)), 0.0)


def _crossing_profile(spec: GluedTreesSpec, sign: float) -> np.ndarray:
    j = np.arange(spec.dim)
    eps = 2.0 ** (-spec.n / 2)
    first = np.where(j <= spec.n, 2.0 ** (-j / 2), 0.0)
    return first + sign * eps * np.sqrt(spec.column_sizes() / 2.0)


def column_state(
    spec: GluedTreesSpec,
    s: float,
    branch: str = "ground",
    mode: str = "numeric",
    at_crossing: bool = False,
) -> ColumnState:
    """Ground or first-excited state in the column basis.

    ``mode="numeric"`` diagonalizes the column Hamiltonian.  ``mode="ansatz"``
    builds the exponential-profile eigenvectors from the ``det M`` roots
    (lowest energy first), or the two-term crossing profile when
    ``at_crossing`` is set.  ``s`` above ``1 - alpha`` is mapped
    through the ``(s, j) -> (1 - s, 2n + 1 - j)`` symmetry.
    """
    if branch not in ("ground", "first_excited"):
        raise ValueError(f"unknown branch {branch!r}")
    _check_s(s)
    if mode == "numeric":
        _, v = np.linalg.eigh(column_hamiltonian(spec, s))
        return ColumnState.normalized(v[:, 0 if branch == "ground" else 1])
    if mode != "ansatz":
        raise ValueError(f"unknown mode {mode!r}")
    if s > 1.0 - spec.alpha:
        mirrored = column_state(spec, 1.0 - s, branch, mode, at_crossing)
        return ColumnState(mirrored.gammas[::-1].copy())
    if not 0.0 < s < spec.alpha:
        raise ValueError(f"ansatz mode needs s in (0, alpha) or (1-alpha, 1); got {s}")
    near = abs(s - spec.s_c) < 1e-6
    if near and not at_crossing:
        raise BranchAmbiguityError(
            f"s={s} is within 1e-6 of the crossing s_c={spec.s_c}; "
            "pass at_crossing=True to use the crossing forms"
        )
    if at_crossing:
        sign = 1.0 if branch == "ground" else -1.0
        return ColumnState.normalized(_crossing_profile(spec, sign))
    sols = ansatz_root(spec, s)
    k = 0 if branch == "ground" else 1
    if k >= len(sols):
        raise NumericError(
            f"only {len(sols)} bound-state root(s) at s={s}; "
            f"no ansatz form for the {branch} branch"
        )
    return ColumnState.normalized(sols[k].gammas)


def localized_profile(spec: GluedTreesSpec, s: float) -> ColumnState:
    """Leading-order ``(alpha/s)**(-j)`` profile on the left tree."""
    if not 0.0 < s < spec.alpha:
        raise ValueError(f"need 0 < s < alpha, got {s}")
    return ColumnState.normalized(_closed_form_profile(spec, s))


def column_overlap(a: ColumnState, b: ColumnState) -> float:
    return float(abs(a.gammas @ b.gammas) ** 2)


# -- random names and the additive observable ---------------------------------


@dataclass(frozen=True, eq=False)
class NameSample:
    """Vertex names in column order; ``names[0]`` is the left root ``w(0)``."""

    names: np.ndarray
    distances: np.ndarray  # Hamming distance of each name to names[0]


def _distinct_random(rng, count: int, bits: int, max_rounds: int = 64) -> np.ndarray:
    space = 1 << bits
    if count > space:
        raise ValueError(f"cannot draw {count} distinct names from {space}")
    got = np.unique(rng.integers(0, space, size=count, dtype=np.uint64))
    for _ in range(max_rounds):
        if got.size >= count:
            break
        extra = rng.integers(0, space, size=2 * (count - got.size), dtype=np.uint64)
        got = np.unique(np.concatenate([got, extra]))
    else:
        raise RuntimeError(f"name sampling did not produce {count} distinct names")
    return rng.permutation(got)[:count]


@functools.lru_cache(maxsize=16)
def _names(n: int, seed: int) -> NameSample:
    rng = np.random.default_rng([n, seed])
    m = (1 << (n + 2)) - 2
    names = _distinct_random(rng, m, 2 * n)
    dist = np.bitwise_count(names ^ names[0]).astype(np.int64)
    names.setflags(write=False)
    dist.setflags(write=False)
    return NameSample(names, dist)


def sample_names(spec: GluedTreesSpec) -> NameSample:
    return _names(spec.n, spec.name_seed)


def _column_moments(spec: GluedTreesSpec) -> tuple[np.ndarray, np.ndarray]:
    a_vals = 2.0 * spec.n - 2.0 * sample_names(spec).distances
    off = spec.column_offsets()
    mean = np.add.reduceat(a_vals, off[:-1]) / np.diff(off)
    sq = np.add.reduceat(a_vals ** 2, off[:-1]) / np.diff(off)
    return mean, sq


def observable_stats(spec: GluedTreesSpec, state: ColumnState) -> tuple[float, float]:
    """Mean and variance of ``A`` in the column-superposed state."""
    p = state.gammas ** 2
    mean, sq = _column_moments(spec)
    m1 = float(p @ mean)
    return m1, float(p @ sq) - m1 * m1


def perp_mean(spec: GluedTreesSpec, state: ColumnState) -> float:
    """``<w(0)^perp|A|w(0)^perp>`` for the part of the state off the root."""
    p = state.gammas[1:] ** 2
    mean, _ = _column_moments(spec)
    return float(p @ mean[1:] / p.sum())


def default_s0(spec: GluedTreesSpec) -> float:
    return spec.s_c / 2.0


def macroscopic_variance(spec: GluedTreesSpec, s: float | None = None) -> float:
    """Variance of ``A`` in the ground state at ``s`` (default ``s_c / 2``)."""
    s = default_s0(spec) if s is None else s
    return observable_stats(spec, column_state(spec, s))[1]


# -- sparse full-register view (cross-checks) --------------------------------


def column_state_amplitudes(spec: GluedTreesSpec, state: ColumnState):
    """``(names, amplitudes)`` of the state on the ``2n``-qubit register."""
    names = sample_names(spec).names
    sizes = spec.column_sizes()
    amps = np.repeat(state.gammas / np.sqrt(sizes), sizes.astype(np.int64))
    return names, amps


def sparse_vcm(names: np.ndarray, amps: np.ndarray, n_qubits: int) -> np.ndarray:
    """VCM of a real state supported on a few basis strings.

    Uses ``sigma_a(l) sigma_b(l') |w> = phase * |w ^ flips>`` and looks the
    flipped strings up among the support.  Site 1 is the most significant bit.
    """
    order = np.argsort(names)
    keys = names[order].astype(np.int64)
    vals = amps[order].astype(np.complex128)

    def lookup(target):
        pos = np.clip(np.searchsorted(keys, target), 0, keys.size - 1)
        hit = keys[pos] == target
        return np.where(hit, vals[pos], 0.0)

    bitpos = [n_qubits - l for l in range(1, n_qubits + 1)]
    zsign = [1.0 - 2.0 * ((keys >> b) & 1) for b in bitpos]  # eigenvalue of Z

    def single(l, ax):
        # (flip mask, phase array) with sigma_ax(l)|w> = phase(w) |w ^ flip>
        b = bitpos[l]
        if ax == 0:
            return 1 << b, np.ones(keys.size, dtype=np.complex128)
        if ax == 1:
            return 1 << b, 1j * zsign[l]
        return 0, zsign[l].astype(np.complex128)

    dim = 3 * n_qubits
    means = np.zeros(dim)
    for l in range(n_qubits):
        for ax in range(3):
            flip, ph = single(l, ax)
            means[3 * l + ax] = float(np.vdot(lookup(keys ^ flip), ph * vals).real)
    v = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(dim):
        l, ax = divmod(i, 3)
        f1, p1 = single(l, ax)
        for k in range(i, dim):
            l2, ax2 = divmod(k, 3)
            f2, p2 = single(l2, ax2)
            # sigma_i sigma_k |w>: first sigma_k, then sigma_i on w ^ f2
            mid = keys ^ f2
            if f1 or f2:
                z1 = 1.0 - 2.0 * ((mid >> bitpos[l]) & 1)
            else:
                z1 = zsign[l]
            if ax == 0:
                ph1 = np.ones(keys.size)
            elif ax == 1:
                ph1 = 1j * z1
            else:
                ph1 = z1
            corr = np.vdot(lookup(mid ^ f1), ph1 * p2 * vals)
            v[i, k] = corr - means[i] * means[k]
            v[k, i] = np.conj(v[i, k])
    return v


def glued_emax(spec: GluedTreesSpec, state: ColumnState) -> float:
    names, amps = column_state_amplitudes(spec, state)
    v = sparse_vcm(names, amps, spec.name_bits)
    return float(np.linalg.eigvalsh(v)[-1])


def explicit_graph(spec: GluedTreesSpec, rng=None) -> np.ndarray:
    """Adjacency of one glued-trees graph on vertices in column order.

    Left tree is columns ``0..n``, right tree ``n+1..2n+1``; the leaves are
    joined by a random cycle alternating between the two leaf columns.
    Intended for invariance cross-checks only.
    """
    rng = np.random.default_rng(rng)
    n = spec.n
    m = spec.num_vertices
    off = spec.column_offsets()
    adj = np.zeros((m, m))
    for j in range(n):  # left tree: vertex k of column j -> children 2k, 2k+1
        for k in range(1 << j):
            p = off[j] + k
            for c in (2 * k, 2 * k + 1):
                adj[p, off[j + 1] + c] = adj[off[j + 1] + c, p] = 1
    for j in range(n + 1, 2 * n + 1):  # right tree mirrored
        size = 1 << (2 * n + 1 - j)
        for k in range(size // 2):
            p = off[j + 1] + k
            for c in (2 * k, 2 * k + 1):
                adj[p, off[j] + c] = adj[off[j] + c, p] = 1
    leaves = 1 << n
    left = rng.permutation(leaves) + off[n]
    right = rng.permutation(leaves) + off[n + 1]
    for k in range(leaves):
        for u, v in ((left[k], right[k]), (right[k], left[(k + 1) % leaves])):
            adj[u, v] = adj[v, u] = 1
    return adj


# -- tail estimates -----------------------------------------------------------


@dataclass(frozen=True)
class TailReport:
    n: int
    epsilon: float
    exact_fraction: float
    bound: float


def tail_exponent(epsilon: float) -> float:
    e = epsilon
    return (1 + e) * math.log1p(e) + (1 - e) * math.log1p(-e)


def tail_bound(n: int, epsilon: float) -> float:
    e = epsilon
    pref = math.sqrt(2.0 * (1 - e) * n / (math.pi * (1 + e)))
    return 2.0 / 2.0 ** n + pref * math.exp(-tail_exponent(e) * n / 2 + 1.0 / (12 * n))


def binomial_tail(n: int, epsilon: float) -> TailReport:
    """Fraction of ``n``-bit strings with ``|k - n/2| > epsilon n / 2``.

    The comparison ``|2k - n| > epsilon n`` is done in exact rationals, with
    ``epsilon`` taken as the decimal it prints as.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 1 <= n <= 40:
        raise ValueError(f"exact mode supports 1 <= n <= 40, got {n}")
    eps = Fraction(repr(float(epsilon)))
    count = sum(math.comb(n, k) for k in range(n + 1) if abs(2 * k - n) > eps * n)
    return TailReport(n, float(epsilon), count / 2 ** n, tail_bound(n, epsilon))


def close_name_count(n: int, K: int) -> int:
    """``L``: number of ``2n``-bit strings at Hamming distance ``1..K`` from a fixed one."""
    return sum(math.comb(2 * n, k) for k in range(1, K + 1))


def collision_union_bound(n: int, K: int) -> float:
    big_n = 4 ** n
    L = close_name_count(n, K)
    m = (1 << (n + 2)) - 2
    return L * m / (big_n - L)


def collision_probability_mc(spec: GluedTreesSpec, K: int, trials: int, seed=None) -> float:
    """Estimated probability that some name lies within distance ``K`` of ``w(0)``.

    Each trial draws the ``M - 1`` other names without repetition from the
    ``N - 1`` strings other than ``w(0)``; only the number of them landing
    among the ``L`` close strings matters, and that count is sampled directly
    from its hypergeometric law.
    """
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    if K < 0:
        raise ValueError("K must be >= 0")
    L = close_name_count(spec.n, K)
    if L == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    others = 4 ** spec.n - 1
    hits = rng.hypergeometric(L, others - L, spec.num_vertices - 1, size=trials)
    return float(np.mean(hits > 0))
