"""Rank-based separability rules, edge/extremality exclusion, and product-vector tools."""

from __future__ import annotations

import enum
from itertools import product
from dataclasses import dataclass, field
from math import factorial, prod

import numpy as np
from scipy.optimize import least_squares, minimize

from .spectra import (
    RankProfile,
    SpectralSummary,
    _tol,
    max_rank_profile,
    rank_profile,
    spectral_summary,
    view_summaries,
)
from .symcore import (
    InvalidInputError,
    ProductVector,
    SymmetricState,
    binomials,
    compress_half,
    product_state_coords,
)

DEFAULT_EDGE_THRESHOLD = 1e-16
GRID_SIZE = 64
REFINE_STEPS = 200
N_REFINE_STARTS = 8
CERTIFICATE_TOL = 1e-8


class Verdict(str, enum.Enum):
    SEPARABLE = "Separable"
    GENERICALLY_SEPARABLE = "GenericallySeparable"
    CANDIDATE_ENTANGLED = "CandidateEntangled"


# deterministic rules prove separability; generic ones hold off a measure-zero set
RULE_MAX_RANK = "thm-maximal-rank"
RULE_PT_RANK = "thm-pt-rank"
RULE_GENERIC = "thm-generic"
RULE_CERTIFICATE = "constructive-certificate"
DETERMINISTIC_RULES = frozenset({RULE_MAX_RANK, RULE_PT_RANK, RULE_CERTIFICATE})


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    triggered_rules: tuple[str, ...] = ()

    @property
    def proved(self) -> bool:
        return self.verdict is Verdict.SEPARABLE


class EdgeVerdict(str, enum.Enum):
    NOT_EDGE = "NotEdge"
    GENERICALLY_NOT_EDGE = "GenericallyNotEdge"
    UNKNOWN = "Unknown"


def _as_profile(p) -> RankProfile:
    return p if isinstance(p, RankProfile) else RankProfile(tuple(p))


def count_configs(n: int) -> tuple[int, int]:
    """Number of rank configurations with r(rho) = N+1, and how many survive the rank rules.

    >>> count_configs(4)
    (72, 6)
    """
    if n < 4:
        raise InvalidInputError("count_configs needs n >= 4")
    m = n // 2
    total = prod((s + 1) * (n - s + 1) for s in range(1, m + 1))
    return total, factorial(m + 1)


def classify_ranks(p, n: int) -> Classification:
    """Apply the rank criteria to the profile of a PPT symmetric state."""
    p = _as_profile(p)
    p.check(n)
    deterministic, generic = [], []
    if p[0] <= n:
        deterministic.append(RULE_MAX_RANK)
    for k in range(1, n // 2 + 1):
        if p[k] <= n - k + 1:
            deterministic.append(f"{RULE_PT_RANK}:k={k}")
        elif p[k] <= (k + 1) * (n - k):
            generic.append(f"{RULE_GENERIC}:k={k}")
    if deterministic:
        return Classification(Verdict.SEPARABLE, tuple(deterministic + generic))
    if generic:
        return Classification(Verdict.GENERICALLY_SEPARABLE, tuple(generic))
    return Classification(Verdict.CANDIDATE_ENTANGLED)


def extremality_threshold(n: int) -> int:
    mx = max_rank_profile(n)
    return sum(r * r for r in mx.ranks[1:]) - (n + 1) ** 2 + 1


def extremality_excluded(p, n: int) -> bool:
    """True when the profile forces a non-trivial solution of the kernel system.

    Counts real constraints against the (N+1)^2 real parameters of a
    Hermitian direction; assumes r(rho) = N+1.
    """
    p = _as_profile(p)
    return sum(r * r for r in p.ranks[1:]) >= extremality_threshold(n)


def candidate_profiles(n: int):
    """All profiles with r(rho) = N+1 and 1 <= r(rho^Tk) <= maximal, in lexicographic order."""
    mx = max_rank_profile(n).ranks
    for rest in product(*(range(1, hi + 1) for hi in mx[1:])):
        yield RankProfile((n + 1,) + rest)


def excluded_profiles(n: int) -> set[tuple[int, ...]]:
    return {p.ranks for p in candidate_profiles(n) if extremality_excluded(p, n)}


def edge_excluded(p, n: int) -> EdgeVerdict:
    """Table lookup of the profiles known not to host edge states."""
    p = _as_profile(p)
    mx = max_rank_profile(n).ranks
    ranks = p.ranks
    if len(ranks) != len(mx) or ranks[0] != n + 1:
        return EdgeVerdict.UNKNOWN
    if ranks == mx:
        return EdgeVerdict.NOT_EDGE
    if (n, ranks) in {(4, (5, 8, 8)), (6, (7, 12, 15, 15))}:
        return EdgeVerdict.NOT_EDGE
    if (n, ranks) == (4, (5, 8, 7)):
        return EdgeVerdict.GENERICALLY_NOT_EDGE
    deficits = [hi - r for r, hi in zip(ranks, mx)]
    lowered = [k for k, d in enumerate(deficits) if d != 0]
    if len(lowered) == 1:
        k = lowered[0]
        if deficits[k] == 1 and 1 <= k <= (n + 1) // 2 - 1:
            return EdgeVerdict.GENERICALLY_NOT_EDGE
    return EdgeVerdict.UNKNOWN


# ---------------------------------------------------------------------------
# product-vector search


def _power_coords_batch(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    m = np.arange(n + 1)
    binom = np.sqrt(np.array(binomials(n), dtype=float))
    return binom * a[:, None] ** (n - m) * b[:, None] ** m


def _partial_coords_batch(a: np.ndarray, b: np.ndarray, n: int, k: int) -> np.ndarray:
    if k == 0:
        return _power_coords_batch(a, b, n)
    left = _power_coords_batch(a, b, k).conj()
    right = _power_coords_batch(a, b, n - k)
    return (left[:, :, None] * right[:, None, :]).reshape(len(a), -1)


class _Residual:
    """f(theta, phi) = sum_k ||K_k^dag e_k||^2 over unit product vectors."""

    def __init__(self, n: int, kernels: list[np.ndarray]):
        self.n = n
        self.kernels = [(k, K) for k, K in enumerate(kernels) if K.shape[1] > 0]

    @staticmethod
    def amplitudes(theta, phi):
        theta, phi = np.atleast_1d(theta), np.atleast_1d(phi)
        return np.cos(theta / 2).astype(complex), np.exp(1j * phi) * np.sin(theta / 2)

    def overlaps(self, theta, phi) -> np.ndarray:
        a, b = self.amplitudes(theta, phi)
        parts = [_partial_coords_batch(a, b, self.n, k) @ K.conj() for k, K in self.kernels]
        if not parts:
            return np.zeros((len(a), 0), dtype=complex)
        return np.concatenate(parts, axis=1)

    def __call__(self, theta, phi) -> np.ndarray:
        ov = self.overlaps(theta, phi)
        return np.sum(np.abs(ov) ** 2, axis=1)

    def scalar(self, x) -> float:
        return float(self(x[0], x[1])[0])

    def vector(self, x) -> np.ndarray:
        ov = self.overlaps(x[0], x[1])[0]
        return np.concatenate([ov.real, ov.imag])


@dataclass(frozen=True, eq=False)
class EdgeReport:
    found_vector: ProductVector | None
    residual: float
    iterations: int
    threshold: float
    best_vector: ProductVector | None = None

    @property
    def found(self) -> bool:
        return self.found_vector is not None


def _grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    theta = (np.arange(size) + 0.5) * np.pi / size
    phi = np.arange(size) * 2 * np.pi / size
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    # poles first: alpha = 0 then alpha = infinity
    tt = np.concatenate([[0.0, np.pi], tt.ravel()])
    pp = np.concatenate([[0.0, 0.0], pp.ravel()])
    return tt, pp


def kernels_of(s: SymmetricState, rel_tol: float | None = None) -> list[np.ndarray]:
    return [summ.kernel_basis for summ in view_summaries(s, rel_tol)]


def product_residual(s: SymmetricState, e: ProductVector, rel_tol: float | None = None,
                     kernels: list[np.ndarray] | None = None) -> float:
    """Sum over views of squared overlaps of the (partially conjugated) unit product vector with the kernel."""
    if kernels is None:
        kernels = kernels_of(s, rel_tol)
    total = 0.0
    for k, K in enumerate(kernels):
        if K.shape[1] == 0:
            continue
        v = product_state_coords(e, s.n_qubits, k, normalize=True)
        total += float(np.sum(np.abs(K.conj().T @ v) ** 2))
    return total


def find_product_vector(s: SymmetricState, threshold: float = DEFAULT_EDGE_THRESHOLD,
                        rel_tol: float | None = None, grid_size: int = GRID_SIZE) -> EdgeReport:
    """Search the Bloch sphere for e with e^{(x)N} in R(rho) and its partial conjugates in R(rho^Tk).

    A grid over (theta, phi) plus both poles is scanned, the best few
    points are refined by Nelder-Mead and then polished by a
    Levenberg-Marquardt solve on the overlap vector.
    """
    kernels = kernels_of(s, rel_tol)
    fun = _Residual(s.n_qubits, kernels)
    tt, pp = _grid(grid_size)
    vals = fun(tt, pp)
    n_evals = len(vals)
    # deterministic ordering: residual, then grid position
    order = np.lexsort((np.arange(len(vals)), vals))
    best_x = np.array([tt[order[0]], pp[order[0]]])
    best_f = float(vals[order[0]])
    if best_f > 0 and fun.kernels:
        starts, taken = [], []
        for idx in order:
            x = np.array([tt[idx], pp[idx]])
            if all(_sphere_dist(x, y) > 3 * np.pi / grid_size for y in taken):
                starts.append(x)
                taken.append(x)
            if len(starts) == N_REFINE_STARTS:
                break
        for x0 in starts:
            res = minimize(fun.scalar, x0, method="Nelder-Mead",
                           options={"maxiter": REFINE_STEPS, "xatol": 1e-14, "fatol": 1e-34})
            n_evals += res.nfev
            x = res.x
            if fun.scalar(x) < 1e-6:
                ls = least_squares(fun.vector, x, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
                n_evals += ls.nfev
                if fun.scalar(ls.x) < fun.scalar(x):
                    x = ls.x
            f = fun.scalar(x)
            if f < best_f:
                best_f, best_x = f, x
            if best_f < threshold * 1e-4:
                break
    e = ProductVector.from_angles(*best_x)
    # exact residual for the reported vector, through the public coordinate path
    residual = product_residual(s, e, kernels=kernels)
    found = e.canonical() if residual < threshold else None
    return EdgeReport(found, residual, n_evals, threshold, e.canonical())


def _sphere_dist(x: np.ndarray, y: np.ndarray) -> float:
    u = np.array([np.sin(x[0]) * np.cos(x[1]), np.sin(x[0]) * np.sin(x[1]), np.cos(x[0])])
    v = np.array([np.sin(y[0]) * np.cos(y[1]), np.sin(y[0]) * np.sin(y[1]), np.cos(y[0])])
    return float(np.arccos(np.clip(u @ v, -1, 1)))


def _pinv_quadratic(summ: SpectralSummary, v: np.ndarray) -> float:
    vr = summ.range_basis.conj().T @ v
    return float(np.sum(np.abs(vr) ** 2 / summ.eigenvalues[: summ.rank]))


def max_subtraction(s: SymmetricState, e: ProductVector, rel_tol: float | None = None) -> float:
    """Largest weight lambda with every view of rho - lambda [e^{(x)N}] still PSD."""
    lam = np.inf
    for k, summ in enumerate(view_summaries(s, rel_tol)):
        v = product_state_coords(e, s.n_qubits, k, normalize=True)
        q = _pinv_quadratic(summ, v)
        if q > 0:
            lam = min(lam, 1.0 / q)
    return float(lam)


def subtract_product_vector(s: SymmetricState, e: ProductVector,
                            threshold: float = DEFAULT_EDGE_THRESHOLD,
                            rel_tol: float | None = None) -> tuple[SymmetricState, float]:
    """Remove the largest admissible multiple of ``[e^{(x)N}]`` and renormalize.

    Returns the remainder (trace one, or the zero matrix when nothing is
    left) and the subtracted weight before renormalization.
    """
    res = product_residual(s, e, rel_tol)
    if res >= threshold:
        raise InvalidInputError(f"product vector not in the ranges (residual {res:.3e} >= {threshold:.1e})")
    n = s.n_qubits
    lam = min(max_subtraction(s, e, rel_tol), 1.0)
    v = product_state_coords(e, n, normalize=True)
    rest = s.matrix - lam * np.outer(v, v.conj())
    rest = (rest + rest.conj().T) / 2
    if lam >= 1 - 1e-10 or np.trace(rest).real <= 1e-10:
        return SymmetricState(n, np.zeros_like(rest)), lam
    return SymmetricState(n, rest / np.trace(rest).real), lam


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    success: bool
    terms: list[tuple[float, ProductVector]] = field(default_factory=list)
    remainder: SymmetricState | None = None
    remainder_weight: float = 0.0
    reconstruction_error: float = np.inf

    def reconstruct(self, n: int) -> np.ndarray:
        mat = np.zeros((n + 1, n + 1), dtype=complex)
        for w, e in self.terms:
            v = product_state_coords(e, n, normalize=True)
            mat += w * np.outer(v, v.conj())
        return mat


def decompose_separable(s: SymmetricState, max_terms: int | None = None,
                        rel_tol: float | None = None,
                        threshold: float = DEFAULT_EDGE_THRESHOLD) -> DecompositionResult:
    """Greedy constructive certificate: peel product vectors off until nothing is left.

    On failure the result carries the irreducible (edge-candidate) remainder.
    """
    n = s.n_qubits
    if max_terms is None:
        max_terms = (n + 1) ** 2
    terms: list[tuple[float, ProductVector]] = []
    current, mass = s, 1.0
    for _ in range(max_terms):
        rep = find_product_vector(current, threshold, rel_tol)
        if rep.found_vector is None:
            break
        current, lam = subtract_product_vector(current, rep.found_vector, threshold, rel_tol)
        terms.append((mass * lam, rep.found_vector))
        mass *= 1 - lam
        if not np.any(current.matrix):
            mass = 0.0
            break
    result = DecompositionResult(False, terms, current if mass > 0 else None, mass)
    err = float(np.abs(result.reconstruct(n) - s.matrix).max())
    ok = mass < CERTIFICATE_TOL and err < CERTIFICATE_TOL
    return DecompositionResult(ok, terms, result.remainder, mass, err)


def schmidt_bound(s: SymmetricState, rel_tol: float | None = None) -> int | None:
    """Upper bound on the Schmidt number certified by the half-system compression.

    Pure product states give 1. Otherwise the compressed 2 x (N//2+1) state
    must be PPT and supported on both factors, in which case the bound is
    ceil(N/2). Returns None when no claim can be made.
    """
    tol = _tol(rel_tol)
    n = s.n_qubits
    summ = spectral_summary(s.matrix, tol)
    if summ.rank == 1:
        e = find_product_vector(s, rel_tol=tol)
        return 1 if e.found else None
    comp = compress_half(s)
    d_a, d_b = comp.dims
    t = comp.matrix.reshape(d_a, d_b, d_a, d_b)
    pt = t.transpose(2, 1, 0, 3).reshape(comp.matrix.shape)
    if np.linalg.eigvalsh(comp.matrix)[0] < -tol or np.linalg.eigvalsh(pt)[0] < -tol:
        return None
    red_a = np.einsum("ijkj->ik", t)
    red_b = np.einsum("ijil->jl", t)
    if spectral_summary(red_a, tol).rank < d_a or spectral_summary(red_b, tol).rank < d_b:
        return None
    return (n + 1) // 2
