"""Randomized rank-lowering search for extremal PPT symmetric states.

Starting from a PPT state rho, a Hermitian h is drawn from the solutions of
``h^{T_k} Psi = 0`` for every kernel vector Psi of every view k (k = 0 is
rho itself). Along ``rho(x) = (1 + x tr h) rho - x h`` the ranges stay
inside those of rho, so the first x where a view loses positivity lowers
a rank. The search stops when rho is the only solution (extremal).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .classify import Classification, Verdict, classify_ranks
from .spectra import RankProfile, _tol, max_rank_profile, view_summaries
from .symcore import SymmetricState, _isometry, _view_matrix, binomials

CROSSING_TOL = 1e-10
BRACKET_START = 1e-3
BRACKET_LIMIT = 1e6
BISECTION_WIDTH = 1e-12
RULE_EXTREMAL = "extremal"


class DegenerateDirectionError(RuntimeError):
    """No eigenvalue crossing along the direction within the bracket limit."""


class SearchAborted(RuntimeError):
    def __init__(self, message: str, trajectory: "SearchTrajectory"):
        super().__init__(message)
        self.trajectory = trajectory


# ---------------------------------------------------------------------------
# Hermitian <-> real parameter vectors (orthonormal in the Hilbert-Schmidt product)


@lru_cache(maxsize=None)
def _triu(d: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(d, 1)


def herm_to_vec(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    iu, ju = _triu(d)
    off = h[iu, ju]
    return np.concatenate([np.diag(h).real, np.sqrt(2) * off.real, np.sqrt(2) * off.imag])


def vec_to_herm(x: np.ndarray, d: int) -> np.ndarray:
    iu, ju = _triu(d)
    n_off = len(iu)
    h = np.zeros((d, d), dtype=complex)
    h[np.arange(d), np.arange(d)] = x[:d]
    off = (x[d:d + n_off] + 1j * x[d + n_off:]) / np.sqrt(2)
    h[iu, ju] = off
    h[ju, iu] = off.conj()
    return h


@lru_cache(maxsize=None)
def _view_index(n: int, k: int):
    """Index tables for the map h -> view_k(h) Psi.

    ``view_k(h)[(i,j),(i',j')] = c(i',j) c(i,j') h[i'+j, i+j']`` where c are
    the isometry entries; returns row, source, a, b and coefficient arrays.
    """
    d_left, d_right = k + 1, n - k + 1
    if k == 0:
        c = np.ones((1, n + 1))
    else:
        bt = _isometry(n, k).matrix
        c = np.array([[bt[i * d_right + j, i + j] for j in range(d_right)] for i in range(d_left)])
    i, j, ip, jp = np.meshgrid(np.arange(d_left), np.arange(d_right),
                               np.arange(d_left), np.arange(d_right), indexing="ij")
    i, j, ip, jp = (x.ravel() for x in (i, j, ip, jp))
    row = i * d_right + j
    src = ip * d_right + jp
    return row, src, ip + j, i + jp, c[ip, j] * c[i, jp]


def _view_constraints(n: int, k: int, kernel: np.ndarray) -> np.ndarray:
    """Complex rows (d_k * n_k, (N+1)^2) of view_k(h) Psi = 0 in real parameters of h."""
    d = n + 1
    row, src, a, b, coef = _view_index(n, k)
    n_ker = kernel.shape[1]
    dim = kernel.shape[0]
    full = np.zeros((n_ker, dim, d, d), dtype=complex)
    full[:, row, a, b] = (coef[:, None] * kernel[src, :]).T
    full = full.reshape(n_ker * dim, d, d)
    iu, ju = _triu(d)
    diag = full[:, np.arange(d), np.arange(d)]
    up, lo = full[:, iu, ju], full[:, ju, iu]
    sym = (up + lo) / np.sqrt(2)
    anti = 1j * (up - lo) / np.sqrt(2)
    return np.concatenate([diag, sym, anti], axis=1)


def build_constraint_system(s: SymmetricState, tol: float | None = None,
                            summaries=None) -> np.ndarray:
    """Real matrix R with R @ herm_to_vec(h) = 0 iff h^{T_k} Psi = 0 for all kernel vectors.

    Each kernel vector of view k contributes ``2 * dim(view_k)`` rows
    (real and imaginary parts).
    """
    n = s.n_qubits
    if summaries is None:
        summaries = view_summaries(s, tol)
    blocks = []
    for k, summ in enumerate(summaries):
        if summ.kernel_dim == 0:
            continue
        rows = _view_constraints(n, k, summ.kernel_basis)
        blocks.append(rows.real)
        blocks.append(rows.imag)
    if not blocks:
        return np.zeros((0, (n + 1) ** 2))
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class NullSpace:
    basis: np.ndarray  # (P, nullity), orthonormal columns
    singular_values: np.ndarray

    @property
    def nullity(self) -> int:
        return self.basis.shape[1]


def constraint_nullspace(R: np.ndarray, tol: float | None = None) -> NullSpace:
    tol = _tol(tol)
    n_rows, n_cols = R.shape
    if n_rows == 0:
        return NullSpace(np.eye(n_cols), np.zeros(0))
    if n_rows > n_cols:
        R = np.linalg.qr(R, mode="r")
    _, sv, vt = np.linalg.svd(R, full_matrices=True)
    cutoff = 10 * tol * max(sv.max(initial=0.0), 1.0)
    rank = int(np.sum(sv > cutoff))
    return NullSpace(vt[rank:].T.copy(), sv)


def nullity(s: SymmetricState, tol: float | None = None) -> int:
    return constraint_nullspace(build_constraint_system(s, tol), tol).nullity


@dataclass(frozen=True, eq=False)
class HermitianDirection:
    matrix: np.ndarray
    trace: float
    nullity: int


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def find_direction(s: SymmetricState, rng_seed=0, tol: float | None = None,
                   summaries=None) -> HermitianDirection | None:
    """Random unit Hermitian solution of the kernel system orthogonal to rho; None if rho is extremal."""
    rng = _rng(rng_seed)
    ns = constraint_nullspace(build_constraint_system(s, tol, summaries), tol)
    if ns.nullity == 0:
        raise RuntimeError("constraint system has no solution; rho should always solve it")
    if ns.nullity == 1:
        return None
    x_rho = herm_to_vec(s.matrix)
    x_rho = x_rho / np.linalg.norm(x_rho)
    basis = ns.basis - np.outer(x_rho, x_rho @ ns.basis)
    u, sv, _ = np.linalg.svd(basis, full_matrices=False)
    basis = u[:, : ns.nullity - 1]
    g = rng.standard_normal(ns.nullity - 1)
    x = basis @ (g / np.linalg.norm(g))
    x -= x_rho * (x_rho @ x)
    x /= np.linalg.norm(x)
    h = vec_to_herm(x, s.dim)
    return HermitianDirection(h, float(np.trace(h).real), ns.nullity)


def along(s: SymmetricState, h: np.ndarray, x: float) -> np.ndarray:
    """rho(x) = (1 + x tr h) rho - x h."""
    return (1 + x * np.trace(h).real) * s.matrix - x * h


@dataclass(frozen=True)
class StepResult:
    state: SymmetricState
    x_star: float
    dropped_views: tuple[int, ...]
    profile: RankProfile

    @property
    def dropped_view(self) -> int:
        return self.dropped_views[0] if self.dropped_views else -1


class _RangeMinimum:
    """g(x) = min over views of the smallest eigenvalue of rho(x) restricted to range(view_k(rho))."""

    def __init__(self, s: SymmetricState, h: np.ndarray, summaries):
        n = s.n_qubits
        direction = np.trace(h).real * s.matrix - h
        self.blocks = []
        for k, summ in enumerate(summaries):
            q = summ.range_basis
            a = np.diag(summ.eigenvalues[: summ.rank]).astype(complex)
            b = q.conj().T @ _view_matrix(direction, n, k) @ q
            self.blocks.append((a, (b + b.conj().T) / 2))

    def __call__(self, x: float) -> float:
        return min(np.linalg.eigvalsh(a + x * b)[0] for a, b in self.blocks)


def _bracket(g: Callable[[float], float], sign: float):
    lo, x = 0.0, BRACKET_START
    while x <= BRACKET_LIMIT:
        if g(sign * x) < -CROSSING_TOL:
            return lo, x
        lo, x = x, 2 * x
    return None


def line_search_step(s: SymmetricState, h, tol: float | None = None, summaries=None) -> StepResult:
    """Move along rho(x) to the first x > 0 where some view gains a zero eigenvalue.

    Raises DegenerateDirectionError if no crossing is found for |x| <= 1e6.
    """
    tol = _tol(tol)
    hm = h.matrix if isinstance(h, HermitianDirection) else np.asarray(h)
    if summaries is None:
        summaries = view_summaries(s, tol)
    before = RankProfile(tuple(summ.rank for summ in summaries))
    g = _RangeMinimum(s, hm, summaries)
    sign = 1.0
    br = _bracket(g, sign)
    if br is None:
        sign = -1.0
        br = _bracket(g, sign)
    if br is None:
        raise DegenerateDirectionError("no eigenvalue crossing within the bracket limit")
    lo, hi = br
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if g(sign * mid) < 0:
            hi = mid
        else:
            lo = mid
    x_star = sign * lo
    mat = along(s, hm, x_star)
    mat = (mat + mat.conj().T) / 2
    new = SymmetricState(s.n_qubits, mat / np.trace(mat).real)
    after = RankProfile(tuple(summ.rank for summ in view_summaries(new, tol)))
    dropped = tuple(k for k, (r0, r1) in enumerate(zip(before, after)) if r1 < r0)
    return StepResult(new, x_star, dropped, after)


# ---------------------------------------------------------------------------
# search driver


@dataclass(frozen=True, eq=False)
class StepRecord:
    profile: RankProfile
    x_star: float
    dropped_views: tuple[int, ...]
    nullity: int
    state: SymmetricState | None = None

    @property
    def dropped_view(self) -> int:
        return self.dropped_views[0] if self.dropped_views else -1


@dataclass(eq=False)
class SearchOptions:
    rel_tol: float | None = None
    max_redraws: int = 10
    # predicate(profile_before, dropped_views) -> accept; or a target RankProfile
    target: Callable[[RankProfile, tuple[int, ...]], bool] | RankProfile | None = None
    max_target_tries: int = 50
    # stop as soon as a step would leave the candidate-entangled region;
    # the terminal is then the last candidate state (not extremal)
    stop_when_separable: bool = False
    keep_states: bool = True


@dataclass(eq=False)
class SearchTrajectory:
    initial_profile: RankProfile
    steps: list[StepRecord] = field(default_factory=list)
    terminal: SymmetricState | None = None
    terminal_profile: RankProfile | None = None
    terminal_extremal: bool = False
    terminal_classification: Classification | None = None
    exit_profile: RankProfile | None = None
    seed: object = None
    redraws: int = 0

    @property
    def profiles(self) -> list[RankProfile]:
        return [self.initial_profile] + [st.profile for st in self.steps]

    @property
    def entangled(self) -> bool:
        return (self.terminal_extremal and self.terminal_profile is not None
                and self.terminal_profile[0] > 1)


def _target_predicate(target):
    if target is None or callable(target):
        return target
    goal = RankProfile(tuple(target))

    def accept(before: RankProfile, dropped: tuple[int, ...]) -> bool:
        return bool(dropped) and all(before[k] > goal[k] for k in dropped)

    return accept


def _classify_terminal(profile: RankProfile, n: int, extremal: bool) -> Classification:
    cls = classify_ranks(profile, n)
    if extremal and profile[0] > 1:
        return Classification(cls.verdict, cls.triggered_rules + (RULE_EXTREMAL,))
    return cls


def run_to_extremal(initial: SymmetricState | None = None, rng_seed=0,
                    opts: SearchOptions | None = None, n_qubits: int | None = None) -> SearchTrajectory:
    """Lower ranks with random admissible directions until the state is extremal.

    ``initial`` defaults to the normalized projector onto the symmetric
    subspace of ``n_qubits`` qubits.
    """
    opts = opts or SearchOptions()
    tol = _tol(opts.rel_tol)
    if initial is None:
        initial = SymmetricState.maximally_mixed(n_qubits)
    n = initial.n_qubits
    rng = _rng(rng_seed)
    accept = _target_predicate(opts.target)
    current = initial
    summaries = view_summaries(current, tol)
    profile = RankProfile(tuple(summ.rank for summ in summaries))
    traj = SearchTrajectory(profile, seed=rng_seed)
    max_steps = sum(max_rank_profile(n).ranks) + 1

    for _ in range(max_steps):
        step, null_dim, failures = None, 0, 0
        tries = opts.max_target_tries if accept else 1
        extremal = False
        for _attempt in range(tries):
            h = find_direction(current, rng, tol, summaries)
            if h is None:
                extremal = True
                break
            null_dim = h.nullity
            try:
                cand = line_search_step(current, h, tol, summaries)
            except DegenerateDirectionError:
                failures += 1
                traj.redraws += 1
                if failures > opts.max_redraws:
                    traj.terminal, traj.terminal_profile = current, profile
                    raise SearchAborted("repeated degenerate directions", traj)
                continue
            step = cand
            if accept is None or accept(profile, cand.dropped_views):
                break
        if extremal:
            traj.terminal_extremal = True
            break
        if step is None:
            traj.terminal, traj.terminal_profile = current, profile
            raise SearchAborted("no admissible step found", traj)
        if opts.stop_when_separable:
            if classify_ranks(step.profile, n).verdict is not Verdict.CANDIDATE_ENTANGLED:
                traj.exit_profile = step.profile
                break
        traj.steps.append(StepRecord(step.profile, step.x_star, step.dropped_views, null_dim,
                                     step.state if opts.keep_states else None))
        current, profile = step.state, step.profile
        summaries = view_summaries(current, tol)
    else:
        traj.terminal, traj.terminal_profile = current, profile
        raise SearchAborted("step limit exceeded", traj)

    traj.terminal, traj.terminal_profile = current, profile
    traj.terminal_classification = _classify_terminal(profile, n, traj.terminal_extremal)
    return traj
