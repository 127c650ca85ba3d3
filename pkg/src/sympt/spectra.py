"""Rank, kernel and positivity analysis with a single numerical-rank policy."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .symcore import InvalidInputError, SymmetricState, view_matrices

_FALLBACK_TOL = 1e-8


def default_tol() -> float:
    """Global relative rank tolerance; ``SYMPT_DEFAULT_TOL`` overrides it."""
    raw = os.environ.get("SYMPT_DEFAULT_TOL")
    if not raw:
        return _FALLBACK_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise InvalidInputError(f"SYMPT_DEFAULT_TOL={raw!r} is not a number") from None
    if not tol > 0:
        raise InvalidInputError("SYMPT_DEFAULT_TOL must be positive")
    return tol


def _tol(rel_tol: float | None) -> float:
    return default_tol() if rel_tol is None else float(rel_tol)


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns, same order
    rank: int
    kernel_basis: np.ndarray  # (dim, dim - rank)
    tolerance_used: float
    threshold: float
    borderline: tuple[float, ...] = ()

    @property
    def kernel_dim(self) -> int:
        return self.kernel_basis.shape[1]

    @property
    def range_basis(self) -> np.ndarray:
        return self.eigenvectors[:, : self.rank]

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])


def spectral_summary(m: np.ndarray, rel_tol: float | None = None) -> SpectralSummary:
    """Eigen-decompose a Hermitian matrix and split it into range and kernel.

    An eigenvalue counts toward the rank iff ``|lam| > rel_tol * max(|lam_max|, 1)``.
    Eigenvalues within a factor 10 of that threshold are reported in
    ``borderline`` so callers can flag marginal rank decisions.
    """
    tol = _tol(rel_tol)
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    if np.abs(m - m.conj().T).max() > 1e-10 * max(1.0, np.abs(m).max()):
        raise InvalidInputError("spectral_summary needs a Hermitian matrix")
    lam, vec = np.linalg.eigh((m + m.conj().T) / 2)
    # move the numerically-zero eigenvalues to the end, otherwise descending
    lam, vec = lam[::-1], vec[:, ::-1]
    scale = max(np.abs(lam).max(initial=0.0), 1.0)
    threshold = tol * scale
    nonzero = np.abs(lam) > threshold
    order = np.concatenate([np.flatnonzero(nonzero), np.flatnonzero(~nonzero)])
    lam, vec = lam[order], vec[:, order]
    rank = int(nonzero.sum())
    near = np.abs(lam)
    borderline = tuple(float(x) for x in lam[(near > threshold / 10) & (near < threshold * 10)])
    return SpectralSummary(lam, vec, rank, vec[:, rank:], tol, threshold, borderline)


@dataclass(frozen=True)
class RankProfile:
    """(r(rho), r(rho^T1), ..., r(rho^T_{N//2}))."""

    ranks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))

    def __getitem__(self, k):
        return self.ranks[k]

    def __len__(self):
        return len(self.ranks)

    def __iter__(self):
        return iter(self.ranks)

    def __str__(self):
        return "(" + ",".join(map(str, self.ranks)) + ")"

    def dashed(self) -> str:
        return "-".join(map(str, self.ranks))

    @classmethod
    def parse(cls, text: str) -> "RankProfile":
        parts = text.strip().strip("()").replace("-", ",").split(",")
        return cls(tuple(int(p) for p in parts if p.strip()))

    def check(self, n: int) -> None:
        if len(self.ranks) != n // 2 + 1:
            raise InvalidInputError(f"profile {self} has wrong length for N={n}")
        bounds = max_rank_profile(n).ranks
        if not (1 <= self.ranks[0] <= n + 1):
            raise InvalidInputError(f"profile {self}: r(rho) out of range for N={n}")
        for r, hi in zip(self.ranks, bounds):
            if r < 0 or r > hi:
                raise InvalidInputError(f"profile {self} exceeds the maximal profile {max_rank_profile(n)}")


def max_rank_profile(n: int) -> RankProfile:
    if n < 2:
        raise InvalidInputError("max_rank_profile needs n >= 2")
    return RankProfile((n + 1,) + tuple((k + 1) * (n - k + 1) for k in range(1, n // 2 + 1)))


def view_summaries(s: SymmetricState, rel_tol: float | None = None) -> list[SpectralSummary]:
    """Spectral summaries of rho and each partial-transposition view (index = k)."""
    return [spectral_summary(v, rel_tol) for v in view_matrices(s)]


def rank_profile(s: SymmetricState, rel_tol: float | None = None) -> RankProfile:
    return RankProfile(tuple(summ.rank for summ in view_summaries(s, rel_tol)))


@dataclass(frozen=True)
class PPTResult:
    is_ppt: bool
    min_eigenvalue: float
    worst_k: int

    def __bool__(self):
        return self.is_ppt


def is_ppt(s: SymmetricState, rel_tol: float | None = None) -> PPTResult:
    """PPT test over the state and its N//2 inequivalent partial transpositions.

    The witness is the most negative eigenvalue and the view index k where
    it occurs (k = 0 means the matrix itself is not positive).
    """
    tol = _tol(rel_tol)
    worst, worst_k = np.inf, 0
    for k, v in enumerate(view_matrices(s)):
        lam = np.linalg.eigvalsh(v)[0]
        if lam < worst:
            worst, worst_k = lam, k
    return PPTResult(bool(worst >= -tol), float(worst), worst_k)
