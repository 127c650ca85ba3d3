"""Compressed Dicke-basis representation of N-qubit symmetric states.

A symmetric N-qubit operator is stored as an (N+1)x(N+1) matrix in the
normalized Dicke basis ``|D_m^N>``, m = number of excitations (ones).
The bipartite views used for partial transposition live on
``Sym_k (x) Sym_{N-k}`` with row index ``(i, j) -> i*(N-k+1) + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
MAX_FULL_QUBITS = 12
MAX_QUBITS = 30


class InvalidInputError(ValueError):
    """Raised when an operation receives arguments outside its domain."""


@lru_cache(maxsize=None)
def binomials(n: int) -> tuple[int, ...]:
    """Exact binomial row C(n, 0..n)."""
    return tuple(comb(n, m) for m in range(n + 1))


@dataclass(frozen=True, eq=False)
class SymmetricState:
    """Symmetric N-qubit operator in the normalized Dicke basis.

    Construction only enforces shape and hermiticity, so the same type also
    carries direction matrices and unnormalized remainders. Use
    :meth:`check_density` where a genuine density matrix is required.
    """

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        n = int(self.n_qubits)
        if n < 1 or n > MAX_QUBITS:
            raise InvalidInputError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n}")
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (n + 1, n + 1):
            raise InvalidInputError(f"matrix must have shape {(n + 1, n + 1)}, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise InvalidInputError("matrix contains non-finite entries")
        err = np.abs(mat - mat.conj().T).max()
        if err > HERMITIAN_TOL * max(1.0, np.abs(mat).max()):
            raise InvalidInputError(f"matrix is not Hermitian (max deviation {err:.3e})")
        mat = (mat + mat.conj().T) / 2
        mat.setflags(write=False)
        object.__setattr__(self, "n_qubits", n)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.n_qubits + 1

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def check_density(self, psd_tol: float = PSD_TOL) -> None:
        """Raise InvalidInputError unless the matrix is a trace-one PSD state."""
        if abs(self.trace - 1) > TRACE_TOL * 100:
            raise InvalidInputError(f"trace is {self.trace!r}, expected 1")
        lam_min = np.linalg.eigvalsh(self.matrix)[0]
        if lam_min < -psd_tol:
            raise InvalidInputError(f"matrix is not PSD (min eigenvalue {lam_min:.3e})")

    def normalized(self) -> "SymmetricState":
        return SymmetricState(self.n_qubits, self.matrix / self.trace)

    @classmethod
    def maximally_mixed(cls, n: int) -> "SymmetricState":
        """Normalized projector onto the symmetric subspace."""
        return cls(n, np.eye(n + 1) / (n + 1))

    @classmethod
    def from_vector(cls, n: int, vec) -> "SymmetricState":
        """Pure state from Dicke coordinates (normalized here)."""
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(n, np.outer(v, v.conj()))

    @classmethod
    def dicke(cls, n: int, m: int) -> "SymmetricState":
        v = np.zeros(n + 1)
        v[m] = 1
        return cls.from_vector(n, v)

    @classmethod
    def product_mixture(cls, n: int, weights, vectors) -> "SymmetricState":
        """Convex mixture of symmetric product projectors ``[e^{(x)N}]``."""
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        mat = np.zeros((n + 1, n + 1), dtype=complex)
        for wi, e in zip(w, vectors):
            v = product_state_coords(e, n, normalize=True)
            mat += wi * np.outer(v, v.conj())
        return cls(n, mat)


@dataclass(frozen=True)
class ProductVector:
    """Single-qubit vector ``a|0> + b|1>`` whose N-fold power is a symmetric product state."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if not (np.isfinite(a) and np.isfinite(b)) or (a == 0 and b == 0):
            raise InvalidInputError("product vector amplitudes must be finite and not both zero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_alpha(cls, alpha: complex) -> "ProductVector":
        return cls(1.0, alpha)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "ProductVector":
        return cls(np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2))

    @property
    def alpha(self) -> complex:
        """Ratio b/a; ``inf`` for the pole (0, 1)."""
        return complex(np.inf) if self.a == 0 else self.b / self.a

    def canonical(self) -> "ProductVector":
        """(1, alpha) when a != 0, else (0, 1)."""
        if self.a == 0:
            return ProductVector(0.0, 1.0)
        return ProductVector(1.0, self.b / self.a)

    def unit(self) -> tuple[complex, complex]:
        nrm = np.hypot(abs(self.a), abs(self.b))
        return self.a / nrm, self.b / nrm


def _power_coords(a: complex, b: complex, n: int) -> np.ndarray:
    m = np.arange(n + 1)
    binom = np.sqrt(np.array(binomials(n), dtype=float))
    return binom * np.power(a, n - m) * np.power(b, m)


def product_state_coords(e: ProductVector, n: int, conjugate_first_k: int = 0,
                         normalize: bool = False) -> np.ndarray:
    """Coordinates of ``e^{(x)n}`` with the first k factors conjugated.

    For ``conjugate_first_k == 0`` the result is the length n+1 Dicke vector
    ``sqrt(C(n,m)) a^(n-m) b^m``. For k >= 1 it is the
    ``(k+1)(n-k+1)`` vector ``conj(e^{(x)k}) (x) e^{(x)(n-k)}`` in the
    bipartite view basis.
    """
    if not isinstance(e, ProductVector):
        e = ProductVector(*e)
    k = int(conjugate_first_k)
    if k < 0 or k > n // 2:
        raise InvalidInputError(f"conjugate_first_k must be in 0..{n // 2}, got {k}")
    a, b = e.unit() if normalize else (e.a, e.b)
    if k == 0:
        return _power_coords(a, b, n)
    left = _power_coords(a, b, k).conj()
    right = _power_coords(a, b, n - k)
    return np.kron(left, right)


@dataclass(frozen=True, eq=False)
class CompressionIsometry:
    matrix: np.ndarray
    variant: str = field(default="")


def _isometry_entries(n: int, k: int, variant: str) -> np.ndarray:
    d_left, d_right = k + 1, n - k + 1
    out = np.zeros((d_left * d_right, n + 1))
    cn, ck, cnk = binomials(n), binomials(k), binomials(n - k)
    for i in range(d_left):
        for j in range(d_right):
            if variant == "printed":
                num = cn[i] * cn[j]
            else:
                num = ck[i] * cnk[j]
            out[i * d_right + j, i + j] = np.sqrt(num / cn[i + j])
    return out


@lru_cache(maxsize=None)
def _isometry(n: int, k: int) -> CompressionIsometry:
    for variant in ("printed", "split"):
        mat = _isometry_entries(n, k, variant)
        if np.abs(mat.T @ mat - np.eye(n + 1)).max() < 1e-12:
            mat.setflags(write=False)
            return CompressionIsometry(mat, variant)
    raise RuntimeError(f"no isometric entry formula for N={n}, k={k}")


def compression_isometry(n: int, k: int) -> np.ndarray:
    """Real isometry from Sym_N into Sym_k (x) Sym_{N-k}.

    The entry formula is validated as an isometry on construction; the
    variant that passed is available via :func:`isometry_variant`.
    """
    if k < 1 or k > n // 2:
        raise InvalidInputError(f"k must be in 1..{n // 2}, got {k}")
    return _isometry(n, k).matrix


def isometry_variant(n: int, k: int) -> str:
    compression_isometry(n, k)
    return _isometry(n, k).variant


def _view_matrix(mat: np.ndarray, n: int, k: int) -> np.ndarray:
    if k == 0:
        return mat
    bt = _isometry(n, k).matrix
    d_left, d_right = k + 1, n - k + 1
    emb = bt @ mat @ bt.T
    emb = emb.reshape(d_left, d_right, d_left, d_right)
    return emb.transpose(2, 1, 0, 3).reshape(d_left * d_right, d_left * d_right)


@dataclass(frozen=True, eq=False)
class BipartiteView:
    k: int
    rows_dim: int
    cols_dim: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.rows_dim * self.cols_dim


def partial_transpose_view(s: SymmetricState, k: int) -> BipartiteView:
    """Partial transposition of the first k qubits, on Sym_k (x) Sym_{N-k}."""
    n = s.n_qubits
    if k < 1 or k > n // 2:
        raise InvalidInputError(f"k must be in 1..{n // 2}, got {k}")
    mat = _view_matrix(s.matrix, n, k)
    mat = (mat + mat.conj().T) / 2
    mat.setflags(write=False)
    return BipartiteView(k, k + 1, n - k + 1, mat)


def view_matrices(s: SymmetricState) -> list[np.ndarray]:
    """[state, view_1, ..., view_{N//2}] as plain arrays (index = k)."""
    n = s.n_qubits
    return [s.matrix] + [partial_transpose_view(s, k).matrix for k in range(1, n // 2 + 1)]


def view_dims(n: int) -> list[int]:
    return [n + 1] + [(k + 1) * (n - k + 1) for k in range(1, n // 2 + 1)]


@lru_cache(maxsize=None)
def dicke_embedding(n: int) -> np.ndarray:
    """The (N+1) x 2^N matrix whose rows are normalized Dicke vectors."""
    if n > MAX_FULL_QUBITS:
        raise InvalidInputError(f"full-space expansion refused for N={n} > {MAX_FULL_QUBITS}")
    weights = np.array([bin(x).count("1") for x in range(2 ** n)])
    out = np.zeros((n + 1, 2 ** n))
    cn = binomials(n)
    for m in range(n + 1):
        out[m, weights == m] = 1 / np.sqrt(cn[m])
    out.setflags(write=False)
    return out


def expand_to_full(s: SymmetricState) -> np.ndarray:
    """Embed the compressed matrix into the 2^N-dimensional qubit space."""
    b = dicke_embedding(s.n_qubits)
    return b.T @ s.matrix @ b


def full_partial_transpose(rho: np.ndarray, n: int, k: int) -> np.ndarray:
    """Literal partial transpose of the first k qubits of a 2^N operator."""
    d_left, d_right = 2 ** k, 2 ** (n - k)
    t = rho.reshape(d_left, d_right, d_left, d_right)
    return t.transpose(2, 1, 0, 3).reshape(rho.shape)


def oracle_view(s: SymmetricState, k: int) -> np.ndarray:
    """Brute-force bipartite view via the full 2^N space (for N <= 12)."""
    n = s.n_qubits
    full = full_partial_transpose(expand_to_full(s), n, k)
    restrict = np.kron(dicke_embedding(k), dicke_embedding(n - k))
    return restrict @ full @ restrict.T


@lru_cache(maxsize=None)
def _half_map(n: int) -> np.ndarray:
    f, c = n // 2, (n + 1) // 2
    out = np.zeros((2 * (f + 1), n + 1))
    cn, cf = binomials(n), binomials(f)
    for b in range(2):
        for j in range(f + 1):
            m = b * c + j
            out[b * (f + 1) + j, m] = np.sqrt(cf[j] / cn[m])
    out.setflags(write=False)
    return out


def half_map(n: int) -> np.ndarray:
    """Linear map sending ``e^{(x)N}`` to ``(1, a^ceil(N/2)) (x) e^{(x)floor(N/2)}``.

    Rows are indexed ``(b, j) -> b*(floor(N/2)+1) + j``.
    """
    if n < 2:
        raise InvalidInputError("compression needs N >= 2")
    return _half_map(n)


@dataclass(frozen=True, eq=False)
class CompressedState:
    """Bipartite 2 x (floor(N/2)+1) image of an N-qubit symmetric state."""

    n_qubits: int
    matrix: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return 2, self.n_qubits // 2 + 1


def compress_half(s, invert: bool = False):
    """Compress a symmetric state into a 2 x (floor(N/2)+1) bipartite state.

    Forward maps a SymmetricState to the trace-normalized ``F rho F^dag``;
    F is injective so the rank is preserved. With ``invert=True`` a
    CompressedState is mapped back through the pseudo-inverse of F.
    """
    if invert:
        pinv = np.linalg.pinv(half_map(s.n_qubits))
        back = pinv @ s.matrix @ pinv.T
        back = (back + back.conj().T) / 2
        return SymmetricState(s.n_qubits, back / np.trace(back).real)
    fmap = half_map(s.n_qubits)
    out = fmap @ s.matrix @ fmap.T
    out = (out + out.conj().T) / 2
    return CompressedState(s.n_qubits, out / np.trace(out).real)


def random_state(n: int, rng: np.random.Generator, rank: int | None = None) -> SymmetricState:
    """Random symmetric density matrix (Ginibre ensemble of the given rank)."""
    d = n + 1
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    mat = g @ g.conj().T
    return SymmetricState(n, mat / np.trace(mat).real)


def random_product_vector(rng: np.random.Generator) -> ProductVector:
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    return ProductVector(z[0], z[1])
