"""Small dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Bipartite
states store their amplitudes in row-major order, ``(i, j) -> i * dim_b + j``,
so ``amplitudes.reshape(dim_a, dim_b)`` is the coefficient matrix of the state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonSquare, NotNormalized

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class Tolerance:
    """Thresholds for numerical predicates.

    ``eq`` bounds Frobenius-norm residuals of algebraic identities; ``rank_cut``
    is the singular value below which a Schmidt coefficient counts as zero.
    """

    eq: float = 1e-9
    rank_cut: float = 1e-8

    def __post_init__(self):
        if not (self.eq > 0 and self.rank_cut > 0):
            raise ValueError("tolerances must be strictly positive")
        if self.rank_cut < self.eq:
            raise ValueError("rank_cut must be at least eq")

    @classmethod
    def loose(cls, eq: float) -> "Tolerance":
        """Tolerance with ``eq`` overridden and ``rank_cut`` raised to match if needed."""
        return cls(eq=eq, rank_cut=max(eq, cls.rank_cut))


DEFAULT_TOL = Tolerance()


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def frob(m) -> float:
    return float(np.linalg.norm(m))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


@dataclass(frozen=True, eq=False)
class BipartiteState:
    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.dim_a * self.dim_b:
            raise DimensionMismatch(
                f"{amps.size} amplitudes do not fit a {self.dim_a}x{self.dim_b} system"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_matrix(cls, m) -> "BipartiteState":
        m = as_matrix(m)
        return cls(m.shape[0], m.shape[1], m.reshape(-1))

    @property
    def matrix(self) -> np.ndarray:
        """Coefficient matrix ``M`` with ``psi = sum_ij M[i, j] e_i (x) e_j``."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "BipartiteState":
        return BipartiteState(self.dim_a, self.dim_b, self.amplitudes / self.norm)


def maximally_entangled(d: int) -> BipartiteState:
    """``(1/sqrt d) sum_i e_i (x) e_i``."""
    return BipartiteState.from_matrix(np.eye(d) / np.sqrt(d))


def product_state(a, b) -> BipartiteState:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return BipartiteState(a.size, b.size, np.kron(a, b))


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left: np.ndarray   # columns are the orthonormal a_i
    right: np.ndarray  # columns are the orthonormal b_i

    @property
    def rank(self) -> int:
        return int(self.coefficients.size)

    def reconstruct(self) -> np.ndarray:
        """Amplitude vector of ``sum_i lambda_i a_i (x) b_i``."""
        m = (self.left * self.coefficients) @ self.right.T
        return m.reshape(-1)


def schmidt(psi: BipartiteState, tol: Tolerance = DEFAULT_TOL) -> SchmidtDecomposition:
    """Schmidt decomposition via the SVD of the coefficient matrix.

    Singular values at or below ``tol.rank_cut`` are dropped.  The right
    vectors are the complex conjugates of the right singular vectors, so that
    ``psi = sum_i lambda_i a_i (x) b_i`` holds without conjugation.
    """
    if abs(psi.norm - 1.0) > tol.eq:
        raise NotNormalized(f"state has norm {psi.norm!r}")
    u, s, vh = np.linalg.svd(psi.matrix, full_matrices=False)
    keep = s > tol.rank_cut
    return SchmidtDecomposition(
        coefficients=s[keep].copy(),
        left=u[:, keep].copy(),
        right=vh[keep, :].T.copy(),
    )


def schmidt_rank(psi: BipartiteState, tol: Tolerance = DEFAULT_TOL) -> int:
    return schmidt(psi, tol).rank


def _require_square(m: np.ndarray):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"matrix of shape {m.shape} is not square")


def is_hermitian(m, tol: Tolerance = DEFAULT_TOL) -> bool:
    m = as_matrix(m)
    _require_square(m)
    return frob(m - dagger(m)) <= tol.eq


def projection_residual(m) -> float:
    """``max(|m - m*|, |m^2 - m|)`` in Frobenius norm."""
    m = as_matrix(m)
    _require_square(m)
    return max(frob(m - dagger(m)), frob(m @ m - m))


def is_projection(m, tol: Tolerance = DEFAULT_TOL) -> bool:
    return projection_residual(m) <= tol.eq


def min_eigenvalue(m) -> float:
    m = as_matrix(m)
    _require_square(m)
    herm = (m + dagger(m)) / 2
    return float(np.linalg.eigvalsh(herm)[0])


def is_povm(family, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff every element is PSD (within ``tol.eq``) and they sum to the identity."""
    mats = [as_matrix(m) for m in family]
    if not mats:
        return False
    d = mats[0].shape[0]
    for m in mats:
        _require_square(m)
        if m.shape[0] != d:
            raise DimensionMismatch("POVM elements have different dimensions")
    if any(min_eigenvalue(m) < -tol.eq for m in mats):
        return False
    return frob(sum(mats) - np.eye(d)) <= tol.eq


def is_pvm(family, tol: Tolerance = DEFAULT_TOL) -> bool:
    return is_povm(family, tol) and all(is_projection(m, tol) for m in family)


def is_isometry(u, tol: Tolerance = DEFAULT_TOL) -> bool:
    u = as_matrix(u)
    return frob(dagger(u) @ u - np.eye(u.shape[1])) <= tol.eq


def range_basis(p: np.ndarray, cut: float = 0.5) -> np.ndarray:
    """Orthonormal basis (as columns) of the range of a Hermitian projection."""
    w, v = np.linalg.eigh((p + dagger(p)) / 2)
    return v[:, w > cut]


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_state(dim_a: int, dim_b: int, rng: np.random.Generator, rank: int | None = None) -> BipartiteState:
    """Random normalized state; with ``rank`` given, its Schmidt rank is exactly ``rank``."""
    if rank is None:
        z = rng.standard_normal(dim_a * dim_b) + 1j * rng.standard_normal(dim_a * dim_b)
        return BipartiteState(dim_a, dim_b, z / np.linalg.norm(z))
    ua = random_unitary(dim_a, rng)[:, :rank]
    ub = random_unitary(dim_b, rng)[:, :rank]
    coeffs = rng.uniform(0.2, 1.0, size=rank)
    m = (ua * coeffs) @ ub.T
    return BipartiteState.from_matrix(m / np.linalg.norm(m))
