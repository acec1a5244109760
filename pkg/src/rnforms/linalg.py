"""Dense Hermitian linear algebra with explicit rank tolerances.

Conventions used throughout the package:

* scalars are complex; real inputs are embedded,
* inner products are ``<u, v> = v.conj().T @ u`` (linear in the first slot),
* a form with Gram matrix ``G`` evaluates as ``s(x, y) = y.conj().T @ G @ x``,
* eigenvalues are reported in ascending order,
* an eigenvalue ``lam`` counts as zero iff ``|lam| <= tol_rank * max(|lam|_max, 1)``.

The eigensolver is a cyclic Jacobi iteration for Hermitian matrices.  It is
deterministic (fixed sweep order, stable eigenvalue sort, fixed eigenvector
phases), has no dependencies beyond numpy array arithmetic, and is entirely
adequate at the dimensions this package targets (<= ~100).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (
    DimensionMismatchError,
    NotHermitianError,
    NotOrthonormalError,
    NotPositiveSemidefiniteError,
)

_EPS = float(np.finfo(np.float64).eps)


def as_complex_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    return m


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermitize(a: np.ndarray) -> np.ndarray:
    """Nearest Hermitian matrix, used to kill roundoff drift in products."""
    return (a + a.conj().T) / 2.0


def require_hermitian(h, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Validate Hermitian symmetry and return the exactly symmetrized copy."""
    m = as_complex_matrix(h)
    scale = 1.0 + max_abs(m)
    if max_abs(m - m.conj().T) > tol.tol_eq * scale:
        raise NotHermitianError("matrix is not Hermitian within tol_eq")
    return hermitize(m)


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal columns spanning a subspace of C^ambient_dim."""

    ambient_dim: int
    columns: np.ndarray  # shape (ambient_dim, k), possibly k = 0

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    def __post_init__(self):
        if self.columns.shape[0] != self.ambient_dim:
            raise DimensionMismatchError("basis columns do not match ambient dimension")
        if self.dim > self.ambient_dim:
            raise DimensionMismatchError("more basis vectors than ambient dimension")


def require_orthonormal(basis: SubspaceBasis, tol: ToleranceConfig = DEFAULT_TOL) -> None:
    b = basis.columns
    gram = b.conj().T @ b
    if max_abs(gram - np.eye(basis.dim)) > tol.tol_ortho:
        raise NotOrthonormalError("basis columns are not orthonormal within tol_ortho")


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """One complex Jacobi rotation annihilating a[p, q], in place.

    Conjugates by the unitary that is the identity outside the (p, q) plane
    and ``[[c, s*phase], [-s*conj(phase), c]]`` inside it, where ``phase``
    carries the argument of a[p, q].
    """
    apq = a[p, q]
    absb = abs(apq)
    phase = apq / absb
    app = a[p, p].real
    aqq = a[q, q].real
    tau = (aqq - app) / (2.0 * absb)
    if tau >= 0.0:
        t = 1.0 / (tau + np.hypot(1.0, tau))
    else:
        t = -1.0 / (-tau + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    s_conj_phase = s * np.conj(phase)
    s_phase = s * phase

    # columns p, q of A (right multiplication by U)
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s_conj_phase * col_q
    a[:, q] = s * col_p + c * np.conj(phase) * col_q
    # rows p, q of A (left multiplication by U^H)
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s_phase * row_q
    a[q, :] = s * row_p + c * phase * row_q
    # the rotation zeroes the pivot exactly in exact arithmetic
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    col_p = v[:, p].copy()
    col_q = v[:, q].copy()
    v[:, p] = c * col_p - s_conj_phase * col_q
    v[:, q] = s * col_p + c * np.conj(phase) * col_q


def _off_norm(a: np.ndarray) -> float:
    n = a.shape[0]
    off = a - np.diag(np.diagonal(a))
    return float(np.linalg.norm(off))


_MAX_SWEEPS = 60


def eigh(h, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Returns ``(w, V)`` with real eigenvalues ``w`` ascending and orthonormal
    eigenvector columns ``V`` such that ``h = V @ diag(w) @ V.conj().T``.
    Deterministic: sweep order is fixed, the final sort is stable, and each
    eigenvector is scaled so its largest-modulus entry is real positive.
    """
    a = require_hermitian(h, tol)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.array([a[0, 0].real]), v

    fro = float(np.linalg.norm(a))
    if fro == 0.0:
        return np.zeros(n), v
    target = n * _EPS * fro
    skip = _EPS * fro / (16.0 * n)

    for _ in range(_MAX_SWEEPS):
        if _off_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > skip:
                    _jacobi_rotate(a, v, p, q)

    w = np.diagonal(a).real.copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(n):
        col = v[:, j]
        i = int(np.argmax(np.abs(col)))
        piv = col[i]
        if abs(piv) > 0.0:
            v[:, j] = col * (np.conj(piv) / abs(piv))
    return w, v


def zero_cutoff(eigenvalues: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Shared rank rule: eigenvalues at or below this threshold count as zero."""
    lam_max = max_abs(eigenvalues)
    return tol.tol_rank * max(lam_max, 1.0)


def is_psd(h, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    w, _ = eigh(h, tol)
    if w.size == 0:
        return True
    return float(w[0]) >= -tol.tol_psd * max(float(w[-1]), 1.0)


def require_psd(h, tol: ToleranceConfig = DEFAULT_TOL, what: str = "matrix") -> None:
    if not is_psd(h, tol):
        raise NotPositiveSemidefiniteError(f"{what} is not positive semidefinite within tol_psd")


def psd_sqrt(h, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Positive square root of a PSD Hermitian matrix.

    Negative eigenvalues within ``tol_psd * max(lam_max, 1)`` are clamped to
    zero; anything more negative raises.
    """
    w, v = eigh(h, tol)
    if w.size == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    scale = max(float(w[-1]), 1.0)
    if float(w[0]) < -tol.tol_psd * scale:
        raise NotPositiveSemidefiniteError("psd_sqrt input has a significantly negative eigenvalue")
    root = np.sqrt(np.clip(w, 0.0, None))
    return hermitize((v * root) @ v.conj().T)


def pinv(h, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a Hermitian matrix via its eigensystem."""
    w, v = eigh(h, tol)
    return _pinv_from_eig(w, v, zero_cutoff(w, tol))


def _pinv_from_eig(w: np.ndarray, v: np.ndarray, cutoff: float) -> np.ndarray:
    inv = np.where(np.abs(w) > cutoff, 1.0 / np.where(w == 0.0, 1.0, w), 0.0)
    return hermitize((v * inv) @ v.conj().T)


def kernel_basis(h, tol: ToleranceConfig = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of the numerical kernel of a PSD Hermitian matrix."""
    w, v = eigh(h, tol)
    cutoff = zero_cutoff(w, tol)
    cols = v[:, np.abs(w) <= cutoff]
    return SubspaceBasis(ambient_dim=v.shape[0], columns=cols)


def range_basis(h, tol: ToleranceConfig = DEFAULT_TOL) -> SubspaceBasis:
    w, v = eigh(h, tol)
    cutoff = zero_cutoff(w, tol)
    cols = v[:, np.abs(w) > cutoff]
    return SubspaceBasis(ambient_dim=v.shape[0], columns=cols)


def project_onto(basis: SubspaceBasis, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection onto the span of an orthonormal basis."""
    require_orthonormal(basis, tol)
    b = basis.columns
    if basis.dim == 0:
        return np.zeros((basis.ambient_dim, basis.ambient_dim), dtype=np.complex128)
    return hermitize(b @ b.conj().T)


def parallel_sum(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Parallel sum A : B = A (A + B)^+ B of two PSD matrices.

    The form analogue of resistors in parallel; symmetric in its arguments
    and dominated by both.
    """
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatchError("parallel_sum arguments must share a dimension")
    return hermitize(a @ pinv(a + b, tol) @ b)


def parallel_sum_base_cutoff(a: np.ndarray, b: np.ndarray, cutoff: float) -> np.ndarray:
    """Parallel sum with a caller-fixed absolute rank cutoff.

    Written as ``A - A (A + B)^+ A`` (the same operator, since
    range(A) <= range(A+B)).  Both choices matter when B carries a huge scale
    factor: the sandwich by A suppresses noise directions that the inflated
    spectrum of A + B would otherwise turn into O(1) garbage, and the absolute
    cutoff keeps genuinely small eigenvalues of A on ker(B) invertible.  Used
    by the Lebesgue-decomposition oracle.
    """
    m = a + b
    w, v = eigh(m)
    return hermitize(a - a @ _pinv_from_eig(w, v, cutoff) @ a)


def null_space_elimination(m: np.ndarray, cutoff: float) -> np.ndarray:
    """Null-space basis columns by Gauss-Jordan elimination.

    Deliberately a different algorithm from the spectral kernel rule, so it
    can serve as an independent cross-check of kernel computations.  The
    returned columns span the null space but are not orthonormal.
    """
    a = np.array(m, dtype=np.complex128)
    rows, cols = a.shape
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) <= cutoff:
            continue
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r, :] = a[r, :] / a[r, c]
        mask = np.arange(rows) != r
        a[mask, :] -= np.outer(a[mask, c], a[r, :])
        pivot_cols.append(c)
        r += 1
    free_cols = [c for c in range(cols) if c not in pivot_cols]
    basis = np.zeros((cols, len(free_cols)), dtype=np.complex128)
    for j, fc in enumerate(free_cols):
        basis[fc, j] = 1.0
        for ri, pc in enumerate(pivot_cols):
            basis[pc, j] = -a[ri, fc]
    return basis


def matrix_rank_elimination(m: np.ndarray, cutoff: float) -> int:
    """Numerical rank by column-pivoted Gaussian elimination.

    An elimination-based alternative to the spectral rank rule; cheap for the
    stacked linear systems (commutant equations) where a full Jacobi
    eigendecomposition would dominate the runtime.
    """
    a = np.array(m, dtype=np.complex128)
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank >= rows:
            break
        piv = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[piv, col]) <= cutoff:
            continue
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        a[rank + 1 :, :] -= np.outer(a[rank + 1 :, col] / a[rank, col], a[rank, :])
        rank += 1
    return rank
