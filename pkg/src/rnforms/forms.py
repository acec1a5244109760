"""Absolute continuity, singularity, Lebesgue decomposition and
Radon-Nikodym operators for nonnegative Hermitian forms on a
finite-dimensional space.

A form is stored as a PSD Gram matrix G with ``s(x, y) = y^H G x``.  The
associated Hilbert space is realized concretely: coordinates of the class of
``x`` are ``coord_map @ x`` where the rows of ``coord_map`` are eigenvectors
of G above the rank cutoff, scaled by sqrt(eigenvalue).  With that scaling
the standard inner product of coordinates reproduces the form exactly.

Everything here is finite-dimensional, which collapses the sequence-based
definitions of the general theory to algebraic ones:

* a form s is absolutely continuous with respect to t iff
  ker(t) <= ker(s) (a violating constant sequence is returned as witness),
* the representing-sequence construction collapses to a single exact
  representative,
* "J is closable" carries no content, J itself is a matrix between the two
  quotient spaces.

Each collapsed definition is cross-checked by a brute-force oracle in the
test suite, so a misreading of the equivalence would not survive testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, ToleranceConfig
from .errors import (
    DimensionMismatchError,
    NotAbsolutelyContinuousError,
    OracleMismatchError,
)
from . import linalg
from .serialize import matrix_from_json, matrix_to_json

# Absolute Frobenius threshold at which the projection formula and the
# parallel-sum limit are declared inconsistent (rank-tolerance trouble).
ORACLE_ABORT_FROBENIUS = 1e-6


@dataclass(frozen=True)
class NonnegativeForm:
    """Nonnegative Hermitian form, stored as its PSD Gram matrix."""

    gram: np.ndarray

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @classmethod
    def from_gram(cls, gram, tol: ToleranceConfig = DEFAULT_TOL, check_psd: bool = True) -> "NonnegativeForm":
        g = linalg.require_hermitian(gram, tol)
        if check_psd:
            linalg.require_psd(g, tol, what="form Gram matrix")
        g.setflags(write=False)
        return cls(gram=g)

    def __call__(self, x, y) -> complex:
        x = np.asarray(x, dtype=np.complex128)
        y = np.asarray(y, dtype=np.complex128)
        return complex(y.conj() @ self.gram @ x)

    def quad(self, x) -> float:
        """The quadratic form s(x, x), real by Hermitian symmetry."""
        return self(x, x).real

    def scaled(self, c: float) -> "NonnegativeForm":
        if c < 0:
            raise ValueError("scaling a nonnegative form requires c >= 0")
        return NonnegativeForm.from_gram(c * self.gram, check_psd=False)

    def __add__(self, other: "NonnegativeForm") -> "NonnegativeForm":
        _require_same_dim(self, other)
        return NonnegativeForm.from_gram(self.gram + other.gram, check_psd=False)

    def to_json(self) -> dict:
        return {"dim": self.dim, "gram": matrix_to_json(self.gram)}

    @classmethod
    def from_json(cls, data, tol: ToleranceConfig = DEFAULT_TOL) -> "NonnegativeForm":
        gram = matrix_from_json(data["gram"])
        if "dim" in data and int(data["dim"]) != gram.shape[0]:
            raise ValueError("declared dim does not match the Gram matrix")
        return cls.from_gram(gram, tol)


def _require_same_dim(s: NonnegativeForm, t: NonnegativeForm) -> None:
    if s.dim != t.dim:
        raise DimensionMismatchError(f"forms live on different spaces: {s.dim} vs {t.dim}")


@dataclass(frozen=True)
class QuotientHilbert:
    """The Hilbert space of a form: quotient by the null space, in coordinates.

    ``coord_map`` (hilbert_dim x ambient_dim) sends x in D to coordinates,
    ``lift`` (ambient_dim x hilbert_dim) is the minimum-norm right inverse.
    """

    ambient_dim: int
    hilbert_dim: int
    coord_map: np.ndarray
    lift: np.ndarray

    def coord(self, x) -> np.ndarray:
        return self.coord_map @ np.asarray(x, dtype=np.complex128)

    def lift_vec(self, f) -> np.ndarray:
        return self.lift @ np.asarray(f, dtype=np.complex128)


@dataclass(frozen=True)
class EmbeddingOperator:
    """The everywhere-defined matrix form of the map "x maps to x" between quotients.

    ``matrix`` sends H_t coordinates to H_s coordinates and satisfies
    ``matrix @ domain.coord_map == codomain.coord_map`` on all of D.
    """

    matrix: np.ndarray
    domain: QuotientHilbert
    codomain: QuotientHilbert


@dataclass(frozen=True)
class Decomposition:
    """Split s = ac_part + sing_part with ac_part t-absolutely continuous
    and sing_part t-singular.  ``oracle_gap`` is the Frobenius distance
    between the projection-formula ac part and the parallel-sum limit."""

    ac_part: NonnegativeForm
    sing_part: NonnegativeForm
    oracle_gap: float


@dataclass(frozen=True)
class RNOperator:
    """Positive selfadjoint operator S on H_t with <S^(1/2)x, S^(1/2)y>_t = s(x, y)."""

    matrix: np.ndarray
    base: QuotientHilbert


def quotient_space(s: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL) -> QuotientHilbert:
    """Build H_s: eigenvectors of the Gram matrix above the rank cutoff,
    scaled so that coordinates reproduce the form under the standard product."""
    w, v = linalg.eigh(s.gram, tol)
    cutoff = linalg.zero_cutoff(w, tol)
    keep = w > cutoff
    lam = w[keep]
    vecs = v[:, keep]
    coord_map = np.sqrt(lam)[:, None] * vecs.conj().T
    lift = vecs / np.sqrt(lam)[None, :] if lam.size else np.zeros((s.dim, 0), dtype=np.complex128)
    return QuotientHilbert(
        ambient_dim=s.dim,
        hilbert_dim=int(np.count_nonzero(keep)),
        coord_map=coord_map,
        lift=lift,
    )


def _scale_cutoff(gram: np.ndarray, tol: ToleranceConfig) -> float:
    return tol.tol_rank * max(linalg.max_abs(gram), 1.0)


def absolute_continuity_witness(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray | None:
    """A unit vector x with t(x, x) = 0 and s(x, x) > 0, or None if s is
    t-absolutely continuous.

    Such an x is a constant (t, s)-sequence violating closability, so it is
    simultaneously the witness for the sequence definition and for the
    finite-dimensional kernel-containment criterion.
    """
    _require_same_dim(s, t)
    kern = linalg.kernel_basis(t.gram, tol)
    if kern.dim == 0:
        return None
    compressed = linalg.hermitize(kern.columns.conj().T @ s.gram @ kern.columns)
    w, v = linalg.eigh(compressed, tol)
    if float(w[-1]) <= _scale_cutoff(s.gram, tol):
        return None
    return kern.columns @ v[:, -1]


def is_absolutely_continuous(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> bool:
    """True iff ker(t) <= ker(s), the finite-dimensional form of closability."""
    return absolute_continuity_witness(s, t, tol) is None


def ac_bruteforce_check(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> bool:
    """Definitional absolute-continuity check along an independent route.

    The null space of t is recomputed by Gauss-Jordan elimination (not the
    Jacobi spectral path) and s is maximized over it.  Intended as the
    brute-force oracle that guards the kernel-containment reduction.
    """
    _require_same_dim(s, t)
    null = linalg.null_space_elimination(t.gram, _scale_cutoff(t.gram, tol))
    if null.shape[1] == 0:
        return True
    norms = np.sqrt(np.sum(np.abs(null) ** 2, axis=0))
    null = null / norms[None, :]
    compressed = linalg.hermitize(null.conj().T @ s.gram @ null)
    w, _ = linalg.eigh(compressed, tol)
    return float(w[-1]) <= max(10.0 * _scale_cutoff(s.gram, tol), tol.tol_eq)


def embedding(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> EmbeddingOperator:
    """The embedding J : H_t -> H_s with J(coord_t x) = coord_s x for x in D.

    Defined only under absolute continuity; otherwise "x maps to x" is not
    well defined on classes and the witness is raised.
    """
    witness = absolute_continuity_witness(s, t, tol)
    if witness is not None:
        raise NotAbsolutelyContinuousError(
            "s is not absolutely continuous with respect to t", witness=witness
        )
    dom = quotient_space(t, tol)
    cod = quotient_space(s, tol)
    matrix = cod.coord_map @ dom.lift
    resid = linalg.max_abs(matrix @ dom.coord_map - cod.coord_map)
    if resid > tol.tol_eq * (1.0 + linalg.max_abs(cod.coord_map)):
        raise OracleMismatchError(f"embedding identity J.coord_t = coord_s failed: residual {resid:g}")
    return EmbeddingOperator(matrix=matrix, domain=dom, codomain=cod)


def ac_part_projection(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Gram matrix of the t-absolutely continuous part of s (primary formula).

    With A = s^(1/2) and P the projection onto A . ker(t), the regular part
    of the splitting is A (I - P) A.
    """
    _require_same_dim(s, t)
    a = linalg.psd_sqrt(s.gram, tol)
    kern = linalg.kernel_basis(t.gram, tol)
    if kern.dim == 0:
        return np.array(s.gram)
    image = a @ kern.columns
    span = linalg.range_basis(linalg.hermitize(image @ image.conj().T), tol)
    p = linalg.project_onto(span, tol)
    return linalg.hermitize(a @ (np.eye(s.dim) - p) @ a)


def ac_part_parallel_limit(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Independent oracle: the nondecreasing limit of s : (2^k t).

    The rank cutoff inside each parallel sum is anchored at the scale of the
    original pair, not at the inflated scale of s + 2^k t; see
    ``parallel_sum_base_cutoff`` for why.
    """
    _require_same_dim(s, t)
    cutoff = tol.tol_rank * max(linalg.max_abs(s.gram), linalg.max_abs(t.gram), 1.0)
    prev = linalg.parallel_sum_base_cutoff(s.gram, np.array(t.gram), cutoff)
    for k in range(1, tol.max_parallel_sum_doublings + 1):
        cur = linalg.parallel_sum_base_cutoff(s.gram, (2.0**k) * t.gram, cutoff)
        if float(np.linalg.norm(cur - prev)) < tol.tol_eq:
            return cur
        prev = cur
    return prev


def is_singular(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> bool:
    """True iff the parallel sum s : t vanishes, i.e. the square-root ranges
    meet only in 0, i.e. the only form below both is zero."""
    _require_same_dim(s, t)
    p = linalg.parallel_sum(s.gram, t.gram, tol)
    scale = 1.0 + linalg.max_abs(s.gram) + linalg.max_abs(t.gram)
    return linalg.max_abs(p) <= tol.tol_eq * scale


def singular_defect_bruteforce(
    s: NonnegativeForm,
    t: NonnegativeForm,
    tol: ToleranceConfig = DEFAULT_TOL,
    samples: int = 2000,
    seed: int = 0,
) -> float:
    """Brute-force singularity defect for small dimensions.

    Maximizes lam over rank-one forms lam u u^H sitting below both s and t,
    scanning random unit vectors plus structured candidates.  For u in both
    ranges the exact cap is 1 / (u^H G^+ u); any kernel component caps lam
    at 0.  Returns the largest min(cap_s, cap_t) found; singular pairs give
    (numerically) zero.
    """
    _require_same_dim(s, t)
    n = s.dim
    rng = np.random.default_rng(seed)

    cands = [rng.normal(size=(n,)) + 1j * rng.normal(size=(n,)) for _ in range(samples)]
    for g in (s.gram, t.gram, s.gram + t.gram):
        _, v = linalg.eigh(g, tol)
        cands.extend(v.T)
    # principal directions between the two ranges catch near-intersections
    ps = linalg.project_onto(linalg.range_basis(s.gram, tol), tol)
    pt = linalg.project_onto(linalg.range_basis(t.gram, tol), tol)
    _, v = linalg.eigh(linalg.hermitize(ps @ pt @ ps), tol)
    cands.extend(v.T)

    def cap(gram: np.ndarray, gram_pinv: np.ndarray, proj: np.ndarray, u: np.ndarray) -> float:
        out_of_range = float(np.linalg.norm(u - proj @ u))
        if out_of_range > 1e-7:
            return 0.0
        denom = float(np.real(u.conj() @ gram_pinv @ u))
        return 1.0 / denom if denom > 1e-300 else 0.0

    s_pinv = linalg.pinv(s.gram, tol)
    t_pinv = linalg.pinv(t.gram, tol)
    best = 0.0
    for u in cands:
        nu = float(np.linalg.norm(u))
        if nu < 1e-12:
            continue
        u = u / nu
        best = max(best, min(cap(s.gram, s_pinv, ps, u), cap(t.gram, t_pinv, pt, u)))
    return best


def lebesgue_decompose(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> Decomposition:
    """Lebesgue decomposition s = s_a + s_s relative to t.

    The absolutely continuous part comes from the projection formula; the
    parallel-sum limit is recomputed every time as an independent oracle and
    a disagreement beyond ``ORACLE_ABORT_FROBENIUS`` aborts, since that
    indicates inconsistent rank decisions rather than a legitimate answer.
    """
    ac_gram = ac_part_projection(s, t, tol)
    oracle = ac_part_parallel_limit(s, t, tol)
    gap = float(np.linalg.norm(ac_gram - oracle))
    if gap > ORACLE_ABORT_FROBENIUS:
        raise OracleMismatchError(
            "projection formula and parallel-sum limit disagree "
            f"(Frobenius gap {gap:g}); check rank tolerances"
        )
    sing_gram = linalg.hermitize(s.gram - ac_gram)
    ac_part = NonnegativeForm.from_gram(ac_gram, tol)
    sing_part = NonnegativeForm.from_gram(sing_gram, tol)
    if not is_absolutely_continuous(ac_part, t, tol):
        raise OracleMismatchError("decomposition produced a non-absolutely-continuous regular part")
    if not is_singular(sing_part, t, tol):
        raise OracleMismatchError("decomposition produced a non-singular singular part")
    return Decomposition(ac_part=ac_part, sing_part=sing_part, oracle_gap=gap)


def rn_operator(
    s: NonnegativeForm, t: NonnegativeForm, tol: ToleranceConfig = DEFAULT_TOL
) -> RNOperator:
    """The positive operator S = J^H J on H_t whose square root factors s
    through t: <S^(1/2) x, S^(1/2) y>_t = s(x, y) for all x, y in D."""
    emb = embedding(s, t, tol)
    matrix = linalg.hermitize(emb.matrix.conj().T @ emb.matrix)
    root = linalg.psd_sqrt(matrix, tol)
    image = root @ emb.domain.coord_map
    resid = linalg.max_abs(image.conj().T @ image - s.gram)
    if resid > tol.tol_eq * (1.0 + linalg.max_abs(s.gram)):
        raise OracleMismatchError(f"square-root factorization residual {resid:g} exceeds tol_eq")
    return RNOperator(matrix=matrix, base=emb.domain)


def representing_vector(
    s: NonnegativeForm,
    t: NonnegativeForm,
    f,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> np.ndarray:
    """The exact t-representative of the H_s vector f.

    Returns x* in D with <coord_s x, f> = <coord_t x, coord_t x*> for every
    x in D.  In finite dimensions dom J^H is all of H_s, so the approximating
    sequence of the general theory collapses to this single vector.
    """
    emb = embedding(s, t, tol)
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (emb.codomain.hilbert_dim,):
        raise DimensionMismatchError(
            f"f must be an H_s coordinate vector of length {emb.codomain.hilbert_dim}"
        )
    return emb.domain.lift @ (emb.matrix.conj().T @ f)


def uniform_defect(
    s: NonnegativeForm,
    t: NonnegativeForm,
    f,
    x_cand,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """Worst-case representation error of x_cand over the unit ball of s + t.

    Computes sup { |<coord_s x, f> - <coord_t x, coord_t x_cand>| :
    s(x,x) + t(x,x) <= 1 } in closed form: the functional is linear with
    covector l, and the sup equals sqrt(l^H (G_s + G_t)^+ l) provided l is
    orthogonal to ker(G_s + G_t); otherwise the sup is infinite.
    """
    _require_same_dim(s, t)
    qs = quotient_space(s, tol)
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (qs.hilbert_dim,):
        raise DimensionMismatchError(f"f must have length {qs.hilbert_dim}")
    x_cand = np.asarray(x_cand, dtype=np.complex128)
    ell = qs.coord_map.conj().T @ f - t.gram @ x_cand
    m = linalg.hermitize(s.gram + t.gram)
    w, v = linalg.eigh(m, tol)
    cutoff = linalg.zero_cutoff(w, tol)
    kernel_cols = v[:, np.abs(w) <= cutoff]
    if kernel_cols.shape[1]:
        leak = linalg.max_abs(kernel_cols.conj().T @ ell)
        if leak > tol.tol_eq * (1.0 + float(np.linalg.norm(ell))):
            return math.inf
    m_pinv = linalg._pinv_from_eig(w, v, cutoff)
    val = float(np.real(ell.conj() @ m_pinv @ ell))
    return math.sqrt(max(val, 0.0))


def sampled_uniform_defect(
    s: NonnegativeForm,
    t: NonnegativeForm,
    f,
    x_cand,
    n_samples: int = 10000,
    seed: int = 0,
) -> float:
    """Randomized lower bound for :func:`uniform_defect`.

    Draws points on the boundary of the constraint ellipsoid and evaluates
    the defining expression directly (never the closed form), then polishes
    the best sample with a step-adaptive random ascent.  Every evaluated
    point is feasible, so the result can only undershoot the true sup.
    """
    _require_same_dim(s, t)
    qs = quotient_space(s)
    qt = quotient_space(t)
    f = np.asarray(f, dtype=np.complex128)
    x_cand = np.asarray(x_cand, dtype=np.complex128)
    m = linalg.hermitize(s.gram + t.gram)
    b = qt.coord_map @ x_cand
    rng = np.random.default_rng(seed)
    n = s.dim

    def value(x_cols: np.ndarray) -> np.ndarray:
        return np.abs(f.conj() @ (qs.coord_map @ x_cols) - b.conj() @ (qt.coord_map @ x_cols))

    n_polish = max(n_samples // 8, 100)
    n_batch = n_samples - n_polish
    z = rng.normal(size=(n, n_batch)) + 1j * rng.normal(size=(n, n_batch))
    quad = np.real(np.einsum("ij,ij->j", z.conj(), m @ z))
    ok = quad > 1e-30
    z = z[:, ok] / np.sqrt(quad[ok])[None, :]
    vals = value(z)
    best_idx = int(np.argmax(vals)) if vals.size else 0
    best = float(vals[best_idx]) if vals.size else 0.0
    x_best = z[:, best_idx] if vals.size else np.zeros(n, dtype=np.complex128)

    sigma = 0.5
    for _ in range(n_polish):
        y = x_best + sigma * (rng.normal(size=n) + 1j * rng.normal(size=n))
        q = float(np.real(y.conj() @ m @ y))
        if q <= 1e-30:
            continue
        y = y / math.sqrt(q)
        val = float(value(y[:, None])[0])
        if val > best:
            best, x_best = val, y
            sigma *= 1.3
        else:
            sigma *= 0.97
    return best


@dataclass(frozen=True)
class DiracLebesgueStage:
    """Grid stage of the point-evaluation versus area-integral pair.

    On the hat-function space over the uniform grid of [-1, 1] with 2k+1
    nodes, ``s`` evaluates at node 0 (rank one) and ``t`` is the exact
    L2 Gram matrix of the hats (tridiagonal).  ``psi`` is the unit tent at 0
    with s(psi, psi) = 1 and t(psi, psi) = 2/(3k); ``phi`` is the discrete
    mollifier, i.e. the t-representer of evaluation at 0, which integrates
    to exactly 1 and concentrates at 0 as k grows.
    """

    k: int
    s: NonnegativeForm
    t: NonnegativeForm
    psi: np.ndarray
    phi: np.ndarray

    def representing_residual(self) -> float:
        """max over hat basis functions of |phi(0) - <phi, mollifier>_t|."""
        n = 2 * self.k + 1
        e_mid = np.zeros(n)
        e_mid[self.k] = 1.0
        return linalg.max_abs(self.t.gram @ np.conj(self.phi) - e_mid)

    def mollifier_integral(self) -> float:
        """Integral of phi against Lebesgue measure, exact via the partition
        of unity: the hat weights are the row sums of the Gram matrix."""
        weights = np.real(np.sum(self.t.gram, axis=1))
        return float(weights @ np.real(self.phi))


def dirac_lebesgue_family(k: int) -> DiracLebesgueStage:
    """Stage k of the grid family separating pointwise evaluation from area.

    Both forms are full-rank-free of surprises at every finite k (t is
    positive definite, so s is absolutely continuous with respect to t); the
    singularity of the continuum pair shows up only asymptotically, as
    t(psi_k, psi_k) = 2/(3k) -> 0 while s(psi_k, psi_k) stays pinned at 1.
    """
    if k < 2:
        raise ValueError("grid resolution k must be at least 2")
    n = 2 * k + 1
    h = 1.0 / k
    mid = k

    diag = np.full(n, 2.0 * h / 3.0)
    diag[0] = diag[-1] = h / 3.0
    t_gram = np.diag(diag)
    off = np.full(n - 1, h / 6.0)
    t_gram += np.diag(off, 1) + np.diag(off, -1)

    s_gram = np.zeros((n, n))
    s_gram[mid, mid] = 1.0

    psi = np.zeros(n)
    psi[mid] = 1.0
    e_mid = np.zeros(n)
    e_mid[mid] = 1.0
    phi = np.linalg.solve(t_gram, e_mid)

    return DiracLebesgueStage(
        k=k,
        s=NonnegativeForm.from_gram(s_gram.astype(np.complex128), check_psd=False),
        t=NonnegativeForm.from_gram(t_gram.astype(np.complex128), check_psd=False),
        psi=psi.astype(np.complex128),
        phi=phi.astype(np.complex128),
    )
