"""Classical Radon-Nikodym machinery on finite measure spaces.

Atoms carry nonnegative weights; measurable functions are atomwise values.
The embedding J of L2(mu)-classes into L2(nu)-classes and its adjoint are
concrete: (J* f)(a) = f(a) nu(a) / mu(a) on the support of mu.  The theorem
pipeline (truncated suprema of an approximating sequence pushed through J*)
is retained verbatim so the proof's estimates can be exercised against the
atomwise answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .config import DEFAULT_TOL, ToleranceConfig
from .errors import NotAbsolutelyContinuousError, OracleMismatchError


@dataclass(frozen=True)
class FiniteMeasureSpace:
    """Finite measure on the power set of finitely many atoms."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a nonempty 1-d array")
        if np.any(w < 0.0):
            raise ValueError("measure weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    @property
    def atom_count(self) -> int:
        return self.weights.size

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0.0

    def measure(self, atoms) -> float:
        idx = sorted({int(i) for i in atoms})
        return float(np.sum(self.weights[idx])) if idx else 0.0

    def integrate(self, f) -> complex:
        return complex(np.sum(np.asarray(f, dtype=np.complex128) * self.weights))

    def inner(self, f, g) -> complex:
        """<f, g> in L2 of this measure (linear in f)."""
        f = np.asarray(f, dtype=np.complex128)
        g = np.asarray(g, dtype=np.complex128)
        return complex(np.sum(f * np.conj(g) * self.weights))


@dataclass(frozen=True)
class MeasurableFunction:
    space: FiniteMeasureSpace
    values: np.ndarray


def _as_values(space: FiniteMeasureSpace, f) -> np.ndarray:
    vals = f.values if isinstance(f, MeasurableFunction) else f
    vals = np.asarray(vals, dtype=np.complex128)
    if vals.shape != (space.atom_count,):
        raise ValueError("function values must match the atom count")
    return vals


def domination_witness(mu: FiniteMeasureSpace, nu: FiniteMeasureSpace) -> int | None:
    """First atom with mu zero but nu positive, None if nu << mu."""
    if mu.atom_count != nu.atom_count:
        raise ValueError("measures live on different spaces")
    bad = (~mu.support) & nu.support
    return int(np.nonzero(bad)[0][0]) if np.any(bad) else None


def _require_dominated(mu: FiniteMeasureSpace, nu: FiniteMeasureSpace) -> None:
    witness = domination_witness(mu, nu)
    if witness is not None:
        raise NotAbsolutelyContinuousError(
            f"nu is not absolutely continuous with respect to mu (atom {witness})",
            witness=witness,
        )


def _ratio(mu: FiniteMeasureSpace, nu: FiniteMeasureSpace) -> np.ndarray:
    out = np.zeros(mu.atom_count)
    sup = mu.support
    out[sup] = nu.weights[sup] / mu.weights[sup]
    return out


def adjoint_apply(mu: FiniteMeasureSpace, nu: FiniteMeasureSpace, f) -> MeasurableFunction:
    """J* f, the adjoint of the embedding, = f * (nu/mu) on the mu-support.

    The adjoint identity <J phi, f>_nu = <phi, J* f>_mu is re-verified on all
    indicator functions (it is atomwise exact)."""
    _require_dominated(mu, nu)
    vals = _as_values(mu, f)
    out = vals * _ratio(mu, nu)
    lhs = np.conj(vals) * nu.weights
    rhs = np.conj(out) * mu.weights
    if linalg.max_abs(lhs - rhs) > 1e-12 * (1.0 + linalg.max_abs(lhs)):
        raise OracleMismatchError("adjoint identity failed on an indicator")
    return MeasurableFunction(space=mu, values=out)


def lattice_closure_checks(mu: FiniteMeasureSpace, nu: FiniteMeasureSpace, f, g) -> dict:
    """Stone-lattice closure of the adjoint domain, checked concretely.

    On a finite space every function admits the adjoint, so the content is
    that |f|, f^g (pointwise min) and 1^f all pass the adjoint identity, and
    that the sup inequality |<|f|, phi>_nu| <= sup over |psi| <= |phi| of
    |<f, psi>_nu| holds with the finite-space exact sup (alignable phases)."""
    fv = _as_values(mu, f).real
    gv = _as_values(mu, g).real
    abs_f = np.abs(fv)
    f_wedge_g = np.minimum(fv, gv)
    one_wedge_f = np.minimum(1.0, fv)
    residuals = {}
    for name, vals in (("abs_f", abs_f), ("f_wedge_g", f_wedge_g), ("one_wedge_f", one_wedge_f)):
        out = adjoint_apply(mu, nu, vals)
        lhs = np.conj(vals.astype(np.complex128)) * nu.weights
        rhs = np.conj(out.values) * mu.weights
        residuals[name] = float(linalg.max_abs(lhs - rhs))

    sup_gap = 0.0
    eye = np.eye(mu.atom_count)
    for phi in list(eye) + [np.ones(mu.atom_count)]:
        lhs = abs(nu.inner(abs_f, phi))
        exact_sup = float(np.sum(np.abs(fv) * np.abs(phi) * nu.weights))
        sup_gap = max(sup_gap, lhs - exact_sup)
    residuals["sup_inequality_gap"] = sup_gap
    if sup_gap > 1e-12:
        raise OracleMismatchError("lattice sup inequality failed")
    return residuals


def default_sequence(space: FiniteMeasureSpace) -> list[np.ndarray]:
    """The trivial approximating sequence g_1 = 1."""
    return [np.ones(space.atom_count)]


def staged_indicator_sequence(space: FiniteMeasureSpace) -> list[np.ndarray]:
    """g_n = indicator of the first n atoms; converges to 1 pointwise, hence
    in L2 of any measure on the space."""
    m = space.atom_count
    return [(np.arange(m) < n).astype(float) for n in range(1, m + 1)]


def rn_derivative(
    mu: FiniteMeasureSpace,
    nu: FiniteMeasureSpace,
    approximating_sequence: Sequence | None = None,
) -> MeasurableFunction:
    """Radon-Nikodym derivative d(nu)/d(mu) through the operator pipeline.

    Mirrors the constructive proof: given g_n -> 1 in L2(nu), form the
    truncated suprema f_n = 1 ^ (max of |g_1| .. |g_n|), push each through
    J*, and take the stabilized limit.  The staged functions are checked to
    be monotone, the L1 Cauchy identity
    integral |J* f_n - J* f_m| d(mu) = <f_n - f_m, 1>_nu is verified per
    stage, and the result must satisfy nu(E) = integral over E of f d(mu)
    exactly (atomwise).  Any approximating sequence with g_n -> 1 in L2(nu)
    yields the same answer; one that does not is rejected.
    """
    _require_dominated(mu, nu)
    stages = approximating_sequence if approximating_sequence is not None else default_sequence(mu)
    if not len(stages):
        raise ValueError("approximating sequence must have at least one stage")

    running_sup = np.zeros(mu.atom_count)
    prev_f = np.zeros(mu.atom_count)
    prev_adj = np.zeros(mu.atom_count)
    for g in stages:
        running_sup = np.maximum(running_sup, np.abs(_as_values(mu, g)))
        f_n = np.minimum(1.0, running_sup)
        if np.any(f_n < prev_f - 1e-14):
            raise OracleMismatchError("truncated suprema must be nondecreasing")
        adj = adjoint_apply(mu, nu, f_n).values.real
        l1_step = float(np.sum(np.abs(adj - prev_adj) * mu.weights))
        pairing = float(np.real(nu.inner(f_n - prev_f, np.ones(mu.atom_count))))
        if abs(l1_step - pairing) > 1e-12 * (1.0 + abs(pairing)):
            raise OracleMismatchError("L1 Cauchy identity failed at a stage")
        prev_f, prev_adj = f_n, adj

    if linalg.max_abs((prev_f - 1.0)[nu.support]) > 1e-12:
        raise ValueError("approximating sequence does not reach 1 on the support of nu")
    result = prev_adj
    if np.any(result < -1e-15):
        raise OracleMismatchError("derivative must be nonnegative")
    resid = linalg.max_abs(result * mu.weights - nu.weights)
    if resid > 1e-12 * (1.0 + linalg.max_abs(nu.weights)):
        raise OracleMismatchError(f"nu(E) = integral_E f d(mu) failed atomwise: {resid:g}")
    return MeasurableFunction(space=mu, values=result.astype(np.complex128))


def l2_report(
    mu: FiniteMeasureSpace,
    nu: FiniteMeasureSpace,
    n_samples: int = 1000,
    seed: int = 0,
) -> dict:
    """Square-integrability report for the derivative.

    On a finite space the derivative always lies in L2(mu), so the report
    centers on the smallest constant C with |integral phi d(nu)|^2 <=
    C integral |phi|^2 d(mu).  Cauchy-Schwarz gives C = integral of the
    squared derivative d(mu), tight at phi = d(nu)/d(mu); a seeded random
    sweep confirms domination, and the tight witness confirms minimality.
    """
    _require_dominated(mu, nu)
    ratio = _ratio(mu, nu)
    c_min = float(np.sum(ratio**2 * mu.weights))
    adjoint_of_one = adjoint_apply(mu, nu, np.ones(mu.atom_count))
    if linalg.max_abs(adjoint_of_one.values.real - ratio) > 1e-12 * (1.0 + linalg.max_abs(ratio)):
        raise OracleMismatchError("J*1 disagrees with the atomwise derivative")

    rng = np.random.default_rng(seed)
    m = mu.atom_count
    phis = rng.normal(size=(n_samples, m)) + 1j * rng.normal(size=(n_samples, m))
    numerators = np.abs(phis @ nu.weights.astype(np.complex128)) ** 2
    denominators = np.abs(phis) ** 2 @ mu.weights
    ok = denominators > 0.0
    ratios = numerators[ok] / denominators[ok]
    sampled_max = float(np.max(ratios)) if ratios.size else 0.0
    if sampled_max > c_min * (1.0 + 1e-9) + 1e-15:
        raise OracleMismatchError("sampled ratio exceeded the closed-form constant")

    if c_min > 0.0:
        witness_num = abs(np.sum(ratio * nu.weights)) ** 2
        witness_den = float(np.sum(ratio**2 * mu.weights))
        witness_ratio = witness_num / witness_den
    else:
        witness_ratio = 0.0

    return {
        "in_L2": True,
        "C_min": c_min,
        "adjoint_of_one": adjoint_of_one,
        "sampled_max_ratio": sampled_max,
        "witness_ratio": witness_ratio,
    }


@dataclass(frozen=True)
class TruncationFamily:
    """Growing truncations (mu_k, nu_k), k = 1..K, of a countable pair.

    Stage k carries atoms 1..k; earlier atoms keep their weights, so the
    family is consistent by construction."""

    stages: tuple[tuple[FiniteMeasureSpace, FiniteMeasureSpace], ...]

    @classmethod
    def from_weight_functions(cls, mu_of_j, nu_of_j, k_max: int) -> "TruncationFamily":
        if k_max < 1:
            raise ValueError("need at least one stage")
        stages = []
        for k in range(1, k_max + 1):
            js = np.arange(1, k + 1)
            mu = FiniteMeasureSpace(weights=np.array([mu_of_j(int(j)) for j in js]))
            nu = FiniteMeasureSpace(weights=np.array([nu_of_j(int(j)) for j in js]))
            stages.append((mu, nu))
        return cls(stages=tuple(stages))

    @classmethod
    def preset(cls, name: str, k_max: int) -> "TruncationFamily":
        """Two canonical presets.

        ``convergent``: mu_j = 2^-j / j^2, nu_j = 2^-j / j.  The derivative
        is j on atom j and C_min_k = sum of 2^-j stays bounded.
        ``divergent``: mu_j = 4^-j, nu_j = 2^-j.  The derivative is 2^j and
        C_min_k = k exactly, witnessing a derivative outside L2 in the limit.
        """
        if name == "convergent":
            return cls.from_weight_functions(
                lambda j: 2.0**-j / j**2, lambda j: 2.0**-j / j, k_max
            )
        if name == "divergent":
            return cls.from_weight_functions(lambda j: 4.0**-j, lambda j: 2.0**-j, k_max)
        raise ValueError(f"unknown preset {name!r} (use 'convergent' or 'divergent')")


def truncation_divergence(family: TruncationFamily) -> list[tuple[int, float]]:
    """Table of (k, C_min_k) across the truncation stages."""
    table = []
    for k, (mu, nu) in enumerate(family.stages, start=1):
        _require_dominated(mu, nu)
        ratio = _ratio(mu, nu)
        table.append((k, float(np.sum(ratio**2 * mu.weights))))
    return table
