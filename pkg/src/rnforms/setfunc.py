"""Additive set functions on finite rings of sets.

A finite ring of sets is generated by its atoms, so a ring element is any
union of atoms and a set function is stored by its atom values.  Sets are
addressed by atom-index sets (the CLI translates atom labels).

The epsilon-delta notion of absolute continuity collapses on a finite ring:
beta is alpha-absolutely continuous iff alpha(E) = 0 implies |beta|(E) = 0,
iff the support of |beta| is contained atomwise in the support of alpha.
That reduction is not assumed silently: :func:`epsilon_delta_scan` re-checks
the literal definition by enumerating all ring elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import forms as _forms
from . import linalg
from .config import DEFAULT_TOL, ToleranceConfig
from .errors import NotAbsolutelyContinuousError, OracleMismatchError
from .serialize import vector_from_json, vector_to_json

_ENUM_LIMIT = 20  # 2^m enumeration guard


@dataclass(frozen=True)
class FiniteRing:
    """Ring of all unions of a finite list of atoms."""

    atom_labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.atom_labels) < 1:
            raise ValueError("a finite ring needs at least one atom")
        if len(set(self.atom_labels)) != len(self.atom_labels):
            raise ValueError("atom labels must be unique")

    @property
    def atom_count(self) -> int:
        return len(self.atom_labels)

    def resolve(self, element: Iterable) -> frozenset[int]:
        """Normalize a ring element given by atom indices or labels."""
        out = set()
        for item in element:
            if isinstance(item, str):
                try:
                    out.add(self.atom_labels.index(item))
                except ValueError:
                    raise KeyError(f"unknown atom label {item!r}") from None
            else:
                idx = int(item)
                if not 0 <= idx < self.atom_count:
                    raise IndexError(f"atom index {idx} out of range")
                out.add(idx)
        return frozenset(out)

    def iter_elements(self):
        """All 2^m ring elements as frozensets of atom indices."""
        m = self.atom_count
        if m > _ENUM_LIMIT:
            raise ValueError(f"refusing to enumerate 2^{m} ring elements")
        for mask in range(1 << m):
            yield frozenset(i for i in range(m) if mask >> i & 1)


@dataclass(frozen=True)
class SimpleFunction:
    """Ring-simple function, one complex value per atom."""

    ring: FiniteRing
    atom_values: np.ndarray

    @classmethod
    def indicator(cls, ring: FiniteRing, element: Iterable) -> "SimpleFunction":
        values = np.zeros(ring.atom_count, dtype=np.complex128)
        for i in ring.resolve(element):
            values[i] = 1.0
        return cls(ring=ring, atom_values=values)


@dataclass(frozen=True)
class AdditiveSetFunction:
    """Complex additive set function; value on E is the sum over E's atoms."""

    ring: FiniteRing
    atom_values: np.ndarray

    def __post_init__(self):
        if len(self.atom_values) != self.ring.atom_count:
            raise ValueError("one value per atom required")

    def __call__(self, element: Iterable) -> complex:
        idx = sorted(self.ring.resolve(element))
        return complex(np.sum(self.atom_values[idx])) if idx else 0.0 + 0.0j

    def is_nonnegative(self) -> bool:
        vals = self.atom_values
        return bool(np.all(np.abs(vals.imag) == 0.0) and np.all(vals.real >= 0.0))

    @property
    def bound(self) -> float:
        """M = sup over ring elements of |value|, by exhaustive enumeration."""
        best = 0.0
        for element in self.ring.iter_elements():
            best = max(best, abs(self(element)))
        return best

    def to_json(self) -> dict:
        return {"atoms": list(self.ring.atom_labels), "values": vector_to_json(self.atom_values)}

    @classmethod
    def from_json(cls, data) -> "AdditiveSetFunction":
        ring = FiniteRing(atom_labels=tuple(str(a) for a in data["atoms"]))
        values = vector_from_json(data["values"])
        return cls(ring=ring, atom_values=values)


def _require_same_ring(beta: AdditiveSetFunction, alpha: AdditiveSetFunction) -> None:
    if beta.ring.atom_labels != alpha.ring.atom_labels:
        raise ValueError("set functions live on different rings")


def evaluate(f: AdditiveSetFunction, element: Iterable) -> complex:
    return f(element)


def total_variation(beta: AdditiveSetFunction) -> AdditiveSetFunction:
    """|beta|: on a finite ring the atomwise absolute value, because the
    singleton partition maximizes every partition sum."""
    return AdditiveSetFunction(ring=beta.ring, atom_values=np.abs(beta.atom_values).astype(np.complex128))


def _partitions(items: tuple[int, ...]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] | {first}] + part[i + 1 :]
        yield part + [{first}]


def total_variation_oracle(beta: AdditiveSetFunction, element: Iterable) -> float:
    """Definitional total variation: sup over partitions of E into ring
    elements of the sum of |beta| block values.  Exponential; test use only."""
    atoms = tuple(sorted(beta.ring.resolve(element)))
    if len(atoms) > 8:
        raise ValueError("partition oracle is exponential, keep |E| small")
    best = 0.0
    for part in _partitions(atoms):
        best = max(best, sum(abs(beta(block)) for block in part))
    return best


def form_of(beta: AdditiveSetFunction) -> _forms.NonnegativeForm:
    """The form integrating products against |beta|: diagonal Gram matrix of
    the atomwise total variation, in the atom basis of the simple functions."""
    tv = np.abs(beta.atom_values)
    return _forms.NonnegativeForm.from_gram(np.diag(tv).astype(np.complex128), check_psd=False)


def riesz_vector(beta: AdditiveSetFunction) -> SimpleFunction:
    """The representing vector: integrating phi against beta equals the
    |beta|-inner product of phi with this simple function."""
    vals = beta.atom_values
    tv = np.abs(vals)
    out = np.zeros_like(vals)
    support = tv > 0.0
    out[support] = np.conj(vals[support]) / tv[support]
    result = SimpleFunction(ring=beta.ring, atom_values=out)
    _check_riesz_identity(beta, result)
    return result


def _check_riesz_identity(beta: AdditiveSetFunction, rep: SimpleFunction) -> None:
    # integral of chi_E d(beta) vs <chi_E, rep> in the |beta| inner product,
    # atomwise: beta_a vs conj(rep_a) |beta|_a
    lhs = beta.atom_values
    rhs = np.conj(rep.atom_values) * np.abs(beta.atom_values)
    if linalg.max_abs(lhs - rhs) > 1e-12 * (1.0 + linalg.max_abs(lhs)):
        raise OracleMismatchError("representing-vector identity failed")


def ac_witness_set(beta: AdditiveSetFunction, alpha: AdditiveSetFunction) -> frozenset[int] | None:
    """Atoms where alpha vanishes but |beta| does not; None when absolutely
    continuous.  The returned set E has alpha(E) = 0 < |beta|(E)."""
    _require_same_ring(beta, alpha)
    if not alpha.is_nonnegative():
        raise ValueError("the dominating set function must be nonnegative")
    bad = (np.abs(beta.atom_values) > 0.0) & (alpha.atom_values.real == 0.0)
    if not np.any(bad):
        return None
    return frozenset(int(i) for i in np.nonzero(bad)[0])


def is_abs_continuous(beta: AdditiveSetFunction, alpha: AdditiveSetFunction) -> bool:
    """Epsilon-delta absolute continuity, reduced on a finite ring to
    atomwise support containment.  :func:`epsilon_delta_scan` is the
    unreduced cross-check."""
    return ac_witness_set(beta, alpha) is None


def epsilon_delta_scan(beta: AdditiveSetFunction, alpha: AdditiveSetFunction) -> bool:
    """Literal epsilon-delta check over every ring element.

    For each threshold eps (every positive value of |beta| on the ring) a
    valid delta exists iff min { alpha(E) : |beta|(E) >= eps } is positive.
    """
    _require_same_ring(beta, alpha)
    m = beta.ring.atom_count
    if m > _ENUM_LIMIT:
        raise ValueError("epsilon-delta scan enumerates 2^m ring elements")
    masks = np.arange(1 << m)
    member = (masks[:, None] >> np.arange(m)[None, :] & 1).astype(float)
    alpha_vals = member @ alpha.atom_values.real
    tv_vals = member @ np.abs(beta.atom_values)
    for eps in np.unique(tv_vals[tv_vals > 0.0]):
        hit = tv_vals >= eps
        if np.any(hit) and float(np.min(alpha_vals[hit])) <= 0.0:
            return False
    return True


def dominated_approximation(
    beta: AdditiveSetFunction, alpha: AdditiveSetFunction, n: float
) -> AdditiveSetFunction:
    """The staged minorant min(beta, n * alpha), atomwise; below beta, below
    n * alpha, and exhausting beta as n grows exactly when beta is
    alpha-absolutely continuous."""
    _require_same_ring(beta, alpha)
    if not (beta.is_nonnegative() and alpha.is_nonnegative()):
        raise ValueError("dominated_approximation expects nonnegative set functions")
    vals = np.minimum(beta.atom_values.real, n * alpha.atom_values.real)
    return AdditiveSetFunction(ring=beta.ring, atom_values=vals.astype(np.complex128))


def darst_representation(
    beta: AdditiveSetFunction,
    alpha: AdditiveSetFunction,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> tuple[SimpleFunction, dict]:
    """Exact finite-ring representation beta(E) = integral over E of phi d(alpha).

    Route 1 is the direct atomwise quotient (exact, sup-variation zero).
    Route 2 retraces the general proof: the representing vector of beta in
    its own form, transported to an alpha-representative through the forms
    module, then conjugated.  Both routes must agree on the support of alpha.
    """
    _require_same_ring(beta, alpha)
    witness = ac_witness_set(beta, alpha)
    if witness is not None:
        labels = sorted(beta.ring.atom_labels[i] for i in witness)
        raise NotAbsolutelyContinuousError(
            f"beta is not absolutely continuous with respect to alpha on {labels}",
            witness=witness,
        )

    a_vals = alpha.atom_values.real
    support = a_vals > 0.0
    phi1 = np.zeros(beta.ring.atom_count, dtype=np.complex128)
    phi1[support] = beta.atom_values[support] / a_vals[support]

    beta_hat = riesz_vector(beta)
    b_form = form_of(beta)
    a_form = form_of(alpha)
    f = _forms.quotient_space(b_form, tol).coord(beta_hat.atom_values)
    psi = _forms.representing_vector(b_form, a_form, f, tol)
    phi2 = np.conj(psi)

    agreement = linalg.max_abs((phi1 - phi2)[support]) if np.any(support) else 0.0
    if agreement > tol.tol_eq * (1.0 + linalg.max_abs(phi1)):
        raise OracleMismatchError(
            f"direct and proof-route representations disagree on supp(alpha): {agreement:g}"
        )

    diff = AdditiveSetFunction(
        ring=beta.ring, atom_values=beta.atom_values - phi1 * a_vals
    )
    sup_variation = float(np.sum(np.abs(diff.atom_values)))
    report = {
        "phi_direct": phi1,
        "phi_proof_route": phi2,
        "route_agreement": float(agreement),
        "sup_variation": sup_variation,
    }
    return SimpleFunction(ring=beta.ring, atom_values=phi1), report


def bridge_check(
    beta: AdditiveSetFunction,
    alpha: AdditiveSetFunction,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> dict:
    """Both directions of the set-function / form bridge: epsilon-delta
    absolute continuity of beta w.r.t. alpha holds iff the induced form of
    beta is absolutely continuous w.r.t. the induced form of alpha (both are
    bounded on a finite ring, so the equivalence is unconditional)."""
    _require_same_ring(beta, alpha)
    setfunc_ac = is_abs_continuous(beta, alpha)
    form_ac = _forms.is_absolutely_continuous(form_of(beta), form_of(alpha), tol)
    return {
        "setfunc_ac": setfunc_ac,
        "form_ac": form_ac,
        "equivalent": setfunc_ac == form_ac,
    }
