"""Shared tolerance configuration.

Every rank / PSD / equality decision in the package goes through one
:class:`ToleranceConfig` so that kernels, ranges and quotient dimensions are
decided consistently across modules.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds used by all modules.

    tol_rank
        Relative eigenvalue cutoff: an eigenvalue ``lam`` of a PSD matrix is
        treated as zero iff ``lam <= tol_rank * max(lam_max, 1)``.
    tol_psd
        A matrix claimed PSD must have min eigenvalue >= ``-tol_psd * max(lam_max, 1)``.
    tol_ortho
        Orthonormality tolerance for subspace bases.
    tol_eq
        Equality tolerance for residual checks.
    max_parallel_sum_doublings
        Iteration cap for the parallel-sum limit used as decomposition oracle.
    """

    tol_rank: float = 1e-10
    tol_psd: float = 1e-8
    tol_ortho: float = 1e-8
    tol_eq: float = 1e-8
    max_parallel_sum_doublings: int = 60

    def __post_init__(self) -> None:
        for name in ("tol_rank", "tol_psd", "tol_ortho", "tol_eq"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_parallel_sum_doublings < 1:
            raise ValueError("max_parallel_sum_doublings must be >= 1")


DEFAULT_TOL = ToleranceConfig()
