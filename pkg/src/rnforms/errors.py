"""Exception types shared across the package.

Domain negatives carry a mathematical witness (a vector, a set of atoms or an
algebra element) so that callers, in particular the CLI, can report more than
a bare message.
"""

from __future__ import annotations


class RnformsError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(RnformsError, ValueError):
    pass


class NotHermitianError(RnformsError, ValueError):
    pass


class NotPositiveSemidefiniteError(RnformsError, ValueError):
    pass


class NotOrthonormalError(RnformsError, ValueError):
    pass


class NotAbsolutelyContinuousError(RnformsError, ValueError):
    """Raised when an operation requires absolute continuity that fails.

    ``witness`` is a concrete violation: a vector x with t(x,x) = 0 but
    s(x,x) > 0, an atom index with alpha zero but beta nonzero, or the
    coordinate vector of an algebra element, depending on the caller.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotRepresentableError(RnformsError, ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsupportedAlgebraError(RnformsError, ValueError):
    pass


class OracleMismatchError(RnformsError, RuntimeError):
    """Two routes that must agree (primary formula vs independent oracle) did not."""
