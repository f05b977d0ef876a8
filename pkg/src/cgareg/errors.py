"""Exception hierarchy used across the package.

Usage errors (bad arguments, mismatched algebras, malformed files) derive from
``ValueError``; numerical failures (non-invertible elements, degenerate
geometry, spectral degeneracies) derive from ``ArithmeticError`` or
``RuntimeError`` so callers can distinguish "fix your call" from "this data
cannot be registered".
"""


class CgaregError(Exception):
    """Base class for all package-specific errors."""


class AlgebraUsageError(CgaregError, ValueError):
    """Invalid arguments to an algebra operation."""


class SignatureMismatchError(AlgebraUsageError):
    """Two multivectors from different algebras were combined."""


class NumericalDomainError(CgaregError, ArithmeticError):
    """An operation left its numerical domain (vanishing norm, non-simple input...)."""


class DegeneratePointError(NumericalDomainError):
    """A conformal element has no finite Euclidean representative."""


class DegenerateSphereError(NumericalDomainError):
    """A grade-1 element does not encode a (real or imaginary) sphere."""


class ExactTranslationUnavailableError(NumericalDomainError):
    """The closed-form translation needs an invertible first coefficient."""


class DegeneracyError(CgaregError, RuntimeError):
    """Spectral structure too degenerate to establish correspondences."""


class NormalizationError(DegeneracyError):
    """Every eigenmultivector was orthogonal to the reference multivector."""


class AmbiguousRotationError(DegeneracyError):
    """The rotor eigenproblem has no isolated top eigenvalue."""


class UndeterminedTranslationError(DegeneracyError):
    """The translation normal equations are singular."""


class PlyError(CgaregError, ValueError):
    """Malformed or unsupported PLY content.

    ``offset`` is the byte offset in the file at which the problem was
    detected, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
