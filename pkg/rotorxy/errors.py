"""Exception hierarchy for rotorxy.

Every error raised on purpose by the package derives from :class:`RotorXYError`; most also
derive from the built-in exception a caller would naturally catch (``ValueError`` for bad
arguments, ``RuntimeError`` for resource limits).
"""

from __future__ import annotations


class RotorXYError(Exception):
    """Base class for all rotorxy errors."""


class LatticeSizeError(RotorXYError, ValueError):
    """Lattice size invalid, or outside the range a method supports."""


class DomainError(RotorXYError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class StateSpaceError(RotorXYError, RuntimeError):
    """Transfer-matrix state space larger than the configured bound."""


class InsufficientDataError(RotorXYError, ValueError):
    """Too few measurements or bins for a statistical estimate."""


class BracketingError(RotorXYError, ValueError):
    """A root or an interpolation grid is not bracketed by the data."""


class ConfigError(RotorXYError, ValueError):
    """Unreadable or malformed configuration file."""


class CodeAlgebraError(RotorXYError):
    """A stabilizer or logical-operator identity failed on a lattice."""


class VerificationFailure(RotorXYError):
    """One or more oracle checks of the verification suite failed."""
