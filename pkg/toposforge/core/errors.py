"""Exception hierarchy shared by the services, the CLI and the HTTP layer.

Every error carries the process exit code the CLI uses for it:
2 for parse/sort problems, 3 for resolution/configuration problems and 1 for
everything that amounts to a failed check.
"""
from __future__ import annotations

from typing import Any, Optional


class ToposforgeError(ValueError):
    """Base class for all workbench errors"""

    exit_code: int = 1


# ----- formula language -----

class FormulaSyntaxError(ToposforgeError):
    """Malformed formula text"""

    exit_code = 2

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"syntax error at offset {position}: {message}")


class SortError(ToposforgeError):
    """Ill-sorted formula: unbound variable, arity or sort mismatch"""

    exit_code = 2


class UnboundedQuantificationError(SortError):
    """Quantification over all sheaves is not supported"""


class UnboundedSchemaError(SortError):
    """A bigvee/bigand schema was evaluated without a bound"""


class NonGeometricError(ToposforgeError):
    """A checker that needs a geometric formula received another one"""


# ----- resolution / configuration -----

class ResolutionError(ToposforgeError):
    """A name does not resolve in the current environment or session"""

    exit_code = 3


class ConfigError(ToposforgeError):
    """Invalid settings or malformed input file"""

    exit_code = 3


# ----- structures -----

class NotATopologyError(ToposforgeError):
    """Candidate opens do not form a topology"""

    def __init__(self, message: str, pair: Optional[tuple[Any, Any]] = None):
        self.pair = pair
        super().__init__(message)


class FrameError(ToposforgeError):
    """Order data that is not a finite frame, or an argument that is not open"""


class SheafError(ToposforgeError):
    """Presheaf data that is not a sheaf"""


class NotFunctorialError(SheafError):
    """Restriction maps do not compose"""


class GluingError(SheafError):
    """A cover whose matching families do not correspond to sections"""

    def __init__(self, message: str, cover: tuple = (), family: Any = None):
        self.cover = cover
        self.family = family
        super().__init__(message)


class RingError(ToposforgeError):
    """Problems with finite rings and modules"""


class NonMonicModulusError(RingError):
    """polyquot needs a monic modulus"""


class RingAxiomError(RingError):
    """Operation tables violate the ring or module axioms"""


class NotLocalError(RingError):
    """A base ring that must be local has several maximal ideals"""


class ConstantParameterError(ToposforgeError):
    """An ideal family whose formula uses non-constant parameters"""


class InternalDisagreementError(ToposforgeError):
    """Two independent computations of the same fact disagree"""
