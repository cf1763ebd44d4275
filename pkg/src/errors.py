from typing import Any, Dict, List, Optional


class RelblowError(Exception):
    """Base class for every error raised by the relblow package."""


class InvalidInputError(RelblowError, ValueError):
    """Arguments or samples that cannot be used (too short, wrong shape, wrong order)."""


class DomainError(RelblowError, ValueError):
    """Input lies outside the mathematical domain of a function."""


class AdmissibilityError(DomainError):
    """State violates |u| < c, sqrt(dP/drho) < c or z >= w."""


class SingularWeightError(DomainError):
    """Weight functions evaluated at or below the vacuum gap."""


class NumericalError(RelblowError):
    """A root-finder, quadrature or optimizer did not converge."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RecoveryError(NumericalError):
    """Conservative-to-primitive recovery failed on one or more cells."""

    def __init__(self, message: str, cells: List[int], diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message, diagnostics)
        self.cells = list(cells)


class ConfigError(RelblowError):
    """Invalid run configuration; carries one message per offending field."""

    def __init__(self, message: str, fields: Optional[List[str]] = None):
        super().__init__(message)
        self.fields = fields or []

    def __str__(self) -> str:
        if not self.fields:
            return super().__str__()
        return super().__str__() + "\n" + "\n".join(f"  - {f}" for f in self.fields)
