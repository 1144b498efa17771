"""Custom exceptions for the toolkit."""

from typing import Any, Dict, List, Optional


class ChgError(Exception):
    """Base exception for all toolkit exceptions."""

    def __init__(
        self,
        message: str,
        code: str = "CHG_ERROR",
        exit_code: int = 3,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.code = code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for reports."""
        return {
            "error": {
                "code": self.code,
                "message": self.message,
                "details": self.details,
            }
        }


class ConfigError(ChgError):
    """Raised when a run configuration cannot be parsed or validated."""

    def __init__(
        self,
        message: str,
        errors: Optional[List[Dict[str, Any]]] = None,
    ):
        self.errors = errors or []
        super().__init__(
            message=message,
            code="CONFIG_ERROR",
            exit_code=4,
            details={"errors": self.errors},
        )

    def __str__(self) -> str:
        lines = [self.message]
        for err in self.errors:
            where = f"line {err['line']}: " if err.get("line") else ""
            lines.append(f"  {where}{err.get('key', '')}: {err['message']}")
        return "\n".join(lines)


class NotFoundError(ChgError):
    """Raised when a built-in name is not present in its registry."""

    def __init__(self, registry: str, name: str, available: List[str]):
        super().__init__(
            message=f"unknown {registry} built-in '{name}' (registry {registry}: {', '.join(available)})",
            code="NOT_FOUND",
            exit_code=4,
            details={"registry": registry, "name": name, "available": available},
        )


class ValidationError(ChgError):
    """Raised when a structural hypothesis or data compatibility check fails."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            code="VALIDATION_ERROR",
            exit_code=2,
            details=details,
        )


class HypothesisViolation(ChgError):
    """Raised when the ellipticity margin of Hypothesis (H) is not positive."""

    def __init__(self, epsilon: float, location: Optional[List[float]] = None):
        super().__init__(
            message=f"Hypothesis (H) fails: epsilon = {epsilon:.6g} <= 0",
            code="HYPOTHESIS_H_VIOLATED",
            exit_code=2,
            details={"epsilon": epsilon, "location": location},
        )


class SolverError(ChgError):
    """Raised when a time step cannot be completed."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            code="SOLVER_ERROR",
            exit_code=3,
            details=details,
        )


class QuadratureError(ChgError):
    """Raised when the radial quadrature of an extension does not converge."""

    def __init__(self, achieved: float, requested: float):
        super().__init__(
            message=f"radial quadrature did not converge (achieved {achieved:.3g}, requested {requested:.3g})",
            code="QUADRATURE_ERROR",
            exit_code=3,
            details={"achieved": achieved, "requested": requested},
        )


class OutputError(ChgError):
    """Raised when an output file cannot be written."""

    def __init__(self, path: str, reason: str):
        super().__init__(
            message=f"cannot write output file {path}: {reason}",
            code="OUTPUT_ERROR",
            exit_code=3,
            details={"path": path, "reason": reason},
        )
