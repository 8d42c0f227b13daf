# hybridq/core/errors.py
"""
Exception hierarchy. Every error knows the process exit code it maps to and
can render itself as a machine-readable record for the command line.
"""
from datetime import datetime, timezone
from typing import Any, Dict, Optional


class HybridQError(Exception):
    """Base class for all toolkit errors."""
    exit_code: int = 1

    def context(self) -> Dict[str, Any]:
        return {}

    def to_record(self) -> Dict[str, Any]:
        record = {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        record.update({k: v for k, v in self.context().items() if v is not None})
        return record


class ConfigError(HybridQError):
    """Bad run document: unknown key, missing key or invalid value."""
    exit_code = 2

    def __init__(self, message: str, *, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if key:
            where.append(f"key '{key}'")
        if line:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line

    def context(self) -> Dict[str, Any]:
        return {"key": self.key, "line": self.line}


class ArgumentError(HybridQError, ValueError):
    """A function was called with arguments outside its contract."""
    exit_code = 2


class DomainError(HybridQError, ValueError):
    """Parameter outside the physical domain (e.g. parametric instability)."""
    exit_code = 2


class IntegrationError(HybridQError):
    """The mean-field integrator failed or left the Bloch ball."""
    exit_code = 3

    def __init__(self, message: str, *, last_time: Optional[float] = None):
        super().__init__(message)
        self.last_time = last_time

    def context(self) -> Dict[str, Any]:
        return {"last_time": self.last_time}


class PropagationError(HybridQError):
    """A superket invariant was violated or the Krylov step did not converge."""
    exit_code = 3

    def __init__(
        self,
        message: str,
        *,
        invariant: Optional[str] = None,
        time: Optional[float] = None,
        residual: Optional[float] = None,
    ):
        super().__init__(message)
        self.invariant = invariant
        self.time = time
        self.residual = residual

    def context(self) -> Dict[str, Any]:
        return {"invariant": self.invariant, "time": self.time, "residual": self.residual}


class FitError(HybridQError):
    """Not enough usable peaks for the exponential envelope fit."""
    exit_code = 3


class TruncationWarning(UserWarning):
    """The highest Fock levels picked up non-negligible population."""


IO_EXIT_CODE = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, HybridQError):
        return exc.exit_code
    if isinstance(exc, OSError):
        return IO_EXIT_CODE
    return 1


def error_record(exc: BaseException) -> Dict[str, Any]:
    if isinstance(exc, HybridQError):
        return exc.to_record()
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": exit_code_for(exc),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
