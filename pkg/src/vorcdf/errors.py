"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations

from typing import Any


class VorcdfError(Exception):
    """Base class for every error raised by :mod:`vorcdf`."""

    exit_code = 1


class DomainError(VorcdfError, ValueError):
    """An argument lies outside the mathematical domain of a function."""

    exit_code = 2


class ValidityError(VorcdfError, ValueError):
    """The parameters are outside the range where a bound is asserted."""

    exit_code = 2


class CapacityError(VorcdfError, RuntimeError):
    """A brute-force computation would exceed its configured size cap."""

    exit_code = 3


class NumericError(VorcdfError, ArithmeticError):
    """A numerical routine (typically quadrature) failed to converge."""

    exit_code = 4

    def __init__(self, message: str, **diagnostics: Any) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({extra})"
