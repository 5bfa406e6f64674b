"""Result carriers shared between the bound modules and the CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import DomainError, NumericError, ValidityError


@dataclass(frozen=True)
class BoundResult:
    """A scalar bound value together with its parameters and validity flags.

    ``value`` is ``None`` when the bound is not asserted at ``params``;
    ``reason`` then says why. ``log_value`` is filled for quantities that
    may fall outside double range.
    """

    name: str
    params: dict[str, Any]
    value: float | None
    raw: float | None = None
    clamped: bool = False
    valid: bool = True
    reason: str = ""
    log_value: float | None = None

    @property
    def ok(self) -> bool:
        return self.valid and self.value is not None


def clamp_probability(x: float) -> tuple[float, bool]:
    """Clamp ``x`` to ``[0, 1]`` and report whether clamping happened."""
    if x < 0.0:
        return 0.0, True
    if x > 1.0:
        return 1.0, True
    return float(x), False


def evaluate(name: str, fn: Callable[..., float], /, probability: bool = False, **params: Any) -> BoundResult:
    """Call ``fn(**params)`` and wrap the outcome.

    Validity and domain errors become an invalid result carrying the error
    message; numeric errors propagate.
    """
    try:
        raw = float(fn(**params))
    except (ValidityError, DomainError) as exc:
        return BoundResult(name, dict(params), None, valid=False, reason=str(exc))
    if math.isnan(raw):
        raise NumericError(f"{name} evaluated to NaN", **params)
    value, clamped = clamp_probability(raw) if probability else (raw, False)
    return BoundResult(name, dict(params), value, raw=raw, clamped=clamped)


@dataclass
class CdfCurve:
    """A CDF sampled on an ascending grid, with optional standard errors."""

    radii: np.ndarray
    values: np.ndarray
    label: str
    n: int
    se: np.ndarray | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.radii.shape != self.values.shape or self.radii.ndim != 1:
            raise DomainError("radii and values must be 1-d arrays of equal length")
        if np.any(self.radii < 0) or np.any(np.diff(self.radii) < 0):
            raise DomainError("radii must be non-negative and ascending")
        if np.any(self.values < 0) or np.any(self.values > 1):
            raise DomainError("CDF values must lie in [0, 1]")
        if np.any(np.diff(self.values) < 0):
            raise DomainError("CDF values must be nondecreasing")
        if self.se is not None:
            self.se = np.asarray(self.se, dtype=float)
            if self.se.shape != self.values.shape:
                raise DomainError("se must match values in shape")
