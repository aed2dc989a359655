"""Uniform time scale and sampling grids."""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

SECONDS_PER_DAY = 86400.0
J2000_JD = 2451545.0
_UNIX_EPOCH_JD = 2440587.5


@dataclass(frozen=True)
class Epoch:
    """Instant on a single uniform day-count scale (no leap seconds)."""

    julian_date: float

    def __post_init__(self):
        if not math.isfinite(self.julian_date) or self.julian_date <= 2400000.0:
            raise ValueError(f"julian_date must be finite and > 2400000.0, got {self.julian_date}")

    @classmethod
    def j2000(cls) -> Epoch:
        return cls(J2000_JD)

    @classmethod
    def from_datetime(cls, dt: datetime) -> Epoch:
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return cls(_UNIX_EPOCH_JD + dt.timestamp() / SECONDS_PER_DAY)

    @classmethod
    def from_iso(cls, text: str) -> Epoch:
        return cls.from_datetime(datetime.fromisoformat(text))

    def to_datetime(self) -> datetime:
        return datetime.fromtimestamp(
            (self.julian_date - _UNIX_EPOCH_JD) * SECONDS_PER_DAY, tz=timezone.utc
        )

    def plus_seconds(self, seconds: float) -> Epoch:
        return Epoch(self.julian_date + seconds / SECONDS_PER_DAY)

    def seconds_since(self, other: Epoch) -> float:
        return (self.julian_date - other.julian_date) * SECONDS_PER_DAY


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples ``start + k*step`` for ``k = 0 .. floor(duration/step)``."""

    start: Epoch
    duration: float
    step: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if not 0 < self.step <= self.duration:
            raise ValueError(f"step must satisfy 0 < step <= duration, got {self.step}")

    @property
    def count(self) -> int:
        return int(math.floor(self.duration / self.step)) + 1

    def times(self) -> np.ndarray:
        """Sample offsets in seconds from ``start``."""
        return np.arange(self.count, dtype=float) * self.step
