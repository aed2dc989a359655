"""Celestial body constants used by the propagators and the visibility model."""
from __future__ import annotations

from dataclasses import dataclass

SIDEREAL_DAY_S = 86164.0905
LUNAR_SIDEREAL_PERIOD_S = 27.321661 * 86400.0

# Greenwich mean sidereal angle at J2000.0 (deg).
GMST_J2000_DEG = 280.46061837


@dataclass(frozen=True)
class BodyConstants:
    """Spherical, uniformly rotating body.

    ``rotation_epoch_meridian`` is the inertial angle (deg, about +z) of the
    body's prime meridian at J2000.0.
    """

    name: str
    mu: float
    radius: float
    rotation_period: float
    rotation_epoch_meridian: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"{self.name}: mu must be > 0, got {self.mu}")
        if not self.radius > 0:
            raise ValueError(f"{self.name}: radius must be > 0, got {self.radius}")
        if not self.rotation_period > 0:
            raise ValueError(f"{self.name}: rotation_period must be > 0, got {self.rotation_period}")


EARTH = BodyConstants(
    name="earth",
    mu=398600.4418,
    radius=6378.137,
    rotation_period=SIDEREAL_DAY_S,
    rotation_epoch_meridian=GMST_J2000_DEG,
)
