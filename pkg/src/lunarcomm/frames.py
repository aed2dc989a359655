"""Lunar ephemeris and body-fixed site positions in the Earth-centred inertial frame.

The inertial frame is Earth-centred with +z along the Earth's spin axis.
Both bodies spin about +z; lunar orbiter elements are referred to the same
axes, translated to the Moon's centre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bodies import EARTH, LUNAR_SIDEREAL_PERIOD_S, BodyConstants
from .orbits import (
    OrbitalElements,
    StateVector,
    mean_to_true,
    orbital_period,
    propagate,
    propagate_many,
)
from .timebase import J2000_JD, SECONDS_PER_DAY, Epoch

MOON_MU = 4902.800066
MOON_RADIUS = 1737.4

# Mean lunar elements at J2000.0 (Meeus, Astronomical Algorithms ch. 47):
# node = L' - F, perigee longitude = L' - M'.
_MEAN_LONGITUDE = 218.3164477
_MEAN_ANOMALY = 134.9633964
_ARG_LATITUDE = 93.2720950
MOON_ELEMENTS = OrbitalElements(
    central_body="earth",
    semi_major_axis=384400.0,
    eccentricity=0.0549,
    inclination=5.145,
    raan=_MEAN_LONGITUDE - _ARG_LATITUDE,
    arg_perigee=(_MEAN_LONGITUDE - _MEAN_ANOMALY) - (_MEAN_LONGITUDE - _ARG_LATITUDE),
    true_anomaly=0.0,  # replaced below from the mean anomaly
    epoch=Epoch(J2000_JD),
)


def _with_mean_anomaly(el: OrbitalElements, mean_anomaly_deg: float) -> OrbitalElements:
    nu = math.degrees(float(mean_to_true(math.radians(mean_anomaly_deg), el.eccentricity)))
    return replace(el, true_anomaly=nu)


MOON_ELEMENTS = _with_mean_anomaly(MOON_ELEMENTS, _MEAN_ANOMALY)
# Relative Earth-Moon motion uses the sum of both gravitational parameters.
MOON_EPHEMERIS_MU = EARTH.mu + MOON_MU


def moon_period() -> float:
    """Period (s) of the Keplerian lunar ephemeris."""
    return orbital_period(MOON_ELEMENTS.semi_major_axis, MOON_EPHEMERIS_MU)


def moon_state_at(epoch: Epoch) -> StateVector:
    """Geocentric inertial state of the Moon's centre."""
    return propagate(MOON_ELEMENTS, MOON_EPHEMERIS_MU, epoch.seconds_since(MOON_ELEMENTS.epoch))


def moon_positions(epoch: Epoch, times) -> np.ndarray:
    """Geocentric Moon positions ``(N, 3)`` at ``times`` seconds after ``epoch``."""
    offset = epoch.seconds_since(MOON_ELEMENTS.epoch)
    pos, _ = propagate_many(MOON_ELEMENTS, MOON_EPHEMERIS_MU, offset + np.asarray(times, dtype=float))
    return pos


def _earth_facing_meridian() -> float:
    r = moon_state_at(MOON_ELEMENTS.epoch).position
    return math.degrees(math.atan2(-r[1], -r[0])) % 360.0


MOON = BodyConstants(
    name="moon",
    mu=MOON_MU,
    radius=MOON_RADIUS,
    rotation_period=LUNAR_SIDEREAL_PERIOD_S,
    rotation_epoch_meridian=_earth_facing_meridian(),
)

DEFAULT_BODIES = {"earth": EARTH, "moon": MOON}


@dataclass(frozen=True)
class GroundSite:
    body: str
    latitude: float
    longitude: float
    altitude: float
    min_elevation: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude must be in [-90, 90], got {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude must be in [-180, 180], got {self.longitude}")
        if not self.altitude >= 0.0:
            raise ValueError(f"altitude must be >= 0, got {self.altitude}")
        if not -5.0 <= self.min_elevation <= 90.0:
            raise ValueError(f"min_elevation must be in [-5, 90], got {self.min_elevation}")


def body_for(site: GroundSite, bodies=None) -> BodyConstants:
    bodies = DEFAULT_BODIES if bodies is None else bodies
    try:
        return bodies[site.body]
    except KeyError:
        raise KeyError(f"unknown body {site.body!r}; known: {sorted(bodies)}") from None


def rotation_angle_deg(body: BodyConstants, epoch: Epoch, times=0.0):
    """Inertial angle of the body's prime meridian at ``times`` seconds after ``epoch``."""
    dt = (epoch.julian_date - J2000_JD) * SECONDS_PER_DAY + np.asarray(times, dtype=float)
    return body.rotation_epoch_meridian + 360.0 * (dt / body.rotation_period)


def site_offsets(site: GroundSite, epoch: Epoch, times, bodies=None) -> np.ndarray:
    """Site position relative to its body's centre, ``(N, 3)`` km."""
    body = body_for(site, bodies)
    theta = np.radians(np.atleast_1d(rotation_angle_deg(body, epoch, times)) + site.longitude)
    lat = math.radians(site.latitude)
    rho = body.radius + site.altitude
    return np.stack(
        [
            rho * math.cos(lat) * np.cos(theta),
            rho * math.cos(lat) * np.sin(theta),
            np.full(theta.shape, rho * math.sin(lat)),
        ],
        axis=-1,
    )


def site_position_inertial(site: GroundSite, body_position, epoch: Epoch, bodies=None) -> np.ndarray:
    """Earth-centred inertial site position (km) at ``epoch``.

    ``body_position`` is the inertial position of the site's body centre
    (a :class:`StateVector` or a 3-vector).
    """
    center = body_position.position if isinstance(body_position, StateVector) else body_position
    return np.asarray(center, dtype=float) + site_offsets(site, epoch, 0.0, bodies)[0]
