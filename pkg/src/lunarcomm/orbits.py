"""Two-body Keplerian propagation and Walker constellation generation."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .kernels import solve_kepler
from .timebase import Epoch

TWO_PI = 2.0 * math.pi


def _wrap360(angle: float) -> float:
    out = float(angle) % 360.0
    return 0.0 if out >= 360.0 else out + 0.0


@dataclass(frozen=True)
class OrbitalElements:
    """Classical element set; angles in degrees, distances in km."""

    central_body: str
    semi_major_axis: float
    eccentricity: float
    inclination: float
    arg_perigee: float
    raan: float
    true_anomaly: float
    epoch: Epoch

    def __post_init__(self):
        if not self.semi_major_axis > 0:
            raise ValueError(f"semi_major_axis must be > 0, got {self.semi_major_axis}")
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError(f"eccentricity must be in [0, 1), got {self.eccentricity}")
        if not 0.0 <= self.inclination <= 180.0:
            raise ValueError(f"inclination must be in [0, 180], got {self.inclination}")
        for name in ("arg_perigee", "raan", "true_anomaly"):
            object.__setattr__(self, name, _wrap360(getattr(self, name)))

    @property
    def mean_anomaly(self) -> float:
        """Mean anomaly in degrees."""
        return math.degrees(true_to_mean(math.radians(self.true_anomaly), self.eccentricity)) % 360.0


@dataclass(frozen=True)
class StateVector:
    """Inertial position (km) and velocity (km/s) relative to the central body."""

    position: np.ndarray
    velocity: np.ndarray
    epoch: Epoch


@dataclass(frozen=True)
class WalkerSpec:
    planes: int
    sats_per_plane: int
    phasing_factor: int
    base: OrbitalElements

    def __post_init__(self):
        if self.planes < 1 or self.sats_per_plane < 1:
            raise ValueError("planes and sats_per_plane must both be >= 1")
        if not 0 <= self.phasing_factor <= max(self.planes - 1, 0):
            raise ValueError(f"phasing_factor must be in [0, {self.planes - 1}], got {self.phasing_factor}")

    @property
    def total(self) -> int:
        return self.planes * self.sats_per_plane


def true_to_eccentric(nu, e):
    return 2.0 * np.arctan2(np.sqrt(1.0 - e) * np.sin(nu / 2.0), np.sqrt(1.0 + e) * np.cos(nu / 2.0))


def eccentric_to_true(big_e, e):
    return 2.0 * np.arctan2(np.sqrt(1.0 + e) * np.sin(big_e / 2.0), np.sqrt(1.0 - e) * np.cos(big_e / 2.0))


def true_to_mean(nu, e):
    big_e = true_to_eccentric(nu, e)
    return big_e - e * np.sin(big_e)


def mean_to_true(mean_anomaly, e):
    m = np.mod(mean_anomaly, TWO_PI)
    return eccentric_to_true(solve_kepler(m, e), e)


def orbital_period(a: float, mu: float) -> float:
    """Two-body period in seconds."""
    if not a > 0:
        raise ValueError(f"semi-major axis must be > 0, got {a}")
    return TWO_PI * math.sqrt(a**3 / mu)


def _rotation(el: OrbitalElements) -> np.ndarray:
    # Perifocal -> inertial: R3(-raan) R1(-i) R3(-argp)
    o = math.radians(el.raan)
    i = math.radians(el.inclination)
    w = math.radians(el.arg_perigee)
    co, so = math.cos(o), math.sin(o)
    ci, si = math.cos(i), math.sin(i)
    cw, sw = math.cos(w), math.sin(w)
    return np.array(
        [
            [co * cw - so * sw * ci, -co * sw - so * cw * ci, so * si],
            [so * cw + co * sw * ci, -so * sw + co * cw * ci, -co * si],
            [sw * si, cw * si, ci],
        ]
    )


def _rv_at_true_anomaly(el: OrbitalElements, mu: float, nu):
    e = el.eccentricity
    p = el.semi_major_axis * (1.0 - e * e)
    nu = np.asarray(nu, dtype=float)
    cn, sn = np.cos(nu), np.sin(nu)
    r = p / (1.0 + e * cn)
    vk = math.sqrt(mu / p)
    zeros = np.zeros_like(nu)
    r_pf = np.stack([r * cn, r * sn, zeros], axis=-1)
    v_pf = np.stack([-vk * sn, vk * (e + cn), zeros], axis=-1)
    rot = _rotation(el)
    return r_pf @ rot.T, v_pf @ rot.T


def elements_to_state(el: OrbitalElements, mu: float) -> StateVector:
    """Inertial state at the element epoch."""
    if el.eccentricity >= 1.0:
        raise ValueError("only closed orbits (e < 1) are supported")
    r, v = _rv_at_true_anomaly(el, mu, math.radians(el.true_anomaly))
    return StateVector(r, v, el.epoch)


def _advanced_true_anomaly(el: OrbitalElements, mu: float, t):
    n = math.sqrt(mu / el.semi_major_axis**3)
    m0 = true_to_mean(math.radians(el.true_anomaly), el.eccentricity)
    return mean_to_true(m0 + n * np.asarray(t, dtype=float), el.eccentricity)


def propagate_elements(el: OrbitalElements, mu: float, t: float) -> OrbitalElements:
    """Elements advanced by ``t`` seconds of two-body motion."""
    nu = float(_advanced_true_anomaly(el, mu, t))
    return replace(el, true_anomaly=math.degrees(nu), epoch=el.epoch.plus_seconds(t))


def propagate(el: OrbitalElements, mu: float, t: float) -> StateVector:
    """Inertial state ``t`` seconds after the element epoch."""
    if not math.isfinite(t):
        raise ValueError(f"propagation time must be finite, got {t}")
    r, v = _rv_at_true_anomaly(el, mu, _advanced_true_anomaly(el, mu, t))
    return StateVector(r, v, el.epoch.plus_seconds(t))


def propagate_many(el: OrbitalElements, mu: float, times) -> tuple[np.ndarray, np.ndarray]:
    """Positions and velocities, each ``(N, 3)``, at offsets ``times`` (s) from the element epoch."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return _rv_at_true_anomaly(el, mu, _advanced_true_anomaly(el, mu, times))


def walker_constellation(spec: WalkerSpec) -> list[OrbitalElements]:
    """Walker-delta fleet, ordered plane by plane.

    Slot offsets are applied to the base mean anomaly so that satellites in a
    plane are equally spaced in time, then converted back to true anomaly.
    """
    base = spec.base
    e = base.eccentricity
    m0 = math.degrees(true_to_mean(math.radians(base.true_anomaly), e))
    fleet = []
    for p in range(spec.planes):
        raan = base.raan + p * 360.0 / spec.planes
        for s in range(spec.sats_per_plane):
            m = m0 + s * 360.0 / spec.sats_per_plane + p * spec.phasing_factor * 360.0 / spec.total
            if e == 0.0:
                nu = m
            else:
                nu = math.degrees(float(mean_to_true(math.radians(m), e)))
            fleet.append(replace(base, raan=raan, true_anomaly=nu))
    return fleet
