"""Asset positions over time and the per-pair visibility predicates.

All positions are Earth-centred inertial (km) at offsets ``t`` (s) from the
scenario epoch.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .access import AccessInterval, access_intervals, union_access
from .bodies import BodyConstants
from .frames import DEFAULT_BODIES, GroundSite, body_for, moon_positions, site_offsets
from .kernels import elevation_deg, segment_clear
from .orbits import OrbitalElements, propagate_many
from .timebase import Epoch, TimeGrid


def horizon_dip_deg(site: GroundSite, body: BodyConstants) -> float:
    """Depression of the geometric horizon below the local horizontal."""
    return math.degrees(math.acos(body.radius / (body.radius + site.altitude)))


@dataclass
class ScenarioGeometry:
    epoch: Epoch
    earth_station: GroundSite
    lunar_facility: GroundSite
    fleet: Sequence[OrbitalElements]
    gateway: OrbitalElements
    bodies: dict[str, BodyConstants] = field(default_factory=lambda: dict(DEFAULT_BODIES))

    def __post_init__(self):
        self.earth = self.bodies["earth"]
        self.moon = self.bodies["moon"]
        if self.earth_station.body != "earth":
            raise ValueError("earth_station must be on body 'earth'")
        if self.lunar_facility.body != "moon":
            raise ValueError("lunar_facility must be on body 'moon'")

    # -- positions ---------------------------------------------------------

    def _elements_offset(self, el: OrbitalElements, t) -> np.ndarray:
        return self.epoch.seconds_since(el.epoch) + np.atleast_1d(np.asarray(t, dtype=float))

    def moon_center(self, t) -> np.ndarray:
        return moon_positions(self.epoch, np.atleast_1d(t))

    def station(self, t) -> np.ndarray:
        return site_offsets(self.earth_station, self.epoch, np.atleast_1d(t), self.bodies)

    def facility(self, t, moon_center=None) -> np.ndarray:
        mc = self.moon_center(t) if moon_center is None else moon_center
        return mc + site_offsets(self.lunar_facility, self.epoch, np.atleast_1d(t), self.bodies)

    def satellite(self, k: int, t) -> np.ndarray:
        el = self.fleet[k]
        pos, _ = propagate_many(el, self.bodies[el.central_body].mu, self._elements_offset(el, t))
        return pos

    def gateway_position(self, t, moon_center=None) -> np.ndarray:
        mc = self.moon_center(t) if moon_center is None else moon_center
        pos, _ = propagate_many(self.gateway, self.moon.mu, self._elements_offset(self.gateway, t))
        return mc + pos

    # -- visibility predicates ----------------------------------------------

    def _site_sees(self, site: GroundSite, site_pos, center, target) -> np.ndarray:
        body = body_for(site, self.bodies)
        floor = max(site.min_elevation, -horizon_dip_deg(site, body))
        return elevation_deg(site_pos, center, target) >= floor

    def station_sees_satellite(self, k: int, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        st = self.station(t)
        sat = self.satellite(k, t)
        mc = self.moon_center(t)
        return self._site_sees(self.earth_station, st, np.zeros(3), sat) & segment_clear(
            st, sat, mc, self.moon.radius
        )

    def satellite_sees_gateway(self, k: int, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        mc = self.moon_center(t)
        sat = self.satellite(k, t)
        gw = self.gateway_position(t, mc)
        return segment_clear(sat, gw, np.zeros(3), self.earth.radius) & segment_clear(
            sat, gw, mc, self.moon.radius
        )

    def gateway_sees_facility(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        mc = self.moon_center(t)
        gw = self.gateway_position(t, mc)
        fac = self.facility(t, mc)
        return self._site_sees(self.lunar_facility, fac, mc, gw) & segment_clear(
            fac, gw, np.zeros(3), self.earth.radius
        )

    # -- ranges ---------------------------------------------------------------

    def ranges(self, t) -> dict[str, np.ndarray]:
        """Per-sample hop distances (km).

        E2L and L2G use the nearest satellite that currently sees the station
        or the Gateway respectively; traffic may cross the constellation over
        inter-satellite links. Where no satellite qualifies (only at the
        refined edges of an access window) the nearest satellite is used.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        mc = self.moon_center(t)
        st = self.station(t)
        gw = self.gateway_position(t, mc)
        fac = self.facility(t, mc)
        best = {name: np.full(t.shape, np.inf) for name in ("E2L", "L2G")}
        nearest = {name: np.full(t.shape, np.inf) for name in ("E2L", "L2G")}
        for k in range(len(self.fleet)):
            sat = self.satellite(k, t)
            for name, d, vis in (
                ("E2L", np.linalg.norm(sat - st, axis=1), self.station_sees_satellite(k, t)),
                ("L2G", np.linalg.norm(gw - sat, axis=1), self.satellite_sees_gateway(k, t)),
            ):
                best[name] = np.where(vis & (d < best[name]), d, best[name])
                nearest[name] = np.minimum(nearest[name], d)
        out = {name: np.where(np.isinf(best[name]), nearest[name], best[name]) for name in best}
        out["G2M"] = np.linalg.norm(gw - fac, axis=1)
        return out

    # -- access ---------------------------------------------------------------

    def hop_access(self, grid: TimeGrid, refine_tol: float) -> dict[str, list]:
        """Per-pair intervals plus any-satellite unions for E2L and L2G."""
        per_pair: dict[str, list[AccessInterval]] = {}
        e2l, l2g = [], []
        for k in range(len(self.fleet)):
            name = f"sat{k + 1:02d}"
            a = access_intervals(lambda t, k=k: self.station_sees_satellite(k, t), grid, refine_tol, f"E2L:{name}")
            b = access_intervals(lambda t, k=k: self.satellite_sees_gateway(k, t), grid, refine_tol, f"L2G:{name}")
            per_pair[f"E2L:{name}"] = a
            per_pair[f"L2G:{name}"] = b
            e2l.append(a)
            l2g.append(b)
        g2m = access_intervals(self.gateway_sees_facility, grid, refine_tol, "G2M")
        return {
            "pairs": per_pair,
            "E2L": union_access(e2l, "E2L"),
            "L2G": union_access(l2g, "L2G"),
            "G2M": g2m,
        }
