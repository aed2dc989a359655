"""Hot numeric kernels with numba and numpy implementations.

Each kernel exists twice: a ``*_numba`` loop compiled with :func:`numba.njit`
and a ``*_numpy`` vectorised version. The public name dispatches on
:data:`lunarcomm._accel.USE_NUMBA`. Both paths perform the same floating
point operations in the same order per element; they can still differ in the
last bits where the two libm implementations of sin/cos/acos disagree.
``benchmarks/bench_kernels.py`` compares their speed.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit

KEPLER_TOL = 1e-12
KEPLER_MAX_ITER = 50


class KeplerConvergenceError(RuntimeError):
    """Newton iteration on Kepler's equation failed to converge."""


# --------------------------------------------------------------------------
# Kepler's equation  M = E - e sin E
# --------------------------------------------------------------------------


@njit
def _solve_kepler_numba(mean_anomaly, ecc):
    n = mean_anomaly.shape[0]
    out = np.empty(n)
    ok = True
    for k in range(n):
        m = mean_anomaly[k]
        e = ecc[k]
        if e < 0.8:
            big_e = m
        else:
            big_e = math.pi
        converged = False
        for _ in range(KEPLER_MAX_ITER):
            step = (big_e - e * math.sin(big_e) - m) / (1.0 - e * math.cos(big_e))
            big_e = big_e - step
            if abs(step) < KEPLER_TOL:
                converged = True
                break
        if not converged:
            ok = False
        out[k] = big_e
    return out, ok


def _solve_kepler_numpy(mean_anomaly, ecc):
    big_e = np.where(ecc < 0.8, mean_anomaly, math.pi)
    active = np.ones(mean_anomaly.shape, dtype=bool)
    for _ in range(KEPLER_MAX_ITER):
        if not active.any():
            break
        e = ecc[active]
        ea = big_e[active]
        step = (ea - e * np.sin(ea) - mean_anomaly[active]) / (1.0 - e * np.cos(ea))
        big_e[active] = ea - step
        done = np.abs(step) < KEPLER_TOL
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return big_e, not active.any()


def solve_kepler(mean_anomaly, ecc):
    """Eccentric anomaly (rad) for mean anomaly (rad), elementwise.

    ``mean_anomaly`` should already be reduced to ``[0, 2*pi)``; ``ecc`` may be
    a scalar or broadcast against it. Raises :class:`KeplerConvergenceError`
    if any element needs more than 50 Newton steps.
    """
    m = np.asarray(mean_anomaly, dtype=float)
    shape = m.shape
    m = np.ascontiguousarray(m.reshape(-1))
    e = np.ascontiguousarray(np.broadcast_to(np.asarray(ecc, dtype=float), shape).reshape(-1))
    if USE_NUMBA:
        out, ok = _solve_kepler_numba(m, e)
    else:
        out, ok = _solve_kepler_numpy(m.copy(), e)
    if not ok:
        raise KeplerConvergenceError("Kepler solver did not converge within 50 iterations")
    return out.reshape(shape)


# --------------------------------------------------------------------------
# Segment / sphere clearance
# --------------------------------------------------------------------------


@njit
def _segment_clear_numba(p1, p2, center, radius):
    n = p1.shape[0]
    out = np.empty(n, dtype=np.bool_)
    for k in range(n):
        dx = p2[k, 0] - p1[k, 0]
        dy = p2[k, 1] - p1[k, 1]
        dz = p2[k, 2] - p1[k, 2]
        cx = center[k, 0] - p1[k, 0]
        cy = center[k, 1] - p1[k, 1]
        cz = center[k, 2] - p1[k, 2]
        dd = dx * dx + dy * dy + dz * dz
        s = (cx * dx + cy * dy + cz * dz) / dd
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
        qx = s * dx - cx
        qy = s * dy - cy
        qz = s * dz - cz
        out[k] = math.sqrt(qx * qx + qy * qy + qz * qz) >= radius[k]
    return out


def _segment_clear_numpy(p1, p2, center, radius):
    d = p2 - p1
    c = center - p1
    dd = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2]
    s = (c[:, 0] * d[:, 0] + c[:, 1] * d[:, 1] + c[:, 2] * d[:, 2]) / dd
    s = np.clip(s, 0.0, 1.0)
    q = s[:, None] * d - c
    return np.sqrt(q[:, 0] * q[:, 0] + q[:, 1] * q[:, 1] + q[:, 2] * q[:, 2]) >= radius


def segment_clear(p1, p2, center, radius):
    """True where the segment ``p1-p2`` stays outside the sphere.

    All position arguments are ``(N, 3)`` or ``(3,)`` and are broadcast to a
    common length; ``radius`` is a scalar or length-``N`` array. A segment
    whose closest approach equals the radius exactly counts as clear.
    """
    p1, p2, center = np.broadcast_arrays(
        np.atleast_2d(np.asarray(p1, dtype=float)),
        np.atleast_2d(np.asarray(p2, dtype=float)),
        np.atleast_2d(np.asarray(center, dtype=float)),
    )
    n = p1.shape[0]
    r = np.ascontiguousarray(np.broadcast_to(np.asarray(radius, dtype=float), (n,)))
    p1, p2, center = (np.ascontiguousarray(a) for a in (p1, p2, center))
    if USE_NUMBA:
        return _segment_clear_numba(p1, p2, center, r)
    return _segment_clear_numpy(p1, p2, center, r)


# --------------------------------------------------------------------------
# Elevation above the local horizon of a spherical body
# --------------------------------------------------------------------------


@njit
def _elevation_numba(site, body_center, target):
    n = site.shape[0]
    out = np.empty(n)
    for k in range(n):
        zx = site[k, 0] - body_center[k, 0]
        zy = site[k, 1] - body_center[k, 1]
        zz = site[k, 2] - body_center[k, 2]
        lx = target[k, 0] - site[k, 0]
        ly = target[k, 1] - site[k, 1]
        lz = target[k, 2] - site[k, 2]
        zn = math.sqrt(zx * zx + zy * zy + zz * zz)
        ln = math.sqrt(lx * lx + ly * ly + lz * lz)
        c = (zx * lx + zy * ly + zz * lz) / (zn * ln)
        if c > 1.0:
            c = 1.0
        elif c < -1.0:
            c = -1.0
        out[k] = 90.0 - math.degrees(math.acos(c))
    return out


def _elevation_numpy(site, body_center, target):
    z = site - body_center
    los = target - site
    zn = np.sqrt(z[:, 0] * z[:, 0] + z[:, 1] * z[:, 1] + z[:, 2] * z[:, 2])
    ln = np.sqrt(los[:, 0] * los[:, 0] + los[:, 1] * los[:, 1] + los[:, 2] * los[:, 2])
    c = (z[:, 0] * los[:, 0] + z[:, 1] * los[:, 1] + z[:, 2] * los[:, 2]) / (zn * ln)
    return 90.0 - np.degrees(np.arccos(np.clip(c, -1.0, 1.0)))


def elevation_deg(site, body_center, target):
    """Elevation (deg) of ``target`` seen from ``site`` on a spherical body."""
    site, body_center, target = np.broadcast_arrays(
        np.atleast_2d(np.asarray(site, dtype=float)),
        np.atleast_2d(np.asarray(body_center, dtype=float)),
        np.atleast_2d(np.asarray(target, dtype=float)),
    )
    site, body_center, target = (np.ascontiguousarray(a) for a in (site, body_center, target))
    if USE_NUMBA:
        return _elevation_numba(site, body_center, target)
    return _elevation_numpy(site, body_center, target)
