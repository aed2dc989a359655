"""Hard-switched RF/FSO hop selection and end-to-end chain accounting."""
from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from itertools import product

import numpy as np

from .access import AccessInterval, total_duration
from .linkbudget import LinkMetricsSample, Technology, TransceiverSpec, evaluate_link
from .timebase import TimeGrid

HOP_NAMES = ("E2L", "L2G", "G2M")
HYBRID = "HYBRID"
_TOKENS = {"RF": Technology.RF, "OP": Technology.FSO}
FORCED_PATTERNS = tuple("-".join(p) for p in product(("RF", "OP"), repeat=3))
VALID_PATTERNS = FORCED_PATTERNS + (HYBRID,)


class Prefer(str, Enum):
    FSO_IF_QUALIFIED = "FSO-if-qualified"
    RF_ONLY = "RF-only"
    FSO_ONLY = "FSO-only"


@dataclass(frozen=True)
class SwitchPolicy:
    ber_threshold: float = 1e-6
    prefer: Prefer = Prefer.FSO_IF_QUALIFIED

    def __post_init__(self):
        object.__setattr__(self, "prefer", Prefer(self.prefer))
        if not 0 < self.ber_threshold < 0.5:
            raise ValueError(f"ber_threshold must be in (0, 0.5), got {self.ber_threshold}")


@dataclass(frozen=True)
class HopConfig:
    name: str
    rf_tx: TransceiverSpec
    rf_rx: TransceiverSpec
    fso_tx: TransceiverSpec
    fso_rx: TransceiverSpec
    rf_atmospheric_db: float = 0.0
    fso_atmospheric_db: float = 0.0

    def __post_init__(self):
        if self.name not in HOP_NAMES:
            raise ValueError(f"hop name must be one of {HOP_NAMES}, got {self.name!r}")
        for spec, tech in ((self.rf_tx, Technology.RF), (self.rf_rx, Technology.RF),
                           (self.fso_tx, Technology.FSO), (self.fso_rx, Technology.FSO)):
            if spec.technology is not tech:
                raise ValueError(f"hop {self.name}: expected {tech.value} transceiver, got {spec.technology.value}")

    def link(self, tech: Technology) -> tuple[TransceiverSpec, TransceiverSpec, float]:
        if tech is Technology.RF:
            return self.rf_tx, self.rf_rx, self.rf_atmospheric_db
        return self.fso_tx, self.fso_rx, self.fso_atmospheric_db

    def rate(self, tech: Technology) -> float:
        return self.link(tech)[0].data_rate_mbps


def select_link(rf_metrics: LinkMetricsSample, fso_metrics: LinkMetricsSample, policy: SwitchPolicy) -> Technology:
    """Hard switch for one hop at one instant; RF is the fallback."""
    if policy.prefer is Prefer.RF_ONLY:
        return Technology.RF
    if policy.prefer is Prefer.FSO_ONLY:
        return Technology.FSO
    return Technology.FSO if fso_metrics.ber <= policy.ber_threshold else Technology.RF


def _select_many(fso_ber: np.ndarray, policy: SwitchPolicy) -> np.ndarray:
    """Vectorised :func:`select_link`; True where FSO is selected."""
    if policy.prefer is Prefer.RF_ONLY:
        return np.zeros(fso_ber.shape, dtype=bool)
    if policy.prefer is Prefer.FSO_ONLY:
        return np.ones(fso_ber.shape, dtype=bool)
    return fso_ber <= policy.ber_threshold


def parse_pattern(pattern: str) -> tuple[Technology, ...] | None:
    """Technologies for a forced pattern such as ``RF-OP-RF``; None for ``HYBRID``."""
    if pattern not in VALID_PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}; valid patterns: {', '.join(VALID_PATTERNS)}")
    if pattern == HYBRID:
        return None
    return tuple(_TOKENS[tok] for tok in pattern.split("-"))


def end_to_end_ber(hop_bers) -> np.ndarray | float:
    """1 - prod(1 - ber) over hops (axis 0), assuming independent hop errors."""
    b = np.asarray(hop_bers, dtype=float)
    out = -np.expm1(np.sum(np.log1p(-b), axis=0))
    return float(out) if np.ndim(out) == 0 else out


def data_volume_gb(duration_s: float, rate_mbps: float) -> float:
    """Decimal gigabytes moved at ``rate_mbps`` for ``duration_s`` seconds."""
    if duration_s < 0 or rate_mbps < 0:
        raise ValueError("duration and rate must be >= 0")
    return duration_s * rate_mbps / 8.0 / 1000.0


def sample_chain(intervals: Sequence[AccessInterval], grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
    """Sample times inside the chain windows and the duration each represents.

    Grid points inside a window are used (its midpoint if none fall inside);
    each window is split at midpoints between its samples so the weights of a
    window sum to its duration.
    """
    step = grid.step
    times, weights = [], []
    for iv in intervals:
        k0 = math.ceil(iv.start / step)
        k1 = math.floor(iv.stop / step)
        ts = np.arange(k0, k1 + 1, dtype=float) * step
        if ts.size == 0:
            ts = np.array([0.5 * (iv.start + iv.stop)])
        edges = np.concatenate(([iv.start], 0.5 * (ts[1:] + ts[:-1]), [iv.stop]))
        times.append(ts)
        weights.append(np.diff(edges))
    if not times:
        return np.empty(0), np.empty(0)
    return np.concatenate(times), np.concatenate(weights)


@dataclass
class ChainReport:
    pattern: str
    chain_access: list[AccessInterval]
    t: np.ndarray
    weights: np.ndarray
    metrics: dict[str, dict[Technology, LinkMetricsSample]]
    selected_fso: dict[str, np.ndarray]
    hop_rate: dict[str, np.ndarray]
    hop_ber: dict[str, np.ndarray]
    hop_delay: dict[str, np.ndarray]
    e2e_delay: np.ndarray
    e2e_ber: np.ndarray
    bottleneck: np.ndarray
    volumes_gb: dict[str, float] = field(default_factory=dict)
    empty: bool = False

    @property
    def chain_access_s(self) -> float:
        return total_duration(self.chain_access)

    @property
    def bottleneck_rate_mbps(self) -> float:
        """Lowest end-to-end rate over the chain windows (0 when empty)."""
        return float(self.bottleneck.min()) if self.bottleneck.size else 0.0

    def _weighted_mean(self, x: np.ndarray) -> float:
        if not x.size:
            return float("nan")
        return float(np.sum(x * self.weights) / np.sum(self.weights))

    @property
    def mean_e2e_delay(self) -> float:
        return self._weighted_mean(self.e2e_delay)

    @property
    def mean_e2e_ber(self) -> float:
        return self._weighted_mean(self.e2e_ber)

    def selections(self, hop: str) -> np.ndarray:
        return np.where(self.selected_fso[hop], Technology.FSO.value, Technology.RF.value)


RangeFn = Callable[[np.ndarray], dict[str, np.ndarray]]


def evaluate_hops(hops: Sequence[HopConfig], ranges: dict[str, np.ndarray], t: np.ndarray):
    """Both technologies on every hop at the given per-hop distances."""
    out = {}
    for hop in hops:
        out[hop.name] = {}
        for tech in (Technology.RF, Technology.FSO):
            tx, rx, atm = hop.link(tech)
            out[hop.name][tech] = evaluate_link(tx, rx, ranges[hop.name], atm, t=t)
    return out


def evaluate_chain(
    hops: Sequence[HopConfig],
    chain_intervals: Sequence[AccessInterval],
    grid: TimeGrid,
    policy: SwitchPolicy,
    ranges: RangeFn,
    pattern: str = HYBRID,
    relay_delay_s: float = 0.0,
    metrics: dict | None = None,
    samples: tuple[np.ndarray, np.ndarray] | None = None,
) -> ChainReport:
    """Per-sample hop selection and end-to-end aggregation over the chain windows.

    ``ranges`` maps sample times to per-hop distances (km). ``pattern`` is
    ``HYBRID`` for policy-driven switching or a forced pattern such as
    ``RF-OP-RF``. Precomputed ``metrics``/``samples`` from an earlier call can
    be passed to avoid re-evaluating the link budgets.
    """
    forced = parse_pattern(pattern)
    names = [h.name for h in hops]
    if sorted(names) != sorted(HOP_NAMES):
        raise ValueError(f"chain needs hops {HOP_NAMES}, got {names}")
    hops = sorted(hops, key=lambda h: HOP_NAMES.index(h.name))
    t, w = sample_chain(chain_intervals, grid) if samples is None else samples
    if metrics is None:
        metrics = evaluate_hops(hops, ranges(t), t) if t.size else {}

    selected, rate, ber, delay = {}, {}, {}, {}
    for i, hop in enumerate(hops):
        if t.size == 0:
            sel = np.zeros(0, dtype=bool)
        elif forced is None:
            sel = _select_many(np.asarray(metrics[hop.name][Technology.FSO].ber, dtype=float), policy)
        else:
            sel = np.full(t.shape, forced[i] is Technology.FSO)
        selected[hop.name] = sel
        rate[hop.name] = np.where(sel, hop.rate(Technology.FSO), hop.rate(Technology.RF)).astype(float)
        if t.size:
            rf, fso = metrics[hop.name][Technology.RF], metrics[hop.name][Technology.FSO]
            ber[hop.name] = np.where(sel, fso.ber, rf.ber)
            delay[hop.name] = np.where(sel, fso.delay, rf.delay)
        else:
            ber[hop.name] = np.zeros(0)
            delay[hop.name] = np.zeros(0)

    if t.size:
        e2e_delay = sum(delay[n] for n in HOP_NAMES) + relay_delay_s * (len(hops) - 1)
        e2e_ber = np.atleast_1d(end_to_end_ber([ber[n] for n in HOP_NAMES]))
        bottleneck = np.min(np.stack([rate[n] for n in HOP_NAMES]), axis=0)
    else:
        e2e_delay = e2e_ber = bottleneck = np.zeros(0)

    volumes = {n: float(np.sum(w * rate[n])) / 8.0 / 1000.0 for n in HOP_NAMES}
    return ChainReport(
        pattern=pattern,
        chain_access=list(chain_intervals),
        t=t,
        weights=w,
        metrics=metrics,
        selected_fso=selected,
        hop_rate=rate,
        hop_ber=ber,
        hop_delay=delay,
        e2e_delay=e2e_delay,
        e2e_ber=e2e_ber,
        bottleneck=bottleneck,
        volumes_gb=volumes,
        empty=t.size == 0,
    )
