"""Scenario files and the two studies: constellation access and chain link budgets.

A scenario is a TOML document written with flat dotted keys, e.g.::

    constellation.planes = 4
    hops.L2G.fso.tx.data_rate_mbps = 300

See ``docs/scenario_schema.md`` for every key and its default.
"""
from __future__ import annotations

import json
import math
import re
import sys
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .access import (
    DEFAULT_REFINE_TOL_S,
    DEFAULT_STEP_S,
    AccessInterval,
    AccessStats,
    access_stats,
    intersect_chain,
)
from .bodies import EARTH, BodyConstants
from .frames import DEFAULT_BODIES, MOON, GroundSite
from .geometry import ScenarioGeometry
from .hybrid import (
    HOP_NAMES,
    HYBRID,
    VALID_PATTERNS,
    ChainReport,
    HopConfig,
    SwitchPolicy,
    evaluate_chain,
    evaluate_hops,
    parse_pattern,
    sample_chain,
)
from .linkbudget import FSO_FREQUENCY_GHZ, Role, Technology, TransceiverSpec
from .orbits import OrbitalElements, WalkerSpec, walker_constellation
from .timebase import Epoch, TimeGrid

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

BUNDLED = {"paper_case_study": "paper_case_study.toml"}


class ScenarioError(ValueError):
    """Scenario document is missing keys or violates a constraint."""


@dataclass(frozen=True)
class Scenario:
    name: str
    epoch: Epoch
    duration: float
    step: float
    refine_tol: float
    bodies: dict[str, BodyConstants]
    earth_station: GroundSite
    lunar_facility: GroundSite
    constellation: WalkerSpec
    gateway: OrbitalElements
    hops: tuple[HopConfig, ...]
    policy: SwitchPolicy
    forced_patterns: tuple[str, ...]
    sizes: tuple[tuple[int, int], ...]
    relay_delay_s: float = 0.0

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.epoch, self.duration, self.step)

    def hop(self, name: str) -> HopConfig:
        return next(h for h in self.hops if h.name == name)

    def with_step(self, step: float) -> Scenario:
        return replace(self, step=step, refine_tol=min(self.refine_tol, step))

    def geometry(self, planes: int | None = None, sats_per_plane: int | None = None) -> ScenarioGeometry:
        spec = self.constellation
        if planes is not None:
            spec = WalkerSpec(planes, sats_per_plane, min(spec.phasing_factor, planes - 1), spec.base)
        return ScenarioGeometry(
            self.epoch, self.earth_station, self.lunar_facility, walker_constellation(spec), self.gateway, self.bodies
        )


# --------------------------------------------------------------------------
# Loading
# --------------------------------------------------------------------------

_SECTION_KEYS = {
    "scenario": {"name", "epoch", "epoch_jd", "duration_s", "step_s", "refine_tol_s"},
    "earth_station": {"latitude", "longitude", "altitude", "min_elevation"},
    "lunar_facility": {"latitude", "longitude", "altitude", "min_elevation"},
    "constellation": {
        "planes", "sats_per_plane", "phasing_factor", "semi_major_axis", "eccentricity",
        "inclination", "arg_perigee", "raan", "true_anomaly",
    },
    "gateway": {"semi_major_axis", "eccentricity", "inclination", "arg_perigee", "raan", "true_anomaly"},
    "policy": {"ber_threshold", "prefer"},
    "study": {"sizes", "forced_patterns", "relay_delay_s"},
}
_BODY_KEYS = {"mu", "radius", "rotation_period", "rotation_epoch_meridian"}
_HOP_KEYS = {"rf_atmospheric_loss_db", "fso_atmospheric_loss_db"}
_TX_KEYS = {
    "frequency_ghz", "tx_power_dbw", "antenna_diameter_m", "effective_aperture_m2", "efficiency",
    "gain_db", "data_rate_mbps", "modulation", "extra_losses_db",
}
_RX_KEYS = {
    "frequency_ghz", "antenna_diameter_m", "effective_aperture_m2", "efficiency", "gain_db",
    "noise_figure_db", "noise_temperature_k", "extra_losses_db",
}

REQUIRED_KEYS = (
    "scenario.epoch",
    "earth_station.latitude",
    "earth_station.longitude",
    "lunar_facility.latitude",
    "lunar_facility.longitude",
    "constellation.planes",
    "constellation.sats_per_plane",
    "constellation.semi_major_axis",
    "constellation.inclination",
    "gateway.semi_major_axis",
    "gateway.eccentricity",
    "gateway.inclination",
) + tuple(
    f"hops.{h}.{k}"
    for h in HOP_NAMES
    for k in ("rf.tx.frequency_ghz", "rf.tx.data_rate_mbps", "rf.rx.frequency_ghz", "fso.tx.data_rate_mbps")
)

DEFAULT_TX_POWER_DBW = 1.0


def _flatten(doc: Mapping, prefix: str = "") -> dict[str, object]:
    out = {}
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _allowed(key: str) -> bool:
    parts = key.split(".")
    if parts[0] in _SECTION_KEYS:
        return len(parts) == 2 and parts[1] in _SECTION_KEYS[parts[0]]
    if parts[0] == "bodies":
        return len(parts) == 3 and parts[1] in ("earth", "moon") and parts[2] in _BODY_KEYS
    if parts[0] == "hops" and len(parts) >= 3 and parts[1] in HOP_NAMES:
        if len(parts) == 3:
            return parts[2] in _HOP_KEYS
        if len(parts) == 5 and parts[2] in ("rf", "fso"):
            return parts[4] in (_TX_KEYS if parts[3] == "tx" else _RX_KEYS if parts[3] == "rx" else ())
    return False


class _Reader:
    def __init__(self, flat: dict[str, object]):
        self.flat = flat

    def get(self, key: str, default=None, kind=float):
        if key not in self.flat:
            return default
        value = self.flat[key]
        try:
            if kind is float:
                if isinstance(value, bool):
                    raise TypeError
                return float(value)
            if kind is int:
                if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                    raise TypeError
                return int(value)
            if kind is str:
                if not isinstance(value, str):
                    raise TypeError
                return value
            return kind(value)
        except (TypeError, ValueError):
            raise ScenarioError(f"{key}: expected {kind.__name__}, got {value!r}") from None


def _build(section: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        field_name = msg.split(" ", 1)[0]
        if field_name in kwargs:
            raise ScenarioError(f"{section}.{field_name}: {msg}") from None
        raise ScenarioError(f"{section}: {msg}") from None


def _transceiver(r: _Reader, prefix: str, tech: Technology, role: Role) -> TransceiverSpec:
    g = lambda k, d=None, kind=float: r.get(f"{prefix}.{k}", d, kind)  # noqa: E731
    default_freq = FSO_FREQUENCY_GHZ if tech is Technology.FSO else None
    kwargs = dict(
        technology=tech,
        role=role,
        frequency_ghz=g("frequency_ghz", default_freq),
        antenna_diameter_m=g("antenna_diameter_m"),
        effective_aperture_m2=g("effective_aperture_m2"),
        efficiency=g("efficiency"),
        explicit_gain_db=g("gain_db"),
        extra_losses_db=g("extra_losses_db", 0.0),
    )
    if kwargs["frequency_ghz"] is None:
        raise ScenarioError(f"missing required key: {prefix}.frequency_ghz")
    if role is Role.TX:
        kwargs.update(
            tx_power_dbw=g("tx_power_dbw", DEFAULT_TX_POWER_DBW),
            data_rate_mbps=g("data_rate_mbps"),
            modulation=g("modulation", None, str),
        )
    else:
        kwargs.update(noise_figure_db=g("noise_figure_db"), noise_temperature_k=g("noise_temperature_k"))
    spec = _build(prefix, TransceiverSpec, **kwargs)
    if spec.explicit_gain_db is None:
        try:
            spec.gain_db
        except ValueError as exc:
            raise ScenarioError(f"{prefix}: {exc}") from None
    return spec


def _parse_size(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", str(text))
    if not m or int(m.group(1)) < 1 or int(m.group(2)) < 1:
        raise ValueError(f"constellation size must look like 'PxS' with P, S >= 1, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def parse_sizes(text: str) -> tuple[tuple[int, int], ...]:
    """``'1x1,2x2'`` -> ``((1, 1), (2, 2))``."""
    return tuple(_parse_size(s) for s in text.split(",") if s.strip())


def load_scenario(document: Mapping | str | Path) -> Scenario:
    """Validated :class:`Scenario` from a parsed document, a TOML path, or a bundled name."""
    if isinstance(document, (str, Path)):
        document = read_document(document)
    flat = _flatten(document)
    unknown = sorted(k for k in flat if not _allowed(k))
    if unknown:
        raise ScenarioError(f"unknown keys: {', '.join(unknown)}")
    missing = [k for k in REQUIRED_KEYS if k not in flat and not (k == "scenario.epoch" and "scenario.epoch_jd" in flat)]
    if missing:
        raise ScenarioError(f"missing required keys: {', '.join(missing)}")
    r = _Reader(flat)

    if "scenario.epoch_jd" in flat:
        epoch = _build("scenario", Epoch, julian_date=r.get("scenario.epoch_jd"))
    else:
        text = r.get("scenario.epoch", kind=str)
        try:
            epoch = Epoch.from_iso(text)
        except ValueError as exc:
            raise ScenarioError(f"scenario.epoch: {exc}") from None
    duration = r.get("scenario.duration_s", 86400.0)
    step = r.get("scenario.step_s", DEFAULT_STEP_S)
    refine = r.get("scenario.refine_tol_s", DEFAULT_REFINE_TOL_S)
    if not duration > 0:
        raise ScenarioError(f"scenario.duration_s: must be > 0, got {duration}")
    if not 0 < step <= duration:
        raise ScenarioError(f"scenario.step_s: must satisfy 0 < step <= duration, got {step}")
    if not 0 < refine <= step:
        raise ScenarioError(f"scenario.refine_tol_s: must satisfy 0 < refine_tol <= step, got {refine}")

    bodies = {}
    for name, default in (("earth", EARTH), ("moon", MOON)):
        kw = {f.name: r.get(f"bodies.{name}.{f.name}", getattr(default, f.name)) for f in fields(BodyConstants) if f.name != "name"}
        bodies[name] = _build(f"bodies.{name}", BodyConstants, name=name, **kw)

    def site(section: str, body: str) -> GroundSite:
        return _build(
            section,
            GroundSite,
            body=body,
            latitude=r.get(f"{section}.latitude"),
            longitude=r.get(f"{section}.longitude"),
            altitude=r.get(f"{section}.altitude", 0.0),
            min_elevation=r.get(f"{section}.min_elevation", 0.0),
        )

    def elements(section: str, body: str) -> OrbitalElements:
        el = _build(
            section,
            OrbitalElements,
            central_body=body,
            semi_major_axis=r.get(f"{section}.semi_major_axis"),
            eccentricity=r.get(f"{section}.eccentricity", 0.0),
            inclination=r.get(f"{section}.inclination"),
            arg_perigee=r.get(f"{section}.arg_perigee", 0.0),
            raan=r.get(f"{section}.raan", 0.0),
            true_anomaly=r.get(f"{section}.true_anomaly", 0.0),
            epoch=epoch,
        )
        radius = bodies[body].radius
        if not el.semi_major_axis > radius:
            raise ScenarioError(
                f"{section}.semi_major_axis: must exceed the {body} radius {radius} km, got {el.semi_major_axis}"
            )
        return el

    base = elements("constellation", "earth")
    constellation = _build(
        "constellation",
        WalkerSpec,
        planes=r.get("constellation.planes", kind=int),
        sats_per_plane=r.get("constellation.sats_per_plane", kind=int),
        phasing_factor=r.get("constellation.phasing_factor", 0, int),
        base=base,
    )

    hops = []
    for name in HOP_NAMES:
        p = f"hops.{name}"
        hops.append(
            _build(
                p,
                HopConfig,
                name=name,
                rf_tx=_transceiver(r, f"{p}.rf.tx", Technology.RF, Role.TX),
                rf_rx=_transceiver(r, f"{p}.rf.rx", Technology.RF, Role.RX),
                fso_tx=_transceiver(r, f"{p}.fso.tx", Technology.FSO, Role.TX),
                fso_rx=_transceiver(r, f"{p}.fso.rx", Technology.FSO, Role.RX),
                rf_atmospheric_db=r.get(f"{p}.rf_atmospheric_loss_db", 0.0),
                fso_atmospheric_db=r.get(f"{p}.fso_atmospheric_loss_db", 0.0),
            )
        )

    policy = _build(
        "policy",
        SwitchPolicy,
        ber_threshold=r.get("policy.ber_threshold", 1e-6),
        prefer=r.get("policy.prefer", "FSO-if-qualified", str),
    )

    patterns = tuple(flat.get("study.forced_patterns", ("RF-RF-RF", "OP-OP-OP", "RF-OP-RF")))
    for pat in patterns:
        if pat == HYBRID:
            raise ScenarioError("study.forced_patterns: HYBRID is always run and cannot be listed")
        try:
            parse_pattern(pat)
        except ValueError as exc:
            raise ScenarioError(f"study.forced_patterns: {exc}") from None
    try:
        sizes = tuple(_parse_size(s) for s in flat.get("study.sizes", ("1x1", "2x2", "3x3", "4x4")))
    except ValueError as exc:
        raise ScenarioError(f"study.sizes: {exc}") from None
    relay_delay = r.get("study.relay_delay_s", 0.0)
    if not relay_delay >= 0:
        raise ScenarioError(f"study.relay_delay_s: must be >= 0, got {relay_delay}")

    return Scenario(
        name=r.get("scenario.name", "scenario", str),
        epoch=epoch,
        duration=duration,
        step=step,
        refine_tol=refine,
        bodies=bodies,
        earth_station=site("earth_station", "earth"),
        lunar_facility=site("lunar_facility", "moon"),
        constellation=constellation,
        gateway=elements("gateway", "moon"),
        hops=tuple(hops),
        policy=policy,
        forced_patterns=patterns,
        sizes=sizes,
        relay_delay_s=relay_delay,
    )


def read_document(source: str | Path) -> dict:
    """Parse a scenario TOML file, or a bundled scenario by name."""
    if str(source) in BUNDLED:
        text = resources.files("lunarcomm.data").joinpath(BUNDLED[str(source)]).read_text()
    else:
        text = Path(source).read_text()
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{source}: malformed scenario file: {exc}") from None


def bundled_scenario(name: str = "paper_case_study") -> Scenario:
    return load_scenario(name)


# --------------------------------------------------------------------------
# Emitting
# --------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot emit non-finite value {value}")
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot emit {type(value).__name__}")


def _transceiver_items(prefix: str, spec: TransceiverSpec) -> list[tuple[str, object]]:
    items = [("frequency_ghz", spec.frequency_ghz)]
    if spec.role is Role.TX:
        items += [("tx_power_dbw", spec.tx_power_dbw), ("data_rate_mbps", spec.data_rate_mbps), ("modulation", spec.modulation.value)]
    else:
        items += [("noise_figure_db", spec.noise_figure_db), ("noise_temperature_k", spec.noise_temperature_k)]
    for key, value in (
        ("antenna_diameter_m", spec.antenna_diameter_m),
        ("effective_aperture_m2", spec.effective_aperture_m2),
        ("efficiency", spec.efficiency),
        ("gain_db", spec.explicit_gain_db),
        ("extra_losses_db", spec.extra_losses_db),
    ):
        if value is not None:
            items.append((key, value))
    return [(f"{prefix}.{k}", float(v) if isinstance(v, int) and not isinstance(v, bool) else v) for k, v in items]


def emit_scenario(sc: Scenario) -> str:
    """Flat dotted-key TOML text that :func:`load_scenario` reads back identically."""
    items: list[tuple[str, object]] = [
        ("scenario.name", sc.name),
        ("scenario.epoch_jd", sc.epoch.julian_date),
        ("scenario.duration_s", sc.duration),
        ("scenario.step_s", sc.step),
        ("scenario.refine_tol_s", sc.refine_tol),
    ]
    for name, body in sc.bodies.items():
        items += [(f"bodies.{name}.{f.name}", getattr(body, f.name)) for f in fields(BodyConstants) if f.name != "name"]
    for section, s in (("earth_station", sc.earth_station), ("lunar_facility", sc.lunar_facility)):
        items += [(f"{section}.{k}", getattr(s, k)) for k in ("latitude", "longitude", "altitude", "min_elevation")]
    c = sc.constellation
    items += [
        ("constellation.planes", c.planes),
        ("constellation.sats_per_plane", c.sats_per_plane),
        ("constellation.phasing_factor", c.phasing_factor),
    ]
    for section, el in (("constellation", c.base), ("gateway", sc.gateway)):
        items += [
            (f"{section}.{k}", getattr(el, k))
            for k in ("semi_major_axis", "eccentricity", "inclination", "arg_perigee", "raan", "true_anomaly")
        ]
    for hop in sc.hops:
        p = f"hops.{hop.name}"
        items += [(f"{p}.rf_atmospheric_loss_db", hop.rf_atmospheric_db), (f"{p}.fso_atmospheric_loss_db", hop.fso_atmospheric_db)]
        items += _transceiver_items(f"{p}.rf.tx", hop.rf_tx)
        items += _transceiver_items(f"{p}.rf.rx", hop.rf_rx)
        items += _transceiver_items(f"{p}.fso.tx", hop.fso_tx)
        items += _transceiver_items(f"{p}.fso.rx", hop.fso_rx)
    items += [
        ("policy.ber_threshold", sc.policy.ber_threshold),
        ("policy.prefer", sc.policy.prefer.value),
        ("study.sizes", [f"{p}x{s}" for p, s in sc.sizes]),
        ("study.forced_patterns", list(sc.forced_patterns)),
        ("study.relay_delay_s", sc.relay_delay_s),
    ]
    lines = []
    last_section = None
    for key, value in items:
        section = key.split(".")[0]
        if section != last_section and lines:
            lines.append("")
        last_section = section
        if isinstance(value, int) and not isinstance(value, bool) and key.split(".")[0] not in ("constellation",):
            value = float(value)
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Studies
# --------------------------------------------------------------------------


@dataclass
class SizeResult:
    planes: int
    sats_per_plane: int
    pairs: dict[str, list[AccessInterval]]
    hops: dict[str, list[AccessInterval]]
    chain: list[AccessInterval]

    @property
    def label(self) -> str:
        return f"{self.planes}x{self.sats_per_plane}"

    def stats(self, name: str) -> AccessStats:
        if name == "CHAIN":
            return access_stats(self.chain)
        return access_stats(self.hops[name])


def _size_job(scenario: Scenario, planes: int, sats: int) -> SizeResult:
    geom = scenario.geometry(planes, sats)
    access = geom.hop_access(scenario.grid, scenario.refine_tol)
    hops = {n: access[n] for n in HOP_NAMES}
    chain = intersect_chain([hops[n] for n in HOP_NAMES], "CHAIN")
    return SizeResult(planes, sats, access["pairs"], hops, chain)


def run_access_study(
    scenario: Scenario, constellation_sizes: Sequence[tuple[int, int]] | None = None, jobs: int = 1
) -> list[SizeResult]:
    """Per-pair, per-hop and chain access for each Walker size, in input order."""
    sizes = tuple(scenario.sizes if constellation_sizes is None else constellation_sizes)
    for p, s in sizes:
        if p < 1 or s < 1:
            raise ScenarioError(f"constellation size must have P, S >= 1, got {p}x{s}")
    if jobs > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_size_job, scenario, p, s) for p, s in sizes]
            return [f.result() for f in futures]
    return [_size_job(scenario, p, s) for p, s in sizes]


@dataclass
class ChainStudy:
    access: SizeResult
    reports: dict[str, ChainReport] = field(default_factory=dict)

    @property
    def samples(self):
        first = next(iter(self.reports.values()))
        return first.t, first.weights

    @property
    def metrics(self):
        return next(iter(self.reports.values())).metrics


def run_chain_study(scenario: Scenario, access: SizeResult | None = None, patterns: Sequence[str] | None = None) -> ChainStudy:
    """Link budgets over the chain windows of the scenario's constellation.

    Runs every forced pattern plus the policy-driven ``HYBRID`` selection.
    Link metrics are evaluated once and shared across patterns.
    """
    c = scenario.constellation
    if access is None:
        access = _size_job(scenario, c.planes, c.sats_per_plane)
    patterns = tuple(scenario.forced_patterns if patterns is None else patterns)
    for pat in patterns:
        parse_pattern(pat)
    if HYBRID not in patterns:
        patterns = patterns + (HYBRID,)
    geom = scenario.geometry(access.planes, access.sats_per_plane)
    grid = scenario.grid
    samples = sample_chain(access.chain, grid)
    t = samples[0]
    metrics = evaluate_hops(scenario.hops, geom.ranges(t), t) if t.size else {}
    study = ChainStudy(access)
    for pat in patterns:
        study.reports[pat] = evaluate_chain(
            scenario.hops,
            access.chain,
            grid,
            scenario.policy,
            geom.ranges,
            pattern=pat,
            relay_delay_s=scenario.relay_delay_s,
            metrics=metrics,
            samples=samples,
        )
    return study


__all__ = [
    "Scenario",
    "ScenarioError",
    "SizeResult",
    "ChainStudy",
    "VALID_PATTERNS",
    "load_scenario",
    "read_document",
    "bundled_scenario",
    "emit_scenario",
    "parse_sizes",
    "run_access_study",
    "run_chain_study",
    "DEFAULT_BODIES",
]
