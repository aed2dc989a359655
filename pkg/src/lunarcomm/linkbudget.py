"""RF and optical link budgets: gains, path loss, noise, SNR and bit error rate.

Units follow the usual link-budget conventions: powers in dBW, gains and
losses in dB, distances in km, frequencies in GHz, data rates in Mbps.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import erfc

SPEED_OF_LIGHT_KM_S = 299792.458
SPEED_OF_LIGHT_M_S = 299792458.0
BOLTZMANN = 1.380649e-23
REFERENCE_TEMP_K = 290.0
FSO_FREQUENCY_GHZ = 193414.0
MIN_DISTANCE_KM = 1.0

BCH_N, BCH_K, BCH_T = 127, 64, 10


class Technology(str, Enum):
    RF = "RF"
    FSO = "FSO"


class Role(str, Enum):
    TX = "TX"
    RX = "RX"


class Modulation(str, Enum):
    BPSK = "BPSK"
    QPSK = "QPSK"
    BPSK_BCH = "BPSK-BCH-127-64"
    OOK = "OOK"


DEFAULT_EFFICIENCY = {Technology.RF: 0.55, Technology.FSO: 0.70}
# FSO receiver noise from the case study; RF receivers default to a 290 K
# system temperature (noise figure 0 dB on a 290 K antenna).
DEFAULT_NOISE = {Technology.RF: (0.0, 290.0), Technology.FSO: (3.0, 273.0)}


@dataclass(frozen=True)
class TransceiverSpec:
    technology: Technology
    role: Role
    frequency_ghz: float
    tx_power_dbw: float | None = None
    antenna_diameter_m: float | None = None
    effective_aperture_m2: float | None = None
    efficiency: float | None = None
    explicit_gain_db: float | None = None
    data_rate_mbps: float | None = None
    modulation: Modulation | None = None
    noise_figure_db: float | None = None
    noise_temperature_k: float | None = None
    extra_losses_db: float = 0.0

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("technology", Technology(self.technology))
        set_("role", Role(self.role))
        if self.modulation is not None:
            set_("modulation", Modulation(self.modulation))
        if self.efficiency is None:
            set_("efficiency", DEFAULT_EFFICIENCY[self.technology])
        if self.role is Role.RX:
            nf, temp = DEFAULT_NOISE[self.technology]
            if self.noise_figure_db is None:
                set_("noise_figure_db", nf)
            if self.noise_temperature_k is None:
                set_("noise_temperature_k", temp)
        self._validate()

    def _validate(self):
        if not self.frequency_ghz > 0:
            raise ValueError(f"frequency_ghz must be > 0, got {self.frequency_ghz}")
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if self.role is Role.TX:
            if self.tx_power_dbw is None or not math.isfinite(self.tx_power_dbw):
                raise ValueError("transmitter needs a finite tx_power_dbw")
            if self.data_rate_mbps is None or not self.data_rate_mbps > 0:
                raise ValueError("transmitter needs data_rate_mbps > 0")
            if self.modulation is None:
                set_mod = Modulation.OOK if self.technology is Technology.FSO else Modulation.QPSK
                object.__setattr__(self, "modulation", set_mod)
        else:
            if not self.noise_figure_db >= 0:
                raise ValueError(f"noise_figure_db must be >= 0, got {self.noise_figure_db}")
            if not self.noise_temperature_k > 0:
                raise ValueError(f"noise_temperature_k must be > 0, got {self.noise_temperature_k}")
        if self.explicit_gain_db is None:
            size = self.antenna_diameter_m if self.technology is Technology.RF else self.effective_aperture_m2
            if size is None:
                what = "antenna_diameter_m" if self.technology is Technology.RF else "effective_aperture_m2"
                raise ValueError(f"{self.technology.value} {self.role.value} needs {what} or explicit_gain_db")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / (self.frequency_ghz * 1e9)

    @property
    def gain_db(self) -> float:
        if self.explicit_gain_db is not None:
            return self.explicit_gain_db
        if self.technology is Technology.RF:
            return parabolic_gain(self.antenna_diameter_m, self.frequency_ghz, self.efficiency)
        return optical_gain(self.effective_aperture_m2, self.wavelength_m, self.efficiency)

    def with_(self, **changes) -> TransceiverSpec:
        return replace(self, **changes)


@dataclass(frozen=True)
class LinkMetricsSample:
    """Link quality at one instant; array-valued when evaluated over many samples."""

    t: float | np.ndarray
    distance: float | np.ndarray
    fspl: float | np.ndarray
    received_power: float | np.ndarray
    snr: float | np.ndarray
    ebn0: float | np.ndarray
    ber: float | np.ndarray
    delay: float | np.ndarray


# --------------------------------------------------------------------------
# Antennas
# --------------------------------------------------------------------------


def parabolic_gain(diameter_m: float, frequency_ghz: float, efficiency: float = 0.55) -> float:
    """Dish gain 10 log10(eta (pi D / lambda)^2) in dB."""
    if diameter_m <= 0 or frequency_ghz <= 0 or efficiency <= 0:
        raise ValueError("diameter, frequency and efficiency must be positive")
    lam = SPEED_OF_LIGHT_M_S / (frequency_ghz * 1e9)
    return 10.0 * math.log10(efficiency * (math.pi * diameter_m / lam) ** 2)


def half_power_beamwidth(gain_db: float) -> float:
    """Beamwidth (deg) from gain via theta = sqrt(32400 / G)."""
    return math.sqrt(32400.0 / 10.0 ** (gain_db / 10.0))


def optical_gain(effective_aperture_m2: float, wavelength_m: float, efficiency: float = 0.70) -> float:
    """Aperture gain 10 log10(eta 4 pi Ae / lambda^2) in dB."""
    if effective_aperture_m2 <= 0 or wavelength_m <= 0 or efficiency <= 0:
        raise ValueError("aperture, wavelength and efficiency must be positive")
    return 10.0 * math.log10(efficiency * 4.0 * math.pi * effective_aperture_m2 / wavelength_m**2)


# --------------------------------------------------------------------------
# Propagation and noise
# --------------------------------------------------------------------------


def free_space_path_loss(distance_km, frequency_ghz: float):
    """20 log10(4 pi d / lambda) in dB; accepts scalar or array distances."""
    lam = SPEED_OF_LIGHT_M_S / (frequency_ghz * 1e9)
    d = np.asarray(distance_km, dtype=float) * 1e3
    out = 20.0 * np.log10(4.0 * math.pi * d / lam)
    return float(out) if out.ndim == 0 else out


def system_noise_temperature(noise_figure_db: float, antenna_temp_k: float, reference_temp_k: float = REFERENCE_TEMP_K) -> float:
    return antenna_temp_k + reference_temp_k * (10.0 ** (noise_figure_db / 10.0) - 1.0)


def propagation_delay(distance_km):
    d = np.asarray(distance_km, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be >= 0")
    out = d / SPEED_OF_LIGHT_KM_S
    return float(out) if out.ndim == 0 else out


def _check_pair(tx: TransceiverSpec, rx: TransceiverSpec) -> None:
    if tx.role is not Role.TX or rx.role is not Role.RX:
        raise ValueError("expected a transmitter and a receiver")
    if tx.technology is not rx.technology:
        raise ValueError(f"technology mismatch: {tx.technology.value} transmitter, {rx.technology.value} receiver")


def received_power(tx: TransceiverSpec, rx: TransceiverSpec, distance_km, atmospheric_loss_db: float = 0.0):
    _check_pair(tx, rx)
    fspl = free_space_path_loss(distance_km, tx.frequency_ghz)
    return (
        tx.tx_power_dbw
        + tx.gain_db
        - fspl
        - atmospheric_loss_db
        - tx.extra_losses_db
        - rx.extra_losses_db
        + rx.gain_db
    )


def _noise_density_db(t_sys_k: float) -> float:
    return 10.0 * math.log10(BOLTZMANN * t_sys_k)


def ebn0(received_power_dbw, t_sys_k: float, data_rate_mbps: float):
    if not data_rate_mbps > 0:
        raise ValueError("data rate must be positive")
    return received_power_dbw - _noise_density_db(t_sys_k) - 10.0 * math.log10(data_rate_mbps * 1e6)


def snr(received_power_dbw, t_sys_k: float, bandwidth_hz: float):
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth must be positive")
    return received_power_dbw - _noise_density_db(t_sys_k) - 10.0 * math.log10(bandwidth_hz)


# --------------------------------------------------------------------------
# Error rates
# --------------------------------------------------------------------------


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def _db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def ber_uncoded(modulation: Modulation | str, ebn0_db):
    """Bit error rate of coherent BPSK or Gray-coded QPSK on AWGN."""
    mod = Modulation(modulation)
    if mod not in (Modulation.BPSK, Modulation.QPSK):
        raise ValueError(f"uncoded BER is defined for BPSK/QPSK, not {mod.value}")
    return q_function(np.sqrt(2.0 * _db_to_linear(ebn0_db)))


def ber_bch_coded(channel_ber, n: int = BCH_N, k: int = BCH_K, t: int = BCH_T):
    """Post-decoding bit error rate of a t-error-correcting (n, k) block code.

    Uses the bounded-distance estimate
    ``(1/n) * sum_{i=t+1..n} (i + t) C(n, i) p^i (1-p)^(n-i)``, clamped to 0.5.
    """
    p = np.asarray(channel_ber, dtype=float)
    if np.any((p < 0) | (p > 0.5)) or np.any(np.isnan(p)):
        raise ValueError("channel bit error rate must lie in [0, 0.5]")
    total = np.zeros_like(p)
    q = 1.0 - p
    for i in range(t + 1, n + 1):
        total = total + (i + t) * math.comb(n, i) * p**i * q ** (n - i)
    out = np.minimum(total / n, 0.5)
    return float(out) if out.ndim == 0 else out


def ber_bch_from_ebn0(ebn0_db, n: int = BCH_N, k: int = BCH_K, t: int = BCH_T):
    """BCH-coded BPSK: channel BER at Ec/N0 = (k/n) Eb/N0, then decoding."""
    ecn0 = _db_to_linear(ebn0_db) * (k / n)
    p = np.minimum(q_function(np.sqrt(2.0 * ecn0)), 0.5)
    return ber_bch_coded(p, n, k, t)


def ber_ook(snr_db):
    """On-off keying with midpoint threshold: Q(sqrt(SNR) / 2)."""
    return q_function(np.sqrt(_db_to_linear(snr_db)) / 2.0)


FsoBerModel = Callable[[np.ndarray], np.ndarray]


def ber_for(tx: TransceiverSpec, snr_db, ebn0_db, fso_model: FsoBerModel = ber_ook):
    """Dispatch to the error-rate model of the transmitter's modulation."""
    if tx.technology is Technology.FSO:
        return fso_model(snr_db)
    if tx.modulation is Modulation.BPSK_BCH:
        return ber_bch_from_ebn0(ebn0_db)
    if tx.modulation is Modulation.OOK:
        return ber_ook(snr_db)
    return ber_uncoded(tx.modulation, ebn0_db)


# --------------------------------------------------------------------------
# Full link
# --------------------------------------------------------------------------


def evaluate_link(
    tx: TransceiverSpec,
    rx: TransceiverSpec,
    distance_km,
    atmospheric_loss_db: float = 0.0,
    t=0.0,
    bandwidth_hz: float | None = None,
    fso_model: FsoBerModel = ber_ook,
) -> LinkMetricsSample:
    """Path loss, received power, SNR, Eb/N0, BER and delay for one hop.

    The noise bandwidth defaults to the data rate, which makes SNR equal to
    Eb/N0.
    """
    _check_pair(tx, rx)
    d = np.asarray(distance_km, dtype=float)
    if np.any(d < MIN_DISTANCE_KM):
        raise ValueError(f"distance must be >= {MIN_DISTANCE_KM} km")
    fspl = free_space_path_loss(d, tx.frequency_ghz)
    pr = received_power(tx, rx, d, atmospheric_loss_db)
    t_sys = system_noise_temperature(rx.noise_figure_db, rx.noise_temperature_k)
    bw = tx.data_rate_mbps * 1e6 if bandwidth_hz is None else bandwidth_hz
    s = snr(pr, t_sys, bw)
    e = ebn0(pr, t_sys, tx.data_rate_mbps)
    ber = np.clip(ber_for(tx, s, e, fso_model), 0.0, 0.5)
    if np.ndim(ber) == 0:
        ber = float(ber)
    return LinkMetricsSample(t, distance_km, fspl, pr, s, e, ber, propagation_delay(d))
