"""Hybrid RF/FSO Earth-Moon relay chain simulator.

Propagates a Walker LEO constellation and a Keplerian Lunar Gateway,
extracts Earth -> LEO -> Gateway -> lunar-facility access windows, evaluates
RF and optical link budgets per hop and applies hard RF/FSO switching.
"""
from .access import (
    AccessInterval,
    AccessStats,
    access_intervals,
    access_stats,
    elevation,
    intersect_chain,
    line_of_sight,
    union_access,
)
from .frames import GroundSite, moon_state_at, site_position_inertial
from .hybrid import ChainReport, HopConfig, SwitchPolicy, data_volume_gb, evaluate_chain, select_link
from .linkbudget import (
    LinkMetricsSample,
    TransceiverSpec,
    ber_bch_coded,
    ber_ook,
    ber_uncoded,
    evaluate_link,
    free_space_path_loss,
    half_power_beamwidth,
    optical_gain,
    parabolic_gain,
    propagation_delay,
    system_noise_temperature,
)
from .orbits import OrbitalElements, StateVector, WalkerSpec, elements_to_state, orbital_period, propagate, walker_constellation
from .scenario import Scenario, ScenarioError, load_scenario, run_access_study, run_chain_study
from .timebase import Epoch, TimeGrid

__version__ = "0.1.0"
