"""SINR, outage and capacity of SBS-to-UAV mmWave fronthaul uplinks with a vibrating UAV."""

__version__ = "0.1.0"

from .analytic import (MarcumQ, SectorizationParams, SinrAtoms, VibrationModel, d1_aggregate,  # noqa: E402
                       ergodic_capacity, marcum_q, marcum_q_info, outage_probability,
                       rician_angle_pdf, sinr_atoms, uplink_atoms)
from .antenna import (G_N, ArrayConfig, ElementPatternParams, approx_main_lobe_gain,  # noqa: E402
                      array_factor, element_gain, full_gain, normalization_constant)
from .experiment import (ExperimentSpec, optimize_config, parse_quantity, recipe_spec,  # noqa: E402
                         run_experiment)
from .geometry import ConfigError, Topology, TopologySpec, generate_topology  # noqa: E402
from .montecarlo import McConfig, cdf_sup_distance, run_mc, sample_tilts  # noqa: E402
from .network import BandAssignment, Uplink, assign_bands, build_uplink, instantaneous_sinr  # noqa: E402
from .propagation import ChannelParams, los_probability, noise_power, path_loss  # noqa: E402

__all__ = [
    "ArrayConfig", "BandAssignment", "ChannelParams", "ConfigError", "ElementPatternParams",
    "ExperimentSpec", "G_N",
    "MarcumQ", "McConfig", "SectorizationParams", "SinrAtoms", "Topology", "TopologySpec", "Uplink",
    "VibrationModel", "approx_main_lobe_gain", "array_factor", "assign_bands", "build_uplink",
    "cdf_sup_distance", "d1_aggregate", "element_gain", "ergodic_capacity", "full_gain", "generate_topology",
    "instantaneous_sinr", "los_probability", "marcum_q", "marcum_q_info", "noise_power",
    "normalization_constant", "optimize_config", "outage_probability", "parse_quantity", "path_loss",
    "recipe_spec", "rician_angle_pdf", "run_experiment", "run_mc", "sample_tilts", "sinr_atoms", "uplink_atoms",
]
