"""Large-scale channel: path loss, LoS probability, thermal noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BOLTZMANN = 1.380649e-23  # J/K
T0 = 290.0  # K


def dbm_to_watts(p_dbm):
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ChannelParams:
    """Channel and link-budget parameters (SI units, linear scale).

    ``noise_power`` overrides the thermal model when set; otherwise the noise
    is ``k T0 B NF`` over the per-link bandwidth.
    """

    carrier_frequency: float = 60e9
    building_height: float = 20.0
    los_alpha: float = 9.61
    los_beta: float = 0.16
    tx_power: float = 1.0  # 30 dBm
    noise_power: float | None = None
    noise_figure_db: float = 10.0
    total_bandwidth: float = 2e9
    sinr_threshold: float = 10.0  # 10 dB

    def __post_init__(self):
        for name in ("carrier_frequency", "building_height", "los_alpha", "los_beta",
                     "tx_power", "total_bandwidth", "sinr_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.los_alpha < 100:
            raise ValueError("los_alpha must lie in (0, 100)")
        if self.building_height > 150:
            raise ValueError("path-loss model is valid for building heights up to 150 m")
        if self.noise_power is not None and not self.noise_power > 0:
            raise ValueError("noise_power must be positive")

    def link_noise(self, bandwidth: float) -> float:
        """Noise power in a link of the given bandwidth."""
        return noise_power(bandwidth, self.noise_figure_db, override=self.noise_power)


def path_loss_db(length, params: ChannelParams):
    """Path gain in dB (negative) for link lengths in meters."""
    length = np.asarray(length, dtype=float)
    if np.any(length <= 0):
        raise ValueError("link length must be positive")
    f_ghz = params.carrier_frequency / 1e9
    hb = params.building_height
    return (-20.0 * np.log10(40.0 * np.pi * length * f_ghz / 3.0)
            + min(0.03 * hb ** 1.73, 10.0) * np.log10(length)
            + min(0.044 * hb ** 1.73, 14.77)
            - 0.002 * length * np.log10(hb))


def path_loss(length, params: ChannelParams):
    """Linear path gain ``h_L`` of a link."""
    return 10.0 ** (path_loss_db(length, params) / 10.0)


def los_probability(elevation, params: ChannelParams):
    """Elevation-dependent line-of-sight probability (elevation in radians)."""
    deg = np.degrees(np.asarray(elevation, dtype=float))
    return 1.0 / (1.0 + params.los_alpha * np.exp(-params.los_beta * (deg - params.los_alpha)))


def noise_power(bandwidth: float, noise_figure_db: float = 0.0, override: float | None = None) -> float:
    """Thermal noise ``k T0 B 10^(NF/10)`` in watts, or ``override`` when given."""
    if override is not None:
        return float(override)
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    return BOLTZMANN * T0 * bandwidth * 10.0 ** (noise_figure_db / 10.0)
