"""Radiation patterns of uniform square arrays.

Gains are linear and normalized so that the pattern integrates to one over
the unit sphere (an isotropic radiator has gain ``1 / (4 pi)``).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import integrate

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Gain constant of the closed-form main-lobe approximation.
G_N = 3.1548


class NumericalFailure(RuntimeError):
    """A numerical routine did not reach its requested accuracy."""


@dataclass(frozen=True)
class ElementPatternParams:
    """3GPP single-element pattern parameters (angles in degrees, gains in dB)."""

    vertical_3db_beamwidth: float = 65.0
    horizontal_3db_beamwidth: float = 65.0
    max_element_gain: float = 8.0
    front_back_ratio: float = 30.0
    side_lobe_limit: float = 30.0

    def __post_init__(self):
        for name in ("vertical_3db_beamwidth", "horizontal_3db_beamwidth",
                     "max_element_gain", "front_back_ratio", "side_lobe_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_ELEMENT = ElementPatternParams()


@dataclass(frozen=True)
class ArrayConfig:
    """An ``N x N`` uniform square array.

    ``element_spacing`` is in wavelengths, phase shifts in radians and the
    carrier frequency in Hz.
    """

    n_elements_per_side: int
    element_spacing: float = 0.5
    phase_shift_x: float = 0.0
    phase_shift_y: float = 0.0
    carrier_frequency: float = 60e9

    def __post_init__(self):
        if int(self.n_elements_per_side) != self.n_elements_per_side or self.n_elements_per_side < 1:
            raise ValueError("n_elements_per_side must be a positive integer")
        if not self.element_spacing > 0:
            raise ValueError("element_spacing must be positive")
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def wave_number(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def kd(self) -> float:
        """Electrical spacing ``k * d_a`` in radians."""
        return 2.0 * np.pi * self.element_spacing

    @property
    def normalization(self) -> float:
        return normalization_constant(self)

    @property
    def peak_gain(self) -> float:
        """Boresight gain of the full normalized pattern."""
        return float(full_gain(0.0, 0.0, self))


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("angles must be finite")


def element_gain(theta_x, theta_y, params: ElementPatternParams = DEFAULT_ELEMENT):
    """Linear gain of one 3GPP element at direction angles ``(theta_x, theta_y)``.

    The vertical angle is ``atan2(sqrt(1 + sin^2 theta_x), sin theta_y)``
    (90 degrees at boresight); the vertical and horizontal attenuations are
    each clipped, and their sum is clipped at the front-back ratio.
    """
    theta_x = np.asarray(theta_x, dtype=float)
    theta_y = np.asarray(theta_y, dtype=float)
    _check_finite(theta_x, theta_y)
    theta_e = np.degrees(np.arctan2(np.sqrt(1.0 + np.sin(theta_x) ** 2), np.sin(theta_y)))
    att_v = np.minimum(12.0 * ((theta_e - 90.0) / params.vertical_3db_beamwidth) ** 2,
                       params.side_lobe_limit)
    att_h = np.minimum(12.0 * (np.degrees(theta_x) / params.horizontal_3db_beamwidth) ** 2,
                       params.front_back_ratio)
    gain_db = params.max_element_gain - np.minimum(att_v + att_h, params.front_back_ratio)
    return 10.0 ** (gain_db / 10.0)


def _dirichlet_sq(x, n):
    """``(sin(n x / 2) / (n sin(x / 2)))**2`` with its removable singularities filled."""
    half = np.sin(x / 2.0)
    out = np.ones_like(x)
    ok = np.abs(half) >= 1e-12
    out[ok] = (np.sin(n * x[ok] / 2.0) / (n * half[ok])) ** 2
    return out


def array_factor(theta, phi, cfg: ArrayConfig):
    """Normalized array factor of the square array, in ``[0, 1]``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    _check_finite(theta, phi)
    n = cfg.n_elements_per_side
    u = cfg.kd * np.sin(theta) * np.cos(phi) + cfg.phase_shift_x
    v = cfg.kd * np.sin(theta) * np.sin(phi) + cfg.phase_shift_y
    return _dirichlet_sq(np.array(u), n) * _dirichlet_sq(np.array(v), n)


def spherical_to_direction_angles(theta, phi):
    """Map spherical ``(theta, phi)`` to the ``x-z`` / ``y-z`` plane angles."""
    st = np.sin(theta)
    vx, vy, vz = st * np.cos(phi), st * np.sin(phi), np.cos(theta)
    return np.arctan2(vx, vz), np.arctan2(vy, vz)


def direction_angles_to_spherical(theta_x, theta_y):
    """Inverse of :func:`spherical_to_direction_angles` for the front hemisphere."""
    tx, ty = np.tan(theta_x), np.tan(theta_y)
    return np.arctan(np.hypot(tx, ty)), np.arctan2(ty, tx)


def _unnormalized_gain(theta, phi, cfg, params):
    tx, ty = spherical_to_direction_angles(theta, phi)
    return element_gain(tx, ty, params) * array_factor(theta, phi, cfg)


def _sphere_integral(cfg, params, n_theta, n_phi):
    # Integrand is even in theta_x and theta_y, so one quadrant in phi suffices.
    theta = np.linspace(0.0, np.pi, n_theta + 1)
    phi = np.linspace(0.0, np.pi / 2.0, n_phi // 4 + 1)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    f = _unnormalized_gain(t, p, cfg, params) * np.sin(t)
    inner = integrate.simpson(f, x=phi, axis=1)
    return 4.0 * float(integrate.simpson(inner, x=theta))


@functools.lru_cache(maxsize=None)
def _normalization(cfg, params, rtol, max_level):
    n_theta, n_phi = 256, 512
    previous = _sphere_integral(cfg, params, n_theta, n_phi)
    for _ in range(max_level):
        n_theta, n_phi = 2 * n_theta, 2 * n_phi
        current = _sphere_integral(cfg, params, n_theta, n_phi)
        if abs(current - previous) <= rtol * abs(current):
            return 1.0 / current
        previous = current
    raise NumericalFailure(
        f"pattern integral for N={cfg.n_elements_per_side} did not converge to {rtol:g}")


def normalization_constant(cfg: ArrayConfig, params: ElementPatternParams = DEFAULT_ELEMENT,
                           rtol: float = 1e-6, max_level: int = 5) -> float:
    """Total-power normalization ``1 / integral(G_e * G_a * sin(theta))`` over the sphere.

    Tensor-product Simpson quadrature starting at 256 x 512 (theta x phi)
    points, doubled until the relative change drops below ``rtol``.
    Results are cached per (config, element) pair.
    """
    return _normalization(cfg, params, rtol, max_level)


def full_gain(theta, phi, cfg: ArrayConfig, params: ElementPatternParams = DEFAULT_ELEMENT):
    """Normalized gain ``G_0 * G_e * G_a`` in spherical coordinates."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return normalization_constant(cfg, params) * _unnormalized_gain(theta, phi, cfg, params)


def full_gain_xy(theta_x, theta_y, cfg: ArrayConfig, params: ElementPatternParams = DEFAULT_ELEMENT):
    """Normalized gain at front-hemisphere direction angles ``(theta_x, theta_y)``."""
    theta, phi = direction_angles_to_spherical(np.asarray(theta_x, float), np.asarray(theta_y, float))
    return full_gain(theta, phi, cfg, params)


def tilt_angle(theta_x, theta_y):
    """Off-boresight angle ``atan(sqrt(tan^2 theta_x + tan^2 theta_y))``."""
    return np.arctan(np.hypot(np.tan(theta_x), np.tan(theta_y)))


def main_lobe_shape(off_axis, n, kd):
    """``(1 - cos(n kd t)) / (n^2 t^2)``, written as ``2 sin^2(n kd t / 2) / (n t)^2``.

    Equals ``kd**2 / 2`` at ``t = 0``.
    """
    t = np.asarray(off_axis, dtype=float)
    out = np.full(t.shape, kd * kd / 2.0)
    ok = np.abs(t) > 1e-12
    tt = t[ok]
    out[ok] = 2.0 * np.sin(n * kd * tt / 2.0) ** 2 / (n * tt) ** 2
    return out if out.ndim else float(out)


def approx_main_lobe_gain(theta_x, theta_y, n_rx: int, g_max_tx: float, cfg: ArrayConfig,
                          gain_constant: float = G_N):
    """Closed-form approximation of the link gain product around the main lobe.

    Returns ``G_n * g_max_tx * (1 - cos(N' k d_a T)) / (N'^2 T^2)`` where
    ``T`` is the off-boresight angle of ``(theta_x, theta_y)``.
    """
    theta_x = np.asarray(theta_x, dtype=float)
    theta_y = np.asarray(theta_y, dtype=float)
    _check_finite(theta_x, theta_y)
    return gain_constant * g_max_tx * main_lobe_shape(tilt_angle(theta_x, theta_y), n_rx, cfg.kd)
