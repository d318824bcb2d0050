"""Closed-form SINR law of the reference uplink.

The off-boresight angle of the vibrating receive antenna is Rician
(Rayleigh without a mean offset).  Sectorizing that angle on
``[0, theta_max]`` into ``M`` bins turns the SINR law into a finite set of
Dirac atoms whose masses are differences of first-order Marcum Q values.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .antenna import main_lobe_shape, tilt_angle
from .network import BandAssignment, Uplink


class InternalConsistencyError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# Marcum Q

_SERIES_MAX_A = 20.0
_ASYMPTOTIC_REGION = 50.0


class MarcumQ(NamedTuple):
    value: float
    method: str  # "closed-form", "series" or "quadrature"
    asymptotic_region: bool  # a, b > 50


def _marcum_series(a, b):
    # Both branches use exp(-(a^2+b^2)/2) I_k(ab) = exp(-(a-b)^2/2) ive(k, ab).
    x = a * b
    scale = math.exp(-0.5 * (a - b) ** 2)
    if b >= a:
        r, k, total, sign, offset = a / b, 0, 0.0, 1.0, 0.0
    else:
        r, k, total, sign, offset = b / a, 1, 0.0, -1.0, 1.0
    rk = r ** k
    for _ in range(100000):
        term = rk * special.ive(k, x)
        total += term
        if term <= 1e-17 * total:
            break
        k += 1
        rk *= r
        if rk == 0.0:
            break
    return offset + sign * scale * total


def _marcum_quadrature(a, b):
    def f(x):
        return x * math.exp(-0.5 * (x - a) ** 2) * special.i0e(a * x)

    # integrand is concentrated around x = a with unit width
    lo, hi = max(0.0, a - 40.0), a + 40.0
    if b >= a:
        if b >= hi:
            return 0.0
        val, _ = integrate.quad(f, b, hi, epsabs=1e-15, epsrel=1e-13, limit=500)
        return val
    lower = max(lo, 0.0)
    if b <= lower:
        return 1.0
    val, _ = integrate.quad(f, lower, b, epsabs=1e-15, epsrel=1e-13, limit=500)
    return 1.0 - val


def marcum_q_info(a: float, b: float) -> MarcumQ:
    """First-order Marcum Q with the method used and an overflow-region flag."""
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)) or a < 0 or b < 0:
        raise ValueError("Marcum Q needs finite non-negative arguments")
    region = a > _ASYMPTOTIC_REGION and b > _ASYMPTOTIC_REGION
    if b == 0.0:
        return MarcumQ(1.0, "closed-form", region)
    if a == 0.0:
        return MarcumQ(math.exp(-0.5 * b * b), "closed-form", region)
    if a <= _SERIES_MAX_A:
        value = _marcum_series(a, b)
        method = "series"
    else:
        value = _marcum_quadrature(a, b)
        method = "quadrature"
    return MarcumQ(float(min(max(value, 0.0), 1.0)), method, region)


def marcum_q(a, b):
    """First-order Marcum Q function ``Q_1(a, b)``, broadcasting over arrays."""
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.empty(a_arr.shape)
    for idx in np.ndindex(a_arr.shape):
        out[idx] = marcum_q_info(a_arr[idx], b_arr[idx]).value
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Vibration model


@dataclass(frozen=True)
class VibrationModel:
    """Gaussian orientation errors ``theta_x ~ N(mu_x, s^2)``, ``theta_y ~ N(mu_y, s^2)`` (radians)."""

    sigma_theta: float
    mu_x: float = 0.0
    mu_y: float = 0.0

    def __post_init__(self):
        if not self.sigma_theta > 0:
            raise ValueError("sigma_theta must be positive")

    @classmethod
    def from_degrees(cls, sigma_deg: float, mu_x_deg: float = 0.0, mu_y_deg: float = 0.0):
        return cls(math.radians(sigma_deg), math.radians(mu_x_deg), math.radians(mu_y_deg))

    @property
    def mu_xy(self) -> float:
        return math.hypot(self.mu_x, self.mu_y)


def rician_angle_pdf(theta, vib: VibrationModel):
    """Density of the off-boresight angle (Rayleigh when the mean offset is zero)."""
    theta = np.asarray(theta, dtype=float)
    s2 = vib.sigma_theta ** 2
    mu = vib.mu_xy
    # exp(-(t^2+mu^2)/2s^2) I0(t mu/s^2) = exp(-(t-mu)^2/2s^2) i0e(t mu/s^2)
    return theta / s2 * np.exp(-((theta - mu) ** 2) / (2 * s2)) * special.i0e(theta * mu / s2)


def rician_angle_sf(theta, vib: VibrationModel):
    """``P(angle > theta)``."""
    return marcum_q(vib.mu_xy / vib.sigma_theta, np.asarray(theta, dtype=float) / vib.sigma_theta)


# ---------------------------------------------------------------------------
# SINR atoms


@dataclass(frozen=True)
class SectorizationParams:
    n_sectors: int = 50
    theta_max: float | None = None  # radians; None means 6 / N'

    def __post_init__(self):
        if self.n_sectors < 1:
            raise ValueError("need at least one sector")
        if self.theta_max is not None and not self.theta_max > 0:
            raise ValueError("theta_max must be positive")

    def resolve_theta_max(self, n_rx: int) -> float:
        return 6.0 / n_rx if self.theta_max is None else float(self.theta_max)


@dataclass(frozen=True, eq=False)
class SinrAtoms:
    """Discrete SINR law: atoms sorted by value (descending) plus a mass at zero.

    ``sector_index`` records which angular bin produced each atom (0 is
    the boresight bin).
    """

    values: np.ndarray
    masses: np.ndarray
    sector_index: np.ndarray
    residual_zero_mass: float

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum() + self.residual_zero_mass)

    def cdf(self, x):
        """``P(SINR <= x)`` for linear ``x``."""
        x = np.asarray(x, dtype=float)
        vals = np.concatenate([[0.0], self.values[::-1]])
        cum = np.cumsum(np.concatenate([[self.residual_zero_mass], self.masses[::-1]]))
        idx = np.searchsorted(vals, x, side="right")
        out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
        return out if out.ndim else float(out)

    def to_csv(self, path=None) -> str:
        """Rows of ``sector,value,value_db,mass``; the zero atom is ``sector = -1``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sector", "value", "value_db", "mass"])
        for m, v, p in zip(self.sector_index, self.values, self.masses):
            vdb = 10 * math.log10(v) if v > 0 else float("-inf")
            w.writerow([int(m), repr(float(v)), repr(vdb), repr(float(p))])
        w.writerow([-1, "0.0", "-inf", repr(float(self.residual_zero_mass))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "SinrAtoms":
        text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
        rows = list(csv.DictReader(io.StringIO(text)))
        residual = 0.0
        idx, vals, masses = [], [], []
        for r in rows:
            if int(r["sector"]) == -1:
                residual = float(r["mass"])
            else:
                idx.append(int(r["sector"]))
                vals.append(float(r["value"]))
                masses.append(float(r["mass"]))
        return cls(np.array(vals), np.array(masses), np.array(idx, dtype=int), residual)


def d1_aggregate(uplink: Uplink) -> float:
    """Deterministic signal-to-(interference + noise) aggregate at zero tilt.

    ``P h_L G_n G_max`` over the bracket of intra terms
    ``D_j sin^2(N' k d T_j / 2) / T_j^2``, inter terms
    ``D_ij sin^2(N k d T'/2) sin^2(N' k d T/2) / (N^2 (T' T)^2)`` with
    ``D_ij = 2 P h_L P_LoS`` and the noise term ``N'^2 sigma^2 / 2``.
    """
    t = uplink.terms
    n, kd = t.n_rx, t.kd

    def s2(theta, nn):
        return main_lobe_shape(theta, nn, kd) * nn * nn / 2.0

    bracket = n * n * uplink.noise / 2.0
    if t.intra_scale.size:
        bracket += float(np.sum(t.intra_scale * s2(tilt_angle(t.intra_x, t.intra_y), n)))
    if t.inter_power.size:
        rx = s2(tilt_angle(t.inter_x, t.inter_y), n)
        tx = s2(t.inter_tx_angle, t.n_tx)
        bracket += float(np.sum(2.0 * t.inter_power * tx * rx / t.n_tx ** 2))
    return t.desired_scale / bracket


def sinr_atoms(d1: float, n_rx: int, kd: float, vib: VibrationModel,
               sect: SectorizationParams = SectorizationParams(), as_printed: bool = False,
               check: bool = True) -> SinrAtoms:
    """Dirac-atom SINR distribution.

    Bin ``m`` covers off-boresight angles ``[m, m+1) * theta_max / M`` and
    carries the SINR at its left edge, ``D1 sin^2(N' k d t / 2) / t^2``
    (``D1 (N' k d)^2 / 4`` for ``m = 0``).  Angles beyond
    ``(M+1) theta_max / M`` map to SINR 0.

    ``as_printed=True`` reproduces the printed variant: the boresight atom
    gets the tail mass ``Q(mu/s, theta_max/(M s))`` instead of its complement
    and the side atoms omit the ``1 / theta_max^2`` factor.  Its masses do
    not sum to one.
    """
    if not (d1 > 0 and n_rx >= 1 and kd > 0):
        raise ValueError("atoms need positive d1, n_rx and kd")
    m_count = sect.n_sectors
    theta_max = sect.resolve_theta_max(n_rx)
    a = vib.mu_xy / vib.sigma_theta
    edges = np.arange(m_count + 2) * theta_max / m_count
    q = marcum_q(a, edges / vib.sigma_theta)
    q[0] = 1.0

    m = np.arange(1, m_count + 1)
    arg = n_rx * kd * m * theta_max / (2.0 * m_count)
    side_values = d1 * m_count ** 2 * np.sin(arg) ** 2 / m ** 2
    if not as_printed:
        side_values = side_values / theta_max ** 2
    peak_value = d1 * (n_rx * kd) ** 2 / 4.0
    peak_mass = q[1] if as_printed else 1.0 - q[1]

    values = np.concatenate([[peak_value], side_values])
    masses = np.concatenate([[peak_mass], q[1:-1] - q[2:]])
    masses = np.maximum(masses, 0.0)
    residual = float(q[-1])
    index = np.arange(m_count + 1)

    order = np.argsort(-values, kind="stable")
    atoms = SinrAtoms(values[order], masses[order], index[order], residual)
    if check and not as_printed and abs(atoms.total_mass - 1.0) > 1e-9:
        raise InternalConsistencyError(f"atom masses sum to {atoms.total_mass!r}")
    return atoms


def uplink_atoms(uplink: Uplink, vib: VibrationModel,
                 sect: SectorizationParams = SectorizationParams(), as_printed: bool = False) -> SinrAtoms:
    return sinr_atoms(d1_aggregate(uplink), uplink.rx_array.n_elements_per_side, uplink.rx_array.kd,
                      vib, sect, as_printed=as_printed)


def outage_probability(atoms: SinrAtoms, threshold: float) -> float:
    """``P(SINR < threshold)`` including the mass at zero."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    return float(atoms.residual_zero_mass + atoms.masses[atoms.values < threshold].sum())


def ergodic_capacity(atoms: SinrAtoms, assignment: BandAssignment):
    """Ergodic capacity in bit/s/Hz and bit/s."""
    per_hz = assignment.spectral_share * float(np.dot(atoms.masses, np.log2(1.0 + atoms.values)))
    return per_hz, per_hz * assignment.total_bandwidth
