"""Frequency reuse and instantaneous SINR of the reference uplink.

All received powers use the closed-form main-lobe pattern model: the UAV
receive array has ``N' x N'`` elements, every SBS transmits with an
``N x N`` array aligned on its own UAV.  Tilts ``(tilt_x, tilt_y)`` are the
victim antenna's instantaneous orientation errors and may be arrays, in
which case every output is vectorized over them.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .antenna import G_N, ArrayConfig, main_lobe_shape, tilt_angle
from .geometry import ConfigError, LinkGeometry, SectorGeometry, Topology, sector_geometry
from .propagation import ChannelParams, los_probability, path_loss


@dataclass(frozen=True, eq=False)
class BandAssignment:
    """Band index of every link of one sector.

    Band 0 always contains link 0.  When ``reuse_factor`` does not divide the
    number of links the last band holds the remainder.
    """

    reuse_factor: int
    band_of_link: np.ndarray
    total_bandwidth: float

    @property
    def n_links(self) -> int:
        return len(self.band_of_link)

    @property
    def n_bands(self) -> int:
        return int(self.band_of_link.max()) + 1

    @property
    def co_channel(self) -> np.ndarray:
        """``B[j, k] = 1`` when links ``j`` and ``k`` share a band."""
        b = self.band_of_link
        return (b[:, None] == b[None, :]).astype(int)

    @property
    def per_link_bandwidth(self) -> float:
        return self.total_bandwidth * self.reuse_factor / self.n_links

    @property
    def spectral_share(self) -> float:
        """``R_u / N_SU``, the prefactor of the per-link capacity."""
        return self.reuse_factor / self.n_links

    def band_members(self, band: int) -> np.ndarray:
        return np.flatnonzero(self.band_of_link == band)


def _unit_rows(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def group_links(directions: np.ndarray, reuse: int) -> np.ndarray:
    """Greedy max-angular-separation grouping of unit ``directions``.

    Each group starts from the lowest-index free link and repeatedly adds
    the free link whose smallest angle to the current members is largest
    (ties go to the lower index).
    """
    n = len(directions)
    if reuse < 1 or reuse > n:
        raise ConfigError(f"reuse factor {reuse} outside [1, {n}]")
    cosines = np.clip(directions @ directions.T, -1.0, 1.0)
    angle = np.arccos(cosines)
    band = np.full(n, -1)
    g = 0
    while np.any(band < 0):
        free = np.flatnonzero(band < 0)
        members = [free[0]]
        band[free[0]] = g
        while len(members) < reuse and np.any(band < 0):
            free = np.flatnonzero(band < 0)
            min_sep = angle[np.ix_(free, members)].min(axis=1)
            pick = free[np.argmax(min_sep)]  # argmax returns the first maximum
            members.append(pick)
            band[pick] = g
        g += 1
    return band


def assign_bands(topology: Topology, sector: int, reuse: int,
                 total_bandwidth: float = ChannelParams.total_bandwidth) -> BandAssignment:
    """Band assignment of one sector for reuse factor ``R_u``."""
    uav = topology.uav_positions[sector]
    dirs = _unit_rows(topology.sbs_positions[sector] - uav)
    return BandAssignment(int(reuse), group_links(dirs, int(reuse)), float(total_bandwidth))


def assign_all_bands(topology: Topology, reuse: int,
                     total_bandwidth: float = ChannelParams.total_bandwidth) -> tuple[BandAssignment, ...]:
    return tuple(assign_bands(topology, s, reuse, total_bandwidth) for s in range(topology.n_sectors))


@dataclass(frozen=True)
class SinrSample:
    desired: np.ndarray
    intra: np.ndarray
    inter: np.ndarray
    noise: float
    sinr: np.ndarray


def desired_power(link: LinkGeometry, tilt_x, tilt_y, rx_array: ArrayConfig, tx_array: ArrayConfig,
                  channel: ChannelParams, gain_constant: float = G_N):
    """Received power of the reference link for the given receive tilts."""
    theta = tilt_angle(np.asarray(tilt_x, float) - link.theta_x, np.asarray(tilt_y, float) - link.theta_y)
    return (channel.tx_power * path_loss(link.length, channel) * gain_constant * tx_array.peak_gain
            * main_lobe_shape(theta, rx_array.n_elements_per_side, rx_array.kd))


def intra_interference(geom: SectorGeometry, assignment: BandAssignment, tilt_x, tilt_y,
                       rx_array: ArrayConfig, tx_array: ArrayConfig, channel: ChannelParams,
                       gain_constant: float = G_N):
    """Co-channel interference from the other SBSs of the victim sector."""
    return _Terms.build(geom, assignment, None, rx_array, tx_array, channel,
                        gain_constant).intra(tilt_x, tilt_y)


def inter_interference(geom: SectorGeometry, assignments, tilt_x, tilt_y, rx_array: ArrayConfig,
                       tx_array: ArrayConfig, channel: ChannelParams):
    """LoS-weighted side-lobe interference from co-channel SBSs of other sectors."""
    others = [assignments[s] for s in geom.other_sectors]
    return _Terms.build(geom, assignments[geom.sector], others, rx_array, tx_array, channel,
                        G_N).inter(tilt_x, tilt_y)


@dataclass(frozen=True, eq=False)
class _Terms:
    """Tilt-independent constants of every co-channel contribution."""

    n_rx: int
    kd: float
    desired_scale: float  # P h_L G_n G_maxS
    ref_x: float
    ref_y: float
    intra_scale: np.ndarray  # P h_L G_n G_maxS
    intra_x: np.ndarray
    intra_y: np.ndarray
    inter_scale: np.ndarray  # P h_L P_LoS * tx main-lobe factor
    inter_tx_factor: np.ndarray
    inter_x: np.ndarray
    inter_y: np.ndarray
    inter_power: np.ndarray  # P h_L P_LoS
    inter_tx_angle: np.ndarray
    n_tx: int

    @classmethod
    def build(cls, geom: SectorGeometry, victim: BandAssignment, others, rx_array, tx_array,
              channel, gain_constant):
        """``others`` lists the assignments of ``geom.other_sectors`` (None: no inter terms)."""
        g_max_tx = tx_array.peak_gain
        p = channel.tx_power
        ref = geom.reference
        band = victim.band_of_link[0]
        co = victim.band_of_link[1:] == band
        intra_scale = p * path_loss(geom.intra_length[co], channel) * gain_constant * g_max_tx

        if others:
            mask = np.array([a.band_of_link == band for a in others])
        else:
            mask = np.zeros(geom.inter_length.shape, dtype=bool)
        power = (p * path_loss(geom.inter_length[mask], channel)
                 * los_probability(geom.inter_elevation[mask], channel))
        tx_angle = tilt_angle(geom.inter_theta_x_tx[mask], geom.inter_theta_y_tx[mask])
        tx_factor = np.atleast_1d(main_lobe_shape(tx_angle, tx_array.n_elements_per_side, tx_array.kd))
        return cls(
            n_rx=rx_array.n_elements_per_side, kd=rx_array.kd,
            desired_scale=p * float(path_loss(ref.length, channel)) * gain_constant * g_max_tx,
            ref_x=ref.theta_x, ref_y=ref.theta_y,
            intra_scale=np.atleast_1d(intra_scale),
            intra_x=geom.intra_theta_x[co], intra_y=geom.intra_theta_y[co],
            inter_scale=np.atleast_1d(power) * tx_factor, inter_tx_factor=tx_factor,
            inter_x=geom.inter_theta_x[mask], inter_y=geom.inter_theta_y[mask],
            inter_power=np.atleast_1d(power), inter_tx_angle=np.atleast_1d(tx_angle),
            n_tx=tx_array.n_elements_per_side,
        )

    def _rx_shape(self, ax, ay, tilt_x, tilt_y):
        tx = np.asarray(tilt_x, float)[..., None]
        ty = np.asarray(tilt_y, float)[..., None]
        return main_lobe_shape(tilt_angle(ax - tx, ay - ty), self.n_rx, self.kd)

    def desired(self, tilt_x, tilt_y):
        theta = tilt_angle(np.asarray(tilt_x, float) - self.ref_x, np.asarray(tilt_y, float) - self.ref_y)
        return self.desired_scale * main_lobe_shape(theta, self.n_rx, self.kd)

    def intra(self, tilt_x, tilt_y):
        if self.intra_scale.size == 0:
            return np.zeros(np.shape(tilt_x)) if np.ndim(tilt_x) else 0.0
        out = (self.intra_scale * self._rx_shape(self.intra_x, self.intra_y, tilt_x, tilt_y)).sum(axis=-1)
        return out if np.ndim(out) else float(out)

    def inter(self, tilt_x, tilt_y):
        if self.inter_scale.size == 0:
            return np.zeros(np.shape(tilt_x)) if np.ndim(tilt_x) else 0.0
        out = (self.inter_scale * self._rx_shape(self.inter_x, self.inter_y, tilt_x, tilt_y)).sum(axis=-1)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True, eq=False)
class Uplink:
    """Reference uplink of one sector with its interference environment."""

    topology: Topology
    assignments: tuple
    rx_array: ArrayConfig
    tx_array: ArrayConfig
    channel: ChannelParams
    sector: int | None = None
    gain_constant: float = G_N

    @functools.cached_property
    def geometry(self) -> SectorGeometry:
        return sector_geometry(self.topology, self.sector)

    @functools.cached_property
    def terms(self) -> _Terms:
        g = self.geometry
        return _Terms.build(g, self.assignments[g.sector], [self.assignments[s] for s in g.other_sectors],
                            self.rx_array, self.tx_array, self.channel, self.gain_constant)

    @property
    def victim_assignment(self) -> BandAssignment:
        return self.assignments[self.geometry.sector]

    @property
    def noise(self) -> float:
        return self.channel.link_noise(self.victim_assignment.per_link_bandwidth)

    def sinr(self, tilt_x, tilt_y) -> SinrSample:
        t = self.terms
        desired = t.desired(tilt_x, tilt_y)
        intra = t.intra(tilt_x, tilt_y)
        inter = t.inter(tilt_x, tilt_y)
        noise = self.noise
        return SinrSample(desired, intra, inter, noise, desired / (intra + inter + noise))

    def sinr_normalized(self, tilt_x, tilt_y):
        """The same SINR assembled in the ``N'^2 / 2``-scaled bracket form.

        ``P h G_n G_max sin^2(N' k d T / 2) / T^2`` over the bracket of intra
        ``D_j sin^2(.)/T_j^2``, inter ``D_ij sin^2(.) sin^2(.)/(N^2 (T' T)^2)``
        and noise ``N'^2 sigma^2 / 2`` terms.
        """
        t = self.terms
        n, kd = t.n_rx, t.kd

        def s2(theta, nn):
            # sin^2(nn kd theta / 2) / theta^2 with its limit at 0
            return main_lobe_shape(theta, nn, kd) * nn * nn / 2.0

        tx = np.asarray(tilt_x, float)
        ty = np.asarray(tilt_y, float)
        num = t.desired_scale * s2(tilt_angle(tx - t.ref_x, ty - t.ref_y), n)
        intra = (t.intra_scale * s2(tilt_angle(t.intra_x - tx[..., None], t.intra_y - ty[..., None]), n)).sum(-1)
        d_inter = 2.0 * t.inter_power
        tx_s2 = s2(t.inter_tx_angle, t.n_tx)
        rx_s2 = s2(tilt_angle(t.inter_x - tx[..., None], t.inter_y - ty[..., None]), n)
        inter = (d_inter * tx_s2 * rx_s2 / t.n_tx ** 2).sum(-1)
        return num / (intra + inter + n * n * self.noise / 2.0)


def build_uplink(topology: Topology, reuse: int, n_rx: int, channel: ChannelParams = ChannelParams(),
                 n_tx: int = 18, sector: int | None = None, gain_constant: float = G_N,
                 element_spacing: float = 0.5) -> Uplink:
    """Assign bands in every sector and assemble the reference uplink."""
    assignments = assign_all_bands(topology, reuse, channel.total_bandwidth)
    rx = ArrayConfig(n_rx, element_spacing, carrier_frequency=channel.carrier_frequency)
    tx = ArrayConfig(n_tx, element_spacing, carrier_frequency=channel.carrier_frequency)
    return Uplink(topology, assignments, rx, tx, channel, sector, gain_constant)


def instantaneous_sinr(uplink: Uplink, tilt_x, tilt_y) -> SinrSample:
    """SINR ``desired / (intra + inter + noise)`` of the reference link."""
    return uplink.sinr(tilt_x, tilt_y)


def spectral_efficiency(sinr, assignment: BandAssignment):
    """Per-link capacity ``(R_u / N_SU) log2(1 + SINR)`` in bit/s/Hz and bit/s."""
    per_hz = assignment.spectral_share * np.log2(1.0 + np.asarray(sinr, dtype=float))
    return per_hz, per_hz * assignment.total_bandwidth
