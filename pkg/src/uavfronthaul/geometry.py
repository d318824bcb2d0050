"""Sector topology and per-link geometry.

Coordinates are meters in a global frame with ``z`` up.  Each sector holds
one hovering UAV at its center and ``sbs_per_sector`` ground SBSs drawn
uniformly over the sector footprint.  SBS 0 of the central sector is the
reference (victim) link.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np


class ConfigError(ValueError):
    """Inconsistent experiment or topology configuration."""


class DegenerateGeometry(ValueError):
    """Coincident points where a direction is required."""


@dataclass(frozen=True)
class TopologySpec:
    area_side: float = 5000.0
    sector_side: float = 1000.0
    sbs_per_sector: int = 12
    uav_height_min: float = 100.0
    uav_height_max: float = 150.0
    sbs_height: float = 0.0
    uav_jitter: float = 0.0  # horizontal std of UAV placement around the center, m

    def __post_init__(self):
        if self.area_side <= 0 or self.sector_side <= 0 or self.sbs_per_sector < 1:
            raise ConfigError("topology dimensions must be positive")
        ratio = self.area_side / self.sector_side
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(
                f"sector side {self.sector_side} m does not tile area side {self.area_side} m")
        if not 0 <= self.uav_height_min <= self.uav_height_max:
            raise ConfigError("invalid UAV height range")

    @property
    def sectors_per_side(self) -> int:
        return int(round(self.area_side / self.sector_side))


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable node placement.

    ``uav_positions`` has shape ``(n_sectors, 3)`` and ``sbs_positions``
    ``(n_sectors, sbs_per_sector, 3)``.  Sectors are numbered row-major
    from the ``(0, 0)`` corner.
    """

    area_side: float
    sector_side: float
    uav_positions: np.ndarray
    sbs_positions: np.ndarray
    seed: int

    def __post_init__(self):
        uav = np.array(self.uav_positions, dtype=float)
        sbs = np.array(self.sbs_positions, dtype=float)
        if uav.ndim != 2 or uav.shape[1] != 3 or sbs.ndim != 3 or sbs.shape[0] != uav.shape[0]:
            raise ConfigError("position arrays have inconsistent shapes")
        if not (np.all(np.isfinite(uav)) and np.all(np.isfinite(sbs))):
            raise ConfigError("positions must be finite")
        uav.flags.writeable = False
        sbs.flags.writeable = False
        object.__setattr__(self, "uav_positions", uav)
        object.__setattr__(self, "sbs_positions", sbs)

    @property
    def n_sectors(self) -> int:
        return self.uav_positions.shape[0]

    @property
    def sbs_per_sector(self) -> int:
        return self.sbs_positions.shape[1]

    @property
    def n_sbs(self) -> int:
        return self.n_sectors * self.sbs_per_sector

    @property
    def sectors_per_side(self) -> int:
        return int(round(self.area_side / self.sector_side))

    @property
    def central_sector(self) -> int:
        k = self.sectors_per_side
        return (k // 2) * k + k // 2

    def sector_bounds(self, sector: int):
        """``(x_min, x_max, y_min, y_max)`` of a sector footprint."""
        k = self.sectors_per_side
        row, col = divmod(sector, k)
        s = self.sector_side
        return col * s, (col + 1) * s, row * s, (row + 1) * s

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return (self.area_side == other.area_side and self.sector_side == other.sector_side
                and self.seed == other.seed
                and np.array_equal(self.uav_positions, other.uav_positions)
                and np.array_equal(self.sbs_positions, other.sbs_positions))

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "format": "uavfronthaul-topology/1",
            "units": "m",
            "area_side": self.area_side,
            "sector_side": self.sector_side,
            "seed": self.seed,
            "uav_positions": self.uav_positions.tolist(),
            "sbs_positions": self.sbs_positions.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        if data.get("format") != "uavfronthaul-topology/1":
            raise ConfigError("unrecognized topology file format")
        return cls(area_side=float(data["area_side"]), sector_side=float(data["sector_side"]),
                   uav_positions=np.array(data["uav_positions"], dtype=float),
                   sbs_positions=np.array(data["sbs_positions"], dtype=float),
                   seed=int(data["seed"]))

    def save(self, path) -> None:
        # repr() of a float round-trips exactly, so reloaded topologies are bit-identical
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "Topology":
        return cls.from_dict(json.loads(Path(path).read_text()))


def generate_topology(spec: TopologySpec = TopologySpec(), seed: int = 0) -> Topology:
    """Place UAVs at sector centers and SBSs uniformly inside each sector."""
    rng = np.random.default_rng(seed)
    k = spec.sectors_per_side
    n_sectors = k * k
    s = spec.sector_side
    rows, cols = np.divmod(np.arange(n_sectors), k)
    centers = np.column_stack([(cols + 0.5) * s, (rows + 0.5) * s])
    heights = rng.uniform(spec.uav_height_min, spec.uav_height_max, size=n_sectors)
    if spec.uav_jitter > 0:
        centers = centers + rng.normal(0.0, spec.uav_jitter, size=centers.shape)
    uav = np.column_stack([centers, heights])

    offsets = rng.uniform(0.0, s, size=(n_sectors, spec.sbs_per_sector, 2))
    corner = np.column_stack([cols * s, rows * s])[:, None, :]
    xy = corner + offsets
    z = np.full(xy.shape[:2] + (1,), spec.sbs_height)
    sbs = np.concatenate([xy, z], axis=2)
    return Topology(area_side=spec.area_side, sector_side=s, uav_positions=uav,
                    sbs_positions=sbs, seed=int(seed))


def _unit(v):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DegenerateGeometry("coincident points")
    return v / norm


def boresight_frame(origin, target) -> np.ndarray:
    """Orthonormal antenna frame whose ``z`` axis points from ``origin`` to ``target``.

    Returns a 3x3 array with rows ``(x_hat, y_hat, z_hat)``.  ``x_hat`` is the
    global ``x`` axis projected onto the aperture plane (global ``y`` when
    the boresight is nearly parallel to ``x``).
    """
    z_hat = _unit(np.asarray(target, float) - np.asarray(origin, float))
    ref = np.array([1.0, 0.0, 0.0])
    if abs(z_hat @ ref) > 1.0 - 1e-9:
        ref = np.array([0.0, 1.0, 0.0])
    x_hat = _unit(ref - (ref @ z_hat) * z_hat)
    y_hat = np.cross(z_hat, x_hat)
    return np.vstack([x_hat, y_hat, z_hat])


class DirectionAngles(NamedTuple):
    theta_x: np.ndarray
    theta_y: np.ndarray
    behind: np.ndarray  # target lies behind the aperture plane


def direction_angles(frame: np.ndarray, target, origin) -> DirectionAngles:
    """Angles of ``target`` in the ``x-z`` and ``y-z`` planes of ``frame``.

    ``target`` may be a stack of points with shape ``(..., 3)``.
    """
    d = np.asarray(target, dtype=float) - np.asarray(origin, dtype=float)
    norm = np.linalg.norm(d, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise DegenerateGeometry("target coincides with origin")
    local = (d / norm) @ np.asarray(frame).T
    vx, vy, vz = local[..., 0], local[..., 1], local[..., 2]
    return DirectionAngles(np.arctan2(vx, vz), np.arctan2(vy, vz), vz <= 0.0)


def elevation_angle(sbs, uav):
    """Elevation of ``uav`` seen from ``sbs``; ``pi / 2`` when directly overhead."""
    sbs = np.asarray(sbs, dtype=float)
    uav = np.asarray(uav, dtype=float)
    dh = uav[..., 2] - sbs[..., 2]
    horizontal = np.hypot(uav[..., 0] - sbs[..., 0], uav[..., 1] - sbs[..., 1])
    return np.arctan2(dh, horizontal)


def link_length(a, b):
    return np.linalg.norm(np.asarray(b, float) - np.asarray(a, float), axis=-1)


@dataclass(frozen=True)
class LinkGeometry:
    """Geometry of one SBS -> victim UAV link (angles in radians, length in m)."""

    length: float
    theta_x: float
    theta_y: float
    theta_x_tx: float = 0.0
    theta_y_tx: float = 0.0
    elevation: float = np.pi / 2


@dataclass(frozen=True, eq=False)
class SectorGeometry:
    """Vectorized link geometry seen by the victim antenna of one sector.

    ``intra_*`` arrays cover SBSs ``1..`` of the victim sector (the
    reference SBS 0 is excluded); ``inter_*`` arrays have shape
    ``(n_sectors - 1, sbs_per_sector)`` ordered like ``other_sectors``.
    Arrival angles are in the victim's mean-boresight frame; departure
    angles are in each interfering SBS's own boresight frame (toward its UAV).
    """

    sector: int
    reference: LinkGeometry
    intra_length: np.ndarray
    intra_theta_x: np.ndarray
    intra_theta_y: np.ndarray
    other_sectors: np.ndarray
    inter_length: np.ndarray
    inter_theta_x: np.ndarray
    inter_theta_y: np.ndarray
    inter_theta_x_tx: np.ndarray
    inter_theta_y_tx: np.ndarray
    inter_elevation: np.ndarray


def sector_geometry(topology: Topology, sector: int | None = None) -> SectorGeometry:
    """Compute every link geometry needed for the SINR of ``sector``'s reference link."""
    i = topology.central_sector if sector is None else int(sector)
    uav = topology.uav_positions[i]
    ref_sbs = topology.sbs_positions[i, 0]
    frame = boresight_frame(uav, ref_sbs)

    ref_angles = direction_angles(frame, ref_sbs, uav)
    reference = LinkGeometry(length=float(link_length(ref_sbs, uav)),
                             theta_x=float(ref_angles.theta_x), theta_y=float(ref_angles.theta_y),
                             elevation=float(elevation_angle(ref_sbs, uav)))

    intra_sbs = topology.sbs_positions[i, 1:]
    intra = direction_angles(frame, intra_sbs, uav)

    others = np.array([s for s in range(topology.n_sectors) if s != i], dtype=int)
    inter_sbs = topology.sbs_positions[others]
    arrival = direction_angles(frame, inter_sbs, uav)
    tx_x = np.empty(inter_sbs.shape[:2])
    tx_y = np.empty(inter_sbs.shape[:2])
    for row, s in enumerate(others):
        own_uav = topology.uav_positions[s]
        for j, pos in enumerate(inter_sbs[row]):
            dep = direction_angles(boresight_frame(pos, own_uav), uav, pos)
            tx_x[row, j], tx_y[row, j] = dep.theta_x, dep.theta_y

    return SectorGeometry(
        sector=i, reference=reference,
        intra_length=link_length(intra_sbs, uav),
        intra_theta_x=np.asarray(intra.theta_x), intra_theta_y=np.asarray(intra.theta_y),
        other_sectors=others,
        inter_length=link_length(inter_sbs, uav),
        inter_theta_x=np.asarray(arrival.theta_x), inter_theta_y=np.asarray(arrival.theta_y),
        inter_theta_x_tx=tx_x, inter_theta_y_tx=tx_y,
        inter_elevation=elevation_angle(inter_sbs, uav),
    )
