"""Monte Carlo oracle for the reference-link SINR.

Trial ``t`` draws its two Gaussian tilts from Philox block ``t`` of the
generator keyed by the seed (Box-Muller on the first two words), so every
trial's randomness is fixed by ``(seed, t)`` alone and results do not
depend on how trials are split into batches or workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import SinrAtoms, VibrationModel
from .network import Uplink

_TWO_POW_M53 = 2.0 ** -53


@dataclass(frozen=True)
class McConfig:
    n_trials: int = 1_000_000
    seed: int = 0
    batch_size: int = 65_536
    workers: int = 1
    bin_width_db: float = 0.25
    range_db: tuple = (-30.0, 60.0)
    # diagnostic: hold interference at its zero-tilt value, as the closed form does
    freeze_interference: bool = False

    def __post_init__(self):
        if self.n_trials < 1 or self.batch_size < 1 or self.workers < 1:
            raise ValueError("n_trials, batch_size and workers must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def bin_edges_db(self) -> np.ndarray:
        lo, hi = self.range_db
        n = int(round((hi - lo) / self.bin_width_db))
        return np.linspace(lo, hi, n + 1)


def standard_normal_pairs(seed: int, start: int, count: int):
    """Two standard normals per trial for trials ``start .. start + count - 1``."""
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(start)
    raw = bitgen.random_raw(4 * count).reshape(count, 4)
    u1 = ((raw[:, 0] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_POW_M53  # (0, 1]
    u2 = (raw[:, 1] >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)


def sample_tilts(vib: VibrationModel, seed: int, start: int = 0, count: int = 1):
    """Receive-antenna tilts ``(theta_x, theta_y)`` of the given trials, in radians."""
    z1, z2 = standard_normal_pairs(seed, start, count)
    return vib.mu_x + vib.sigma_theta * z1, vib.mu_y + vib.sigma_theta * z2


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Empirical SINR law built from all trials (kept sorted)."""

    sorted_samples: np.ndarray
    bin_edges_db: np.ndarray
    histogram: np.ndarray = field(repr=False)

    @classmethod
    def from_samples(cls, samples, bin_edges_db) -> "EmpiricalDistribution":
        samples = np.asarray(samples, dtype=float)
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(samples)
        # out-of-range samples are folded into the edge bins
        clipped = np.clip(db, bin_edges_db[0], bin_edges_db[-1])
        counts, _ = np.histogram(clipped, bins=bin_edges_db)
        return cls(np.sort(samples), np.asarray(bin_edges_db), counts / samples.size)

    @property
    def count(self) -> int:
        return self.sorted_samples.size

    @property
    def mean(self) -> float:
        return float(np.mean(self.sorted_samples))

    @property
    def variance(self) -> float:
        return float(np.var(self.sorted_samples))

    def cdf(self, x):
        """``P(SINR <= x)``."""
        out = np.searchsorted(self.sorted_samples, np.asarray(x, dtype=float), side="right") / self.count
        return out if np.ndim(out) else float(out)

    def fraction_below(self, x):
        """``P(SINR < x)``."""
        out = np.searchsorted(self.sorted_samples, np.asarray(x, dtype=float), side="left") / self.count
        return out if np.ndim(out) else float(out)

    def to_csv(self) -> str:
        """Histogram in the atom table layout: one row per dB bin, valued at its center."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sector", "value", "value_db", "mass"])
        centers = 0.5 * (self.bin_edges_db[:-1] + self.bin_edges_db[1:])
        for i, (c, p) in enumerate(zip(centers, self.histogram)):
            w.writerow([i, repr(float(10.0 ** (c / 10.0))), repr(float(c)), repr(float(p))])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class McResult:
    distribution: EmpiricalDistribution
    threshold: float
    outage: float
    capacity: float  # bit/s/Hz
    capacity_bps: float
    low_confidence: bool
    samples: np.ndarray = field(repr=False)  # SINR in trial order


def simulate_sinr(uplink: Uplink, vib: VibrationModel, mc: McConfig) -> np.ndarray:
    """SINR of every trial, in trial order."""
    out = np.empty(mc.n_trials)
    starts = range(0, mc.n_trials, mc.batch_size)

    frozen = None
    if mc.freeze_interference:
        frozen = uplink.terms.intra(0.0, 0.0) + uplink.terms.inter(0.0, 0.0) + uplink.noise

    def work(start):
        count = min(mc.batch_size, mc.n_trials - start)
        tx, ty = sample_tilts(vib, mc.seed, start, count)
        if frozen is None:
            out[start:start + count] = uplink.sinr(tx, ty).sinr
        else:
            out[start:start + count] = uplink.terms.desired(tx, ty) / frozen

    # make sure lazily built caches exist before threads share the uplink
    uplink.sinr(0.0, 0.0)
    if mc.workers == 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            list(pool.map(work, starts))
    return out


def run_mc(uplink: Uplink, vib: VibrationModel, mc: McConfig = McConfig(),
           threshold: float | None = None) -> McResult:
    """Empirical SINR law, outage and ergodic capacity of the reference uplink."""
    threshold = uplink.channel.sinr_threshold if threshold is None else float(threshold)
    samples = simulate_sinr(uplink, vib, mc)
    dist = EmpiricalDistribution.from_samples(samples, mc.bin_edges_db)
    outage = dist.fraction_below(threshold)
    share = uplink.victim_assignment.spectral_share
    capacity = share * float(np.mean(np.log2(1.0 + samples)))
    return McResult(dist, threshold, outage, capacity,
                    capacity * uplink.victim_assignment.total_bandwidth,
                    low_confidence=mc.n_trials * outage < 100, samples=samples)


def cdf_sup_distance(atoms: SinrAtoms, dist: EmpiricalDistribution) -> float:
    """Kolmogorov distance ``sup_x |F_atoms(x) - F_emp(x)|`` between the two step laws.

    Both CDFs are right-continuous steps that only jump at sample or atom
    values, so comparing them at those points covers every ``x``.
    """
    pts = np.union1d(dist.sorted_samples, atoms.values)
    pts = np.union1d(pts, [0.0])
    return float(np.max(np.abs(atoms.cdf(pts) - dist.cdf(pts))))


def atom_point_distance(atoms: SinrAtoms, dist: EmpiricalDistribution) -> float:
    """Largest CDF gap evaluated at the atom values only."""
    v = atoms.values
    return float(np.max(np.abs(atoms.cdf(v) - dist.cdf(v))))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample Kolmogorov-Smirnov critical value."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)
