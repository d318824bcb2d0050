"""Parameter sweeps, named recipes and configuration optimization.

An :class:`ExperimentSpec` describes a grid over topology seeds, vibration
levels, receive-array sizes and reuse factors.  :func:`run_experiment`
evaluates the closed-form outage and capacity at every grid point,
optionally runs the Monte Carlo oracle, and writes CSV files plus a JSON
manifest.  Output files carry no timestamps, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .analytic import (SectorizationParams, VibrationModel, d1_aggregate, ergodic_capacity,
                       outage_probability, sinr_atoms)
from .geometry import ConfigError, TopologySpec, generate_topology
from .montecarlo import McConfig, atom_point_distance, cdf_sup_distance, run_mc
from .network import build_uplink
from .propagation import ChannelParams, linear_to_db

# ---------------------------------------------------------------------------
# Quantities with unit suffixes

_UNITS = {
    "length": {"m": 1.0, "km": 1e3},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "angle": {"deg": 1.0, "rad": 180.0 / math.pi},  # normalized to degrees
    "ratio": {"dB": None},
    "power": {"dBm": None, "W": None, "mW": None},
}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)\s*$")


def parse_quantity(value, kind: str) -> float:
    """Parse ``"60 GHz"``-style strings.

    Lengths come back in meters, frequencies in Hz, angles in degrees,
    ``dB`` ratios as linear factors and powers in watts.
    """
    if isinstance(value, bool) or not isinstance(value, str):
        raise ConfigError(f"{kind} value {value!r} needs an explicit unit suffix")
    match = _QUANTITY.match(value)
    if not match:
        raise ConfigError(f"cannot parse {kind} quantity {value!r}")
    number, unit = float(match.group(1)), match.group(2)
    if unit not in _UNITS[kind]:
        raise ConfigError(f"unit {unit!r} not valid for a {kind} (use one of {sorted(_UNITS[kind])})")
    if kind == "ratio":
        return 10.0 ** (number / 10.0)
    if kind == "power":
        return {"dBm": 10.0 ** ((number - 30.0) / 10.0), "W": number, "mW": number * 1e-3}[unit]
    return number * _UNITS[kind][unit]


def _db_of_ratio(value) -> float:
    return 10.0 * math.log10(parse_quantity(value, "ratio"))


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


# ---------------------------------------------------------------------------
# Experiment specification


@dataclass(frozen=True)
class ExperimentSpec:
    """Grid of configurations to evaluate (SI units, angles in degrees)."""

    name: str = "experiment"
    topology: TopologySpec = TopologySpec()
    seeds: tuple = (0,)
    channel: ChannelParams = ChannelParams()
    sigma_deg: tuple = (2.0,)
    mu_x_deg: float = 0.0
    mu_y_deg: float = 0.0
    n_rx: tuple = (10,)
    reuse: tuple = (3,)
    n_tx: int = 18
    element_spacing: float = 0.5
    sectorization: SectorizationParams = SectorizationParams()
    mc: McConfig | None = None
    target_outage: float = 1e-3
    write_distributions: bool = False

    def __post_init__(self):
        for name in ("seeds", "sigma_deg", "n_rx", "reuse"):
            values = tuple(getattr(self, name))
            if not values:
                raise ConfigError(f"grid '{name}' is empty")
            object.__setattr__(self, name, values)
        if any(int(n) < 1 for n in self.n_rx) or any(int(r) < 1 for r in self.reuse):
            raise ConfigError("array sizes and reuse factors must be positive integers")
        if any(not s > 0 for s in self.sigma_deg):
            raise ConfigError("vibration standard deviations must be positive")
        if any(int(r) > self.topology.sbs_per_sector for r in self.reuse):
            raise ConfigError("reuse factor exceeds the number of SBSs per sector")
        if not 0 < self.target_outage < 1:
            raise ConfigError("target outage must lie in (0, 1)")

    @property
    def grid(self) -> list:
        """Grid points ``(seed, sigma_deg, n_rx, reuse)`` in output order."""
        return [(int(s), float(g), int(n), int(r))
                for s in self.seeds for g in self.sigma_deg for n in self.n_rx for r in self.reuse]

    def with_overrides(self, seeds=None, trials=None, no_mc=False, mc_seed=None) -> "ExperimentSpec":
        spec = self
        if seeds is not None:
            spec = dataclasses.replace(spec, seeds=tuple(int(s) for s in seeds))
        mc = spec.mc
        if no_mc:
            mc = None
        elif mc is not None:
            if trials is not None:
                mc = dataclasses.replace(mc, n_trials=int(trials))
            if mc_seed is not None:
                mc = dataclasses.replace(mc, seed=int(mc_seed))
        return dataclasses.replace(spec, mc=mc)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(dataclasses.asdict(self)))

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentSpec":
        """Build a spec from a parsed config file (see ``demos/configs``)."""
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a mapping")
        known = {"name", "seeds", "topology", "channel", "vibration", "array", "reuse",
                 "sectorization", "monte_carlo", "target_outage", "outputs"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")

        topo = data.get("topology", {})
        topo_kw = {}
        for key in ("area_side", "sector_side", "sbs_height", "uav_jitter"):
            if key in topo:
                topo_kw[key] = parse_quantity(topo[key], "length")
        if "sbs_per_sector" in topo:
            topo_kw["sbs_per_sector"] = int(topo["sbs_per_sector"])
        if "uav_height" in topo:
            lo, hi = _as_list(topo["uav_height"])
            topo_kw["uav_height_min"] = parse_quantity(lo, "length")
            topo_kw["uav_height_max"] = parse_quantity(hi, "length")

        ch = data.get("channel", {})
        ch_kw = {}
        if "carrier_frequency" in ch:
            ch_kw["carrier_frequency"] = parse_quantity(ch["carrier_frequency"], "frequency")
        if "total_bandwidth" in ch:
            ch_kw["total_bandwidth"] = parse_quantity(ch["total_bandwidth"], "frequency")
        if "building_height" in ch:
            ch_kw["building_height"] = parse_quantity(ch["building_height"], "length")
        if "tx_power" in ch:
            ch_kw["tx_power"] = parse_quantity(ch["tx_power"], "power")
        if "noise_power" in ch:
            ch_kw["noise_power"] = parse_quantity(ch["noise_power"], "power")
        if "noise_figure" in ch:
            ch_kw["noise_figure_db"] = _db_of_ratio(ch["noise_figure"])
        if "sinr_threshold" in ch:
            ch_kw["sinr_threshold"] = parse_quantity(ch["sinr_threshold"], "ratio")
        for key in ("los_alpha", "los_beta"):
            if key in ch:
                ch_kw[key] = float(ch[key])

        vib = data.get("vibration", {})
        arr = data.get("array", {})
        sect = data.get("sectorization", {})
        theta_max = sect.get("theta_max", "6/N")
        sect_params = SectorizationParams(
            n_sectors=int(sect.get("n_sectors", 50)),
            theta_max=None if theta_max == "6/N" else math.radians(parse_quantity(theta_max, "angle")))

        mc_data = data.get("monte_carlo", {"enabled": False})
        mc = None
        if mc_data.get("enabled", True):
            mc_kw = {}
            if "trials" in mc_data:
                mc_kw["n_trials"] = int(float(mc_data["trials"]))
            for key in ("seed", "batch_size"):
                if key in mc_data:
                    mc_kw[key] = int(mc_data[key])
            if "bin_width" in mc_data:
                mc_kw["bin_width_db"] = _db_of_ratio(mc_data["bin_width"])
            if "range" in mc_data:
                lo, hi = _as_list(mc_data["range"])
                mc_kw["range_db"] = (_db_of_ratio(lo), _db_of_ratio(hi))
            if "freeze_interference" in mc_data:
                mc_kw["freeze_interference"] = bool(mc_data["freeze_interference"])
            mc = McConfig(**mc_kw)

        try:
            return cls(
                name=str(data.get("name", "experiment")),
                topology=TopologySpec(**topo_kw),
                seeds=tuple(int(s) for s in _as_list(data.get("seeds", [0]))),
                channel=ChannelParams(**ch_kw),
                sigma_deg=tuple(parse_quantity(v, "angle") for v in _as_list(vib.get("sigma", ["2 deg"]))),
                mu_x_deg=parse_quantity(vib.get("mu_x", "0 deg"), "angle"),
                mu_y_deg=parse_quantity(vib.get("mu_y", "0 deg"), "angle"),
                n_rx=tuple(int(n) for n in _as_list(arr.get("n_rx", [10]))),
                reuse=tuple(int(r) for r in _as_list(data.get("reuse", [3]))),
                n_tx=int(arr.get("n_tx", 18)),
                element_spacing=float(arr.get("element_spacing", 0.5)),
                sectorization=sect_params,
                mc=mc,
                target_outage=float(data.get("target_outage", 1e-3)),
                write_distributions=bool(data.get("outputs", {}).get("distributions", False)),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_mapping(data or {})


# ---------------------------------------------------------------------------
# Evaluation of one grid point


@dataclass
class ExperimentResult:
    seed: int
    sigma_deg: float
    n_rx: int
    reuse: int
    status: str = "ok"  # or the exception class name
    error: str = ""
    d1: float = math.nan
    peak_sinr_db: float = math.nan
    outage: float = math.nan
    capacity: float = math.nan  # bit/s/Hz
    capacity_bps: float = math.nan
    mc_outage: float = math.nan
    mc_capacity: float = math.nan
    mc_low_confidence: bool = False
    cdf_sup_distance: float = math.nan
    atom_point_distance: float = math.nan
    atoms_csv: str = field(default="", repr=False)
    empirical_csv: str = field(default="", repr=False)
    overlay_csv: str = field(default="", repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    ROW_FIELDS = ("seed", "sigma_deg", "n_rx", "reuse", "status", "error", "d1", "peak_sinr_db",
                  "outage", "capacity", "capacity_bps", "mc_outage", "mc_capacity",
                  "mc_low_confidence", "cdf_sup_distance", "atom_point_distance")

    def row(self) -> list:
        out = []
        for name in self.ROW_FIELDS:
            v = getattr(self, name)
            out.append(repr(float(v)) if isinstance(v, float) else v)
        return out


@lru_cache(maxsize=8)
def _topology(spec: TopologySpec, seed: int):
    return generate_topology(spec, seed)


def _overlay_csv(atoms, dist) -> str:
    """Analytic and empirical CDFs on the dB grid of the histogram."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sinr_db", "analytic_cdf", "empirical_cdf"])
    edges = dist.bin_edges_db
    lin = 10.0 ** (edges / 10.0)
    for e, fa, fe in zip(edges, atoms.cdf(lin), dist.cdf(lin)):
        w.writerow([repr(float(e)), repr(float(fa)), repr(float(fe))])
    return buf.getvalue()


def evaluate_point(spec: ExperimentSpec, seed: int, sigma_deg: float, n_rx: int, reuse: int,
                   mc_workers: int = 1) -> ExperimentResult:
    """Closed-form (and optionally Monte Carlo) metrics of one grid point."""
    res = ExperimentResult(seed, sigma_deg, n_rx, reuse)
    try:
        topo = _topology(spec.topology, seed)
        uplink = build_uplink(topo, reuse, n_rx, spec.channel, n_tx=spec.n_tx,
                              element_spacing=spec.element_spacing)
        vib = VibrationModel.from_degrees(sigma_deg, spec.mu_x_deg, spec.mu_y_deg)
        d1 = d1_aggregate(uplink)
        atoms = sinr_atoms(d1, n_rx, uplink.rx_array.kd, vib, spec.sectorization)
        res.d1 = d1
        res.peak_sinr_db = float(linear_to_db(atoms.values[0]))
        res.outage = outage_probability(atoms, spec.channel.sinr_threshold)
        res.capacity, res.capacity_bps = ergodic_capacity(atoms, uplink.victim_assignment)
        if spec.write_distributions:
            res.atoms_csv = atoms.to_csv()
        if spec.mc is not None:
            mc = dataclasses.replace(spec.mc, workers=mc_workers)
            mcr = run_mc(uplink, vib, mc, spec.channel.sinr_threshold)
            res.mc_outage = mcr.outage
            res.mc_capacity = mcr.capacity
            res.mc_low_confidence = mcr.low_confidence
            res.cdf_sup_distance = cdf_sup_distance(atoms, mcr.distribution)
            res.atom_point_distance = atom_point_distance(atoms, mcr.distribution)
            if spec.write_distributions:
                res.empirical_csv = mcr.distribution.to_csv()
                res.overlay_csv = _overlay_csv(atoms, mcr.distribution)
    except Exception as exc:  # recorded per row; the run reports failure through its exit status
        res.status = type(exc).__name__
        res.error = str(exc)
    return res


def _evaluate_packed(args):
    return evaluate_point(*args)


def evaluate_grid(spec: ExperimentSpec, workers: int = 1) -> list:
    """Evaluate every grid point; result order follows :attr:`ExperimentSpec.grid`."""
    grid = spec.grid
    if workers <= 1 or len(grid) == 1:
        return [evaluate_point(spec, *g, mc_workers=max(1, workers)) for g in grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_packed, [(spec, *g) for g in grid]))


# ---------------------------------------------------------------------------
# Output


def _point_tag(r: ExperimentResult) -> str:
    return f"seed{r.seed}_sigma{r.sigma_deg:g}_n{r.n_rx}_ru{r.reuse}"


def _results_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ExperimentResult.ROW_FIELDS)
    for r in results:
        w.writerow(r.row())
    return buf.getvalue()


def write_outputs(spec: ExperimentSpec, results, out_dir, extra_files: dict | None = None) -> dict:
    """Write the result table, distribution files and the manifest; returns ``{name: sha256}``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {f"{spec.name}.csv": _results_csv(results)}
    for r in results:
        tag = _point_tag(r)
        if r.atoms_csv:
            files[f"atoms_{tag}.csv"] = r.atoms_csv
        if r.empirical_csv:
            files[f"empirical_{tag}.csv"] = r.empirical_csv
        if r.overlay_csv:
            files[f"cdf_{tag}.csv"] = r.overlay_csv
    files.update(extra_files or {})
    digests = {}
    for name, text in files.items():
        (out / name).write_text(text)
        digests[name] = hashlib.sha256(text.encode()).hexdigest()
    manifest = {
        "software": "uavfronthaul",
        "version": __version__,
        "spec_sha256": spec.digest(),
        "seeds": list(spec.seeds),
        "mc_seed": None if spec.mc is None else spec.mc.seed,
        "spec": spec.to_dict(),
        "files": dict(sorted(digests.items())),
        "failed_rows": sum(not r.ok for r in results),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return digests


def run_experiment(spec: ExperimentSpec, out_dir=None, workers: int = 1) -> list:
    """Evaluate the whole grid and, when ``out_dir`` is given, write the outputs."""
    results = evaluate_grid(spec, workers)
    if out_dir is not None:
        write_outputs(spec, results, out_dir)
    return results


# ---------------------------------------------------------------------------
# Optimization


@dataclass(frozen=True)
class OptimizationResult:
    sigma_deg: float
    seed: int
    target_outage: float
    feasible: bool
    n_rx: int | None
    reuse: int | None
    capacity: float | None
    table: tuple = field(repr=False)  # ExperimentResult rows of the whole grid


def optimize_config(spec: ExperimentSpec, sigma_deg: float, seed: int | None = None,
                    workers: int = 1, results=None) -> OptimizationResult:
    """Largest-capacity ``(N', R_u)`` whose closed-form outage meets the target.

    Ties go to the smaller ``N'``, then the smaller ``R_u``.  When no grid
    point is feasible the result says so instead of raising.
    """
    seed = int(spec.seeds[0] if seed is None else seed)
    if results is None:
        sub = dataclasses.replace(spec, seeds=(seed,), sigma_deg=(float(sigma_deg),), mc=None,
                                  write_distributions=False)
        results = evaluate_grid(sub, workers)
    best = None
    for r in sorted(results, key=lambda r: (r.n_rx, r.reuse)):
        if r.ok and r.outage <= spec.target_outage and (best is None or r.capacity > best.capacity):
            best = r
    if best is None:
        return OptimizationResult(float(sigma_deg), seed, spec.target_outage, False, None, None, None,
                                  tuple(results))
    return OptimizationResult(float(sigma_deg), seed, spec.target_outage, True, best.n_rx, best.reuse,
                              best.capacity, tuple(results))


def optimum_table_csv(opts) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "sigma_deg", "target_outage", "feasible", "n_rx", "reuse", "capacity"])
    for o in opts:
        w.writerow([o.seed, repr(o.sigma_deg), repr(o.target_outage), o.feasible,
                    "" if o.n_rx is None else o.n_rx, "" if o.reuse is None else o.reuse,
                    "" if o.capacity is None else repr(float(o.capacity))])
    return buf.getvalue()


def ensemble_mean_csv(results) -> str:
    """Seed-averaged outage and capacity per ``(sigma, N', R_u)``."""
    groups = {}
    for r in results:
        groups.setdefault((r.sigma_deg, r.n_rx, r.reuse), []).append(r)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sigma_deg", "n_rx", "reuse", "n_seeds", "mean_outage", "mean_capacity"])
    for (s, n, ru), rows in groups.items():
        ok = [r for r in rows if r.ok]
        w.writerow([repr(s), n, ru, len(ok),
                    repr(float(np.mean([r.outage for r in ok]))) if ok else "nan",
                    repr(float(np.mean([r.capacity for r in ok]))) if ok else "nan"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Named recipes

_EVEN_N = (4, 6, 8, 10, 12, 14, 16, 18, 20)


def _mc_default() -> McConfig:
    return McConfig(n_trials=1_000_000, seed=0)


RECIPES = {
    # SINR laws for three receive-array sizes under strong vibration
    "fig6": dict(sigma_deg=(3.0,), n_rx=(9, 12, 16), reuse=(3,), mc=_mc_default(),
                 write_distributions=True),
    # SINR laws for two reuse factors
    "fig7": dict(sigma_deg=(2.0,), n_rx=(10,), reuse=(3, 12), mc=_mc_default(),
                 write_distributions=True),
    # capacity/outage versus N' and R_u for several vibration levels
    "fig8a": dict(sigma_deg=(3.0, 2.0, 1.0, 0.1), n_rx=_EVEN_N, reuse=(4, 6, 8, 10, 12)),
    "fig8b": dict(sigma_deg=(3.0, 2.5, 2.0, 1.7, 1.5), n_rx=_EVEN_N, reuse=(4, 6, 8, 10, 12)),
    # twenty SBS draws
    "fig9": dict(seeds=tuple(range(20)), sigma_deg=(2.0,), n_rx=_EVEN_N, reuse=(6,)),
    # the same ensemble with four times denser sectors
    "dense_ensemble": dict(seeds=tuple(range(20)), sigma_deg=(2.0,), n_rx=_EVEN_N, reuse=(6,),
                           topology=TopologySpec(area_side=2500.0, sector_side=500.0)),
    # optimization tables
    "table4": dict(sigma_deg=(1.7,), n_rx=(4, 6, 8, 10, 12, 14, 16), reuse=(4, 6, 8, 10, 11, 12)),
    "table5": dict(sigma_deg=(2.2,), n_rx=(4, 6, 8, 10, 12, 14, 16), reuse=(4, 5, 6, 7, 8)),
}


def recipe_spec(name: str) -> ExperimentSpec:
    try:
        kwargs = RECIPES[name]
    except KeyError:
        raise ConfigError(f"unknown recipe {name!r}; choose from {sorted(RECIPES)}") from None
    return ExperimentSpec(name=name, **kwargs)


def run_recipe(name: str, out_dir, seeds=None, trials=None, no_mc=False, workers: int = 1) -> list:
    """Run a named recipe and write its files into ``out_dir``."""
    spec = recipe_spec(name).with_overrides(
        seeds=seeds, trials=trials, no_mc=no_mc, mc_seed=None if seeds is None else seeds[0])
    results = evaluate_grid(spec, workers)
    extra = {}
    if name in ("table4", "table5"):
        opts = []
        for seed in spec.seeds:
            rows = [r for r in results if r.seed == seed]
            opts.append(optimize_config(spec, spec.sigma_deg[0], seed, results=rows))
        extra[f"{name}_optimum.csv"] = optimum_table_csv(opts)
    if len(spec.seeds) > 1:
        extra[f"{name}_mean.csv"] = ensemble_mean_csv(results)
    write_outputs(spec, results, out_dir, extra)
    return results
