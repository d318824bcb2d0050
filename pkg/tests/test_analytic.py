import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy import integrate

from uavfronthaul.analytic import (SectorizationParams, SinrAtoms, VibrationModel, d1_aggregate,
                                   ergodic_capacity, marcum_q, marcum_q_info, outage_probability,
                                   rician_angle_pdf, rician_angle_sf, sinr_atoms, uplink_atoms)
from uavfronthaul.geometry import TopologySpec, generate_topology
from uavfronthaul.network import BandAssignment, build_uplink

# Adaptive-quadrature value of Q_1(1, 2), frozen before the module existed.
Q_1_2 = 0.26901206003590999668


def marcum_oracle(a, b):
    mp.mp.dps = 30
    a, b = mp.mpf(a), mp.mpf(b)
    f = lambda x: x * mp.exp(-(x * x + a * a) / 2) * mp.besseli(0, a * x)  # noqa: E731
    return float(mp.quad(f, [b, b + 5, b + 15, b + 40, mp.inf]))


MARCUM_GRID = [(a, b) for a in np.linspace(0.0, 30.0, 10) for b in np.linspace(0.0, 36.0, 10)]


@pytest.fixture(scope="module")
def topo():
    return generate_topology(TopologySpec(), seed=0)


# --- Marcum Q ------------------------------------------------------------------

def test_marcum_special_cases():
    for a in (0.0, 0.3, 7.0, 60.0):
        assert marcum_q(a, 0.0) == 1.0
    for b in (0.1, 1.0, 4.0):
        assert marcum_q(0.0, b) == math.exp(-b * b / 2)


def test_marcum_golden():
    assert abs(marcum_q(1.0, 2.0) - Q_1_2) < 1e-10


def test_marcum_against_quadrature_grid():
    got = np.array([marcum_q(a, b) for a, b in MARCUM_GRID])
    want = np.array([marcum_oracle(a, b) for a, b in MARCUM_GRID])
    assert np.max(np.abs(got - want)) < 1e-10


def test_marcum_metadata():
    assert marcum_q_info(0.0, 1.0).method == "closed-form"
    assert marcum_q_info(3.0, 2.0).method == "series"
    assert marcum_q_info(25.0, 24.0).method == "quadrature"
    info = marcum_q_info(60.0, 61.0)
    assert info.asymptotic_region
    assert abs(info.value - marcum_oracle(60.0, 61.0)) < 1e-10


def test_marcum_rejects_bad_input():
    with pytest.raises(ValueError):
        marcum_q(-1.0, 1.0)
    with pytest.raises(ValueError):
        marcum_q(1.0, math.inf)


@settings(max_examples=200)
@given(st.floats(0, 40), st.floats(0, 45), st.floats(0, 2))
def test_marcum_monotone(a, b, step):
    q = marcum_q(a, b)
    assert 0.0 <= q <= 1.0
    assert marcum_q(a, b + step) <= q + 1e-14
    assert marcum_q(a + step, b) >= q - 1e-14


def test_marcum_broadcasts():
    out = marcum_q(np.array([[0.5], [1.0]]), np.array([0.5, 1.5, 2.5]))
    assert out.shape == (2, 3)


# --- Rician angle law ------------------------------------------------------------

def test_rayleigh_normalization_and_mode():
    vib = VibrationModel.from_degrees(2.0)
    s = vib.sigma_theta
    total, _ = integrate.quad(rician_angle_pdf, 0, 20 * s, args=(vib,), epsabs=1e-13)
    assert abs(total - 1) < 1e-6
    t = np.linspace(0.2 * s, 3 * s, 20001)
    assert_allclose(t[np.argmax(rician_angle_pdf(t, vib))], s, rtol=1e-3)


@pytest.mark.parametrize("mu_deg", [0.0, 1.0, 3.0])
def test_rician_tail_matches_marcum(mu_deg):
    vib = VibrationModel.from_degrees(1.5, mu_deg, 0.5 * mu_deg)
    b = 2.5 * vib.sigma_theta
    tail, _ = integrate.quad(rician_angle_pdf, b, b + 40 * vib.sigma_theta, args=(vib,),
                             epsabs=1e-14, epsrel=1e-12)
    assert abs(tail - rician_angle_sf(b, vib)) < 1e-8


def test_vibration_model():
    vib = VibrationModel.from_degrees(2.0, 3.0, 4.0)
    assert_allclose(vib.mu_xy, math.radians(5.0), rtol=1e-14)
    with pytest.raises(ValueError):
        VibrationModel(0.0)


# --- atoms ---------------------------------------------------------------------

def test_single_sector_partition():
    vib = VibrationModel.from_degrees(2.0)
    at = sinr_atoms(1.0, 10, np.pi, vib, SectorizationParams(n_sectors=1, theta_max=0.05))
    assert at.values.size == 2
    s = vib.sigma_theta
    q1, q2 = math.exp(-0.05 ** 2 / (2 * s * s)), math.exp(-0.1 ** 2 / (2 * s * s))
    assert_allclose(sorted(at.masses), sorted([1 - q1, q1 - q2]), rtol=1e-14)
    assert_allclose(at.residual_zero_mass, q2, rtol=1e-14)


def test_small_vibration_concentrates_on_peak():
    at = sinr_atoms(1.0, 10, np.pi, VibrationModel(1e-6))
    assert at.sector_index[0] == 0
    assert at.masses[0] == 1.0
    assert_allclose(at.values[0], (10 * np.pi) ** 2 / 4)


@settings(max_examples=60)
@given(st.floats(0.05, 5), st.floats(0, 3), st.integers(2, 24), st.integers(1, 200))
def test_masses_sum_to_one(sigma_deg, mu_deg, n, m):
    at = sinr_atoms(2.0, n, np.pi, VibrationModel.from_degrees(sigma_deg, mu_deg),
                    SectorizationParams(n_sectors=m))
    assert abs(at.total_mass - 1) <= 1e-9
    assert np.all(at.masses >= 0)
    assert np.all(np.diff(at.values) <= 0)


def test_zero_mean_reduces_to_exponentials():
    vib = VibrationModel.from_degrees(2.0)
    sect = SectorizationParams()
    at = sinr_atoms(1.0, 12, np.pi, vib, sect)
    tm = sect.resolve_theta_max(12)
    s = vib.sigma_theta
    b = np.arange(52) * tm / 50 / s
    e = np.array([math.exp(-0.5 * x * x) for x in b])  # what Q(0, b) reduces to
    e[0] = 1.0
    expected = np.concatenate([[1.0 - e[1]], e[1:-1] - e[2:]])
    by_sector = np.empty(51)
    by_sector[at.sector_index] = at.masses
    assert_array_equal(by_sector, np.maximum(expected, 0.0))
    assert at.residual_zero_mass == e[-1]


def test_printed_mass_exceeds_one(topo):
    up = build_uplink(topo, 3, 10)
    vib = VibrationModel.from_degrees(2.0)
    literal = uplink_atoms(up, vib, as_printed=True)
    assert literal.total_mass > 1.0
    assert abs(uplink_atoms(up, vib).total_mass - 1) < 1e-9


def test_atoms_csv_round_trip(tmp_path):
    at = sinr_atoms(3.0, 9, np.pi, VibrationModel.from_degrees(3.0))
    path = tmp_path / "atoms.csv"
    at.to_csv(path)
    back = SinrAtoms.from_csv(path)
    assert_array_equal(back.values, at.values)
    assert_array_equal(back.masses, at.masses)
    assert back.residual_zero_mass == at.residual_zero_mass


def test_atom_cdf_steps():
    at = sinr_atoms(3.0, 9, np.pi, VibrationModel.from_degrees(3.0))
    assert at.cdf(-1.0) == 0.0
    assert at.cdf(0.0) == pytest.approx(at.residual_zero_mass + at.masses[at.values == 0].sum())
    assert at.cdf(at.values[0]) == pytest.approx(1.0)
    grid = np.logspace(-3, 4, 300)
    assert np.all(np.diff(at.cdf(grid)) >= 0)


# --- D1 aggregate ------------------------------------------------------------------

def test_d1_noise_only():
    spec = TopologySpec(area_side=1000.0, sector_side=1000.0)
    up = build_uplink(generate_topology(spec, 5), 1, 10)
    t = up.terms
    assert_allclose(d1_aggregate(up), 2 * t.desired_scale / (10 ** 2 * up.noise), rtol=1e-14)


def test_d1_decreases_with_interference(topo):
    up = build_uplink(topo, 6, 10)
    base = d1_aggregate(up)
    louder = dataclasses.replace(up.terms, intra_scale=10 * up.terms.intra_scale,
                                 inter_power=10 * up.terms.inter_power)
    up.__dict__["terms"] = louder
    assert d1_aggregate(up) < base


@pytest.mark.parametrize("reuse, n", [(3, 9), (3, 12), (6, 10), (12, 16)])
def test_peak_atom_is_zero_tilt_sinr(topo, reuse, n):
    up = build_uplink(topo, reuse, n)
    peak = d1_aggregate(up) * (n * up.rx_array.kd) ** 2 / 4
    assert_allclose(peak, up.sinr(0.0, 0.0).sinr, rtol=0.05)


# --- outage and capacity --------------------------------------------------------------

def test_outage_limits():
    at = sinr_atoms(0.5, 10, np.pi, VibrationModel.from_degrees(2.0))
    assert outage_probability(at, 2 * at.values[0]) == pytest.approx(1.0)
    assert outage_probability(at, 1e-300) == at.residual_zero_mass + at.masses[at.values == 0].sum()


@given(st.floats(0.1, 100), st.floats(1.01, 10))
def test_outage_monotone(th, factor):
    vib = VibrationModel.from_degrees(2.0)
    at = sinr_atoms(0.05, 10, np.pi, vib)
    assert outage_probability(at, th) <= outage_probability(at, th * factor)
    better = sinr_atoms(0.05 * factor, 10, np.pi, vib)
    assert outage_probability(better, th) <= outage_probability(at, th)


def test_capacity_single_atom():
    at = SinrAtoms(np.array([1.0]), np.array([1.0]), np.array([0]), 0.0)
    full = BandAssignment(12, np.zeros(12, dtype=int), 1e9)
    assert ergodic_capacity(at, full) == (1.0, 1e9)


@given(st.integers(0, 49), st.floats(0, 1))
def test_capacity_mass_transfer(i, frac):
    at = sinr_atoms(0.05, 10, np.pi, VibrationModel.from_degrees(2.0))
    share = BandAssignment(6, np.repeat([0, 1], 6), 1e9)
    j = i + 1  # values are sorted descending, so atom i is above atom j
    moved = at.masses.copy()
    dm = frac * moved[j]
    moved[j] -= dm
    moved[i] += dm
    after = SinrAtoms(at.values, moved, at.sector_index, at.residual_zero_mass)
    assert ergodic_capacity(after, share)[0] >= ergodic_capacity(at, share)[0] - 1e-15


# Left-edge atoms bias each bin upwards by O(1/M). When sigma spans many sidelobes (large N' sigma)
# the M = 50 result drifts up to ~2 % from M = 200, so the 1 % bound does not hold there.
COARSE = pytest.mark.xfail(strict=True, reason="left-edge discretization error exceeds 1% at large N' sigma")


@pytest.mark.parametrize("n, reuse, sigma", [(9, 3, 3.0), (12, 3, 3.0), pytest.param(16, 3, 3.0, marks=COARSE),
                                             (10, 3, 2.0), (10, 12, 2.0), (10, 10, 1.7), (8, 7, 2.2),
                                             (14, 6, 1.0), pytest.param(18, 10, 2.2, marks=COARSE)])
def test_capacity_converges_in_sector_count(topo, n, reuse, sigma):
    up = build_uplink(topo, reuse, n)
    vib = VibrationModel.from_degrees(sigma)
    c50 = ergodic_capacity(uplink_atoms(up, vib, SectorizationParams(50)), up.victim_assignment)[0]
    c200 = ergodic_capacity(uplink_atoms(up, vib, SectorizationParams(200)), up.victim_assignment)[0]
    assert abs(c50 - c200) <= 0.01 * c200
