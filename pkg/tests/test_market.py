import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_ket
from oracles import market_max_closed_form, market_min_closed_form, market_oracle, market_state_formula
from qnewcomb.errors import ValidationError
from qnewcomb.market import (
    CHART_U,
    CHART_Z,
    ProjectivePoint,
    ScanConfig,
    build_market_state,
    demand_to_supply,
    find_extrema,
    market_payoff,
    market_payoff_batch,
    omega_response,
    real_axis_extrema,
    scan_arrays,
    scan_landscape,
    strategy_from_projective,
)

INF = ProjectivePoint.infinity()
S2 = 1 / math.sqrt(2)


def P(z):
    return ProjectivePoint.from_z(z)


def test_demand_to_supply_examples():
    np.testing.assert_allclose(demand_to_supply([1, 0]), [S2, S2], atol=0)
    np.testing.assert_allclose(demand_to_supply([S2, S2]), [1, 0], atol=1e-15)
    np.testing.assert_allclose(demand_to_supply([1, 0, 0, 0]), [0.5] * 4, atol=1e-15)


def test_demand_to_supply_preserves_norm_and_is_involution_for_qubits(rng):
    for m in (2, 3, 5, 8):
        k = random_ket(rng, m)
        assert abs(np.linalg.norm(demand_to_supply(k)) - 1) <= 1e-12
    for _ in range(100):
        k = random_ket(rng, 2)
        assert np.max(np.abs(demand_to_supply(demand_to_supply(k)) - k)) <= 1e-12


def test_strategy_from_projective():
    np.testing.assert_array_equal(strategy_from_projective(P(0)), [1, 0])
    np.testing.assert_array_equal(strategy_from_projective(INF), [0, 1])
    np.testing.assert_allclose(strategy_from_projective(P(1)), [S2, S2], atol=1e-16)
    with pytest.raises(ValidationError):
        ProjectivePoint(0, 0)


@settings(max_examples=200)
@given(
    st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
    st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
)
def test_strategy_scale_invariant_up_to_phase(z, lam):
    p = P(z)
    q = ProjectivePoint(lam * p.a, lam * p.b)
    k1, k2 = strategy_from_projective(p), strategy_from_projective(q)
    assert abs(abs(np.vdot(k1, k2)) - 1) <= 1e-12
    assert abs(market_payoff(p) - market_payoff(q)) <= 1e-9 * 1e3


def test_omega_response_examples():
    assert omega_response(P(0)).distance(P(1)) <= 1e-15
    assert omega_response(P(1)).distance(P(0)) <= 1e-15
    assert omega_response(P(-1)).is_infinity


def test_omega_response_matches_mobius_map(rng):
    for _ in range(500):
        z = complex(*rng.normal(size=2) * 3)
        if abs(1 + z) < 1e-3:
            continue
        w = omega_response(P(z)).z
        assert abs(w - (1 - z) / (1 + z)) <= 1e-9 * max(1, abs(w))


def test_omega_response_involution(rng):
    pts = [P(complex(*rng.normal(size=2) * 3)) for _ in range(500)] + [P(0), P(1), P(-1), INF]
    for p in pts:
        back = omega_response(omega_response(p))
        c = p.canonical()
        assert abs(back.a - c.a) <= 1e-12 and abs(back.b - c.b) <= 1e-12


def test_canonical_form(rng):
    for _ in range(200):
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        c = ProjectivePoint(a, b).canonical()
        assert abs(abs(c.a) ** 2 + abs(c.b) ** 2 - 1) <= 1e-15
        big = c.a if abs(c.a) >= abs(c.b) else c.b
        assert big.imag == 0 and big.real > 0
        assert c.distance(ProjectivePoint(a, b)) <= 1e-7


def test_market_state_examples():
    plus = np.array([S2, S2])
    s0 = build_market_state(P(0))
    np.testing.assert_allclose(s0.rho, np.kron(np.diag([1, 0]), np.outer(plus, plus)), atol=1e-15)
    s1 = build_market_state(P(1))
    np.testing.assert_allclose(s1.rho, np.kron(np.outer(plus, plus), np.diag([1, 0])), atol=1e-15)


def test_market_state_matches_closed_form(rng):
    n = 0
    while n < 1000:
        z = complex(*rng.normal(size=2) * 2)
        if abs(1 + z) <= 1e-3:
            continue
        n += 1
        s = build_market_state(P(z))
        assert np.max(np.abs(s.rho - market_state_formula(z))) <= 1e-12
        assert abs(np.trace(s.rho) - 1) <= 1e-12
        assert np.max(np.abs(s.rho @ s.rho - s.rho)) <= 1e-12


def test_market_states_at_poles_are_pure():
    for p in (P(-1), INF):
        s = build_market_state(p)
        assert abs(np.trace(s.rho) - 1) <= 1e-12
        assert np.max(np.abs(s.rho @ s.rho - s.rho)) <= 1e-12


@pytest.mark.parametrize(
    "p,expected", [(P(1), 500.0), (P(-1), 1000500.0), (P(0), 501000.0), (INF, 500000.0)]
)
def test_market_payoff_reference_points(p, expected):
    assert abs(market_oracle(p.a, p.b) - expected) <= 1e-9
    assert abs(market_payoff(p) - expected) <= 1e-6


def test_market_payoff_matches_product_oracle(rng):
    pts = [P(complex(*rng.normal(size=2) * 3)) for _ in range(998)] + [P(-1), INF]
    for p in pts:
        assert abs(market_payoff(p) - market_oracle(p.a, p.b)) <= 1e-9


def test_batch_path_matches_scalar(rng):
    a = rng.normal(size=50) + 1j * rng.normal(size=50)
    b = rng.normal(size=50) + 1j * rng.normal(size=50)
    batch = market_payoff_batch(a, b)
    for ai, bi, x in zip(a, b, batch):
        assert abs(market_payoff(ProjectivePoint(ai, bi)) - x) <= 1e-9


def test_scan_small_grid():
    samples = scan_landscape(ScanConfig(grid_n=3, radius=1, inverse_chart=False))
    assert len(samples) == 9
    corners = {complex(s.re, s.im) for s in samples if abs(s.re) == 1 and abs(s.im) == 1}
    assert corners == {1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j}
    at1 = [s for s in samples if s.re == 1 and s.im == 0]
    assert abs(at1[0].payoff - 500) <= 1e-6
    for s in samples:
        assert abs(s.payoff - market_payoff(s.point())) <= 1e-9


def test_scan_ordering_and_inverse_chart():
    samples = scan_landscape(ScanConfig(grid_n=5, radius=2, inverse_chart=True))
    assert len(samples) == 50
    keys = [(s.chart != CHART_Z, s.row, s.col) for s in samples]
    assert keys == sorted(keys)
    origin_u = [s for s in samples if s.chart == CHART_U and s.re == 0 and s.im == 0][0]
    assert abs(origin_u.payoff - 500000) <= 1e-6


def test_scan_payoffs_bounded():
    for chart, pay in scan_arrays(ScanConfig()).items():
        assert pay.min() >= 500 - 1e-6
        assert pay.max() <= 1000500 + 1e-6


def test_scan_workers_bit_identical():
    a = scan_arrays(ScanConfig(grid_n=101, workers=1))
    b = scan_arrays(ScanConfig(grid_n=101, workers=4))
    for k in a:
        assert a[k].tobytes() == b[k].tobytes()


def test_find_extrema_default():
    ext = find_extrema()
    assert ext.argmax.distance(P(-1)) <= 1e-3
    assert ext.argmin.distance(P(1)) <= 1e-3
    zmax, vmax = market_max_closed_form()
    zmin, vmin = market_min_closed_form()
    assert abs(ext.max - vmax) <= 1e-6
    assert abs(ext.min - vmin) <= 1e-6
    assert abs(ext.argmax.z - zmax) <= 1e-6
    assert abs(ext.argmin.z - zmin) <= 1e-6


def test_find_extrema_agrees_with_real_axis_scan():
    ext, line = find_extrema(), real_axis_extrema()
    assert ext.argmax.distance(line.argmax) <= 1e-4
    assert ext.argmin.distance(line.argmin) <= 1e-4
    assert abs(ext.max - line.max) <= 1e-3
    assert abs(ext.min - line.min) <= 1e-3


def test_extremum_offset_from_unit_circle_is_real():
    # the true optimum sits off |z| = 1 by about 1e-3 and beats z = -1 by a quarter dollar
    zmax, vmax = market_max_closed_form()
    assert vmax > market_payoff(P(-1)) + 0.2
    assert abs(zmax + 1) > 9e-4


def test_scan_config_validation():
    for kwargs in ({"grid_n": 2}, {"radius": 0}, {"radius": float("inf")}, {"refine": -1}, {"workers": 0}):
        with pytest.raises(ValidationError):
            ScanConfig(**kwargs)


def test_projective_point_z_and_str():
    assert INF.z.real == math.inf
    assert P(2 - 1j).z == 2 - 1j
    assert str(INF) == "z=inf"
    assert cmath.isclose(P(1j).canonical().z, 1j)
