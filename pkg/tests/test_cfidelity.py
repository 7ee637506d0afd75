import math

import numpy as np
import pytest

from oscfid import cfidelity as cf
from oscfid.dynamics import perturbed_trajectory


def test_distribution_validation():
    with pytest.raises(ValueError):
        cf.Gaussian(0.0)
    with pytest.raises(ValueError):
        cf.BallIndicator(-1.0)
    assert cf.Gaussian.rescaled(1 / math.sqrt(2)).scale == pytest.approx(1.0)


@pytest.mark.parametrize("eps", [1, -1])
def test_initial_overlap_is_one(eps):
    assert cf.classical_fidelity(eps, 0.8, cf.Gaussian(), 0.0).value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("eps", [1, -1])
def test_unperturbed_is_one(eps):
    assert cf.classical_fidelity(eps, 0.0, cf.Gaussian(), 1.3).value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("eps,t", [(1, 0.4), (1, 1.9), (-1, 0.3), (-1, -1.1)])
def test_energy_pair_matches_trajectories(eps, t):
    rng = np.random.default_rng(3)
    g = 0.7
    h = cf.energy_pair(eps, g, t)
    C, S = (math.cos(t), math.sin(t)) if eps == 1 else (math.cosh(t), math.sinh(t))
    for q, p in rng.uniform(-2, 2, (50, 2)):
        y = perturbed_trajectory(q, p, g, eps, t)
        x, xd = q * C + p * S, p * C - eps * q * S
        a, b = (q, p) if eps == 1 else cf.uv_from_pq(q, p, t)
        X, Y = h(a, b)
        assert X == pytest.approx(x * x + xd * xd, rel=1e-10)
        assert Y == pytest.approx(y.q ** 2 + y.p ** 2, rel=1e-9)


def test_uv_map_has_unit_jacobian():
    t, q, p, d = 0.7, 0.4, -1.2, 1e-6
    u0 = np.array(cf.uv_from_pq(q, p, t))
    jq = (np.array(cf.uv_from_pq(q + d, p, t)) - u0) / d
    jp = (np.array(cf.uv_from_pq(q, p + d, t)) - u0) / d
    assert jq[0] * jp[1] - jq[1] * jp[0] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("eps,t", [(1, 0.6), (1, 2.0), (-1, 0.5), (-1, -1.5)])
def test_reduced_form_agrees_with_direct(eps, t):
    a = cf.classical_fidelity(eps, 0.6, cf.Gaussian(), t)
    b = cf.classical_fidelity_direct(eps, 0.6, cf.Gaussian(), t)
    assert a.value == pytest.approx(b.value, abs=a.error_estimate + b.error_estimate + 1e-9)


@pytest.mark.parametrize("eps,t", [(1, 1.0), (-1, 0.8)])
def test_ball_direct_monte_carlo(eps, t):
    R = 1.0 if eps == 1 else cf.SQRT3
    a = cf.classical_fidelity(eps, 0.3, cf.BallIndicator(R), t, rng=np.random.default_rng(1),
                              n_samples=400_000)
    b = cf.classical_fidelity_direct(eps, 0.3, cf.BallIndicator(R), t, rng=np.random.default_rng(2),
                                     n_samples=400_000)
    assert abs(a.value - b.value) < 5 * math.hypot(a.error_estimate, b.error_estimate)


def test_stable_period_and_symmetry():
    f = lambda t: cf.classical_fidelity(1, 1.0, cf.Gaussian(), t).value
    assert f(0.7 + math.pi) == pytest.approx(f(0.7), abs=1e-8)
    assert f(-0.7) == pytest.approx(f(0.7), abs=1e-8)


def test_unstable_time_symmetry():
    f = lambda t: cf.classical_fidelity(-1, 1.0, cf.Gaussian(), t).value
    assert f(-2.3) == pytest.approx(f(2.3), abs=1e-8)


def test_infinite_time():
    with pytest.raises(ValueError):
        cf.classical_fidelity(1, 1.0, cf.Gaussian(), math.inf)
    lim = cf.asymptotic_value("gaussian")
    late = cf.classical_fidelity(-1, cf.G_INDEPENDENT, cf.Gaussian(), 9.0)
    assert late.value == pytest.approx(lim.value, abs=1e-6)
    with pytest.raises(ValueError):
        cf.asymptotic_value("uniform")


def test_ball_needs_monte_carlo():
    with pytest.raises(ValueError):
        cf.classical_fidelity(1, 1.0, cf.BallIndicator(), 0.5, method="quadrature")


def test_gaussian_monte_carlo_matches_quadrature():
    q = cf.classical_fidelity(1, 0.5, cf.Gaussian(), 1.0)
    m = cf.classical_fidelity(1, 0.5, cf.Gaussian(), 1.0, method="monte-carlo",
                              rng=np.random.default_rng(4), n_samples=400_000)
    assert abs(q.value - m.value) < 5 * m.error_estimate


def test_curve_points_are_independent_of_grid_length():
    d = cf.BallIndicator(1.0)
    a = cf.classical_fidelity_curve(1, 0.5, d, [0.3, 0.9, 1.4], seed=5, n_samples=20_000)
    b = cf.classical_fidelity_curve(1, 0.5, d, [0.3, 0.9], seed=5, n_samples=20_000)
    c = cf.classical_fidelity_curve(1, 0.5, d, [0.3, 0.9], seed=6, n_samples=20_000)
    assert np.array_equal(a.value[:2], b.value)
    assert not np.array_equal(b.value, c.value)
    assert a.case == "stable-classical"


def test_bound_report_helpers():
    rep = cf.bound_check_stable(1.0, np.linspace(0, math.pi, 5), n_samples=20_000)
    assert rep.ok
    assert set(rep.names()) == {"lower", "upper", "ball_lower", "ball_zero"}
    w = rep.worst("lower")
    assert all(w.margin + w.error <= e.margin + e.error for e in rep.entries if e.name == "lower")


def test_vacuous_ball_bound_at_large_coupling():
    rep = cf.bound_check_stable(10.0, [0.5], n_samples=10_000)
    e = rep.worst("ball_lower")
    assert e.bound < 0 and e.ok


def test_asymptotic_ball_bound_value():
    assert cf.asymptotic_ball_bound() == pytest.approx(0.70270, abs=1e-5)


def test_cusp_windows_and_validation():
    assert cf.default_cusp_windows(1) == [(1e-2, 1e-1), (5e-3, 5e-2)]
    with pytest.raises(ValueError):
        cf.cusp_slope([(0.1, 0.01)])
