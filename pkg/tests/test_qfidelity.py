import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from oscfid.dynamics import ModeSpec
from oscfid.qfidelity import (TruncationError, adaptive_weights, alpha_from_g, exact_weights,
                              fidelity_modulus, ground_state, minimum_time, quadrature_weights,
                              quantum_fidelity, quantum_fidelity_curve, quantum_fidelity_limit,
                              spectral_weights)


def _g_for_alpha(k):
    return math.sqrt(k * (k - 1) / 2)


def test_ground_state_solves_eigen_equation():
    x, a = sp.symbols("x alpha", positive=True)
    g2 = a * (a - 1) / 2
    psi = x ** a * sp.exp(-x ** 2 / 2)
    h_psi = -sp.diff(psi, x, 2) / 2 + x ** 2 / 2 * psi + g2 / x ** 2 * psi
    assert sp.simplify(h_psi / psi - (a + sp.Rational(1, 2))) == 0


@pytest.mark.parametrize("g", [0.0, 0.3, 1.0, math.sqrt(3), 2.2])
def test_ground_state_normalised(g):
    gs = ground_state(g)
    x = np.linspace(-12, 12, 200001)
    assert np.trapezoid(gs(x) ** 2, x) == pytest.approx(1.0, abs=1e-9)


def test_alpha():
    assert alpha_from_g(1.0).alpha == pytest.approx(2.0)
    assert alpha_from_g(-1.0).integer_alpha == 2
    assert alpha_from_g(0.5).integer_alpha is None


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_exact_weights_against_quadrature(k):
    g = _g_for_alpha(k)
    ex = exact_weights(k)
    quad = quadrature_weights(g, n_max=k + 4)
    got = dict(zip(quad.n.tolist(), quad.weights.tolist()))
    for n in range(k + 5):
        assert got[n] == pytest.approx(float(ex.get(n, 0)), abs=1e-11)
    assert sum(ex.values()) == 1


def test_exact_weights_known_values():
    assert exact_weights(2) == {0: Fraction(1, 3), 2: Fraction(2, 3)}
    assert exact_weights(3) == {1: Fraction(3, 5), 3: Fraction(2, 5)}
    assert exact_weights(4) == {0: Fraction(3, 35), 2: Fraction(24, 35), 4: Fraction(8, 35)}


@pytest.mark.parametrize("g", [0.2, 0.5, 1.3])
def test_half_line_weights_against_quadrature(g):
    rec = spectral_weights(g, n_max=25, tol=1.0)
    quad = quadrature_weights(g, n_max=49)
    assert np.array_equal(rec.n, quad.n)
    assert np.allclose(rec.weights, quad.weights, rtol=1e-8, atol=1e-13)


@pytest.mark.parametrize("g", [0.05, 0.4, 1.3, 2.7])
def test_weights_sum_to_one(g):
    w = spectral_weights(g, n_max=400_000)
    assert w.total == pytest.approx(1.0, abs=1e-10)
    assert w.single_parity


def test_truncation_error_carries_partial_weights():
    with pytest.raises(TruncationError) as exc:
        spectral_weights(0.5, n_max=10, tol=1e-10)
    part = exc.value.weights
    assert len(part) == 10 and part.tail > 1e-10


def test_adaptive_weights_meet_tolerance():
    w = adaptive_weights(0.3, tol=1e-9)
    assert w.tail <= 1e-9


def test_modulus_at_zero_is_total():
    w = spectral_weights(1.3, n_max=2000, tol=1e-6)
    assert fidelity_modulus(w, 0.0) == pytest.approx(w.total, abs=1e-12)


def test_unperturbed_case_is_constant():
    t = np.linspace(-10, 10, 101)
    for eps in (1, -1):
        assert np.allclose(quantum_fidelity(ModeSpec.symmetric(eps), 0.0, t), 1.0)


def test_stable_period_pi():
    mode = ModeSpec(1.5, 0.2, -0.4, (1 - 0.08) / 1.5, 1)
    w = spectral_weights(0.8, n_max=20000, tol=1e-7)
    t = np.linspace(0, 4, 77)
    assert np.allclose(quantum_fidelity(mode, 0.8, t + math.pi, w), quantum_fidelity(mode, 0.8, t, w),
                       atol=1e-12)


@pytest.mark.parametrize("mode", [ModeSpec(1.0, 0.0, -1.0, 1.0, 1), ModeSpec.symmetric(1),
                                  ModeSpec(0.5, 0.5, -1.0, 1.0, 1)])
def test_minimum_time_matches_grid(mode):
    g = 1.0
    t = np.linspace(0, math.pi, 200001)
    grid_t = t[np.argmin(quantum_fidelity(mode, g, t))]
    assert minimum_time(mode) == pytest.approx(grid_t, abs=1e-4)
    assert quantum_fidelity(mode, g, minimum_time(mode)) == pytest.approx(1 / 3, abs=1e-12)


def test_minimum_time_stable_only():
    with pytest.raises(ValueError):
        minimum_time(ModeSpec.symmetric(-1))


def test_unstable_symmetric_mode_is_even():
    t = np.linspace(0, 8, 101)
    m = ModeSpec.symmetric(-1)
    w = adaptive_weights(1.3)
    assert np.allclose(quantum_fidelity(m, 1.3, t, w), quantum_fidelity(m, 1.3, -t, w), atol=1e-13)


def test_unstable_limit():
    m = ModeSpec(1.0, 0.0, -1.0, 1.0, -1)
    assert quantum_fidelity(m, 1.0, 30.0) == pytest.approx(quantum_fidelity_limit(m, 1.0), abs=1e-12)


def test_curve_container():
    c = quantum_fidelity_curve(ModeSpec.symmetric(1), 1.0, [0.0, 1.0, 2.0])
    assert c.case == "stable-quantum" and len(c) == 3 and c.value[0] == pytest.approx(1.0)
