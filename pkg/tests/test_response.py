"""Linear-response checks.

The load-bearing test integrates the driven matter pair to its long-time
limit with a plain RK4 loop and compares the closed-form curve against that
oracle. For a linear system with constant forcing the RK4 fixed point is the
exact steady state, so only the transient has to die out; the slowest decay
rate on the chosen grid is ~2 rad/us and the 14 us horizon leaves a residual
below 1e-11.
"""

import math

import numpy as np
import pytest
from scipy.signal import hilbert

from rydstore.model import PhysicalParams
from rydstore.response import (
    eit_window_and_vg,
    imchi_at_zero_sweep,
    inset_curve_set,
    peak_positions,
    susceptibility,
    susceptibility_curve,
)

GAMMA = 36.12831551628262


def _params(delta_p=0.0):
    return PhysicalParams(gamma=GAMMA, delta_p=delta_p, delta_c=-delta_p,
                          g_sqrt_n=1.45e4, density_n=2e-5, c6=-1445132620.6513047)


def _steady_response(delta, v, omega_c, params, t_final=14.0, dt=0.002):
    """gamma * P at the long-time limit under a unit drive, RK4."""
    d = np.asarray(delta, float)
    a = -(params.gamma + 1j * (params.delta_p - d))
    b = -1j * (np.asarray(v, float) - d)
    om = np.asarray(omega_c, float)
    p = np.zeros(np.broadcast(d, b, om).shape, complex)
    s = np.zeros_like(p)

    def rate(p, s):
        return a * p + 1j * om * s + 1j, 1j * om * p + b * s

    for _ in range(int(round(t_final / dt))):
        k1p, k1s = rate(p, s)
        k2p, k2s = rate(p + 0.5 * dt * k1p, s + 0.5 * dt * k1s)
        k3p, k3s = rate(p + 0.5 * dt * k2p, s + 0.5 * dt * k2s)
        k4p, k4s = rate(p + dt * k3p, s + dt * k3s)
        p = p + dt * (k1p + 2 * k2p + 2 * k3p + k4p) / 6.0
        s = s + dt * (k1s + 2 * k2s + 2 * k3s + k4s) / 6.0
    return params.gamma * p


class TestSteadyStateOracle:
    def test_formula_matches_time_integration_on_grid(self):
        # 10 x 10 x 3 in (probe offset, shift, control), poles excluded
        p = _params()
        d, v, om = np.meshgrid((np.linspace(-8.0, 8.0, 10) + 0.0371) * GAMMA,
                               -np.linspace(0.29, 7.13, 10) * GAMMA,
                               np.array([2.0, 4.0, 6.0]) * GAMMA, indexing="ij")
        oracle = _steady_response(d.ravel(), v.ravel(), om.ravel(), p)
        got = np.array([susceptibility(dd, vv, p, oo)
                        for dd, vv, oo in zip(d.ravel(), v.ravel(), om.ravel())])
        np.testing.assert_allclose(got, oracle, rtol=1e-6, atol=1e-12)

    def test_oracle_is_converged(self):
        p = _params()
        late = _steady_response(2.0 * GAMMA, -3.0 * GAMMA, 2.0 * GAMMA, p, t_final=14.0)
        later = _steady_response(2.0 * GAMMA, -3.0 * GAMMA, 2.0 * GAMMA, p, t_final=18.0)
        assert abs(late - later) < 1e-9

    def test_detuned_probe_grid(self):
        p = _params(delta_p=-5.0 * GAMMA)
        d = (np.linspace(-6.0, 6.0, 4) + 0.0371) * GAMMA
        v = np.full_like(d, -1.7 * GAMMA)
        om = np.full_like(d, 3.0 * GAMMA)
        oracle = _steady_response(d, v, om, p)
        got = susceptibility(d, -1.7 * GAMMA, p, 3.0 * GAMMA)
        np.testing.assert_allclose(got, oracle, rtol=1e-6, atol=1e-12)


class TestSusceptibilityShape:
    def test_perfect_transparency_on_two_photon_resonance(self):
        assert susceptibility(0.0, 0.0, _params(), 2.0 * GAMMA) == 0.0

    def test_pole_row_is_finite_on_a_grid(self):
        p = _params(delta_p=5.0 * GAMMA)
        chi = susceptibility(np.array([-3.0, 0.0, 3.0]), -3.0, p, 2.0 * GAMMA)
        assert np.all(np.isfinite(chi))
        assert chi[0] == 0.0

    def test_control_off_is_two_level(self):
        p = _params(delta_p=5.0 * GAMMA)
        d = np.linspace(-10, 10, 7) * GAMMA
        want = 1j * GAMMA / (GAMMA + 1j * (p.delta_p - d))
        np.testing.assert_allclose(susceptibility(d, 0.0, p, 0.0), want, rtol=1e-14)

    def test_two_level_resonant_peak_normalized_to_one(self):
        p = _params(delta_p=5.0 * GAMMA)
        assert susceptibility(p.delta_p, 0.0, p, 0.0) == pytest.approx(1j)

    def test_huge_shift_recovers_two_level(self):
        p = _params(delta_p=5.0 * GAMMA)
        d = 2.0 * GAMMA
        want = 1j * GAMMA / (GAMMA + 1j * (p.delta_p - d))
        assert susceptibility(d, -1e12, p, 2.0 * GAMMA) == pytest.approx(want, rel=1e-9)

    def test_absorptive_part_never_negative(self):
        rng = np.random.default_rng(61)
        p = _params(delta_p=5.0 * GAMMA)
        d = rng.uniform(-20, 20, 2000) * GAMMA
        v = rng.uniform(-30, 0, 2000) * GAMMA
        om = rng.uniform(0.0, 10, 2000) * GAMMA
        for dd, vv, oo in zip(d, v, om):
            assert np.imag(susceptibility(dd, vv, p, oo)) >= -1e-15

    def test_curve_matches_scalar_calls(self):
        p = _params(delta_p=-5.0 * GAMMA)
        grid = np.linspace(-40.0, 40.0, 11)
        curve = susceptibility_curve(grid, -7.0, p, 9.0)
        want = [susceptibility(float(d), -7.0, p, 9.0) for d in grid]
        np.testing.assert_allclose(curve.chi, want, rtol=0.0, atol=0.0)
        assert curve.v == -7.0 and curve.omega_c == 9.0 and curve.gamma == GAMMA


class TestPeakPositions:
    def test_symmetric_case_roots(self):
        p = _params(delta_p=0.0)
        om = 2.0 * math.pi * 2.0
        assert peak_positions(0.0, p, om) == pytest.approx([-om, om], rel=1e-14)

    def test_general_roots_satisfy_the_resonance_condition(self):
        p = _params(delta_p=5.0 * GAMMA)
        om = 17.3
        for root in peak_positions(-44.0, p, om):
            assert (p.delta_p - root) * (-44.0 - root) - om * om == pytest.approx(0.0, abs=1e-8)

    def test_weak_control_decouples_the_resonances(self):
        p = _params(delta_p=5.0 * GAMMA)
        roots = peak_positions(-60.0, p, 1e-6)
        assert roots == pytest.approx([-60.0, 5.0 * GAMMA], abs=1e-9)

    def test_roots_mark_absorption_maxima_at_small_gamma(self):
        sharp = PhysicalParams(gamma=0.05, delta_p=0.0, delta_c=0.0,
                               g_sqrt_n=1.45e4, density_n=2e-5, c6=0.0)
        om = 12.0
        for root in peak_positions(-9.0, sharp, om):
            lo, hi = (np.imag(susceptibility(root + off, -9.0, sharp, om)) for off in (-0.5, 0.5))
            here = np.imag(susceptibility(root, -9.0, sharp, om))
            assert here > lo and here > hi


class TestWindowAndSpeed:
    def test_window_half_width_closed_form(self):
        # at delta_p = 0, V = 0 the half recovery point solves a quadratic
        om = 2.0 * math.pi * 2.0
        want = (-GAMMA + math.sqrt(GAMMA * GAMMA + 4.0 * om * om)) / 2.0
        half, _ = eit_window_and_vg(_params(), om)
        assert half == pytest.approx(want, rel=1e-9)
        assert want == pytest.approx(3.9410113147934993, rel=1e-15)

    def test_group_velocity_value_and_scaling(self):
        p = _params()
        _, vg = eit_window_and_vg(p, 2.0 * math.pi * 2.0)
        assert vg == pytest.approx(225.16683665276167, rel=1e-14)
        _, vg2 = eit_window_and_vg(p, 4.0 * math.pi * 2.0)
        assert vg2 == pytest.approx(4.0 * vg, rel=1e-14)

    def test_window_widens_with_control(self):
        p = _params()
        h1, _ = eit_window_and_vg(p, 5.0)
        h2, _ = eit_window_and_vg(p, 10.0)
        assert h2 > h1


class TestDetuningSignMechanism:
    OM = 2.0 * math.pi * 2.0

    def test_positive_detuning_monotone(self):
        p = _params(delta_p=5.0 * GAMMA)
        v_grid = -np.geomspace(1e3, 1e-3, 41) * self.OM ** 2 / (5.0 * GAMMA)
        vals = imchi_at_zero_sweep(v_grid, p, self.OM)
        assert np.all(np.diff(vals) < 0.0)

    def test_negative_detuning_interior_maximum(self):
        p = _params(delta_p=-5.0 * GAMMA)
        v_star = -self.OM ** 2 / (5.0 * GAMMA)
        v_grid = np.sort(np.concatenate([
            -np.geomspace(1e3, 1e-3, 41) * abs(v_star), [v_star]]))
        vals = imchi_at_zero_sweep(v_grid, p, self.OM)
        i = int(np.argmax(vals))
        assert 0 < i < vals.size - 1
        assert v_grid[i] == pytest.approx(v_star)
        assert vals[i] == pytest.approx(1.0, rel=1e-12)


class TestKramersKronig:
    def test_real_part_from_absorption(self):
        # control at the gamma scale keeps both dressed peaks wide enough for
        # the discrete transform (grid step 0.003 gamma, ~16 points per HWHM)
        p = _params(delta_p=5.0 * GAMMA)
        om = 2.0 * GAMMA
        d = np.linspace(-200.0, 200.0, 1 << 17) * GAMMA
        # fix the transform sign on the closed two-level pair first
        x = d - p.delta_p
        im2 = GAMMA ** 2 / (GAMMA ** 2 + x * x)
        re2 = -GAMMA * x / (GAMMA ** 2 + x * x)
        sign = 1.0 if np.vdot(np.imag(hilbert(im2)), re2) > 0 else -1.0
        chi = susceptibility(d, -3.0 * GAMMA, p, om)
        re_kk = sign * np.imag(hilbert(np.imag(chi)))
        core = slice(d.size // 4, 3 * d.size // 4)
        err = np.max(np.abs(re_kk[core] - np.real(chi)[core]))
        assert err < 0.02 * np.max(np.abs(np.real(chi)))


class TestInsetCurves:
    def test_four_curves_with_both_signs_and_shifts(self):
        p = _params(delta_p=5.0 * GAMMA)
        curves = inset_curve_set(p, 2.0 * math.pi * 2.0)
        assert len(curves) == 4
        assert [c.delta_p for c in curves] == pytest.approx(
            [5 * GAMMA, 5 * GAMMA, -5 * GAMMA, -5 * GAMMA])
        assert [c.v for c in curves] == pytest.approx(
            [0.0, -10.0 * math.pi, 0.0, -10.0 * math.pi])
        for c in curves:
            assert c.delta.shape == (2001,)
            ref = susceptibility(c.delta, c.v, _params(delta_p=c.delta_p), c.omega_c)
            np.testing.assert_allclose(c.chi, ref, rtol=0.0, atol=0.0)
