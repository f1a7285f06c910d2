"""Diagnostics on synthetic run records.

Every reader here is exercised on hand-built series whose answers follow from
arithmetic, so the expected values are exact. The only numerics involved is a
finite-difference check of the analytic mixing-angle rate.
"""

import math

import numpy as np
import pytest

from rydstore.diagnostics import (
    accumulated_phase,
    adiabaticity_rate,
    asymmetry_ratio,
    matter_number_at,
    mixing_angle,
    phase_spread,
    polariton_view,
    retrieved_energy,
    schedule_kinks,
    storage_efficiency,
    transmission_fraction,
)
from rydstore.engine import FieldState, SnapshotSeries
from rydstore.errors import UndefinedDiagnosticError
from rydstore.model import (
    ControlSchedule,
    Geometry,
    GridSpec,
    PhysicalParams,
    PulseSpec,
    control_field,
)

GAMMA = 36.12831551628262


def _params(g_sqrt_n=5e4):
    return PhysicalParams(gamma=GAMMA, delta_p=0.0, delta_c=0.0,
                          g_sqrt_n=g_sqrt_n, density_n=2e-5, c6=0.0)


def _series(times, omega_c, *, smax=None, boundary=None, exit_field=None,
            snapshots=(), hold_phase=None, hold_time=0.0, final=None,
            n_matter=None, sched=None, g_sqrt_n=5e4):
    """A SnapshotSeries shell around hand-written traces."""
    n = times.shape[0]
    npts = 21
    params = _params(g_sqrt_n)
    if sched is None:
        sched = ControlSchedule(omega_m_in=10.0, t_c=9.0, tau_c=0.5,
                                hold_until=16.0, omega_m_out=0.0,
                                tau_c_out=0.5)
    if final is None:
        final = FieldState(float(times[-1]), np.zeros((2, npts), complex),
                           np.zeros((2, npts), complex),
                           np.zeros((2, npts), complex), np.zeros((2, npts)))
    dt = float(times[1] - times[0])
    return SnapshotSeries(
        z=np.linspace(0.0, 60.0, npts),
        times=times,
        omega_c=omega_c,
        boundary=np.zeros(n, complex) if boundary is None else boundary,
        exit_field=np.zeros((2, n), complex) if exit_field is None else exit_field,
        smax=np.zeros((2, n)) if smax is None else smax,
        peak_z=np.zeros((2, n)),
        n_matter=np.zeros((2, n)) if n_matter is None else n_matter,
        vmax=np.zeros(n),
        snapshots=list(snapshots),
        hold_phase=np.zeros((2, npts)) if hold_phase is None else hold_phase,
        hold_time=hold_time,
        params=params,
        geom=Geometry(length=60.0, separation=6.0, diameter=2.0, mode="co"),
        sched=sched,
        spec=PulseSpec(omega_p_m=1.0, t_p=3.0, tau_p=1.0),
        grid=GridSpec(dz=3.0, dt=dt, t_end=float(times[-1])),
        law="vdw",
        final=final,
    )


# --------------------------------------------------------------- mixing angle

def test_mixing_angle_limits():
    par = _params()
    assert mixing_angle(par, 0.0) == math.pi / 2.0
    assert mixing_angle(par, par.g_sqrt_n) == pytest.approx(math.pi / 4.0,
                                                            rel=1e-15)
    assert mixing_angle(par, 1e12) == pytest.approx(par.g_sqrt_n / 1e12,
                                                    rel=1e-9)


SCHED_RAMP = ControlSchedule(omega_m_in=50.265482457436690, t_c=40.0,
                             tau_c=5.0, hold_until=80.0,
                             omega_m_out=25.132741228718345, tau_c_out=3.0)


@pytest.mark.parametrize("t", [20.0, 30.0, 36.0, 44.0, 50.0, 85.0, 90.0])
def test_rotation_rate_matches_finite_difference(t):
    par = _params()
    h = 1e-3
    th = [math.atan2(par.g_sqrt_n, float(control_field(tt, SCHED_RAMP)))
          for tt in (t - h, t + h)]
    fd = (th[1] - th[0]) / (2.0 * h)
    got = adiabaticity_rate(t, SCHED_RAMP, par)
    if fd == 0.0:
        assert got == 0.0
    else:
        assert abs(got - fd) / abs(fd) < 1e-4


def test_rotation_rate_is_zero_while_dark():
    assert adiabaticity_rate(70.0, SCHED_RAMP, _params()) == 0.0
    rates = adiabaticity_rate(np.array([65.0, 70.0, 75.0]), SCHED_RAMP,
                              _params())
    assert np.all(rates == 0.0)


def test_rotation_rate_falls_with_the_root_of_density():
    # quadrupled density doubles g sqrt(N) and halves the rate
    slow = adiabaticity_rate(36.0, SCHED_RAMP, _params(g_sqrt_n=2e5))
    fast = adiabaticity_rate(36.0, SCHED_RAMP, _params(g_sqrt_n=1e5))
    assert slow / fast == pytest.approx(0.5, rel=1e-6)


def test_schedule_kinks_follow_the_stages():
    assert schedule_kinks(SCHED_RAMP) == (40.0, 80.0)
    storage_only = ControlSchedule(omega_m_in=10.0, t_c=40.0, tau_c=5.0)
    assert schedule_kinks(storage_only) == (40.0,)
    no_readout = ControlSchedule(omega_m_in=10.0, t_c=40.0, tau_c=5.0,
                                 hold_until=80.0, omega_m_out=0.0,
                                 tau_c_out=3.0)
    assert schedule_kinks(no_readout) == (40.0,)


# ------------------------------------------------------------- polariton view

def test_polariton_view_is_pure_spinwave_when_dark():
    times = np.linspace(0.0, 16.0, 161)
    rng = np.random.default_rng(3)
    s0 = rng.normal(size=(2, 21)) + 1j * rng.normal(size=(2, 21))
    e0 = rng.normal(size=(2, 21)) + 1j * rng.normal(size=(2, 21))
    final = FieldState(16.0, np.zeros((2, 21), complex), s0, e0,
                       np.zeros((2, 21)))
    ser = _series(times, np.where(times < 10.0, 10.0, 0.0), final=final)
    view = polariton_view(ser)
    assert view.theta == math.pi / 2.0
    assert view.vg == 0.0
    assert np.allclose(view.dark, -s0, atol=1e-15 * np.abs(s0).max())
    assert np.allclose(view.bright, e0, atol=1e-15 * np.abs(e0).max())


def test_polariton_view_rotates_by_the_mixing_angle():
    times = np.linspace(0.0, 4.0, 41)
    s0 = np.full((2, 21), 0.3 + 0.1j)
    e0 = np.full((2, 21), -0.2 + 0.4j)
    final = FieldState(4.0, np.zeros((2, 21), complex), s0, e0,
                       np.zeros((2, 21)))
    sched = ControlSchedule(omega_m_in=5e4, t_c=40.0, tau_c=5.0)
    ser = _series(times, np.full(41, 5e4), final=final, sched=sched)
    view = polariton_view(ser)
    om = float(control_field(4.0, sched))
    th = math.atan2(5e4, om)
    assert view.theta == pytest.approx(th, rel=1e-12)
    assert view.vg > 0.0
    assert np.allclose(view.dark, math.cos(th) * e0 - math.sin(th) * s0)
    assert np.allclose(view.bright, math.sin(th) * e0 + math.cos(th) * s0)


# --------------------------------------------------------- storage efficiency

def _write_in_series(trace_lit, dark_value):
    """Control lit for the first 100 steps of 201, dt = 0.1, t_s at step 100."""
    times = np.arange(201) * 0.1
    om = np.where(np.arange(201) < 100, 10.0, 0.0)
    smax = np.zeros((2, 201))
    smax[0, :100] = trace_lit
    smax[0, 100:] = dark_value
    smax[1] = smax[0]
    return _series(times, om, smax=smax)


def test_efficiency_uses_the_first_local_maximum():
    lit = np.concatenate([
        np.linspace(0.0, 0.8, 41),          # main rise, turns at step 40
        np.linspace(0.8, 0.5, 21)[1:],      # dip
        np.linspace(0.5, 0.9, 40)[1:],      # late rise must not win
    ])
    ser = _write_in_series(lit, dark_value=0.64)
    assert storage_efficiency(ser) == pytest.approx(0.64 / 0.8, rel=1e-12)


def test_efficiency_skips_bumps_below_the_entry_floor():
    lit = np.concatenate([
        [0.0, 0.02, 0.035, 0.02, 0.005],    # entry-tail ripple, under 5%
        np.linspace(0.0, 0.8, 41),
        np.linspace(0.8, 0.5, 21)[1:],
        np.linspace(0.5, 0.9, 35)[1:],
    ])
    ser = _write_in_series(lit, dark_value=0.4)
    assert storage_efficiency(ser) == pytest.approx(0.4 / 0.8, rel=1e-12)


def test_efficiency_falls_back_to_the_last_lit_value():
    lit = np.linspace(0.0, 0.7, 100)
    ser = _write_in_series(lit, dark_value=0.63)
    assert storage_efficiency(ser) == pytest.approx(0.63 / 0.7, rel=1e-12)


def test_efficiency_requires_a_lit_stage():
    times = np.arange(201) * 0.1
    ser = _series(times, np.zeros(201))
    with pytest.raises(UndefinedDiagnosticError):
        storage_efficiency(ser)


def test_efficiency_requires_the_control_to_switch_off():
    times = np.arange(201) * 0.1
    ser = _series(times, np.full(201, 10.0))
    with pytest.raises(UndefinedDiagnosticError):
        storage_efficiency(ser)


def test_efficiency_requires_a_spinwave():
    ser = _write_in_series(np.zeros(100), dark_value=0.0)
    with pytest.raises(UndefinedDiagnosticError):
        storage_efficiency(ser)


# ----------------------------------------------------- fluence bookkeeping

def test_transmission_is_the_fluence_ratio():
    times = np.linspace(0.0, 10.0, 101)
    boundary = np.full(101, 2.0 + 0.0j)
    exit_field = np.zeros((2, 101), complex)
    exit_field[0] = 1.0
    ser = _series(times, np.full(101, 10.0), boundary=boundary,
                  exit_field=exit_field)
    assert transmission_fraction(ser) == pytest.approx(0.25, rel=1e-14)
    assert transmission_fraction(ser, row=1) == 0.0


def test_transmission_needs_input():
    times = np.linspace(0.0, 10.0, 101)
    ser = _series(times, np.full(101, 10.0))
    with pytest.raises(UndefinedDiagnosticError):
        transmission_fraction(ser)


def test_retrieved_energy_integrates_the_readout_tail():
    times = np.arange(101) * 0.1
    exit_field = np.zeros((2, 101), complex)
    exit_field[0, times >= 6.0] = 0.5
    sched = ControlSchedule(omega_m_in=10.0, t_c=4.0, tau_c=0.5,
                            hold_until=6.0, omega_m_out=5.0, tau_c_out=0.5)
    ser = _series(times, np.where(times < 5.0, 10.0, 0.0),
                  exit_field=exit_field, sched=sched)
    expected = ser.params.light_speed * 0.25 * 4.0
    assert retrieved_energy(ser) == pytest.approx(expected, rel=1e-14)


def test_retrieved_energy_needs_a_hold_stage():
    times = np.arange(101) * 0.1
    sched = ControlSchedule(omega_m_in=10.0, t_c=9.0, tau_c=0.5)
    ser = _series(times, np.full(101, 10.0), sched=sched)
    with pytest.raises(UndefinedDiagnosticError):
        retrieved_energy(ser)


def test_matter_number_reads_the_nearest_step():
    times = np.arange(101) * 0.1
    n_matter = np.zeros((2, 101))
    n_matter[0] = np.arange(101.0)
    ser = _series(times, np.full(101, 10.0), n_matter=n_matter)
    assert matter_number_at(ser, 0.23) == 2.0
    assert matter_number_at(ser, 99.0) == 100.0


# ------------------------------------------------------------ phase tracking

def test_accumulated_phase_averages_the_bracketing_shifts():
    times = np.arange(0.0, 16.01, 0.01)
    npts = 21
    v_s = np.tile(np.linspace(-3.0, -1.0, npts), (2, 1))
    v_h = np.tile(np.linspace(-2.0, -0.5, npts), (2, 1))
    zero = np.zeros((2, npts), complex)
    snaps = [FieldState(10.0, zero, zero, zero, v_s),
             FieldState(16.0, zero, zero, zero, v_h)]
    ser = _series(times, np.where(times < 8.0, 10.0, 0.0), snapshots=snaps,
                  hold_time=6.0)
    expected = -0.5 * (v_s[0] + v_h[0]) * 6.0
    assert np.allclose(accumulated_phase(ser), expected, rtol=1e-14)


def test_accumulated_phase_needs_a_hold_stage():
    times = np.arange(0.0, 16.01, 0.01)
    sched = ControlSchedule(omega_m_in=10.0, t_c=9.0, tau_c=0.5)
    ser = _series(times, np.full(times.shape[0], 10.0), sched=sched)
    with pytest.raises(UndefinedDiagnosticError):
        accumulated_phase(ser)


def test_phase_spread_reads_only_the_packet_core():
    times = np.arange(0.0, 16.01, 0.01)
    npts = 21
    amp = np.full(npts, 0.2)
    amp[8:13] = [0.8, 0.9, 1.0, 0.9, 0.8]    # half-max region is 8..12
    s = np.zeros((2, npts), complex)
    s[0] = amp
    final = FieldState(16.0, np.zeros((2, npts), complex), s,
                       np.zeros((2, npts), complex), np.zeros((2, npts)))
    phase = np.zeros((2, npts))
    phase[0] = np.arange(npts, dtype=float)
    phase[0, :5] = 100.0                      # junk in the wings must not leak
    ser = _series(times, np.where(times < 8.0, 10.0, 0.0), final=final,
                  hold_phase=phase, hold_time=6.0)
    assert phase_spread(ser) == 4.0


def test_phase_spread_is_zero_without_a_dark_stage():
    times = np.arange(0.0, 16.01, 0.01)
    ser = _series(times, np.full(times.shape[0], 10.0), hold_time=0.0)
    assert phase_spread(ser) == 0.0


def test_phase_spread_is_zero_for_an_empty_packet():
    times = np.arange(0.0, 16.01, 0.01)
    ser = _series(times, np.where(times < 8.0, 10.0, 0.0), hold_time=6.0)
    assert phase_spread(ser) == 0.0


# ------------------------------------------------------------ shape measures

def test_asymmetry_ratio_splits_mass_at_the_peak():
    profile = np.array([1.0, 2.0, 5.0, 1.0, 1.0])
    assert asymmetry_ratio(profile) == pytest.approx(2.0 / 5.0, rel=1e-15)
    assert asymmetry_ratio(profile, direction=-1) == pytest.approx(
        5.0 / 2.0, rel=1e-15)


def test_asymmetry_ratio_handles_an_empty_trail():
    assert asymmetry_ratio(np.array([5.0, 1.0, 1.0])) == math.inf
    assert asymmetry_ratio(np.array([5.0, 1.0, 1.0]), direction=-1) == \
        pytest.approx(0.0, abs=0.0)


def test_asymmetry_ratio_rejects_bad_profiles():
    with pytest.raises(UndefinedDiagnosticError):
        asymmetry_ratio(np.zeros(8))
    with pytest.raises(UndefinedDiagnosticError):
        asymmetry_ratio(np.ones((2, 8)))
