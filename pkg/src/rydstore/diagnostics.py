"""Quantities read off a finished run or the drive schedule.

Efficiency and transmission come from the per-step traces; phase accumulation
and asymmetry come from stored profiles. Nothing here re-integrates the
dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import SnapshotSeries
from .errors import UndefinedDiagnosticError
from .model import ControlSchedule, PhysicalParams, control_field, control_slope, group_velocity


@dataclass(frozen=True)
class PolaritonView:
    """Dark/bright decomposition of the field-spinwave pair at one instant."""

    t: float
    theta: float                    # mixing angle, rad
    vg: float                       # um/us
    dark: np.ndarray                # (2, npts) cos(theta) E - sin(theta) S
    bright: np.ndarray              # (2, npts) sin(theta) E + cos(theta) S


def mixing_angle(params: PhysicalParams, omega_c: float) -> float:
    """Rotation angle between field and spinwave: tan(theta) = g sqrt(N) / Omega_c."""
    return math.atan2(params.g_sqrt_n, omega_c)


def polariton_view(series: SnapshotSeries, t: float | None = None) -> PolaritonView:
    state = series.final if t is None else series.snapshot_at(t)
    om = float(control_field(state.t, series.sched))
    th = mixing_angle(series.params, om)
    co, si = math.cos(th), math.sin(th)
    return PolaritonView(state.t, th, group_velocity(series.params, om) if om > 0.0 else 0.0,
                         co * state.e - si * state.s, si * state.e + co * state.s)


def adiabaticity_rate(t, sched: ControlSchedule, params: PhysicalParams):
    """d(theta)/dt of the mixing angle along the schedule.

    Analytic: -g sqrt(N) * dOmega_c/dt / (g^2 N + Omega_c^2). At the clamp
    joints (see ``schedule_kinks``) the ramp-side one-sided value is returned.
    """
    om = np.asarray(control_field(t, sched), dtype=float)
    dom = np.asarray(control_slope(t, sched), dtype=float)
    out = -params.g_sqrt_n * dom / (params.g2n + om * om)
    return out if out.ndim else float(out)


def schedule_kinks(sched: ControlSchedule) -> tuple[float, ...]:
    """Times where the control slope jumps (tanh clamps)."""
    kinks = [sched.t_c]
    if sched.hold_until is not None and sched.omega_m_out != 0.0:
        kinks.append(sched.hold_until)
    return tuple(kinks)


def _first_dark_index(series: SnapshotSeries) -> int:
    dark = np.flatnonzero(series.omega_c == 0.0)
    if dark.size == 0:
        raise UndefinedDiagnosticError("control never switches off in this run")
    return int(dark[0])


def storage_efficiency(series: SnapshotSeries, row: int = 0) -> float:
    """Stored spinwave peak over the write-in peak.

    The write-in reference is the first local maximum of the max_z |S| trace
    once the pulse is inside (a 5% floor skips the entry tail); when the trace
    rises monotonically into the dark stage the last lit value is used. The
    stored value is read two switching constants after the control reaches
    zero, which lets the residual bright component settle.
    """
    i_dark = _first_dark_index(series)
    if i_dark == 0:
        raise UndefinedDiagnosticError("control is dark from the start; no write-in stage")
    trace = series.smax[row, :i_dark]
    top = float(np.max(trace))
    if top == 0.0:
        raise UndefinedDiagnosticError("no spinwave was ever written")
    inner = trace[1:-1]
    turn = (inner >= 0.05 * top) & (inner >= trace[:-2]) & (trace[2:] < inner)
    hits = np.flatnonzero(turn)
    ref = float(inner[hits[0]]) if hits.size else float(trace[-1])
    t_s = series.sched.t_c + 2.0 * series.sched.tau_c
    i_s = min(int(round(t_s / series.grid.dt)), series.times.shape[0] - 1)
    return float(series.smax[row, i_s]) / ref


def transmission_fraction(series: SnapshotSeries, row: int = 0) -> float:
    """Exit-face fluence over entry-face fluence."""
    t = series.times
    flux_in = np.trapezoid(np.abs(series.boundary) ** 2, t)
    if flux_in == 0.0:
        raise UndefinedDiagnosticError("no input fluence")
    flux_out = np.trapezoid(np.abs(series.exit_field[row]) ** 2, t)
    return float(flux_out / flux_in)


def retrieved_energy(series: SnapshotSeries, row: int = 0) -> float:
    """c * integral of the exit fluence over the read-out stage."""
    hold = series.sched.hold_until
    if hold is None:
        raise UndefinedDiagnosticError("run has no retrieval stage")
    sel = series.times >= hold
    return float(series.params.light_speed *
                 np.trapezoid(np.abs(series.exit_field[row, sel]) ** 2, series.times[sel]))


def matter_number_at(series: SnapshotSeries, t: float, row: int = 0) -> float:
    """Excitation integral (|P|^2 + |S|^2) dz at the step closest to t."""
    i = min(int(round(t / series.grid.dt)), series.times.shape[0] - 1)
    return float(series.n_matter[row, i])


def accumulated_phase(series: SnapshotSeries, row: int = 0) -> np.ndarray:
    """Spinwave phase profile acquired across the dark hold.

    The shift is static while the control is dark (the occupation that
    produces it is frozen), so the profile is the mean of the shift at the
    storage reference time and at the hold end times the dark duration.
    The engine's step-by-step accumulation is the cross-check.
    """
    hold = series.sched.hold_until
    if hold is None:
        raise UndefinedDiagnosticError("run has no hold stage")
    t_s = series.sched.t_c + 2.0 * series.sched.tau_c
    v_s = series.snapshot_at(t_s).v[row]
    v_h = series.snapshot_at(hold).v[row]
    return -0.5 * (v_s + v_h) * series.hold_time


def phase_spread(series: SnapshotSeries, row: int = 0) -> float:
    """Max-min of the dark-stage phase across the stored packet.

    Window: contiguous half-maximum region of the final |S|^2 around its
    peak. Zero when the run never went dark (no phase was accumulated).
    """
    if series.hold_time == 0.0:
        return 0.0
    occ = np.abs(series.final.s[row]) ** 2
    if not np.any(occ > 0.0):
        return 0.0
    i0 = int(np.argmax(occ))
    half = occ[i0] / 2.0
    lo = i0
    while lo > 0 and occ[lo - 1] >= half:
        lo -= 1
    hi = i0
    while hi < occ.shape[0] - 1 and occ[hi + 1] >= half:
        hi += 1
    seg = series.hold_phase[row, lo:hi + 1]
    return float(np.max(seg) - np.min(seg))


def asymmetry_ratio(profile, direction: int = +1) -> float:
    """Mass ahead of the peak over mass behind it, along the travel direction.

    ``profile`` is an amplitude profile; mass is its modulus squared. The peak
    cell itself belongs to neither side. Returns inf when nothing is behind.
    """
    occ = np.abs(np.asarray(profile)) ** 2
    if occ.ndim != 1 or not np.any(occ > 0.0):
        raise UndefinedDiagnosticError("profile is empty")
    i = int(np.argmax(occ))
    lead, trail = occ[i + 1:].sum(), occ[:i].sum()
    if direction < 0:
        lead, trail = trail, lead
    if trail == 0.0:
        return math.inf
    return float(lead / trail)
