"""Physical parameters, beam geometry, and the time-dependent drives.

Internal frequency unit is angular rad/us throughout; lengths are um and
times us. Configuration ingestion (with its linear-MHz tags) lives in
``config``; everything here is already converted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import Diagnostic, DomainError

TWO_PI = 2.0 * math.pi
LIGHT_SPEED = 2.99792458e8          # um/us
NU_01 = 2.404825557695773           # first zero of the J0 Bessel function

DEFAULT_G_SQRT_N = TWO_PI * 1.0e4   # fallback collective coupling, rad/us
SLOW_LIGHT_MIN_RATIO = 100.0        # required (g sqrt(N) / Omega_c)^2


@dataclass(frozen=True)
class PhysicalParams:
    """Medium constants; angular frequencies in rad/us."""

    gamma: float                    # intermediate-level decay rate
    delta_p: float                  # probe detuning
    delta_c: float                  # control detuning
    g_sqrt_n: float                 # collective coupling g*sqrt(N)
    density_n: float                # atomic density, um^-3
    c6: float                       # r^-6 coefficient, rad/us um^6 (signed)
    c3: float | None = None         # r^-3 coefficient, rad/us um^3 (signed)
    light_speed: float = LIGHT_SPEED

    @property
    def g_single(self) -> float:
        # single-atom coupling; derived, never stored independently
        return self.g_sqrt_n / math.sqrt(self.density_n)

    @property
    def g2n(self) -> float:
        return self.g_sqrt_n * self.g_sqrt_n


@dataclass(frozen=True)
class Geometry:
    """Two parallel cylindrical ensembles sharing one z axis."""

    length: float                   # um
    separation: float               # axis-to-axis distance, um
    diameter: float                 # um
    mode: str = "counter"           # "co" or "counter"

    @property
    def counter(self) -> bool:
        return self.mode == "counter"


@dataclass(frozen=True)
class ControlSchedule:
    """Storage ramp-down plus optional retrieval ramp-up, both clamped tanh."""

    omega_m_in: float               # write-in amplitude, rad/us
    t_c: float                      # switch-off center, us
    tau_c: float                    # switch-off time scale, us
    hold_until: float | None = None # retrieval start, us
    omega_m_out: float = 0.0        # read-out amplitude, rad/us
    tau_c_out: float = 0.1          # switch-on time scale, us

    @property
    def omega_max(self) -> float:
        return max(self.omega_m_in, self.omega_m_out)


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian-in-time input pulse with the J0 transverse mode."""

    omega_p_m: float                # peak probe Rabi frequency, rad/us
    t_p: float                      # peak arrival, us
    tau_p: float                    # duration, us
    nu_01: float = NU_01


@dataclass(frozen=True)
class GridSpec:
    dz: float                       # um
    dt: float                       # us
    t_end: float                    # us

    def n_cells(self, length: float) -> int:
        return int(math.ceil(length / self.dz - 1e-9))

    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def control_field(t, sched: ControlSchedule):
    """Control Rabi frequency at time t (scalar or array).

    Zero on the hold interval [t_c, hold_until]; continuous everywhere.
    """
    t = np.asarray(t, dtype=float)
    out = sched.omega_m_in * np.tanh(np.maximum(sched.t_c - t, 0.0) / sched.tau_c)
    if sched.hold_until is not None and sched.omega_m_out != 0.0:
        rise = np.tanh(np.maximum(t - sched.hold_until, 0.0) / sched.tau_c_out)
        out = out + sched.omega_m_out * rise
    return out if out.ndim else float(out)


def control_slope(t, sched: ControlSchedule):
    """Analytic dOmega_c/dt of the clamped tanh schedule.

    At the clamp points the one-sided (ramp-side) derivative is returned;
    callers that care use ``diagnostics.adiabaticity_rate`` which flags it.
    """
    t = np.asarray(t, dtype=float)
    u = (sched.t_c - t) / sched.tau_c
    down = np.where(u >= 0.0, -sched.omega_m_in / sched.tau_c / np.cosh(np.minimum(np.abs(u), 350.0)) ** 2, 0.0)
    out = down
    if sched.hold_until is not None and sched.omega_m_out != 0.0:
        w = (t - sched.hold_until) / sched.tau_c_out
        up = np.where(w >= 0.0, sched.omega_m_out / sched.tau_c_out / np.cosh(np.minimum(np.abs(w), 350.0)) ** 2, 0.0)
        out = out + up
    return out if out.ndim else float(out)


def input_pulse(t, rho, spec: PulseSpec, geom: Geometry):
    """Probe Rabi frequency at the entry face, time t and radius rho."""
    if np.any(np.asarray(rho) < 0.0) or np.any(np.asarray(rho) > geom.diameter / 2.0):
        raise DomainError(f"rho outside [0, d/2] = [0, {geom.diameter / 2.0}]")
    t = np.asarray(t, dtype=float)
    envelope = spec.omega_p_m * np.exp(-(((t - spec.t_p) / spec.tau_p) ** 2))
    mode = special.j0(2.0 * spec.nu_01 * np.asarray(rho, dtype=float) / geom.diameter)
    out = envelope * mode
    return out if np.ndim(out) else float(out)


def boundary_field(t, spec: PulseSpec, geom: Geometry, params: PhysicalParams):
    """On-axis field amplitude at the entry face: Omega_p(t, 0) / g."""
    return input_pulse(t, 0.0, spec, geom) / params.g_single


def default_coupling(params: PhysicalParams, geom: Geometry,
                     sched: ControlSchedule, spec: PulseSpec) -> float:
    """Suggest a collective coupling g*sqrt(N).

    Large enough that the compressed pulse v_g*tau_p fits in L/2, with the
    2*pi*1e4 rad/us floor when the constraint is weaker than that.
    """
    om = sched.omega_m_in
    if om <= 0.0:
        return DEFAULT_G_SQRT_N
    required = om * math.sqrt(2.0 * params.light_speed * spec.tau_p / geom.length)
    return max(DEFAULT_G_SQRT_N, required)


def group_velocity(params: PhysicalParams, omega_c: float) -> float:
    """Slow-light speed c*|Omega_c|^2 / (g^2 N), um/us."""
    return params.light_speed * omega_c * omega_c / params.g2n


def validate_bundle(params: PhysicalParams, geom: Geometry, sched: ControlSchedule,
                    spec: PulseSpec, grid: GridSpec, law: str = "vdw") -> list[Diagnostic]:
    """Cross-field checks on already-built objects.

    Returns machine-readable diagnostics; empty list means acceptable.
    """
    out: list[Diagnostic] = []

    def bad(path, reason):
        out.append(Diagnostic(path, reason))

    if params.gamma <= 0.0:
        bad("physical.gamma", "must be positive")
    if params.density_n <= 0.0:
        bad("physical.density_n", "must be positive")
    if params.g_sqrt_n <= 0.0:
        bad("physical.g_sqrt_n", "must be positive")
    if abs(params.delta_p + params.delta_c) > 1e-9 * max(1.0, abs(params.delta_p)):
        bad("physical.delta_c", "two-photon resonance delta_p + delta_c = 0 is required; "
            "the spinwave equation carries no two-photon detuning term")

    if geom.length <= 0.0:
        bad("geometry.length_um", "must be positive")
    if geom.diameter <= 0.0:
        bad("geometry.diameter_um", "must be positive")
    if geom.separation < 0.0:
        bad("geometry.separation_um", "must be nonnegative")
    if geom.mode not in ("co", "counter"):
        bad("geometry.mode", "must be 'co' or 'counter'")
    if law in ("vdw", "dipole") and geom.separation < geom.diameter:
        bad("geometry.separation_um", "cylinders overlap: separation < diameter "
            "for a distributed interaction law")
    if law in ("point_vdw", "point_dipole") and geom.separation <= 0.0:
        bad("geometry.separation_um", "point law diverges at zero separation")
    if law not in ("vdw", "dipole", "point_vdw", "point_dipole"):
        bad("interaction.law", f"unknown law {law!r}")
    if law in ("dipole", "point_dipole") and params.c3 is None:
        bad("physical.c3", "dipole law requested but c3 is not set")

    if sched.omega_m_in < 0.0 or sched.omega_m_out < 0.0:
        bad("control.omega_m_in", "Rabi amplitudes must be nonnegative")
    if sched.tau_c <= 0.0:
        bad("control.tau_c_us", "must be positive")
    if sched.hold_until is not None:
        if sched.hold_until < sched.t_c:
            bad("control.hold_until_us", "retrieval cannot start before switch-off completes")
        if sched.tau_c_out <= 0.0:
            bad("control.tau_c_out_us", "must be positive")

    if sched.omega_max > 0.0 and params.g2n / sched.omega_max ** 2 < SLOW_LIGHT_MIN_RATIO:
        bad("physical.g_sqrt_n", "outside the slow-light regime: "
            f"(g sqrt(N)/Omega_c)^2 = {params.g2n / sched.omega_max ** 2:.3g} < "
            f"{SLOW_LIGHT_MIN_RATIO:g}")

    if spec.omega_p_m <= 0.0:
        bad("pulse.omega_p_m", "must be positive")
    if spec.tau_p <= 0.0:
        bad("pulse.tau_p_us", "must be positive")

    if grid.dz <= 0.0:
        bad("grid.dz_um", "must be positive")
    if grid.dt <= 0.0:
        bad("grid.dt_us", "must be positive")
    if grid.t_end <= 0.0:
        bad("grid.t_end_us", "must be positive")
    if grid.dz > 0.0 and grid.n_cells(geom.length) < 8:
        bad("grid.dz_um", "fewer than 8 cells across the ensemble")
    if grid.dt > 0.0 and spec.tau_p < 10.0 * grid.dt:
        bad("grid.dt_us", f"too coarse to resolve the pulse: tau_p = {spec.tau_p} "
            f"< 10*dt = {10.0 * grid.dt}")
    return out
