"""Steady-state linear response of the driven three-level medium.

For a single-frequency probe at offset delta (so the lab probe detuning is
delta_p - delta) with the control on and a constant level shift V, the
matter equations

    dP/dt = -(gamma + i (delta_p - delta)) P + i Omega_c S + i drive
    dS/dt = -i (V - delta) S + i Omega_c P

have the steady state P = i*drive / D with

    D = gamma + i (delta_p - delta) - i |Omega_c|^2 / (V - delta).

The returned susceptibility is normalized so the bare two-level resonant
absorption peak (Omega_c = 0, delta = delta_p) has Im chi = 1, i.e.
chi = i gamma / D.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import PhysicalParams, group_velocity


@dataclass(frozen=True)
class SusceptibilityCurve:
    delta: np.ndarray               # probe offset grid, rad/us
    chi: np.ndarray                 # complex, normalized
    v: float
    omega_c: float
    delta_p: float
    gamma: float


def susceptibility(delta, v: float, params: PhysicalParams, omega_c: float):
    """Normalized complex chi on a delta grid (scalar or array).

    The pole of the two-photon term at delta = V is removed by its analytic
    limit chi -> 0 (the shifted level blocks the transition exactly there).
    """
    delta = np.asarray(delta, dtype=float)
    gamma = params.gamma
    base = gamma + 1j * (params.delta_p - delta)
    if omega_c == 0.0:
        chi = 1j * gamma / base
    else:
        gap = v - delta
        safe = np.where(gap == 0.0, 1.0, gap)
        d_full = base - 1j * (omega_c * omega_c) / safe
        chi = np.where(gap == 0.0, 0.0 + 0.0j, 1j * gamma / d_full)
    return chi if np.ndim(chi) else complex(chi)


def susceptibility_curve(delta_grid, v, params, omega_c) -> SusceptibilityCurve:
    return SusceptibilityCurve(
        delta=np.asarray(delta_grid, dtype=float),
        chi=np.asarray(susceptibility(delta_grid, v, params, omega_c)),
        v=float(v), omega_c=float(omega_c),
        delta_p=params.delta_p, gamma=params.gamma)


def peak_positions(v: float, params: PhysicalParams, omega_c: float) -> list[float]:
    """Absorption-peak offsets: real roots of (delta_p - d)(V - d) = |Omega_c|^2.

    This is the gamma -> 0 skeleton used for labeling; both roots are always
    real (the discriminant is a sum of squares).
    """
    dp = params.delta_p
    disc = (dp - v) ** 2 + 4.0 * omega_c * omega_c
    root = np.sqrt(disc)
    return sorted(((dp + v) - root) / 2.0 for root in (root, -root))


def eit_window_and_vg(params: PhysicalParams, omega_c: float) -> tuple[float, float]:
    """(window half-width, group velocity).

    Half-width: smallest delta > 0 where Im chi recovers to half of the
    normalized two-level peak (= 0.5). Group velocity: c |Omega_c|^2/(g^2 N).
    """
    if omega_c <= 0.0:
        raise ValueError("omega_c must be positive")
    vg = group_velocity(params, omega_c)

    def f(d):
        return np.imag(susceptibility(d, 0.0, params, omega_c)) - 0.5

    # bracket between the transparency point and the nearer absorption peak
    peaks = peak_positions(0.0, params, omega_c)
    upper = min(abs(p) for p in peaks if p != 0.0)
    lo = 1e-9 * max(1.0, upper)
    if f(upper) < 0.0:
        # peak weaker than 1/2 (heavily detuned probe); widen rightward
        hi = upper
        while f(hi) < 0.0 and hi < 1e12:
            hi *= 2.0
        upper = hi
    half = optimize.brentq(f, lo, upper, xtol=1e-12 * max(1.0, upper))
    return float(half), float(vg)


def imchi_at_zero_sweep(v_values, params: PhysicalParams, omega_c: float) -> np.ndarray:
    """Im chi(delta=0) over a sweep of constant shifts V."""
    return np.array([np.imag(susceptibility(0.0, v, params, omega_c)) for v in np.asarray(v_values, float)])


def inset_curve_set(params: PhysicalParams, omega_c: float,
                    v_values=(0.0, None), detuning_signs=(+1.0, -1.0),
                    half_span: float | None = None, n: int = 2001):
    """The four standard response curves: both detuning signs, V off and on.

    ``v_values`` may contain None meaning the representative crossing-scale
    shift -2*pi*5 rad-MHz. Returns a list of SusceptibilityCurve.
    """
    from dataclasses import replace

    gamma = params.gamma
    span = half_span if half_span is not None else 12.0 * gamma
    grid = np.linspace(-span, span, n)
    out = []
    for sign in detuning_signs:
        p = replace(params, delta_p=sign * abs(params.delta_p), delta_c=-sign * abs(params.delta_p))
        for v in v_values:
            vv = -2.0 * np.pi * 5.0 if v is None else float(v)
            out.append(susceptibility_curve(grid, vv, p, omega_c))
    return out
