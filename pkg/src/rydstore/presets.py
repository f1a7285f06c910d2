"""Bundled scenario presets.

Each preset is a plain config dict plus an origin tag per entry:

    published  taken as stated by the source experiment description
    derived    computed from published values (sign choices, resonance)
    artifact   solver-scale or fill-in choice made here (grids, windows,
               collective coupling calibrated so packets stop mid-ensemble)

The tags are the audit trail for which numbers are inputs and which are
choices of this implementation. The collective coupling g*sqrt(N) is always
an artifact; the single-atom g it implies at the reference density is the
quantity held fixed when a preset is re-run at another density, so sweeps
rescale g*sqrt(N) by sqrt(N/N_ref) (see ``density_scaled_raw``).
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from types import MappingProxyType

from .config import ResolvedConfig, resolve_config
from .errors import ConfigError, Diagnostic


def _mhz(x: float) -> dict:
    return {"value": x, "unit": "MHz"}


def _rad(x: float) -> dict:
    return {"value": x, "unit": "rad_per_us"}


def _cfg(*, length=300.0, sep=6.0, diam=2.0, mode="counter",
         gamma=5.75, dp=0.0, gn=None, density=2.0e13, c6=-2.3e5, c3=None,
         om_in=2.0, t_c=40.0, tau_c=10.0, hold=None, om_out=0.0, tau_out=0.1,
         op_m=0.01, t_p=12.0, tau_p=7.0,
         dz=0.2, dt=0.004, t_end=70.0, law="vdw") -> dict:
    phys = {"gamma": _mhz(gamma), "delta_p": _mhz(dp),
            "density_n": {"value": density, "unit": "per_cm3"},
            "c6": {"value": c6, "unit": "GHz_um6"}}
    if gn is not None:
        phys["g_sqrt_n"] = _rad(gn)
    if c3 is not None:
        phys["c3"] = {"value": c3, "unit": "MHz_um3"}
    ctrl = {"omega_m_in": _mhz(om_in), "t_c_us": t_c, "tau_c_us": tau_c}
    if hold is not None:
        ctrl.update({"hold_until_us": hold, "omega_m_out": _mhz(om_out),
                     "tau_c_out_us": tau_out})
    return {
        "physical": phys,
        "geometry": {"length_um": length, "separation_um": sep,
                     "diameter_um": diam, "mode": mode},
        "control": ctrl,
        "pulse": {"omega_p_m": _mhz(op_m), "t_p_us": t_p, "tau_p_us": tau_p},
        "grid": {"dz_um": dz, "dt_us": dt, "t_end_us": t_end},
        "interaction": {"law": law},
    }


_BASE_ORIGINS = {
    "physical.gamma": "published",
    "physical.delta_p": "published",
    "physical.delta_c": "derived",
    "physical.g_sqrt_n": "artifact",
    "physical.density_n": "published",
    "physical.c6": "published",
    "geometry.length_um": "published",
    "geometry.separation_um": "published",
    "geometry.diameter_um": "published",
    "geometry.mode": "published",
    "control.omega_m_in": "published",
    "control.t_c_us": "published",
    "control.tau_c_us": "published",
    "pulse.omega_p_m": "published",
    "pulse.t_p_us": "artifact",
    "pulse.tau_p_us": "published",
    "grid.dz_um": "artifact",
    "grid.dt_us": "artifact",
    "grid.t_end_us": "artifact",
    "interaction.law": "published",
}


def _origins(**overrides) -> MappingProxyType:
    table = dict(_BASE_ORIGINS)
    table.update({k.replace("__", "."): v for k, v in overrides.items()})
    return MappingProxyType(table)


@dataclass(frozen=True)
class Preset:
    key: str
    title: str
    raw: dict
    origins: MappingProxyType
    note: str = ""

    def resolve(self) -> ResolvedConfig:
        return resolve_config(copy.deepcopy(self.raw))


_FIG2_ORIGINS = _origins(
    geometry__length_um="published", geometry__separation_um="artifact",
    geometry__diameter_um="artifact", physical__density_n="artifact",
    pulse__omega_p_m="artifact", pulse__tau_p_us="artifact",
    control__t_c_us="artifact", control__tau_c_us="artifact")

_FIG4_ORIGINS = _origins(control__hold_until_us="published",
                         control__omega_m_out="published",
                         control__tau_c_out_us="published")

_TWO_PI_1E4 = 2.0 * math.pi * 1.0e4

PRESETS: dict[str, Preset] = {p.key: p for p in (
    Preset("fig2a", "detuned transit, probe above resonance",
           _cfg(length=100.0, sep=6.0, dp=+5 * 5.75, gn=_TWO_PI_1E4, om_in=1.5,
                t_c=100.0, tau_c=1.0, t_p=10.0, tau_p=5.0, dt=0.002, t_end=45.0),
           _FIG2_ORIGINS,
           "control stays on; transmission read against the opposite detuning"),
    Preset("fig2c", "detuned transit, probe below resonance",
           _cfg(length=100.0, sep=6.0, dp=-5 * 5.75, gn=_TWO_PI_1E4, om_in=1.5,
                t_c=100.0, tau_c=1.0, t_p=10.0, tau_p=5.0, dt=0.002, t_end=45.0),
           _FIG2_ORIGINS,
           "partner of fig2a with the probe detuning sign flipped"),
    Preset("fig3a1", "close counter-propagating storage",
           _cfg(sep=6.0, gn=8.5e4, t_c=45.0, t_end=70.0),
           _origins(),
           "stored packets erode asymmetrically at small separation"),
    Preset("fig3b2", "wide co-propagating storage",
           _cfg(sep=20.0, mode="co", gn=8.5e4, t_c=30.0, t_end=60.0),
           _origins(),
           "both packets stop together; shift profile nearly uniform"),
    Preset("fig4a", "retrieval, weakest read-out",
           _cfg(sep=10.0, gn=7.55e4, hold=55.0, om_out=1.0, t_end=200.0),
           _FIG4_ORIGINS, "slow exit; long window so the peak is not clipped"),
    Preset("fig4b", "retrieval, strong read-out",
           _cfg(sep=10.0, gn=7.55e4, hold=55.0, om_out=3.0, t_end=75.0),
           _FIG4_ORIGINS, ""),
    Preset("fig4c", "retrieval, strongest read-out",
           _cfg(sep=10.0, gn=7.55e4, hold=55.0, om_out=5.0, t_end=65.0),
           _FIG4_ORIGINS, ""),
    Preset("fig4d", "retrieval, slow ramp read-out",
           _cfg(sep=10.0, gn=7.55e4, hold=55.0, om_out=2.0, tau_out=10.0,
                t_end=120.0),
           _FIG4_ORIGINS, "tau of the read-out ramp stretched to 10 us"),
    Preset("s1", "mid-separation storage on the longer cell",
           _cfg(length=335.0, sep=14.0, tau_c=8.0, gn=7.55e4, t_end=70.0),
           _origins(geometry__separation_um="artifact"),
           "separation representative of the swept range"),
    Preset("s2", "dipole-law variant",
           _cfg(sep=20.0, tau_c=8.0, gn=7.55e4, t_end=70.0, law="dipole",
                c3=-6.65e5),
           _origins(physical__c3="derived"),
           "r^-3 kernel; coefficient magnitude as stated, negative sign chosen"),
    Preset("s3", "close-separation storage",
           _cfg(sep=6.0, gn=7.55e4, t_end=70.0),
           _origins(), ""),
    Preset("s4", "co-propagating long pulse",
           _cfg(length=335.0, sep=10.0, mode="co", gn=9.8e4, t_c=80.0,
                t_p=30.0, tau_p=18.0, t_end=110.0),
           _origins(pulse__tau_p_us="published"),
           "wide packet; coupling raised so the travel still fits"),
    Preset("s5a", "efficiency baseline, interaction off",
           _cfg(length=6000.0, sep=13.0, mode="co", gn=1.45e4, c6=0.0,
                t_p=20.0, tau_p=10.0, dz=1.0, t_end=70.0),
           _origins(physical__c6="artifact", geometry__separation_um="artifact"),
           "millimetre cell; at low density the pulse leaks out before switch-off"),
    Preset("s5b", "efficiency with the interaction on",
           _cfg(length=6000.0, sep=13.0, mode="co", gn=1.45e4,
                t_p=20.0, tau_p=10.0, dz=1.0, t_end=70.0),
           _origins(geometry__separation_um="artifact"), ""),
)}


def get_preset(key: str) -> Preset:
    try:
        return PRESETS[key]
    except KeyError:
        raise ConfigError([Diagnostic("preset", f"unknown preset {key!r}; "
                                      f"one of {sorted(PRESETS)}")]) from None


def preset_keys() -> list[str]:
    return sorted(PRESETS)


def audit_rows() -> list[tuple[str, str, str]]:
    """(preset, entry path, origin) for every configured entry of every preset."""
    rows = []
    for key in preset_keys():
        p = PRESETS[key]
        for sec, body in p.raw.items():
            for name in body:
                rows.append((key, f"{sec}.{name}", p.origins[f"{sec}.{name}"]))
    return rows


def apply_fine_grid(raw: dict) -> dict:
    """Swap in the fine grid the source scenarios iterate on (hours-scale)."""
    out = copy.deepcopy(raw)
    out.setdefault("grid", {})
    out["grid"]["dz_um"] = 0.02
    out["grid"]["dt_us"] = 0.002
    return out


def density_scaled_raw(raw: dict, density_per_cm3: float) -> dict:
    """Re-target a preset to another density at fixed single-atom coupling.

    g*sqrt(N) scales with sqrt(N); the reference N is the one in the dict.
    """
    out = copy.deepcopy(raw)
    phys = out["physical"]
    n_ref = float(phys["density_n"]["value"])
    if n_ref <= 0.0 or density_per_cm3 <= 0.0:
        raise ConfigError([Diagnostic("physical.density_n", "densities must be positive")])
    scale = math.sqrt(density_per_cm3 / n_ref)
    phys["density_n"] = {"value": density_per_cm3, "unit": phys["density_n"]["unit"]}
    if "g_sqrt_n" in phys:
        g = dict(phys["g_sqrt_n"])
        g["value"] = float(g["value"]) * scale
        phys["g_sqrt_n"] = g
    return out
