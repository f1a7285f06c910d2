"""Configuration ingestion.

Scenario files are JSON. Rate-like entries carry an explicit unit tag,

    "omega_m_in": {"value": 2.0, "unit": "MHz"}

with linear-frequency tags converted to the internal angular rad/us; plain
lengths and times are bare numbers whose keys end in _um or _us. Every
problem found is reported as a (path, reason) diagnostic and the whole batch
is raised at once, so a config is either rejected with a complete list or
resolved fully.

The resolved bundle keeps the merged dict (defaults applied, derived entries
filled in) and its sha256 over a canonical dump; outputs stamp that hash so
files can be traced back to the exact effective configuration.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Any

from .errors import ConfigError, Diagnostic
from .model import (ControlSchedule, Geometry, GridSpec, PhysicalParams,
                    PulseSpec, TWO_PI, default_coupling, validate_bundle)

RATE_UNITS = {"MHz": TWO_PI, "GHz": TWO_PI * 1e3, "kHz": TWO_PI * 1e-3, "rad_per_us": 1.0}
C6_UNITS = {"GHz_um6": TWO_PI * 1e3, "MHz_um6": TWO_PI, "rad_per_us_um6": 1.0}
C3_UNITS = {"GHz_um3": TWO_PI * 1e3, "MHz_um3": TWO_PI, "rad_per_us_um3": 1.0}
DENSITY_UNITS = {"per_cm3": 1e-12, "per_um3": 1.0}

_QTY_UNITS = {
    "physical.gamma": RATE_UNITS, "physical.delta_p": RATE_UNITS,
    "physical.delta_c": RATE_UNITS, "physical.g_sqrt_n": RATE_UNITS,
    "physical.density_n": DENSITY_UNITS, "physical.c6": C6_UNITS,
    "physical.c3": C3_UNITS,
    "control.omega_m_in": RATE_UNITS, "control.omega_m_out": RATE_UNITS,
    "pulse.omega_p_m": RATE_UNITS,
}

_SCHEMA = {
    "physical": ("gamma", "delta_p", "delta_c", "g_sqrt_n", "density_n", "c6", "c3"),
    "geometry": ("length_um", "separation_um", "diameter_um", "mode"),
    "control": ("omega_m_in", "t_c_us", "tau_c_us", "hold_until_us",
                "omega_m_out", "tau_c_out_us"),
    "pulse": ("omega_p_m", "t_p_us", "tau_p_us"),
    "grid": ("dz_um", "dt_us", "t_end_us"),
    "interaction": ("law",),
    "output": ("snapshot_times_us", "v_stride", "movie_stride"),
}

DEFAULTS: dict[str, dict[str, Any]] = {
    "physical": {
        "gamma": {"value": 5.75, "unit": "MHz"},
        "delta_p": {"value": 0.0, "unit": "MHz"},
        "density_n": {"value": 2.0e13, "unit": "per_cm3"},
        "c6": {"value": -2.3e5, "unit": "GHz_um6"},
    },
    "geometry": {"length_um": 300.0, "separation_um": 6.0, "diameter_um": 2.0,
                 "mode": "counter"},
    "control": {"omega_m_in": {"value": 2.0, "unit": "MHz"}, "t_c_us": 40.0,
                "tau_c_us": 10.0, "hold_until_us": None,
                "omega_m_out": {"value": 0.0, "unit": "MHz"}, "tau_c_out_us": 0.1},
    "pulse": {"omega_p_m": {"value": 0.01, "unit": "MHz"}, "t_p_us": 12.0,
              "tau_p_us": 7.0},
    "grid": {"dz_um": 0.2, "dt_us": 0.004, "t_end_us": 70.0},
    "interaction": {"law": "vdw"},
    "output": {"snapshot_times_us": [], "v_stride": 1, "movie_stride": 0},
}


@dataclass(frozen=True)
class ResolvedConfig:
    params: PhysicalParams
    geom: Geometry
    sched: ControlSchedule
    spec: PulseSpec
    grid: GridSpec
    law: str
    snapshot_times: tuple[float, ...]
    v_stride: int
    movie_stride: int
    merged: dict
    config_hash: str


def canonical_dump(data: dict) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(data: dict) -> str:
    return hashlib.sha256(canonical_dump(data).encode("ascii")).hexdigest()


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _quantity(merged, section, key, diags, required=True):
    """Convert a tagged quantity at section.key to rad/us (or internal units)."""
    path = f"{section}.{key}"
    node = merged[section].get(key)
    if node is None:
        if required:
            diags.append(Diagnostic(path, "missing required entry"))
        return None
    if not isinstance(node, dict) or set(node) != {"value", "unit"}:
        diags.append(Diagnostic(path, 'expected {"value": number, "unit": tag}'))
        return None
    units = _QTY_UNITS[path]
    if node["unit"] not in units:
        diags.append(Diagnostic(path + ".unit",
                                f"unknown unit {node['unit']!r}; one of {sorted(units)}"))
        return None
    if not _is_number(node["value"]):
        diags.append(Diagnostic(path + ".value", "must be a finite number"))
        return None
    return float(node["value"]) * units[node["unit"]]


def _number(merged, section, key, diags, allow_none=False):
    val = merged[section].get(key)
    if val is None:
        if allow_none:
            return None
        diags.append(Diagnostic(f"{section}.{key}", "missing required entry"))
        return None
    if not _is_number(val):
        diags.append(Diagnostic(f"{section}.{key}", "must be a finite number"))
        return None
    return float(val)


def _merge(raw: dict, diags: list[Diagnostic]) -> dict:
    merged = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    if not isinstance(raw, dict):
        diags.append(Diagnostic("$", "top level must be a JSON object"))
        return merged
    for sec, body in raw.items():
        if sec not in _SCHEMA:
            diags.append(Diagnostic(sec, f"unknown section; one of {sorted(_SCHEMA)}"))
            continue
        if not isinstance(body, dict):
            diags.append(Diagnostic(sec, "section must be a JSON object"))
            continue
        for key, val in body.items():
            if key not in _SCHEMA[sec]:
                diags.append(Diagnostic(f"{sec}.{key}",
                                        f"unknown entry; one of {sorted(_SCHEMA[sec])}"))
                continue
            merged[sec][key] = val
    return merged


def resolve_config(raw: dict) -> ResolvedConfig:
    """Validate and convert a raw config dict; raises ConfigError listing
    every problem when anything is wrong."""
    diags: list[Diagnostic] = []
    merged = _merge(raw, diags)

    gamma = _quantity(merged, "physical", "gamma", diags)
    delta_p = _quantity(merged, "physical", "delta_p", diags)
    delta_c = _quantity(merged, "physical", "delta_c", diags, required=False)
    g_sqrt_n = _quantity(merged, "physical", "g_sqrt_n", diags, required=False)
    density = _quantity(merged, "physical", "density_n", diags)
    c6 = _quantity(merged, "physical", "c6", diags)
    c3 = _quantity(merged, "physical", "c3", diags, required=False)

    length = _number(merged, "geometry", "length_um", diags)
    sep = _number(merged, "geometry", "separation_um", diags)
    diam = _number(merged, "geometry", "diameter_um", diags)
    mode = merged["geometry"].get("mode")
    if not isinstance(mode, str):
        diags.append(Diagnostic("geometry.mode", "must be a string"))
        mode = "counter"

    om_in = _quantity(merged, "control", "omega_m_in", diags)
    t_c = _number(merged, "control", "t_c_us", diags)
    tau_c = _number(merged, "control", "tau_c_us", diags)
    hold = _number(merged, "control", "hold_until_us", diags, allow_none=True)
    om_out = _quantity(merged, "control", "omega_m_out", diags)
    tau_out = _number(merged, "control", "tau_c_out_us", diags)

    op_m = _quantity(merged, "pulse", "omega_p_m", diags)
    t_p = _number(merged, "pulse", "t_p_us", diags)
    tau_p = _number(merged, "pulse", "tau_p_us", diags)

    dz = _number(merged, "grid", "dz_um", diags)
    dt = _number(merged, "grid", "dt_us", diags)
    t_end = _number(merged, "grid", "t_end_us", diags)

    law = merged["interaction"].get("law")
    if not isinstance(law, str):
        diags.append(Diagnostic("interaction.law", "must be a string"))
        law = "vdw"

    snaps = merged["output"].get("snapshot_times_us")
    if not isinstance(snaps, list) or not all(_is_number(x) for x in snaps):
        diags.append(Diagnostic("output.snapshot_times_us", "must be a list of numbers"))
        snaps = []
    stride_v = merged["output"].get("v_stride")
    if not isinstance(stride_v, int) or isinstance(stride_v, bool) or stride_v < 1:
        diags.append(Diagnostic("output.v_stride", "must be an integer >= 1"))
        stride_v = 1
    stride_m = merged["output"].get("movie_stride")
    if not isinstance(stride_m, int) or isinstance(stride_m, bool) or stride_m < 0:
        diags.append(Diagnostic("output.movie_stride", "must be an integer >= 0"))
        stride_m = 0

    if diags:
        raise ConfigError(diags)

    if delta_c is None:
        delta_c = -delta_p
        merged["physical"]["delta_c"] = {"value": delta_c, "unit": "rad_per_us"}
    geom = Geometry(length, sep, diam, mode)
    sched = ControlSchedule(om_in, t_c, tau_c, hold, om_out, tau_out)
    spec = PulseSpec(op_m, t_p, tau_p)
    grid = GridSpec(dz, dt, t_end)
    params = PhysicalParams(gamma, delta_p, delta_c,
                            1.0 if g_sqrt_n is None else g_sqrt_n, density, c6, c3)
    if g_sqrt_n is None:
        g_sqrt_n = default_coupling(params, geom, sched, spec)
        merged["physical"]["g_sqrt_n"] = {"value": g_sqrt_n, "unit": "rad_per_us"}
        params = replace(params, g_sqrt_n=g_sqrt_n)

    problems = validate_bundle(params, geom, sched, spec, grid, law)
    if problems:
        raise ConfigError(problems)
    return ResolvedConfig(params, geom, sched, spec, grid, law, tuple(float(x) for x in snaps),
                          stride_v, stride_m, merged, config_hash(merged))


def load_config(path) -> ResolvedConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([Diagnostic("$", f"not valid JSON: {exc}")]) from exc
    return resolve_config(raw)


def dump_config(path, merged: dict) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(merged, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def apply_override(raw: dict, dotted: str, text: str) -> None:
    """Apply one key=value override with a dotted path into the raw dict.

    The value text is parsed as JSON when possible, else kept as a string.
    If the target is a tagged quantity and the override is a bare number,
    only its "value" is replaced, keeping the unit.
    """
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    parts = dotted.split(".")
    node = raw
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError([Diagnostic(dotted, f"cannot descend into {part!r}")])
    leaf = parts[-1]
    section_defaults = DEFAULTS.get(parts[0], {}) if len(parts) == 2 else {}
    current = node.get(leaf, section_defaults.get(leaf))
    if (isinstance(current, dict) and set(current) == {"value", "unit"}
            and isinstance(value, (int, float)) and not isinstance(value, bool)):
        node[leaf] = {"value": value, "unit": current["unit"]}
    elif (f"{parts[0]}.{leaf}" in _QTY_UNITS and isinstance(value, (int, float))
          and not isinstance(value, bool) and len(parts) == 2):
        linear = {id(RATE_UNITS): "MHz", id(C6_UNITS): "GHz_um6",
                  id(C3_UNITS): "MHz_um3", id(DENSITY_UNITS): "per_cm3"}
        node[leaf] = {"value": value,
                      "unit": linear[id(_QTY_UNITS[f"{parts[0]}.{leaf}"])]}
    else:
        node[leaf] = value
