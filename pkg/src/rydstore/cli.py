"""Command line interface.

Subcommands: run (one scenario, all files), sweep (one axis, parallel
children, aggregate CSV), render (one heatmap), curves (response curves),
validate (config check / preset audit). Exit codes: 0 ok, 2 config problem,
3 numerical blow-up, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import json
import math
import os
import sys
import time

from .config import apply_override, dump_config, load_config, resolve_config
from .engine import run_scenario
from .errors import (BlowUpError, ConfigError, Diagnostic, EXIT_BLOWUP,
                     EXIT_CONFIG, EXIT_IO, OutputError)
from .output import (diagnostics_summary, file_sha256, make_manifest,
                     render_heatmap, write_curve_csv, write_manifest,
                     write_snapshot_csv, write_summary_csv, write_traces_csv)
from .presets import (apply_fine_grid, audit_rows, density_scaled_raw,
                      get_preset, preset_keys)
from .response import inset_curve_set

OUT_ENV = "RYDSTORE_OUT"


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", help="bundled scenario id, one of: " + ", ".join(preset_keys()))
    p.add_argument("--config", help="path to a JSON scenario file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted-path override, repeatable (e.g. control.t_c_us=45)")
    p.add_argument("--c6", type=float, default=None, metavar="GHZ_UM6",
                   help="shortcut for physical.c6 in GHz um^6 (e.g. --c6 0)")
    p.add_argument("--fine-grid", action="store_true",
                   help="use the fine reference grid dz=0.02 um, dt=0.002 us (hours-scale)")
    p.add_argument("--out", default=None,
                   help=f"output directory (default ${OUT_ENV} or ./rydstore_out)")


def _raw_from_args(args) -> tuple[dict, str | None]:
    if args.preset and args.config:
        raise ConfigError([Diagnostic("cli", "--preset and --config are exclusive")])
    if args.preset:
        raw = copy.deepcopy(get_preset(args.preset).raw)
        label = args.preset
    elif args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([Diagnostic("$", f"not valid JSON: {exc}")]) from exc
        label = None
    else:
        raise ConfigError([Diagnostic("cli", "one of --preset or --config is required")])
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError([Diagnostic("cli.set", f"expected KEY=VALUE, got {item!r}")])
        apply_override(raw, key, val)
    if args.c6 is not None:
        raw.setdefault("physical", {})["c6"] = {"value": args.c6, "unit": "GHz_um6"}
    if args.fine_grid:
        raw = apply_fine_grid(raw)
    return raw, label


def _out_dir(args) -> str:
    out = args.out or os.environ.get(OUT_ENV) or "rydstore_out"
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output dir {out!r}: {exc}") from exc
    return out


def _auto_movie_stride(cfg) -> int:
    return max(1, cfg.grid.n_steps() // 400)


def _emit_run(cfg, label, out, movie: bool = True) -> str:
    started = time.time()
    stride = cfg.movie_stride or (_auto_movie_stride(cfg) if movie else 0)
    series = run_scenario(cfg.params, cfg.geom, cfg.sched, cfg.spec, cfg.grid,
                          law=cfg.law, snapshot_times=cfg.snapshot_times,
                          v_stride=cfg.v_stride, movie_stride=stride)
    files = []

    def emit(name, writer, *wargs, **wkw):
        path = os.path.join(out, name)
        writer(path, *wargs, **wkw)
        files.append({"path": name, "sha256": file_sha256(path)})
        return path

    emit("config.json", dump_config, cfg.merged)
    emit("traces.csv", write_traces_csv, series, cfg.config_hash)
    for i, snap in enumerate(series.snapshots):
        emit(f"snapshot_{i:02d}_t{snap.t:g}.csv", write_snapshot_csv,
             snap, series.z, cfg.config_hash)
    if stride > 0:
        for fld in ("e", "s"):
            name = f"heatmap_{fld}_1.ppm"
            path = os.path.join(out, name)
            render_heatmap(series, path, field=fld, row=0,
                           config_hash=cfg.config_hash)
            files.append({"path": name, "sha256": file_sha256(path)})
            files.append({"path": name + ".txt", "sha256": file_sha256(path + ".txt")})
    summary = diagnostics_summary(series, label=label or "run")
    emit("summary.csv", write_summary_csv, [summary], cfg.config_hash)
    manifest = make_manifest(cfg.config_hash, label, dict(cfg.merged["grid"]),
                             files, {k: v for k, v in summary.items() if k != "label"},
                             started, time.time())
    write_manifest(os.path.join(out, "manifest.json"), manifest)
    return out


def _cmd_run(args) -> int:
    raw, label = _raw_from_args(args)
    cfg = resolve_config(raw)
    out = _emit_run(cfg, label, _out_dir(args))
    print(f"run {label or 'config'}: wrote {out}/manifest.json "
          f"(config {cfg.config_hash[:12]})")
    return 0


def _sweep_child(payload: tuple[dict, str]) -> dict:
    raw, label = payload
    try:
        cfg = resolve_config(raw)
        series = run_scenario(cfg.params, cfg.geom, cfg.sched, cfg.spec, cfg.grid,
                              law=cfg.law, v_stride=cfg.v_stride)
        return diagnostics_summary(series, label=label)
    except Exception as exc:  # recorded per-row, sweep continues
        return {"label": label, "error": f"{type(exc).__name__}: {exc}"}


def _sweep_payloads(base_raw: dict, axis: str, values: list[float]) -> list[tuple[dict, str]]:
    payloads = []
    for val in values:
        if not math.isfinite(val):
            raise ConfigError([Diagnostic("cli.values", f"non-finite value {val!r}")])
        if axis == "physical.density_n":
            raw = density_scaled_raw(base_raw, val)
        else:
            raw = copy.deepcopy(base_raw)
            apply_override(raw, axis, repr(val))
        payloads.append((raw, f"{axis}={val:g}"))
    return payloads


def _cmd_sweep(args) -> int:
    base_raw, label = _raw_from_args(args)
    try:
        values = [float(x) for x in args.values.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ConfigError([Diagnostic("cli.values", str(exc))]) from exc
    payloads = _sweep_payloads(base_raw, args.axis, values)
    out = _out_dir(args)
    started = time.time()
    if args.jobs > 1 and len(payloads) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_child, payloads))
    else:
        rows = [_sweep_child(p) for p in payloads]
    base_hash = resolve_config(copy.deepcopy(base_raw)).config_hash
    path = os.path.join(out, "sweep.csv")
    write_summary_csv(path, rows, base_hash)
    files = [{"path": "sweep.csv", "sha256": file_sha256(path)}]
    manifest = make_manifest(base_hash, label, dict(base_raw.get("grid", {})),
                             files, {"axis": args.axis, "points": len(rows)},
                             started, time.time())
    write_manifest(os.path.join(out, "manifest.json"), manifest)
    failures = sum(1 for r in rows if r.get("error"))
    print(f"sweep {args.axis}: {len(rows)} rows ({failures} failed) -> {path}")
    return 0


def _cmd_render(args) -> int:
    raw, label = _raw_from_args(args)
    cfg = resolve_config(raw)
    stride = cfg.movie_stride or _auto_movie_stride(cfg)
    series = run_scenario(cfg.params, cfg.geom, cfg.sched, cfg.spec, cfg.grid,
                          law=cfg.law, v_stride=cfg.v_stride, movie_stride=stride)
    out = _out_dir(args)
    name = f"heatmap_{args.field}_{args.row}.ppm"
    path = os.path.join(out, name)
    render_heatmap(series, path, field=args.field, row=args.row - 1,
                   config_hash=cfg.config_hash)
    print(f"render {label or 'config'}: wrote {path}")
    return 0


def _cmd_curves(args) -> int:
    if args.curve_set != "fig2-insets":
        raise ConfigError([Diagnostic("cli.curve_set",
                                      f"unknown curve set {args.curve_set!r}")])
    cfg = get_preset("fig2a").resolve()
    om_c = cfg.sched.omega_m_in
    curves = inset_curve_set(cfg.params, om_c)
    out = _out_dir(args)
    names = []
    for curve in curves:
        sign = "plus" if curve.delta_p > 0 else "minus"
        tag = "v0" if curve.v == 0.0 else "von"
        name = f"inset_{sign}5g_{tag}.csv"
        write_curve_csv(os.path.join(out, name), curve, cfg.config_hash)
        names.append(name)
    print(f"curves {args.curve_set}: wrote {', '.join(names)} in {out}")
    return 0


def _cmd_validate(args) -> int:
    if args.audit:
        print("preset,entry,origin")
        for preset, entry, origin in audit_rows():
            print(f"{preset},{entry},{origin}")
        return 0
    raw, label = _raw_from_args(args)
    cfg = resolve_config(raw)   # raises ConfigError with the full list
    print(json.dumps({"ok": True, "label": label, "config_hash": cfg.config_hash}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rydstore",
        description="Storage, interaction, and retrieval of two slow-light "
                    "pulses in parallel interacting ensembles.")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write all files")
    _add_config_args(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sw = sub.add_parser("sweep", help="run one scenario across an axis of values")
    _add_config_args(p_sw)
    p_sw.add_argument("--axis", required=True,
                      help="dotted config path, e.g. geometry.separation_um")
    p_sw.add_argument("--values", required=True,
                      help="comma-separated numbers; empty writes a header-only CSV")
    p_sw.add_argument("--jobs", type=int, default=1, help="parallel child runs")
    p_sw.set_defaults(func=_cmd_sweep)

    p_re = sub.add_parser("render", help="render one space-time heatmap")
    _add_config_args(p_re)
    p_re.add_argument("--field", choices=("s", "e"), default="s")
    p_re.add_argument("--row", type=int, choices=(1, 2), default=1)
    p_re.set_defaults(func=_cmd_render)

    p_cu = sub.add_parser("curves", help="emit steady-state response curves")
    p_cu.add_argument("--curve-set", default="fig2-insets")
    p_cu.add_argument("--out", default=None)
    p_cu.set_defaults(func=_cmd_curves)

    p_va = sub.add_parser("validate", help="check a config, or print the preset audit")
    _add_config_args(p_va)
    p_va.add_argument("--audit", action="store_true",
                      help="print the preset provenance table and exit")
    p_va.set_defaults(func=_cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"diagnostics": [d.to_dict() for d in exc.diagnostics]},
                         indent=2), file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (OutputError, OSError) as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
