"""File emission: CSV tables, PPM heatmaps, JSON manifests.

Every data file carries the config hash in a comment header so it can be
matched to the manifest that indexed it. Floats are written with repr, which
round-trips exactly, making emission byte-stable for identical inputs. Wall
time lives only in the manifest's "volatile" block, which is excluded from
the manifest hash.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from os import fspath

import numpy as np

from .config import canonical_dump
from .diagnostics import phase_spread, storage_efficiency, transmission_fraction
from .engine import FieldState, SnapshotSeries
from .errors import EmptySeriesError, OutputError, UndefinedDiagnosticError
from .kernels import homogeneity_metric
from .response import SusceptibilityCurve

SUMMARY_FIELDS = ("label", "eta", "transmission", "max_v", "homogeneity",
                  "phase_spread", "error")


def _r(x) -> str:
    return repr(float(x))


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {fspath(path)}: {exc}") from exc


def _write_bytes(path, blob: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise OutputError(f"cannot write {fspath(path)}: {exc}") from exc


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_snapshot_csv(path, state: FieldState, z, config_hash: str) -> None:
    """One dump time: z profiles of both ensembles."""
    cols = ("z_um", "abs_e_1", "arg_e_1", "abs_s_1", "arg_s_1", "v_1",
            "abs_e_2", "arg_e_2", "abs_s_2", "arg_s_2", "v_2")
    lines = [f"# config_hash={config_hash}", f"# t_us={_r(state.t)}", ",".join(cols)]
    abs_e, arg_e = np.abs(state.e), np.angle(state.e)
    abs_s, arg_s = np.abs(state.s), np.angle(state.s)
    for i in range(state.s.shape[1]):
        lines.append(",".join((
            _r(z[i]),
            _r(abs_e[0, i]), _r(arg_e[0, i]), _r(abs_s[0, i]), _r(arg_s[0, i]),
            _r(state.v[0, i]),
            _r(abs_e[1, i]), _r(arg_e[1, i]), _r(abs_s[1, i]), _r(arg_s[1, i]),
            _r(state.v[1, i]))))
    _write_text(path, "\n".join(lines) + "\n")


def write_traces_csv(path, series: SnapshotSeries, config_hash: str) -> None:
    """Per-step scalars of a run."""
    cols = ("t_us", "omega_c", "boundary", "abs_exit_1", "abs_exit_2",
            "smax_1", "smax_2", "peak_z_1", "peak_z_2",
            "n_matter_1", "n_matter_2", "vmax")
    lines = [f"# config_hash={config_hash}", ",".join(cols)]
    abs_exit = np.abs(series.exit_field)
    for i in range(series.times.shape[0]):
        lines.append(",".join((
            _r(series.times[i]), _r(series.omega_c[i]), _r(series.boundary[i]),
            _r(abs_exit[0, i]), _r(abs_exit[1, i]),
            _r(series.smax[0, i]), _r(series.smax[1, i]),
            _r(series.peak_z[0, i]), _r(series.peak_z[1, i]),
            _r(series.n_matter[0, i]), _r(series.n_matter[1, i]),
            _r(series.vmax[i]))))
    _write_text(path, "\n".join(lines) + "\n")


def write_curve_csv(path, curve: SusceptibilityCurve, config_hash: str) -> None:
    lines = [f"# config_hash={config_hash}",
             f"# delta_p={_r(curve.delta_p)} v={_r(curve.v)} "
             f"omega_c={_r(curve.omega_c)} gamma={_r(curve.gamma)}",
             "delta_rad_us,re_chi,im_chi"]
    for i in range(curve.delta.shape[0]):
        lines.append(",".join((_r(curve.delta[i]),
                               _r(curve.chi[i].real), _r(curve.chi[i].imag))))
    _write_text(path, "\n".join(lines) + "\n")


def diagnostics_summary(series: SnapshotSeries, label: str = "") -> dict:
    """The aggregate row for one run; undefined entries become None."""
    row: dict = {"label": label, "error": None}
    try:
        row["eta"] = storage_efficiency(series)
    except UndefinedDiagnosticError:
        row["eta"] = None
    row["transmission"] = transmission_fraction(series)
    row["max_v"] = float(np.max(series.vmax))
    try:
        t_s = series.sched.t_c + 2.0 * series.sched.tau_c
        snap = series.snapshot_at(min(t_s, series.grid.t_end))
        row["homogeneity"] = homogeneity_metric(snap.v[0], np.abs(snap.s[0]) ** 2)
    except UndefinedDiagnosticError:
        row["homogeneity"] = None
    row["phase_spread"] = phase_spread(series)
    return row


def write_summary_csv(path, rows: list[dict], config_hash: str) -> None:
    """Aggregate CSV, one row per run; empty cell for undefined entries."""
    lines = [f"# config_hash={config_hash}", ",".join(SUMMARY_FIELDS)]
    for row in rows:
        cells = []
        for key in SUMMARY_FIELDS:
            val = row.get(key)
            if val is None:
                cells.append("")
            elif isinstance(val, str):
                cells.append(val.replace(",", ";"))
            else:
                cells.append(_r(val))
        lines.append(",".join(cells))
    _write_text(path, "\n".join(lines) + "\n")


def render_heatmap(series: SnapshotSeries, path, field: str = "s",
                   row: int = 0, config_hash: str = "") -> None:
    """Space-time magnitude image: one row of pixels per kept frame.

    Binary PPM, linear grayscale, black at zero and white at the recorded
    maximum; the maximum and the axis ranges go to a sidecar text file at
    <path>.txt since PPM headers cannot be trusted to carry metadata.
    """
    frames = {"s": series.movie_s, "e": series.movie_e}.get(field)
    if field not in ("s", "e"):
        raise ValueError(f"field must be 's' or 'e', got {field!r}")
    if frames is None or frames.shape[0] == 0:
        raise EmptySeriesError("run kept no movie frames; set movie_stride > 0")
    grid = frames[:, row, :]
    peak = float(grid.max())
    if peak > 0.0:
        pix = np.round(grid * (255.0 / peak)).astype(np.uint8)
    else:
        pix = np.zeros(grid.shape, dtype=np.uint8)
    nt, nz = pix.shape
    header = f"P6\n# config_hash={config_hash}\n{nz} {nt}\n255\n".encode("ascii")
    rgb = np.repeat(pix[:, :, None], 3, axis=2)
    _write_bytes(path, header + rgb.tobytes())
    tt = series.movie_times
    sidecar = "\n".join((
        f"config_hash={config_hash}", f"field={field}", f"row={row + 1}",
        f"max={_r(peak)}", "pixel_rows=time", "pixel_cols=z",
        f"t0_us={_r(tt[0])}", f"t1_us={_r(tt[-1])}",
        f"z0_um={_r(series.z[0])}", f"z1_um={_r(series.z[-1])}")) + "\n"
    _write_text(fspath(path) + ".txt", sidecar)


def make_manifest(config_hash: str, preset: str | None, grid_block: dict,
                  files: list[dict], diagnostics: dict,
                  started: float, finished: float) -> dict:
    return {
        "config_hash": config_hash,
        "preset": preset,
        "grid": grid_block,
        "files": files,
        "diagnostics": diagnostics,
        "volatile": {
            "started_utc": _dt.datetime.fromtimestamp(
                started, _dt.timezone.utc).isoformat(),
            "finished_utc": _dt.datetime.fromtimestamp(
                finished, _dt.timezone.utc).isoformat(),
            "walltime_s": finished - started,
        },
    }


def manifest_hash(manifest: dict) -> str:
    stable = {k: v for k, v in manifest.items() if k != "volatile"}
    return hashlib.sha256(canonical_dump(stable).encode("ascii")).hexdigest()


def write_manifest(path, manifest: dict) -> None:
    body = dict(manifest)
    body["manifest_hash"] = manifest_hash(manifest)
    _write_text(path, json.dumps(body, sort_keys=True, indent=2) + "\n")
