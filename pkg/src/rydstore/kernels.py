"""Interaction kernel between the two ensembles.

The level shift one ensemble imprints on the other is a convolution along z
of the partner's excitation density with a kernel K(dz). Two radial laws are
supported (r^-6 and r^-3), each either as a point law evaluated on the two
axes or averaged over the transverse mode profiles of both cylinders:

    K(dz) = integral w(r1) w(r2) C / |r1 - r2 + a x + dz z|^k  dA1 dA2

with w the normalized J0^2 disk weight. The 4D average reduces to 2D: the
in-plane offset u = r2 - r1 has an isotropic density D(|u|) (the radial
cross-correlation of the two disk weights), leaving

    K(dz) = int_0^d dv v D(v) int_0^2pi dphi C / (a^2 + v^2 + 2 a v cos phi + dz^2)^(k/2).

All quadratures are Gauss-Legendre with every order doubled until the kernel
changes by less than the requested tolerance. The mode weight vanishes
smoothly at the disk edge (its amplitude is zero there), so no endpoint
singularities arise as long as the axes are at least a diameter apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import special

from .errors import GeometryError, UndefinedDiagnosticError
from .model import NU_01, Geometry, PhysicalParams

POINT_LAWS = ("point_vdw", "point_dipole")
DISTRIBUTED_LAWS = ("vdw", "dipole")
KNOWN_LAWS = POINT_LAWS + DISTRIBUTED_LAWS

_MAX_ORDER = 256


@dataclass(frozen=True)
class TransverseMode:
    """Normalized J0^2 occupation profile of one cylinder cross-section."""

    diameter: float

    @property
    def norm(self) -> float:
        # integral of J0(2 nu01 rho / d)^2 over the disk
        return math.pi * self.diameter ** 2 * special.j1(NU_01) ** 2 / 4.0

    def amplitude(self, rho):
        """Transverse field profile, zero at the disk edge."""
        rho = np.asarray(rho, dtype=float)
        out = np.where(rho <= self.diameter / 2.0,
                       special.j0(2.0 * NU_01 * np.minimum(rho, self.diameter / 2.0) / self.diameter),
                       0.0)
        return out if out.ndim else float(out)

    def weight(self, rho):
        """Occupation density; integrates to one over the disk."""
        amp = np.asarray(self.amplitude(rho))
        out = amp * amp / self.norm
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class KernelTable:
    """K(dz) tabulated on the simulation grid offsets 0, dz, ..., (npts-1) dz."""

    law: str
    coefficient: float              # rad/us um^k, signed
    separation: float               # um
    diameter: float                 # um
    dz: float                       # um
    half: np.ndarray                # K at nonnegative offsets
    tol: float
    order: int                      # final quadrature order (0 for point laws)

    @property
    def npts(self) -> int:
        return self.half.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return self.dz * np.arange(self.npts)

    @property
    def full(self) -> np.ndarray:
        """Mirrored table over -(npts-1) dz ... +(npts-1) dz."""
        return np.concatenate([self.half[:0:-1], self.half])

    @property
    def exponent(self) -> int:
        return 3 if self.law.endswith("dipole") else 6


def interaction_coefficient(params: PhysicalParams, law: str) -> tuple[float, int]:
    """(C_k, k) for the requested law."""
    if law not in KNOWN_LAWS:
        raise GeometryError(f"unknown interaction law {law!r}")
    if law.endswith("dipole"):
        if params.c3 is None:
            raise GeometryError("dipole law requested but c3 is not set")
        return params.c3, 3
    return params.c6, 6


def _gauss(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def offset_density(v, diameter: float, order: int = 64) -> np.ndarray:
    """Radial density D of the in-plane offset between two mode-weighted points.

    Normalized so 2 pi * int_0^d D(v) v dv = 1; support [0, diameter].
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    mode = TransverseMode(diameter)
    radius = diameter / 2.0
    rho, w_rho = _gauss(order, 0.0, radius)
    psi, w_psi = _gauss(order, 0.0, math.pi)    # integrand even about psi = pi
    r2 = np.sqrt(rho[None, :, None] ** 2 + v[:, None, None] ** 2
                 + 2.0 * rho[None, :, None] * v[:, None, None] * np.cos(psi)[None, None, :])
    kern = rho[None, :, None] * mode.weight(rho)[None, :, None] * mode.weight(r2)
    return 2.0 * np.einsum("vrp,r,p->v", kern, w_rho, w_psi)


def _point_half(zhalf: np.ndarray, a: float, c_k: float, k: int) -> np.ndarray:
    return c_k / (a * a + zhalf * zhalf) ** (k / 2.0)


def _distributed_half(zhalf: np.ndarray, a: float, d: float, c_k: float,
                      k: int, order: int, chunk: int = 512) -> np.ndarray:
    v, w_v = _gauss(order, 0.0, d)
    phi, w_phi = _gauss(order, 0.0, math.pi)
    dens = offset_density(v, d, order)
    plane = a * a + v[:, None] ** 2 + 2.0 * a * v[:, None] * np.cos(phi)[None, :]
    wmat = (w_v * v * dens)[:, None] * (2.0 * w_phi)[None, :]
    out = np.empty_like(zhalf)
    for i in range(0, zhalf.shape[0], chunk):
        z2 = zhalf[i:i + chunk] ** 2
        out[i:i + chunk] = np.einsum(
            "zvp,vp->z", (plane[None, :, :] + z2[:, None, None]) ** (-k / 2.0), wmat)
    return c_k * out


def build_kernel(params: PhysicalParams, geom: Geometry, dz: float, npts: int,
                 law: str = "vdw", tol: float = 1e-4) -> KernelTable:
    """Tabulate K on the grid offsets needed for an npts-point z grid."""
    c_k, k = interaction_coefficient(params, law)
    a = geom.separation
    zhalf = dz * np.arange(npts)
    if law in POINT_LAWS:
        if a <= 0.0:
            raise GeometryError("point law diverges at zero separation")
        return KernelTable(law, c_k, a, geom.diameter, dz,
                           _point_half(zhalf, a, c_k, k), tol, 0)

    if a < geom.diameter:
        raise GeometryError("cylinders overlap: separation < diameter "
                            "for a distributed interaction law")
    order = 16
    prev = _distributed_half(zhalf, a, geom.diameter, c_k, k, order)
    while order < _MAX_ORDER:
        order *= 2
        cur = _distributed_half(zhalf, a, geom.diameter, c_k, k, order)
        scale = np.max(np.abs(cur))
        if scale == 0.0 or np.max(np.abs(cur - prev)) <= tol * scale:
            return KernelTable(law, c_k, a, geom.diameter, dz, cur, tol, order)
        prev = cur
    raise GeometryError(f"kernel quadrature did not converge below {tol:g} "
                        f"by order {_MAX_ORDER}")


def potential_profile(table: KernelTable, spinwave, method: str = "auto") -> np.ndarray:
    """Level shift V(z) induced by a partner spinwave amplitude.

    The weighting is the occupation |spinwave|^2, so the result scales with
    the square of the amplitude.
    """
    s = np.asarray(spinwave)
    if s.shape != (table.npts,):
        raise ValueError(f"spinwave length {s.shape} does not match the "
                         f"kernel table ({table.npts} points)")
    occ = np.abs(s) ** 2
    if method == "auto":
        method = "fft" if table.npts >= 64 else "direct"
    if method == "direct":
        acc = np.convolve(table.full, occ, mode="valid")
    elif method == "fft":
        n = table.npts
        m = sfft.next_fast_len(3 * n - 2)
        acc = sfft.irfft(sfft.rfft(table.full, m) * sfft.rfft(occ, m), m)[n - 1:2 * n - 1]
    else:
        raise ValueError(f"unknown method {method!r}")
    return table.dz * acc


def homogeneity_metric(v, occupation) -> float:
    """Relative spread (max - min)/|mean| of V across the occupation's FWHM.

    Zero for an identically vanishing shift. The window is the contiguous
    half-maximum region around the occupation peak.
    """
    v = np.asarray(v, dtype=float)
    occ = np.asarray(occupation, dtype=float)
    if v.shape != occ.shape or v.ndim != 1:
        raise ValueError("profile arrays must be 1D and of equal length")
    if not np.any(occ > 0.0):
        raise UndefinedDiagnosticError("occupation profile is empty")
    if not np.any(v != 0.0):
        return 0.0
    i0 = int(np.argmax(occ))
    half = occ[i0] / 2.0
    lo = i0
    while lo > 0 and occ[lo - 1] >= half:
        lo -= 1
    hi = i0
    while hi < occ.shape[0] - 1 and occ[hi + 1] >= half:
        hi += 1
    seg = v[lo:hi + 1]
    mean = np.mean(seg)
    if mean == 0.0:
        raise UndefinedDiagnosticError("mean shift vanishes over the half-maximum window")
    return float((np.max(seg) - np.min(seg)) / abs(mean))


def save_kernel(table: KernelTable, path) -> None:
    lines = ["# kernel table",
             f"# law={table.law} coefficient={table.coefficient!r} "
             f"separation_um={table.separation!r} diameter_um={table.diameter!r} "
             f"dz_um={table.dz!r} tol={table.tol!r} order={table.order}",
             "offset_um,kernel"]
    offs = table.offsets
    lines.extend(f"{float(offs[i])!r},{float(table.half[i])!r}" for i in range(table.npts))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_kernel(path) -> KernelTable:
    meta: dict[str, str] = {}
    vals: list[float] = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line == "offset_um,kernel":
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, _, val = token.partition("=")
                        meta[key] = val
                continue
            vals.append(float(line.split(",")[1]))
    return KernelTable(meta["law"], float(meta["coefficient"]),
                       float(meta["separation_um"]), float(meta["diameter_um"]),
                       float(meta["dz_um"]), np.array(vals),
                       float(meta["tol"]), int(meta["order"]))
