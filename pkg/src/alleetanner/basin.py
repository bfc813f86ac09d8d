"""Basin-of-attraction rasters over the trapping square.

The raster samples cell centers of a regular grid on Phi = [0,1]^2 (bounds
configurable), classifies each forward limit set, and stores one unsigned
byte per cell (0 = undecided).  Identical inputs produce byte-identical
rasters: cells are classified in row-major order with pure float
arithmetic, so the output is reproducible and cacheable.

Raster file layout (version 1):

    bytes 0..7    magic  b"PPBASIN1"
    bytes 8..11   little-endian uint32 JSON header length L
    bytes 12..12+L  UTF-8 JSON: version, bounds, resolution, params,
                    attractor table, config hash, undecided fraction
    remainder     resolution*resolution label bytes, row-major, row 0 at
                  the lowest v, column 0 at the lowest u
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .equilibria import all_equilibria
from .flow import AttractorTag, IntegratorConfig, _targets, \
    classify_omega_limit
from .manifolds import Separatrix
from .model import Params

MAGIC = b"PPBASIN1"
FORMAT_VERSION = 1

Bounds = tuple[tuple[float, float], tuple[float, float]]
PHI: Bounds = ((0.0, 1.0), (0.0, 1.0))


@dataclass(frozen=True)
class AttractorInfo:
    code: int
    id: str
    kind: str                      # "equilibrium" | "cycle"
    location: tuple[float, float] | None = None


@dataclass(frozen=True)
class BasinRaster:
    params: Params
    bounds: Bounds
    resolution: int
    labels: np.ndarray             # (res, res) uint8, [i_v, i_u]
    attractors: tuple[AttractorInfo, ...]
    config_hash: str

    @property
    def undecided_fraction(self) -> float:
        return float(np.count_nonzero(self.labels == 0) / self.labels.size)

    def cell_width(self) -> tuple[float, float]:
        (u0, u1), (v0, v1) = self.bounds
        return (u1 - u0) / self.resolution, (v1 - v0) / self.resolution


def config_hash(p: Params, bounds: Bounds, resolution: int,
                cfg: IntegratorConfig) -> str:
    """Stable digest of everything the raster depends on."""
    key = (f"M={p.M!r};S={p.S!r};Q={p.Q!r};C={p.C!r};"
           f"bounds={bounds!r};res={resolution};"
           f"rtol={cfg.rel_tol!r};atol={cfg.abs_tol!r};"
           f"max_step={cfg.max_step!r};tau_max={cfg.tau_max!r};"
           f"rho_eq={cfg.rho_eq!r};rho_cyc={cfg.rho_cyc!r};"
           f"min_cycle_radius={cfg.min_cycle_radius!r}")
    return hashlib.sha256(key.encode()).hexdigest()


def compute_basins(p: Params, resolution: int,
                   cfg: IntegratorConfig | None = None,
                   bounds: Bounds = PHI,
                   cache_dir: str | None = None) -> BasinRaster:
    """Rasterize basins by classifying every cell center.

    Deterministic for fixed (p, resolution, cfg, bounds).  When
    ``cache_dir`` is given, a previously stored raster with the same
    configuration hash is loaded instead of recomputed.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    cfg = cfg or IntegratorConfig()
    digest = config_hash(p, bounds, resolution, cfg)
    cache_path = None
    if cache_dir is not None:
        cache_path = os.path.join(cache_dir, f"basin_{digest[:16]}.bin")
        if os.path.exists(cache_path):
            raster = load_raster(cache_path)
            if raster.config_hash == digest:
                return raster

    targets = _targets(p)
    codes: dict[str, int] = {}
    infos: list[AttractorInfo] = []
    for t in targets:
        if t.attracting:
            codes[t.id] = len(infos) + 1
            infos.append(AttractorInfo(len(infos) + 1, t.id, "equilibrium",
                                       (t.u, t.v)))
    cycle_code = len(infos) + 1
    cycle_seen = False

    (u0, u1), (v0, v1) = bounds
    du = (u1 - u0) / resolution
    dv = (v1 - v0) / resolution
    labels = np.zeros((resolution, resolution), dtype=np.uint8)
    for i in range(resolution):
        v = v0 + (i + 0.5) * dv
        row = labels[i]
        for j in range(resolution):
            u = u0 + (j + 0.5) * du
            lab = classify_omega_limit(p, (u, v), cfg, _targets_cache=targets)
            if lab.tag is AttractorTag.EQUILIBRIUM:
                row[j] = codes[lab.id]
            elif lab.tag is AttractorTag.LIMIT_CYCLE:
                row[j] = cycle_code
                cycle_seen = True
    if cycle_seen:
        infos.append(AttractorInfo(cycle_code, "cycle", "cycle", None))

    raster = BasinRaster(p, bounds, resolution, labels, tuple(infos), digest)
    if cache_path is not None:
        os.makedirs(cache_dir, exist_ok=True)
        save_raster(raster, cache_path)
    return raster


def basin_fractions(raster: BasinRaster) -> dict[str, float]:
    """Fraction of cells per attractor id (plus 'undecided'); sums to 1."""
    total = raster.labels.size
    out = {"undecided": float(np.count_nonzero(raster.labels == 0) / total)}
    for info in raster.attractors:
        out[info.id] = float(
            np.count_nonzero(raster.labels == info.code) / total)
    return out


def boundary_cells(raster: BasinRaster) -> np.ndarray:
    """Centers of labeled cells with a differently-labeled 4-neighbor."""
    lab = raster.labels
    diff = np.zeros_like(lab, dtype=bool)
    diff[:-1, :] |= lab[:-1, :] != lab[1:, :]
    diff[1:, :] |= lab[1:, :] != lab[:-1, :]
    diff[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    diff[:, 1:] |= lab[:, 1:] != lab[:, :-1]
    diff &= lab != 0
    iv, iu = np.nonzero(diff)
    (u0, u1), (v0, v1) = raster.bounds
    du, dv = raster.cell_width()
    return np.column_stack([u0 + (iu + 0.5) * du, v0 + (iv + 0.5) * dv])


def _dist_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Min distance from each point to a polyline, vectorized per segment."""
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    ab2 = (ab ** 2).sum(axis=1)
    ab2[ab2 == 0.0] = 1e-300
    best = np.full(len(points), np.inf)
    for k in range(len(a)):
        ap = points - a[k]
        t = np.clip((ap @ ab[k]) / ab2[k], 0.0, 1.0)
        proj = a[k] + t[:, None] * ab[k]
        d = np.hypot(points[:, 0] - proj[:, 0], points[:, 1] - proj[:, 1])
        np.minimum(best, d, out=best)
    return best


def boundary_vs_separatrix(raster: BasinRaster, sep: Separatrix) -> float:
    """Largest distance from any basin-boundary cell to the separatrix.

    One-sided (boundary cells toward the polyline).  Rejects rasters that
    do not actually contain two distinct basins.
    """
    present = {int(c) for c in np.unique(raster.labels)} - {0}
    if len(present) < 2:
        raise ValueError("raster has fewer than two distinct basins")
    cells = boundary_cells(raster)
    if len(sep.polyline) < 2:
        raise ValueError("separatrix polyline is degenerate")
    return float(_dist_to_polyline(cells, sep.polyline).max())


def save_raster(raster: BasinRaster, path: str) -> None:
    header = {
        "version": FORMAT_VERSION,
        "bounds": [list(raster.bounds[0]), list(raster.bounds[1])],
        "resolution": raster.resolution,
        "params": {"M": raster.params.M, "S": raster.params.S,
                   "Q": raster.params.Q, "C": raster.params.C},
        "attractors": [
            {"code": a.code, "id": a.id, "kind": a.kind,
             "location": list(a.location) if a.location else None}
            for a in raster.attractors],
        "config_hash": raster.config_hash,
        "undecided_fraction": raster.undecided_fraction,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(raster.labels.tobytes())


def load_raster(path: str) -> BasinRaster:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"not a basin raster file: bad magic {magic!r}")
        (length,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(length).decode())
        if header["version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported raster version {header['version']}")
        res = header["resolution"]
        data = fh.read(res * res)
    labels = np.frombuffer(data, dtype=np.uint8).reshape(res, res).copy()
    pd = header["params"]
    attractors = tuple(
        AttractorInfo(a["code"], a["id"], a["kind"],
                      tuple(a["location"]) if a["location"] else None)
        for a in header["attractors"])
    bounds = (tuple(header["bounds"][0]), tuple(header["bounds"][1]))
    return BasinRaster(Params(pd["M"], pd["S"], pd["Q"], pd["C"]), bounds,
                       res, labels, attractors, header["config_hash"])
