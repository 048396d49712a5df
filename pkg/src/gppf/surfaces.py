"""
Benchmark environments on uniform square grids.

Every surface carries two per-point fields over the same grid: the
*elevation* the agent drives over (it sets traveled distance) and the
*target* the model learns (it sets the error). For the analytic surfaces the
two coincide. Measurement noise is drawn at ``measure`` time; the stored
target is always noiseless.

Grid points are flattened row-major with x2 as the slow axis::

    index = i2 * len(axis1) + i1

which is also the row order of the DEM text format.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "CraterParams",
    "DemParseError",
    "SurfaceGrid",
    "SurfaceKind",
    "build_parabola",
    "build_surface",
    "build_synthetic_crater",
    "build_townsend",
    "count_local_extrema",
    "load_dem",
    "measure",
    "traversal_distance",
    "write_dem",
]

DEM_HEADER = ["x1", "x2", "elevation", "target"]

# fraction of the target range used as default measurement noise std
DEFAULT_NOISE_FRACTION = 0.01

# relative tolerance on grid uniformity
GRID_TOL = 1e-9


class DemParseError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    name: str
    family: str
    axis1: np.ndarray
    axis2: np.ndarray
    step: float
    elevation: np.ndarray
    target: np.ndarray
    noise_std: float = 0.0
    gap_mask: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.axis1) * len(self.axis2)
        for label in ("elevation", "target"):
            arr = np.asarray(getattr(self, label), dtype=float).reshape(-1)
            if arr.size != n:
                raise ValueError(f"{label} has {arr.size} entries, grid has {n}")
            arr.setflags(write=False)
            object.__setattr__(self, label, arr)
        for axis in (self.axis1, self.axis2):
            _check_axis(axis, self.step)
        if not self.noise_std >= 0:
            raise ValueError(f"noise_std must be non-negative, got {self.noise_std}")
        if not self.target_range > 0:
            raise ValueError("target field is constant")
        pos = np.column_stack([np.tile(self.axis1, len(self.axis2)),
                               np.repeat(self.axis2, len(self.axis1))])
        pos.setflags(write=False)
        object.__setattr__(self, "_positions", pos)

    @property
    def shape(self) -> tuple[int, int]:
        """``(len(axis2), len(axis1))``, the shape of the fields as 2-D arrays."""
        return len(self.axis2), len(self.axis1)

    @property
    def n_points(self) -> int:
        return len(self.axis1) * len(self.axis2)

    @property
    def positions(self) -> np.ndarray:
        """Planar coordinates ``(x1, x2)`` of every grid point, shape (N, 2)."""
        return self._positions

    @property
    def points3d(self) -> np.ndarray:
        return np.column_stack([self._positions, self.elevation])

    @property
    def target_range(self) -> float:
        return float(self.target.max() - self.target.min())

    @property
    def domain_length(self) -> float:
        return float(self.axis1[-1] - self.axis1[0])

    def with_noise(self, noise_std: float) -> "SurfaceGrid":
        return SurfaceGrid(self.name, self.family, self.axis1, self.axis2, self.step,
                           self.elevation, self.target, noise_std, self.gap_mask)


def _check_axis(axis, step):
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size < 2:
        raise ValueError("grid axes need at least two coordinates")
    if not step > 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if np.any(np.abs(np.diff(axis) - step) > GRID_TOL * step):
        raise ValueError(f"axis is not uniformly spaced at step {step}")


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def _default_noise(noise_std, target):
    if noise_std is None:
        return DEFAULT_NOISE_FRACTION * float(np.ptp(target))
    return float(noise_std)


def build_parabola(noise_std: float | None = None) -> SurfaceGrid:
    """Bowl ``x1^2 + x2^2`` on ``[-1, 1]^2`` with step 0.1 (441 points)."""
    ax = _axis(-1.0, 1.0, 0.1)
    x1, x2 = np.meshgrid(ax, ax)
    y = (x1 ** 2 + x2 ** 2).ravel()
    return SurfaceGrid("parabola", "parabola", ax, ax, 0.1, y, y,
                       _default_noise(noise_std, y))


def townsend(x1, x2, classic: bool = False):
    """
    Townsend-type test function.

    ``classic=False`` gives ``-cos((x1 - 0.1) x2) - x1 sin(3 x1 + x2)``;
    ``classic=True`` squares the cosine term as in the usual benchmark.
    """
    c = np.cos((x1 - 0.1) * x2)
    if classic:
        c = c ** 2
    return -c - x1 * np.sin(3 * x1 + x2)


def build_townsend(noise_std: float | None = None, classic: bool = False,
                   step: float = 0.25) -> SurfaceGrid:
    ax = _axis(-2.5, 2.5, step)
    x1, x2 = np.meshgrid(ax, ax)
    y = townsend(x1, x2, classic).ravel()
    name = "townsend-classic" if classic else "townsend"
    return SurfaceGrid(name, "townsend", ax, ax, step, y, y,
                       _default_noise(noise_std, y))


@dataclass(frozen=True)
class CraterParams:
    radius: float = 2.0
    depth: float = 1.0
    rim_height: float = 0.3
    rim_width: float = 0.35
    target_range: float = 0.5


# (x1, x2, amplitude, width) of the hydroxyl-like target features
_CRATER_FEATURES = (
    (0.0, 0.0, 1.0, 1.2),
    (-1.5, 1.25, -0.55, 0.45),
    (1.5, -1.25, -0.5, 0.45),
    (1.75, 1.75, 0.45, 0.5),
    (-0.25, -2.25, -0.45, 0.45),
    (2.25, 0.25, -0.4, 0.4),
    (-2.5, 0.0, -0.35, 0.4),
)


def build_synthetic_crater(noise_std: float | None = None,
                           params: CraterParams = CraterParams()) -> SurfaceGrid:
    """
    Stand-in for the lunar crater swath on ``[-3, 3]^2`` with step 0.25.

    The elevation is a paraboloid bowl of the given depth inside ``radius``
    with a Gaussian rim. The target is a smooth sum of Gaussian features
    (an enriched floor plus scattered wells and bumps), rescaled so its
    range is exactly ``params.target_range``.
    """
    ax = _axis(-3.0, 3.0, 0.25)
    x1, x2 = np.meshgrid(ax, ax)
    r = np.hypot(x1, x2)
    bowl = np.where(r < params.radius, params.depth * ((r / params.radius) ** 2 - 1), 0.0)
    rim = params.rim_height * np.exp(-(((r - params.radius) / params.rim_width) ** 2))
    elevation = (bowl + rim).ravel()

    f = np.zeros_like(x1)
    for cx, cy, amp, width in _CRATER_FEATURES:
        f += amp * np.exp(-((x1 - cx) ** 2 + (x2 - cy) ** 2) / (2 * width ** 2))
    f = f.ravel()
    target = params.target_range * (f - f.min()) / (f.max() - f.min())
    return SurfaceGrid("lunar-crater", "lunar", ax, ax, 0.25, elevation, target,
                       _default_noise(noise_std, target))


def _parse_float(text, lineno, column):
    try:
        return float(text)
    except ValueError:
        raise DemParseError(
            f"line {lineno}: {column} value {text!r} is not a number") from None


def load_dem(path, noise_std: float | None = None) -> SurfaceGrid:
    """
    Read a gridded DEM with a co-registered target field.

    The file is comma-separated text with header ``x1,x2,elevation,target``
    and one row per grid point, x1 varying fastest. An empty target field
    marks a gap; gaps are filled from the nearest non-gap point in the plane
    (lowest index on ties) and recorded in ``gap_mask``.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DemParseError(f"{path}: empty file")
    if [c.strip() for c in rows[0]] != DEM_HEADER:
        raise DemParseError(f"{path}: line 1: expected header {','.join(DEM_HEADER)}")
    body = rows[1:]
    if not body:
        raise DemParseError(f"{path}: no data rows")

    n = len(body)
    data = np.empty((n, 4))
    gaps = np.zeros(n, dtype=bool)
    for k, row in enumerate(body):
        lineno = k + 2
        if len(row) != 4:
            raise DemParseError(
                f"{path}: line {lineno}: expected 4 fields, found {len(row)}")
        for j, col in enumerate(DEM_HEADER[:3]):
            data[k, j] = _parse_float(row[j], lineno, col)
        if row[3].strip() == "":
            gaps[k] = True
            data[k, 3] = np.nan
        else:
            data[k, 3] = _parse_float(row[3], lineno, "target")

    axis1 = np.unique(data[:, 0])
    axis2 = np.unique(data[:, 1])
    n1, n2 = len(axis1), len(axis2)
    if n1 * n2 != n:
        raise DemParseError(
            f"{path}: {n} rows do not cover a {n1} x {n2} rectangular grid")
    expect1 = np.tile(axis1, n2)
    expect2 = np.repeat(axis2, n1)
    bad = np.flatnonzero((data[:, 0] != expect1) | (data[:, 1] != expect2))
    if bad.size:
        raise DemParseError(
            f"{path}: line {bad[0] + 2}: rows must be ordered by x2 then x1 "
            "over a rectangular grid")
    if n1 < 2 or n2 < 2:
        raise DemParseError(f"{path}: grid must be at least 2 x 2")
    step = float(axis1[1] - axis1[0])
    try:
        _check_axis(axis1, step)
        _check_axis(axis2, step)
    except ValueError as err:
        raise DemParseError(f"{path}: non-uniform grid ({err})") from None
    if gaps.all():
        raise DemParseError(f"{path}: every target value is missing")

    target = data[:, 3].copy()
    if gaps.any():
        pos = data[:, :2]
        have = np.flatnonzero(~gaps)
        for k in np.flatnonzero(gaps):
            d2 = np.sum((pos[have] - pos[k]) ** 2, axis=1)
            target[k] = target[have[np.argmin(d2)]]
    gaps.setflags(write=False)
    return SurfaceGrid("lunar-dem", "lunar", axis1, axis2, step, data[:, 2], target,
                       _default_noise(noise_std, target), gaps)


def write_dem(surface: SurfaceGrid, path) -> None:
    """Serialize ``surface`` in the DEM text format; gaps are written empty."""
    gaps = surface.gap_mask if surface.gap_mask is not None else np.zeros(
        surface.n_points, dtype=bool)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(DEM_HEADER) + "\n")
        for k, (x1, x2) in enumerate(surface.positions):
            t = "" if gaps[k] else repr(float(surface.target[k]))
            fh.write(f"{float(x1)!r},{float(x2)!r},{float(surface.elevation[k])!r},{t}\n")


@dataclass(frozen=True)
class SurfaceKind:
    """Which environment to build: parabola, townsend, crater, or a DEM file."""
    kind: str
    dem_path: Path | None = None

    KINDS = ("parabola", "townsend", "crater", "dem")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if (self.kind == "dem") != (self.dem_path is not None):
            raise ValueError("a DEM path is required exactly for kind 'dem'")

    @property
    def family(self) -> str:
        return {"crater": "lunar", "dem": "lunar"}.get(self.kind, self.kind)


def build_surface(kind: SurfaceKind, noise_std: float | None = None,
                  townsend_classic: bool = False) -> SurfaceGrid:
    if kind.kind == "parabola":
        return build_parabola(noise_std)
    if kind.kind == "townsend":
        return build_townsend(noise_std, classic=townsend_classic)
    if kind.kind == "crater":
        return build_synthetic_crater(noise_std)
    return load_dem(kind.dem_path, noise_std)


def measure(surface: SurfaceGrid, index: int, rng: np.random.Generator) -> float:
    """Noisy reading of the target at ``index``; always consumes one normal draw."""
    return float(surface.target[index] + surface.noise_std * rng.standard_normal())


def count_local_extrema(surface) -> tuple[int, int]:
    """
    Interior points strictly below (minima) or above (maxima) all 8
    neighbours, on a surface's target or on a bare 2-D field.
    """
    if isinstance(surface, SurfaceGrid):
        z = surface.target.reshape(surface.shape)
    else:
        z = np.asarray(surface, dtype=float)
    if min(z.shape) < 3:
        raise ValueError("need at least a 3 x 3 grid")
    c = z[1:-1, 1:-1]
    lo = np.ones_like(c, dtype=bool)
    hi = np.ones_like(c, dtype=bool)
    n2, n1 = z.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            nb = z[1 + di:n2 - 1 + di, 1 + dj:n1 - 1 + dj]
            lo &= c < nb
            hi &= c > nb
    return int(lo.sum()), int(hi.sum())


def traversal_distance(surface: SurfaceGrid, a: int, b: int) -> float:
    """Straight-line 3-D distance between grid points ``a`` and ``b``."""
    pa = surface.positions[a]
    pb = surface.positions[b]
    dz = surface.elevation[a] - surface.elevation[b]
    return math.sqrt((pa[0] - pb[0]) ** 2 + (pa[1] - pb[1]) ** 2 + dz ** 2)
