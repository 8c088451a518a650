"""Uniform-cell grids with an active-cell mask.

All active cells share the same measure ``h**dim``, so a function on the
domain is simply a vector of cell values ordered like ``np.flatnonzero(mask)``.
The Steiner axis is always the first coordinate (``x_1``); lines of the
symmetrization run parallel to it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "build_interval",
    "build_rectangle",
    "build_disk",
    "parse_domain",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Lattice of square cells of side ``h`` with an active mask.

    Parameters
    ----------
    h : float
        Cell width, identical on every axis.
    origin : tuple of float
        Coordinates of the lower corner of lattice cell ``(0, ..., 0)``.
    mask : ndarray of bool
        ``mask[i0, i1]`` is True when the cell lies in the domain. Its shape
        gives the number of lattice cells per axis.
    steiner_center : float or None
        Reflection center on axis 0. When set the mask must be invariant
        under ``x_1 -> 2 c - x_1``.
    """

    h: float
    origin: tuple
    mask: np.ndarray
    steiner_center: float | None = None
    kind: str = "mask"
    _index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        if mask.ndim not in (1, 2):
            raise ValueError(f"only 1D and 2D grids are supported, got ndim={mask.ndim}")
        if not self.h > 0:
            raise ValueError(f"cell width must be positive, got {self.h}")
        if len(self.origin) != mask.ndim:
            raise ValueError("origin length does not match mask dimension")
        if not mask.any():
            raise ValueError("grid has no active cells")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        index = np.argwhere(mask)
        index.setflags(write=False)
        object.__setattr__(self, "_index", index)
        if self.steiner_center is not None:
            if not np.array_equal(mask, self.reflect_mask()):
                raise ValueError("mask is not symmetric about the Steiner center")

    @property
    def dim(self) -> int:
        return self.mask.ndim

    @property
    def shape(self) -> tuple:
        return self.mask.shape

    @property
    def n_active(self) -> int:
        return len(self._index)

    @property
    def cell_measure(self) -> float:
        return self.h**self.dim

    @property
    def measure(self) -> float:
        """Measure of the domain, ``n_active * h**dim``."""
        return self.n_active * self.cell_measure

    @property
    def lattice_index(self) -> np.ndarray:
        """Integer lattice index of every active cell, shape ``(n_active, dim)``."""
        return self._index

    @property
    def centers(self) -> np.ndarray:
        """Cell-center coordinates of the active cells, shape ``(n_active, dim)``."""
        return np.asarray(self.origin) + (self._index + 0.5) * self.h

    @property
    def centroid(self) -> np.ndarray:
        return self.centers.mean(axis=0)

    def locate(self, points) -> np.ndarray:
        """Return the lattice index of the cell containing each point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.floor((points - np.asarray(self.origin)) / self.h).astype(int)

    def reflect_mask(self) -> np.ndarray:
        """Mask reflected about the Steiner center on axis 0."""
        if self.steiner_center is None:
            raise ValueError("grid has no Steiner axis")
        n0 = self.shape[0]
        # cell i0 has center origin + (i0 + 1/2) h; its mirror image has index
        # 2 (c - origin) / h - 1 - i0, which must be an integer
        shift = 2.0 * (self.steiner_center - self.origin[0]) / self.h - 1.0
        k = int(round(shift))
        if abs(shift - k) > 1e-9:
            raise ValueError("Steiner center is not on a cell center or cell face")
        src = k - np.arange(n0)
        out = np.zeros_like(self.mask)
        valid = (src >= 0) & (src < n0)
        out[valid] = self.mask[src[valid]]
        return out

    def to_array(self, values, fill=0.0) -> np.ndarray:
        """Scatter active-cell values onto the full lattice."""
        values = self.check(values)
        out = np.full(self.shape, fill, dtype=float)
        out[self.mask] = values
        return out

    def check(self, values) -> np.ndarray:
        """Validate that ``values`` is a cell function on this grid."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_active,):
            raise ValueError(
                f"grid mismatch: expected {self.n_active} cell values, got shape {values.shape}"
            )
        return values

    def with_mask(self, mask, steiner_center=None) -> "Grid":
        """Same lattice with a different active mask."""
        return Grid(self.h, self.origin, mask, steiner_center, kind="mask")

    def describe(self) -> str:
        return f"{self.dim}D grid, lattice {self.shape}, h={self.h:g}, {self.n_active} active cells"


def build_interval(a: float, b: float, n: int) -> Grid:
    """Interval ``(a, b)`` split into ``n`` equal cells."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"cell count must be a positive integer, got {n!r}")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    h = (b - a) / n
    return Grid(h, (a,), np.ones(n, dtype=bool), 0.5 * (a + b), "interval")


def build_rectangle(widths, n) -> Grid:
    """Rectangle ``[-wx/2, wx/2] x [-wy/2, wy/2]`` with square cells.

    Raises ``ValueError`` if ``wx/nx != wy/ny``.
    """
    wx, wy = (float(w) for w in widths)
    nx, ny = (int(k) for k in n)
    if wx <= 0 or wy <= 0 or nx < 1 or ny < 1:
        raise ValueError("widths and cell counts must be positive")
    hx, hy = wx / nx, wy / ny
    if not np.isclose(hx, hy, rtol=1e-12, atol=0.0):
        raise ValueError(f"anisotropic cells {hx:g} x {hy:g}; cell widths must agree")
    return Grid(hx, (-wx / 2, -wy / 2), np.ones((nx, ny), dtype=bool), 0.0, "rect")


def build_disk(radius: float, n: int) -> Grid:
    """Disk of given radius centered at the origin.

    The bounding box ``[-r, r]^2`` is split into ``n x n`` cells; a cell is
    active when its center lies strictly inside the disk.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ValueError(f"need n >= 2 cells per axis, got {n!r}")
    h = 2.0 * radius / n
    # squared center distance in units of h/2 is exact in integers
    c = 2 * np.arange(n) - (n - 1)
    r2 = c[:, None] ** 2 + c[None, :] ** 2
    mask = r2 < n * n
    return Grid(h, (-radius, -radius), mask, 0.0, "disk")


def parse_domain(spec: str) -> Grid:
    """Parse ``interval:a,b,n`` | ``rect:wx,wy,nx,ny`` | ``disk:r,n``."""
    kind, _, rest = spec.partition(":")
    parts = [p.strip() for p in rest.split(",")] if rest else []
    try:
        if kind == "interval" and len(parts) == 3:
            return build_interval(float(parts[0]), float(parts[1]), int(parts[2]))
        if kind == "rect" and len(parts) == 4:
            return build_rectangle(
                (float(parts[0]), float(parts[1])), (int(parts[2]), int(parts[3]))
            )
        if kind == "disk" and len(parts) == 2:
            return build_disk(float(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise ValueError(f"bad domain spec {spec!r}: {exc}") from None
    raise ValueError(f"bad domain spec {spec!r}")
