"""Rearrangements of cell functions on equal-measure cells.

Because every cell has the same measure, the rearrangement class of a weight
is the set of permutations of its value multiset, and all the classical
objects (distribution function, decreasing rearrangement, majorization) are
computed exactly by sorting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid

__all__ = [
    "WeightClass",
    "StepFunction",
    "distribution_function",
    "decreasing_rearrangement",
    "equimeasurable",
    "majorizes",
    "linear_maximize",
    "linear_minimize",
    "steiner_order",
    "steiner_symmetrize",
    "symmetry_error",
    "parse_weights",
]


@dataclass(frozen=True)
class WeightClass:
    """Value multiset of a weight, in canonical (strictly decreasing) form."""

    values: tuple
    counts: tuple
    cell_measure: float = 1.0

    def __post_init__(self):
        if len(self.values) != len(self.counts) or not self.values:
            raise ValueError("values and counts must be non-empty and of equal length")
        if any(c < 1 for c in self.counts):
            raise ValueError("every count must be at least 1")
        if any(a <= b for a, b in zip(self.values[:-1], self.values[1:])):
            raise ValueError("values must be strictly decreasing")

    @classmethod
    def from_values(cls, rho, cell_measure: float = 1.0) -> "WeightClass":
        vals, counts = np.unique(np.asarray(rho, dtype=float), return_counts=True)
        return cls(
            tuple(float(v) for v in vals[::-1]),
            tuple(int(c) for c in counts[::-1]),
            cell_measure,
        )

    @classmethod
    def from_fractions(cls, pairs, total_cells: int, cell_measure: float = 1.0) -> "WeightClass":
        """Build from ``(value, fraction)`` pairs by largest-remainder apportionment.

        Values that receive zero cells are dropped; equal values are merged.
        """
        pairs = [(float(v), float(f)) for v, f in pairs]
        fsum = sum(f for _, f in pairs)
        if abs(fsum - 1.0) > 1e-9:
            raise ValueError(f"fractions sum {fsum:g}, expected 1")
        if any(f < 0 for _, f in pairs):
            raise ValueError("fractions must be nonnegative")
        quotas = [f * total_cells for _, f in pairs]
        counts = [int(np.floor(q)) for q in quotas]
        left = total_cells - sum(counts)
        # stable: earlier pairs win ties in the remainder
        order = sorted(range(len(pairs)), key=lambda i: -(quotas[i] - counts[i]))
        for i in order[:left]:
            counts[i] += 1
        merged: dict = {}
        for (v, _), c in zip(pairs, counts):
            merged[v] = merged.get(v, 0) + c
        items = sorted(((v, c) for v, c in merged.items() if c > 0), reverse=True)
        return cls(tuple(v for v, _ in items), tuple(c for _, c in items), cell_measure)

    @property
    def total_cells(self) -> int:
        return sum(self.counts)

    @property
    def sorted_values(self) -> np.ndarray:
        """All cell values, descending."""
        return np.repeat(np.asarray(self.values, dtype=float), self.counts)

    @property
    def mass(self) -> float:
        """Integral of any member over the domain."""
        return float(np.dot(self.values, self.counts)) * self.cell_measure

    @property
    def mean(self) -> float:
        return float(np.dot(self.values, self.counts)) / self.total_cells

    def negated(self) -> "WeightClass":
        return WeightClass(
            tuple(-v for v in self.values[::-1]), self.counts[::-1], self.cell_measure
        )

    def contains(self, rho) -> bool:
        rho = np.asarray(rho, dtype=float)
        return rho.shape == (self.total_cells,) and np.array_equal(
            np.sort(rho)[::-1], self.sorted_values
        )

    def describe(self) -> str:
        n = self.total_cells
        return "w:" + ",".join(f"{v:g}@{c}/{n}" for v, c in zip(self.values, self.counts))


def parse_weights(spec: str, total_cells: int, cell_measure: float = 1.0) -> WeightClass:
    """Parse ``w:v1@f1,v2@f2,...`` into a :class:`WeightClass`."""
    kind, _, rest = spec.partition(":")
    if kind != "w" or not rest:
        raise ValueError(f"bad weight spec {spec!r}")
    pairs = []
    for token in rest.split(","):
        v, sep, f = token.partition("@")
        if not sep:
            raise ValueError(f"bad weight token {token!r} in {spec!r}")
        try:
            pairs.append((float(v), float(f)))
        except ValueError:
            raise ValueError(f"bad weight token {token!r} in {spec!r}") from None
    return WeightClass.from_fractions(pairs, total_cells, cell_measure)


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous non-increasing step function on ``(0, breakpoints[-1])``."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t >= self.breakpoints[-1])):
            raise ValueError("argument outside (0, |Omega|)")
        k = np.searchsorted(self.breakpoints, t, side="right") - 1
        return self.values[k]

    def integral(self, upto: float | None = None) -> float:
        """Integral from 0 to ``upto`` (default: the whole interval)."""
        widths = np.diff(self.breakpoints)
        if upto is None:
            return float(np.dot(widths, self.values))
        cum = np.clip(upto - self.breakpoints[:-1], 0.0, widths)
        return float(np.dot(cum, self.values))


def distribution_function(f, t: float, cell_measure: float = 1.0) -> float:
    """Measure of ``{f > t}``."""
    return cell_measure * int(np.count_nonzero(np.asarray(f) > t))


def decreasing_rearrangement(f, cell_measure: float = 1.0) -> StepFunction:
    f = np.asarray(f, dtype=float)
    values = np.sort(f)[::-1]
    breakpoints = cell_measure * np.arange(len(f) + 1, dtype=float)
    return StepFunction(breakpoints, values)


def _same_shape(f, g):
    f, g = np.asarray(f, dtype=float), np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"grid mismatch: shapes {f.shape} and {g.shape}")
    return f, g


def equimeasurable(f, g) -> bool:
    f, g = _same_shape(f, g)
    return bool(np.array_equal(np.sort(f), np.sort(g)))


def majorizes(f, g, atol: float = 1e-12) -> bool:
    """True when ``g`` is majorized by ``f`` (``g ≺ f``)."""
    f, g = _same_shape(f, g)
    pf = np.cumsum(np.sort(f)[::-1])
    pg = np.cumsum(np.sort(g)[::-1])
    return bool(np.all(pg <= pf + atol) and abs(pg[-1] - pf[-1]) <= atol)


def _check_class(wclass: WeightClass, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or len(u) != wclass.total_cells:
        raise ValueError(
            f"size mismatch: class has {wclass.total_cells} cells, function has {u.size}"
        )
    return u


def linear_maximize(wclass: WeightClass, u) -> np.ndarray:
    """Member of the class maximizing ``sum(rho * u)``.

    Largest values go to the largest ``u``; among equal ``u`` the lower cell
    index receives the smaller value.
    """
    u = _check_class(wclass, u)
    order = np.argsort(u, kind="stable")
    rho = np.empty_like(u)
    rho[order] = wclass.sorted_values[::-1]
    return rho


def linear_minimize(wclass: WeightClass, u) -> np.ndarray:
    """Member of the class minimizing ``sum(rho * u)``.

    Largest values go to the smallest ``u``; among equal ``u`` the lower cell
    index receives the larger value.
    """
    u = _check_class(wclass, u)
    order = np.argsort(u, kind="stable")
    rho = np.empty_like(u)
    rho[order] = wclass.sorted_values
    return rho


def _require_axis(grid: Grid):
    if grid.steiner_center is None:
        raise ValueError("grid has no Steiner axis")


def steiner_order(grid: Grid) -> list:
    """Per-line placement order of cell positions for Steiner symmetrization.

    Returns one integer array per line parallel to axis 0; entry ``k`` is the
    active-cell index that receives the ``k``-th largest value of the line.
    Positions are ordered by distance to the reflection center, ties going to
    the positive side.
    """
    _require_axis(grid)
    idx = grid.lattice_index
    # twice the signed offset from the center, in cells: an exact integer
    shift = 2.0 * (grid.steiner_center - grid.origin[0]) / grid.h - 1.0
    off = (2 * idx[:, 0] - int(round(shift))).astype(np.int64)
    line = idx[:, 1] if grid.dim == 2 else np.zeros(len(idx), dtype=np.int64)
    key = np.lexsort((-np.sign(off), np.abs(off), line))
    bounds = np.flatnonzero(np.diff(line[key])) + 1
    return np.split(key, bounds)


def steiner_symmetrize(grid: Grid, u) -> np.ndarray:
    """Steiner symmetrization with respect to the hyperplane through the center."""
    u = grid.check(u)
    out = np.empty_like(u)
    for cells in steiner_order(grid):
        out[cells] = np.sort(u[cells])[::-1]
    return out


def symmetry_error(grid: Grid, u) -> float:
    """Max-norm distance between ``u`` and its Steiner symmetrization."""
    u = grid.check(u)
    return float(np.max(np.abs(u - steiner_symmetrize(grid, u))))
