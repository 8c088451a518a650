"""Discrete H^s_0 inner product on a cell grid.

The squared norm of a cell function ``u`` (extended by zero outside the
domain) is approximated by the lattice form

    a(u, u) = 1/2 sum_{i != j in Z^N} W(i - j) (u_i - u_j)^2,

with translation-invariant weights ``W(k) = 2 h^(N - 2s) c(k)``. The unit-cell
coefficients ``c(k)`` are

* far offsets (``|k| > 2``): midpoint rule, ``c(k) = |k|^-(N + 2s)``;
* near offsets (``|k| <= 2``): a second-order Taylor correction on the ball
  of radius ``h`` around the collocation point plus exact kernel integrals
  over the rest of the near cells (1D uses piecewise-linear interpolation
  on ``[h, 2h]`` with closed-form moments, 2D uses polar quadrature).

Restricted to the domain this gives ``A = 2 h^(N-2s) (T I - C)`` where ``T``
is the full lattice sum of ``c`` and ``C`` the interaction block. Pairs with
one cell outside the domain form the exterior term
``E_i = 2 h^(N-2s) sum_{j not in domain} c(i - j)``. The normalization
constant of the fractional Laplacian is taken to be 1.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy import integrate, linalg, special

from .grid import Grid

__all__ = [
    "KernelParams",
    "StiffnessOperator",
    "assemble",
    "unit_weights",
    "lattice_total",
    "dump_matrix",
    "load_matrix",
]

# center distance (in cells) up to which pairs use the near-field scheme
NEAR_RADIUS = 2.0
# half-width of the lattice box summed explicitly for the 2D far-field total
_BOX_2D = 600


@dataclass(frozen=True)
class KernelParams:
    s: float
    dim: int

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise ValueError(f"fractional order s must lie in (0, 1), got {self.s}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")

    @property
    def normalization(self) -> float:
        return 1.0


def _int_pow(a: float, b: float, p: float) -> float:
    """Integral of r**p over [a, b] for 0 < a < b."""
    e = p + 1.0
    if abs(e) < 1e-12:
        return math.log(b / a)
    # a**e * expm1(e log(b/a)) / e keeps precision near e = 0
    return a**e * math.expm1(e * math.log(b / a)) / e


@lru_cache(maxsize=None)
def _near_1d(s: float) -> tuple:
    p = -1.0 - 2.0 * s
    taylor = 1.0 / (2.0 - 2.0 * s)
    m0 = _int_pow(1.0, 2.0, p)
    m1 = _int_pow(1.0, 2.0, p + 1.0)
    # linear interpolation between nodes 1 and 2 on [1, 2]
    c1 = taylor + (2.0 * m0 - m1)
    c2 = (m1 - m0) + _int_pow(2.0, 2.5, p)
    return c1, c2


def _cell_outside_unit_disk(k1: int, k2: int, s: float) -> float:
    """Integral of |z|^-(2+2s) over the unit cell centered at (k1, k2), |z| > 1."""
    x0, x1 = k1 - 0.5, k1 + 0.5
    y0, y1 = k2 - 0.5, k2 + 0.5
    corners = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)]
    angles = [math.atan2(y, x) for x, y in corners]
    lo, hi = min(angles), max(angles)
    kinks = []
    for xe in (x0, x1):
        if abs(xe) < 1.0:
            for y in (math.sqrt(1 - xe * xe), -math.sqrt(1 - xe * xe)):
                if y0 <= y <= y1:
                    kinks.append(math.atan2(y, xe))
    for ye in (y0, y1):
        if abs(ye) < 1.0:
            for x in (math.sqrt(1 - ye * ye), -math.sqrt(1 - ye * ye)):
                if x0 <= x <= x1:
                    kinks.append(math.atan2(ye, x))
    kinks = sorted(t for t in kinks if lo < t < hi)

    def radial(theta):
        c, sn = math.cos(theta), math.sin(theta)
        t_in, t_out = 0.0, math.inf
        for d, a, b in ((c, x0, x1), (sn, y0, y1)):
            if abs(d) < 1e-300:
                if not a <= 0.0 <= b:
                    return 0.0
                continue
            ta, tb = sorted((a / d, b / d))
            t_in, t_out = max(t_in, ta), min(t_out, tb)
        t_in = max(t_in, 1.0)
        if t_out <= t_in:
            return 0.0
        return _int_pow(t_in, t_out, -1.0 - 2.0 * s)

    edges = [lo, *kinks, hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(radial, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
    return total


@lru_cache(maxsize=None)
def _near_2d(s: float) -> dict:
    taylor = math.pi / (4.0 * (1.0 - s))
    base = {
        (1, 0): _cell_outside_unit_disk(1, 0, s) + taylor,
        (1, 1): _cell_outside_unit_disk(1, 1, s),
        (2, 0): _cell_outside_unit_disk(2, 0, s),
    }
    out = {}
    for (a, b), w in base.items():
        for p, q in ((a, b), (b, a)):
            for sp in (1, -1):
                for sq in (1, -1):
                    out[(sp * p, sq * q)] = w
    return out


def unit_weights(offsets, s: float) -> np.ndarray:
    """Unit-cell coefficients ``c(k)`` for integer lattice offsets.

    ``offsets`` has shape ``(..., dim)``. The zero offset gets weight 0.
    """
    offsets = np.asarray(offsets)
    dim = offsets.shape[-1]
    r2 = np.sum(offsets.astype(float) ** 2, axis=-1)
    with np.errstate(divide="ignore"):
        w = np.where(r2 > 0, r2 ** (-(dim + 2.0 * s) / 2.0), 0.0)
    near = (r2 > 0) & (r2 <= NEAR_RADIUS**2)
    if dim == 1:
        c1, c2 = _near_1d(s)
        w = np.where(near & (r2 == 1), c1, w)
        w = np.where(near & (r2 == 4), c2, w)
    else:
        table = _near_2d(s)
        for (p, q), val in table.items():
            hit = (offsets[..., 0] == p) & (offsets[..., 1] == q)
            w = np.where(hit, val, w)
    return w


@lru_cache(maxsize=None)
def lattice_total(s: float, dim: int) -> float:
    """Sum of ``c(k)`` over all nonzero lattice offsets."""
    if dim == 1:
        c1, c2 = _near_1d(s)
        return 2.0 * (c1 + c2 + float(special.zeta(1.0 + 2.0 * s, 3.0)))
    near = sum(_near_2d(s).values())
    m = _BOX_2D
    k = np.arange(-m, m + 1, dtype=float)
    far = 0.0
    for row in k:
        r2 = row * row + k * k
        r2 = r2[r2 > NEAR_RADIUS**2]
        far += float(np.sum(r2 ** (-(1.0 + s))))
    # outside the box, midpoint sums are replaced by the integral over the
    # complement of [-(m + 1/2), m + 1/2]^2
    a = m + 0.5
    tail, _ = integrate.quad(lambda t: (a / math.cos(t)) ** (-2.0 * s), 0.0, math.pi / 4)
    far += 8.0 * tail / (2.0 * s)
    return near + far


@dataclass(frozen=True, eq=False)
class StiffnessOperator:
    """Symmetric positive-definite matrix of the discrete H^s_0 form."""

    matrix: np.ndarray
    grid: Grid
    params: KernelParams
    exterior: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def s(self) -> float:
        return self.params.s

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor ``L`` with ``A = L L^T``."""
        L = linalg.cholesky(self.matrix, lower=True)
        L.setflags(write=False)
        return L

    def apply(self, u) -> np.ndarray:
        return self.matrix @ self.grid.check(u)

    def bilinear(self, u, v) -> float:
        return float(self.grid.check(v) @ self.apply(u))

    def norm_sq(self, u) -> float:
        u = self.grid.check(u)
        return float(u @ (self.matrix @ u))

    def interaction_weights(self) -> np.ndarray:
        """Pair weights ``W_ij`` between active cells (zero diagonal)."""
        W = -self.matrix.copy()
        np.fill_diagonal(W, 0.0)
        return W


def assemble(grid: Grid, params: KernelParams | float) -> StiffnessOperator:
    """Assemble the stiffness matrix of ``grid`` for fractional order ``s``."""
    if not isinstance(params, KernelParams):
        params = KernelParams(float(params), grid.dim)
    if params.dim != grid.dim:
        raise ValueError("kernel dimension does not match grid dimension")
    s, dim = params.s, grid.dim
    idx = grid.lattice_index
    n = len(idx)

    # weights depend only on the lattice offset: tabulate once, then gather
    span = [2 * m - 1 for m in grid.shape]
    axes = [np.arange(-(m - 1), m) for m in grid.shape]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    table = unit_weights(mesh, s)

    C = np.empty((n, n))
    block = 512
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = idx[start:stop, None, :] - idx[None, :, :]
        flat = np.zeros(diff.shape[:2], dtype=np.int64)
        for ax in range(dim):
            flat = flat * span[ax] + (diff[..., ax] + grid.shape[ax] - 1)
        C[start:stop] = table.ravel()[flat]

    total = lattice_total(s, dim)
    scale = 2.0 * grid.h ** (dim - 2.0 * s)
    A = -scale * C
    np.fill_diagonal(A, scale * total)
    A = 0.5 * (A + A.T)
    exterior = scale * (total - C.sum(axis=1))
    A.setflags(write=False)
    exterior.setflags(write=False)
    return StiffnessOperator(A, grid, params, exterior)


_HEADER = struct.Struct("<qd")


def dump_matrix(op: StiffnessOperator, path) -> None:
    """Write ``A`` as a little-endian header (int64 n, float64 s) then row-major float64."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(op.n, op.s))
        fh.write(np.ascontiguousarray(op.matrix, dtype="<f8").tobytes())


def load_matrix(path) -> tuple:
    """Read a matrix written by :func:`dump_matrix`; returns ``(A, s)``."""
    with open(path, "rb") as fh:
        n, s = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"truncated matrix file: expected {n * n} entries, got {data.size}")
    return data.reshape(n, n).copy(), s
