"""Optimization of the principal eigenvalue over a rearrangement class.

Minimizing ``lambda_1`` over the class is maximizing the convex functional
``mu_1~``. Its Gateaux gradient at ``rho`` is ``u_rho^2``, so the ascent step
replaces ``rho`` by the class member that maximizes the linear functional
``sum(rho u_rho^2)``; by convexity ``mu_1~`` never decreases along the way.
Maximizing ``lambda_1`` is a convex minimization over the convex hull of the
class and is handled by Frank-Wolfe.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigensolver import EigenResult, solve_mu1
from .grid import Grid
from .nonlocal_form import StiffnessOperator
from .rearrangement import (
    WeightClass,
    linear_maximize,
    linear_minimize,
    symmetry_error,
)

__all__ = [
    "InfeasibleProblemError",
    "NotApplicableError",
    "TraceRecord",
    "OptimizerTrace",
    "centered_layout",
    "minimize_lambda1",
    "minimize_lambda1_multistart",
    "maximize_lambda_neg1",
    "verify_characterization",
    "check_upper_bound",
    "maximize_lambda1_fw",
    "SteinerReport",
    "steiner_report",
    "radial_defect",
]

TRACE_COLUMNS = ("iter", "mu1", "lambda1", "lin_obj", "cells_changed", "rho_sym_err", "u_sym_err")


class InfeasibleProblemError(ValueError):
    pass


class NotApplicableError(ValueError):
    pass


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    mu1: float
    lambda1: float | None
    lin_obj: float
    cells_changed: int
    rho_sym_err: float
    u_sym_err: float
    gap: float = np.nan

    def row(self) -> list:
        lam = "" if self.lambda1 is None else f"{self.lambda1:.17g}"
        return [
            self.iteration,
            f"{self.mu1:.17g}",
            lam,
            f"{self.lin_obj:.17g}",
            self.cells_changed,
            f"{self.rho_sym_err:.17g}",
            f"{self.u_sym_err:.17g}",
        ]


@dataclass
class OptimizerTrace:
    records: list = field(default_factory=list)
    status: str = "running"

    @property
    def mu1(self) -> np.ndarray:
        return np.array([r.mu1 for r in self.records])

    def write_csv(self, path_or_file) -> None:
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for rec in self.records:
            w.writerow(rec.row())


def _sym_err(grid: Grid, f) -> float:
    return symmetry_error(grid, f) if grid.steiner_center is not None else np.nan


def _record(grid, k, res, rho, changed, gap=np.nan) -> TraceRecord:
    m = grid.cell_measure
    lin = float(np.dot(rho, res.eigenfunction**2)) * m
    return TraceRecord(
        k, res.mu, res.eigenvalue, lin, changed, _sym_err(grid, rho), _sym_err(grid, res.eigenfunction), gap
    )


def centered_layout(grid: Grid, wclass: WeightClass) -> np.ndarray:
    """Class values placed in descending order from the mask centroid outward."""
    if wclass.total_cells != grid.n_active:
        raise ValueError("class size does not match the number of active cells")
    d2 = np.sum((grid.centers - grid.centroid) ** 2, axis=1)
    # round away floating noise so cells at the same distance tie exactly
    d2 = np.round(d2 / grid.h**2, 9)
    order = np.lexsort((np.arange(len(d2)), d2))
    rho = np.empty(grid.n_active)
    rho[order] = wclass.sorted_values
    return rho


def minimize_lambda1(
    op: StiffnessOperator,
    wclass: WeightClass,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    initial=None,
) -> tuple:
    """Minimize ``lambda_1`` over the rearrangement class.

    Iterates ``rho <- linear_maximize(class, u_rho^2)`` from the centered
    layout (or ``initial``) until the weight is a cellwise fixed point
    (status ``fixed-point``) or ``mu_1~`` grows by less than ``tol * mu_1~``
    (status ``stalled``). Returns ``(rho, EigenResult, OptimizerTrace)``.
    """
    grid = op.grid
    if wclass.values[0] <= 0:
        raise InfeasibleProblemError("class has no positive value: lambda_1 is undefined")
    rho = centered_layout(grid, wclass) if initial is None else grid.check(initial).copy()
    if not wclass.contains(rho):
        raise ValueError("initial weight is not a member of the class")
    trace = OptimizerTrace()
    res = solve_mu1(op, rho, tol)
    trace.records.append(_record(grid, 0, res, rho, grid.n_active))
    if len(wclass.values) == 1:
        trace.status = "degenerate-class"
        return rho, res, trace
    for k in range(1, max_iter + 1):
        new = linear_maximize(wclass, res.eigenfunction**2)
        changed = int(np.count_nonzero(new != rho))
        if changed == 0:
            trace.status = "fixed-point"
            return rho, res, trace
        new_res = solve_mu1(op, new, tol)
        trace.records.append(_record(grid, k, new_res, new, changed))
        gain = new_res.mu - res.mu
        rho, res = new, new_res
        if gain < tol * abs(res.mu):
            trace.status = "stalled"
            return rho, res, trace
    trace.status = "iteration-cap"
    return rho, res, trace


def minimize_lambda1_multistart(
    op: StiffnessOperator,
    wclass: WeightClass,
    restarts: int = 1,
    seed: int = 42,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    workers: int | None = None,
) -> list:
    """Run the fixed-point iteration from the centered layout and ``restarts - 1``
    random permutations. Returns all runs sorted by ``lambda_1`` (best first)."""
    rng = np.random.default_rng(seed)
    starts = [None] + [rng.permutation(wclass.sorted_values) for _ in range(restarts - 1)]

    def run(start):
        return minimize_lambda1(op, wclass, tol, max_iter, initial=start)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        runs = list(pool.map(run, starts))
    return sorted(runs, key=lambda r: r[1].eigenvalue)


def maximize_lambda_neg1(op, wclass: WeightClass, tol: float = 1e-10, max_iter: int = 10_000):
    """Maximize ``lambda_-1`` over the class via ``-min lambda_1`` over the negated class.

    Returns ``(rho, lambda_-1, trace)``.
    """
    if wclass.values[-1] >= 0:
        raise InfeasibleProblemError("class has no negative value: lambda_-1 is undefined")
    rho, res, trace = minimize_lambda1(op, wclass.negated(), tol, max_iter)
    return -rho, -res.eigenvalue, trace


def verify_characterization(rho, u, rtol: float = 1e-10) -> bool:
    """True when ``rho`` is a non-decreasing function of ``u``.

    Values of ``u`` closer than ``rtol * max|u|`` count as ties, and ties may
    carry any weights.
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    if rho.shape != u.shape:
        raise ValueError("grid mismatch")
    order = np.argsort(u, kind="stable")
    us, rs = u[order], rho[order]
    scale = np.max(np.abs(u)) if u.size else 0.0
    new_group = np.concatenate([[True], np.diff(us) > rtol * scale])
    gid = np.cumsum(new_group) - 1
    gmax = np.full(gid[-1] + 1, -np.inf)
    gmin = np.full(gid[-1] + 1, np.inf)
    np.maximum.at(gmax, gid, rs)
    np.minimum.at(gmin, gid, rs)
    prior = np.maximum.accumulate(gmax)
    return bool(np.all(prior[:-1] <= gmin[1:]))


def check_upper_bound(op: StiffnessOperator, wclass: WeightClass, result: EigenResult, tol: float = 1e-10):
    """Compare ``lambda_1`` of a minimizer with ``lambda_1(1) |Omega| / int rho_0``.

    Returns ``(bound, satisfied)``.
    """
    mass = wclass.mass
    if mass <= 0:
        raise NotApplicableError(f"class mass {mass:g} is not positive; the bound does not apply")
    lam_unit = solve_mu1(op, np.ones(op.n), tol).eigenvalue
    bound = lam_unit * op.grid.measure / mass
    return bound, bool(result.eigenvalue <= bound + 1e-9)


def maximize_lambda1_fw(
    op: StiffnessOperator,
    wclass: WeightClass,
    tol: float = 1e-6,
    max_iter: int = 10_000,
    keep_iterates: bool = False,
):
    """Maximize ``lambda_1`` over the convex hull of the class by Frank-Wolfe.

    Direction ``sigma_k = linear_minimize(class, u^2)``, step ``2 / (k + 2)``;
    stops when the gap ``sum((rho_k - sigma_k) u^2) m <= tol``. Returns
    ``(rho, EigenResult, OptimizerTrace)``; with ``keep_iterates`` the trace
    also carries an ``iterates`` list.
    """
    grid = op.grid
    if wclass.mass <= 0:
        raise InfeasibleProblemError(
            "class mass is not positive: sup of lambda_1 over the class is +infinity"
        )
    m = grid.cell_measure
    rho = centered_layout(grid, wclass)
    trace = OptimizerTrace()
    iterates = [rho.copy()] if keep_iterates else None
    prev = rho
    for k in range(max_iter + 1):
        res = solve_mu1(op, rho)
        w = res.eigenfunction**2
        sigma = linear_minimize(wclass, w)
        gap = float(np.dot(rho - sigma, w)) * m
        changed = int(np.count_nonzero(rho != prev)) if k else grid.n_active
        trace.records.append(_record(grid, k, res, rho, changed, gap))
        if gap <= tol:
            trace.status = "converged"
            break
        if k == max_iter:
            trace.status = "iteration-cap"
            break
        prev = rho
        rho = rho + (2.0 / (k + 2.0)) * (sigma - rho)
        if keep_iterates:
            iterates.append(rho.copy())
    if keep_iterates:
        trace.iterates = iterates
    return rho, res, trace


@dataclass(frozen=True)
class SteinerReport:
    rho_symmetry_error: float
    u_symmetry_error: float
    radial_defect: float | None


def radial_defect(grid: Grid, rho) -> float:
    """``max (rho_j - rho_i)_+`` over cell pairs with ``|x_i| < |x_j|``."""
    rho = grid.check(rho)
    # squared radius in units of (h/2)^2 is an exact integer on centered grids
    r2 = np.round(np.sum((2.0 * grid.centers / grid.h) ** 2, axis=1)).astype(np.int64)
    shells, inv = np.unique(r2, return_inverse=True)
    smin = np.full(len(shells), np.inf)
    smax = np.full(len(shells), -np.inf)
    np.minimum.at(smin, inv, rho)
    np.maximum.at(smax, inv, rho)
    inner_min = np.minimum.accumulate(smin)
    if len(shells) < 2:
        return 0.0
    return float(max(0.0, np.max(smax[1:] - inner_min[:-1])))


def steiner_report(grid: Grid, rho, u) -> SteinerReport:
    if grid.steiner_center is None:
        raise ValueError("grid has no Steiner axis")
    radial = None
    if grid.kind == "disk":
        radial = radial_defect(grid, rho)
    return SteinerReport(symmetry_error(grid, rho), symmetry_error(grid, u), radial)
