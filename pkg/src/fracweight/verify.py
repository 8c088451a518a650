"""Randomized checks of the inequalities the theory guarantees.

Each check returns a :class:`Check`; the CLI prints them as PASS/FAIL lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolver import gateaux_differential, solve_lambda_neg1, solve_mu1
from .nonlocal_form import StiffnessOperator
from .optimizer import (
    check_upper_bound,
    maximize_lambda_neg1,
    minimize_lambda1,
    verify_characterization,
)
from .rearrangement import (
    WeightClass,
    decreasing_rearrangement,
    linear_maximize,
    linear_minimize,
    steiner_symmetrize,
)

__all__ = ["Check", "run_suite"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool | None  # None: not applicable
    detail: str

    def line(self) -> str:
        tag = {True: "PASS", False: "FAIL", None: "SKIP"}[self.passed]
        return f"{tag} {self.name}: {self.detail}"


def _positive_member(rng, wclass):
    return rng.permutation(wclass.sorted_values)


def check_convexity(op, wclass, rng, trials=20) -> Check:
    worst = -np.inf
    for _ in range(trials):
        rho = _positive_member(rng, wclass)
        eta = rng.uniform(-1.0, 1.0, op.n)
        eta[rng.integers(op.n)] = 1.0
        t = rng.choice([0.25, 0.5, 0.75])
        mid = solve_mu1(op, t * rho + (1 - t) * eta).mu
        chord = t * solve_mu1(op, rho).mu + (1 - t) * solve_mu1(op, eta).mu
        worst = max(worst, mid - chord)
    return Check("convexity", worst <= 1e-9, f"max(mu(t r + (1-t) e) - chord) = {worst:.3e} over {trials} triples")


def check_hardy_littlewood(op, rng, trials=20) -> Check:
    grid = op.grid
    worst = -np.inf
    for _ in range(trials):
        u, v = rng.random(op.n), rng.random(op.n)
        lhs = float(u @ v)
        rhs = float(steiner_symmetrize(grid, u) @ steiner_symmetrize(grid, v))
        worst = max(worst, (lhs - rhs) / rhs)
    return Check("hardy-littlewood", worst <= 1e-12, f"max relative excess {worst:.3e} over {trials} pairs")


def check_polya_szego(op, rng, trials=20) -> Check:
    worst = -np.inf
    for _ in range(trials):
        u = rng.random(op.n)
        ratio = op.norm_sq(steiner_symmetrize(op.grid, u)) / op.norm_sq(u)
        worst = max(worst, ratio - 1.0)
    return Check("polya-szego", worst <= 1e-6, f"max(norm(u#)/norm(u) - 1) = {worst:.3e} over {trials} functions")


def check_linear_bounds(op, wclass, rng, trials=20) -> Check:
    m = op.grid.cell_measure
    rho0_star = decreasing_rearrangement(wclass.sorted_values, m)
    ok = True
    worst = 0.0
    for _ in range(trials):
        u = rng.normal(size=op.n)
        u_star = decreasing_rearrangement(u, m)
        upper = float(np.dot(rho0_star.values, u_star.values)) * m
        lower = float(np.dot(rho0_star.values[::-1], u_star.values)) * m
        rho = _positive_member(rng, wclass)
        mid = float(rho @ u) * m
        hi = float(linear_maximize(wclass, u) @ u) * m
        lo = float(linear_minimize(wclass, u) @ u) * m
        scale = max(abs(upper), abs(lower), 1.0)
        slack = 1e-12 * scale
        ok &= lower - slack <= mid <= upper + slack
        worst = max(worst, abs(hi - upper) / scale, abs(lo - lower) / scale)
    ok &= worst <= 1e-12
    return Check("linear-bounds", bool(ok), f"two-sided bound held and attained (attainment error {worst:.1e})")


def check_upper_estimate(op, wclass, result) -> Check:
    if wclass.mass <= 0:
        return Check("upper-estimate", None, "class mass is not positive")
    bound, ok = check_upper_bound(op, wclass, result)
    return Check("upper-estimate", ok, f"lambda_1 = {result.eigenvalue:.10g} <= bound {bound:.10g}")


def check_ascent(trace) -> Check:
    mu = trace.mu1
    drop = float(np.max(mu[:-1] - mu[1:])) if len(mu) > 1 else 0.0
    return Check("monotone-ascent", drop <= 1e-12, f"{len(mu)} iterates, largest decrease {max(drop, 0.0):.1e}")


def check_characterization(rho, result) -> Check:
    ok = verify_characterization(rho, result.eigenfunction)
    return Check("characterization", ok, "minimizer is an increasing function of its eigenfunction")


def check_duality(op, wclass) -> Check:
    if wclass.values[-1] >= 0:
        return Check("negative-duality", None, "class has no negative value")
    rho, lam_neg, _ = maximize_lambda_neg1(op, wclass)
    direct = solve_lambda_neg1(op, rho).eigenvalue
    mirrored = -solve_mu1(op, -rho).eigenvalue
    u = solve_mu1(op, -rho).eigenfunction
    ok = direct == lam_neg == mirrored and verify_characterization(-rho, u)
    return Check("negative-duality", ok, f"max lambda_-1 = {lam_neg:.10g} = -min lambda_1 over the negated class")


def check_gateaux(op, wclass, rng, trials=3) -> Check:
    worst = 0.0
    t = 1e-5
    for _ in range(trials):
        rho = _positive_member(rng, wclass)
        v = rng.uniform(-1.0, 1.0, op.n)
        fd = (solve_mu1(op, rho + t * v).mu - solve_mu1(op, rho - t * v).mu) / (2 * t)
        an = gateaux_differential(op, rho, v)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    return Check("gateaux-differential", worst < 1e-3, f"max relative error vs central difference {worst:.2e}")


def check_homogeneity(op, wclass, rng) -> Check:
    rho = _positive_member(rng, wclass)
    a, b = solve_mu1(op, 2 * rho).mu, 2 * solve_mu1(op, rho).mu
    err = abs(a - b) / b
    return Check("homogeneity", err <= 1e-10, f"|mu(2 rho) - 2 mu(rho)| / 2 mu(rho) = {err:.1e}")


def run_suite(op: StiffnessOperator, wclass: WeightClass, seed: int = 42, tol: float = 1e-10, max_iter: int = 10_000) -> list:
    rng = np.random.default_rng(seed)
    checks = []
    has_positive = wclass.values[0] > 0
    if has_positive:
        checks.append(check_convexity(op, wclass, rng))
        checks.append(check_gateaux(op, wclass, rng))
        checks.append(check_homogeneity(op, wclass, rng))
    checks.append(check_hardy_littlewood(op, rng))
    checks.append(check_polya_szego(op, rng))
    checks.append(check_linear_bounds(op, wclass, rng))
    if has_positive:
        rho, res, trace = minimize_lambda1(op, wclass, tol, max_iter)
        checks.append(check_ascent(trace))
        checks.append(check_characterization(rho, res))
        checks.append(check_upper_estimate(op, wclass, res))
    else:
        checks.append(Check("minimization", None, "class has no positive value"))
    checks.append(check_duality(op, wclass))
    return checks
