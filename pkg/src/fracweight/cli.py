"""Command-line front end.

Writes ``results.csv``, ``trace.csv`` (optimization modes), ``report.txt``
and optionally ``A.bin`` into ``--out``. Exit status: 0 on success, 1 on a
usage error, 2 when the report contains a FAIL line.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import click
import numpy as np

from .eigensolver import solve_lambda_neg1, solve_mu1
from .grid import Grid, parse_domain
from .nonlocal_form import assemble, dump_matrix
from .optimizer import (
    maximize_lambda1_fw,
    minimize_lambda1_multistart,
    radial_defect,
)
from .rearrangement import WeightClass, majorizes, parse_weights, symmetry_error
from .verify import (
    Check,
    check_ascent,
    check_characterization,
    check_upper_estimate,
    run_suite,
)

log = logging.getLogger(__name__)

MODES = ("solve", "minimize", "maximize", "verify-suite")
RESULT_COLUMNS = (
    "run",
    "mode",
    "status",
    "n_active",
    "s",
    "mu1",
    "lambda1",
    "lambda_neg1",
    "residual",
    "iterations",
    "rho_sym_err",
    "u_sym_err",
    "gap",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str
    s: float
    weights: str
    mode: str
    tol: float = 1e-10
    max_iter: int = 10_000
    restarts: int = 1
    seed: int = 42
    out: str = "."
    dump_matrix: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if not 0.0 < self.s < 1.0:
            raise ConfigError(f"s must lie in (0, 1), got {self.s}")
        if not self.tol > 0 or self.max_iter < 1 or self.restarts < 1:
            raise ConfigError("tol, max_iter and restarts must be positive")

    def canonical(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


_FIELDS = {
    "domain": str,
    "s": float,
    "weights": str,
    "mode": str,
    "tol": float,
    "max_iter": int,
    "restarts": int,
    "seed": int,
    "out": str,
    "dump_matrix": bool,
}


def parse_config(path=None, **flags) -> ExperimentConfig:
    """Merge a JSON config file with flag values; flags win.

    ``domain`` may be a list (repeated flag); differing entries are an error.
    """
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        unknown = set(values) - set(_FIELDS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, val in flags.items():
        if val is not None and val != ():
            values[key] = val
    domain = values.get("domain")
    if isinstance(domain, (list, tuple)):
        if len(set(domain)) > 1:
            raise ConfigError(f"conflicting domain specs: {', '.join(domain)}")
        values["domain"] = domain[0]
    mode = values.get("mode", "solve")
    values["mode"] = mode
    if mode == "solve":
        values.setdefault("weights", "w:1@1")
    for key in ("domain", "s", "weights"):
        if key not in values:
            raise ConfigError(f"missing required setting --{key.replace('_', '-')}")
    try:
        typed = {k: _FIELDS[k](v) for k, v in values.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    try:
        parse_domain(typed["domain"])
        parse_weights(typed["weights"], 1)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(**typed)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _sym(grid: Grid, f) -> float:
    return symmetry_error(grid, f) if grid.steiner_center is not None else np.nan


def _write_rows(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])


def _write_fields(path: Path, grid: Grid, rho, u) -> None:
    axes = ["x", "y"][: grid.dim]
    rows = []
    for c, r, v in zip(grid.centers, rho, u):
        rows.append({**dict(zip(axes, c)), "rho": r, "u": v})
    _write_rows(path, (*axes, "rho", "u"), rows)


def _run_solve(cfg, grid, op, wclass, out):
    from .optimizer import centered_layout

    rho = centered_layout(grid, wclass)
    res = solve_mu1(op, rho, cfg.tol, cfg.max_iter)
    neg = solve_lambda_neg1(op, rho, cfg.tol, cfg.max_iter)
    rows = [
        {
            "run": 0,
            "mode": cfg.mode,
            "status": "solved",
            "n_active": grid.n_active,
            "s": cfg.s,
            "mu1": res.mu,
            "lambda1": res.eigenvalue,
            "lambda_neg1": neg.eigenvalue,
            "residual": max(res.residual, neg.residual),
            "iterations": res.iterations,
            "rho_sym_err": _sym(grid, rho),
            "u_sym_err": _sym(grid, res.eigenfunction),
        }
    ]
    _write_fields(out / "fields.csv", grid, rho, res.eigenfunction)
    checks = [Check("residual", res.residual <= cfg.tol, f"{res.residual:.2e} <= {cfg.tol:.1e}")]
    if res.eigenvalue is not None:
        checks.append(
            Check(
                "eigenfunction-positive",
                bool(np.all(res.eigenfunction > 0)),
                f"min u = {res.eigenfunction.min():.3e}",
            )
        )
    return rows, None, checks


def _run_minimize(cfg, grid, op, wclass, out):
    runs = minimize_lambda1_multistart(op, wclass, cfg.restarts, cfg.seed, cfg.tol, cfg.max_iter)
    rows, checks = [], []
    for k, (rho, res, trace) in enumerate(runs):
        neg = solve_lambda_neg1(op, rho, cfg.tol, cfg.max_iter)
        rows.append(
            {
                "run": k,
                "mode": cfg.mode,
                "status": trace.status,
                "n_active": grid.n_active,
                "s": cfg.s,
                "mu1": res.mu,
                "lambda1": res.eigenvalue,
                "lambda_neg1": neg.eigenvalue,
                "residual": res.residual,
                "iterations": len(trace.records) - 1,
                "rho_sym_err": _sym(grid, rho),
                "u_sym_err": _sym(grid, res.eigenfunction),
            }
        )
        for c in (check_ascent(trace), check_characterization(rho, res)):
            checks.append(Check(f"{c.name}[run {k}]", c.passed, c.detail))
    rho, res, trace = runs[0]
    checks.append(check_upper_estimate(op, wclass, res))
    if grid.kind == "disk":
        checks.append(Check("radial-defect", None, f"{radial_defect(grid, rho):.3g} (informational)"))
    distinct = {round(r[1].eigenvalue, 9) for r in runs}
    if len(distinct) > 1:
        checks.append(Check("restarts", None, f"{len(distinct)} distinct fixed-point values found"))
    _write_fields(out / "fields.csv", grid, rho, res.eigenfunction)
    return rows, trace, checks


def _run_maximize(cfg, grid, op, wclass, out):
    rho, res, trace = maximize_lambda1_fw(op, wclass, cfg.tol, cfg.max_iter)
    gap = trace.records[-1].gap
    rows = [
        {
            "run": 0,
            "mode": cfg.mode,
            "status": trace.status,
            "n_active": grid.n_active,
            "s": cfg.s,
            "mu1": res.mu,
            "lambda1": res.eigenvalue,
            "lambda_neg1": solve_lambda_neg1(op, rho, cfg.tol, cfg.max_iter).eigenvalue,
            "residual": res.residual,
            "iterations": len(trace.records) - 1,
            "rho_sym_err": _sym(grid, rho),
            "u_sym_err": _sym(grid, res.eigenfunction),
            "gap": gap,
        }
    ]
    checks = [
        Check("hull-membership", majorizes(wclass.sorted_values, rho, 1e-9), "final weight is majorized by rho_0"),
        Check("duality-gap", None if trace.status != "converged" else gap <= cfg.tol, f"{gap:.3e} (status {trace.status})"),
    ]
    _write_fields(out / "fields.csv", grid, rho, res.eigenfunction)
    return rows, trace, checks


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment; returns the process exit status."""
    grid = parse_domain(cfg.domain)
    wclass = parse_weights(cfg.weights, grid.n_active, grid.cell_measure)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    log.info("assembling %s, s=%g", grid.describe(), cfg.s)
    op = assemble(grid, cfg.s)
    if cfg.dump_matrix:
        dump_matrix(op, out / "A.bin")

    trace = None
    if cfg.mode == "solve":
        rows, trace, checks = _run_solve(cfg, grid, op, wclass, out)
    elif cfg.mode == "minimize":
        rows, trace, checks = _run_minimize(cfg, grid, op, wclass, out)
    elif cfg.mode == "maximize":
        rows, trace, checks = _run_maximize(cfg, grid, op, wclass, out)
    else:
        checks = run_suite(op, wclass, cfg.seed, cfg.tol, cfg.max_iter)
        rows = [
            {"run": k, "mode": cfg.mode, "status": c.line().split()[0], "n_active": grid.n_active, "s": cfg.s}
            for k, c in enumerate(checks)
        ]

    _write_rows(out / "results.csv", RESULT_COLUMNS, rows)
    if trace is not None:
        trace.write_csv(out / "trace.csv")
    lines = [
        f"config: {cfg.canonical()}",
        f"domain: {grid.describe()}",
        f"weights: {wclass.describe()}",
        "",
        *(c.line() for c in checks),
    ]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    failed = any(c.passed is False for c in checks)
    return 2 if failed else 0


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON config file.")
@click.option("--domain", multiple=True, help="interval:a,b,n | rect:wx,wy,nx,ny | disk:r,n")
@click.option("--s", type=float, help="Fractional order in (0, 1).")
@click.option("--weights", help="Weight class, e.g. w:1@0.25,-1@0.75")
@click.option("--mode", type=click.Choice(MODES))
@click.option("--tol", type=float)
@click.option("--max-iter", "max_iter", type=int)
@click.option("--restarts", type=int)
@click.option("--seed", type=int)
@click.option("--out", type=click.Path(file_okay=False))
@click.option("--dump-matrix", "dump_matrix", is_flag=True, default=None)
@click.option("-v", "--verbose", is_flag=True)
def _command(config_path, verbose, **flags):
    """Fractional weighted eigenvalue experiments."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")
    cfg = parse_config(config_path, **flags)
    return run(cfg)


def main(argv=None) -> int:
    try:
        code = _command.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ConfigError, ValueError) as exc:
        click.echo(f"usage error: {exc}", err=True)
        return 1
    return 0 if code is None else code


if __name__ == "__main__":
    sys.exit(main())
