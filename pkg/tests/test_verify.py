import numpy as np

from fracweight.grid import build_disk, build_interval
from fracweight.nonlocal_form import assemble
from fracweight.rearrangement import WeightClass
from fracweight.verify import Check, run_suite


def test_check_lines():
    assert Check("a", True, "x").line() == "PASS a: x"
    assert Check("a", False, "x").line() == "FAIL a: x"
    assert Check("a", None, "x").line() == "SKIP a: x"


def test_suite_passes_on_disk():
    grid = build_disk(1, 10)
    op = assemble(grid, 0.5)
    w = WeightClass.from_fractions([(1, 0.5), (-0.5, 0.5)], grid.n_active, grid.cell_measure)
    checks = run_suite(op, w, seed=1)
    assert all(c.passed is not False for c in checks), [c.line() for c in checks if c.passed is False]


def test_suite_without_positive_values():
    op = assemble(build_interval(-1, 1, 16), 0.5)
    checks = run_suite(op, WeightClass((0.0, -1.0), (8, 8)))
    names = {c.name: c.passed for c in checks}
    assert names["minimization"] is None and names["negative-duality"] is True
    assert "convexity" not in names
