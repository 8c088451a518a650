import numpy as np
import pytest

from fracweight.grid import Grid, build_disk, build_interval, build_rectangle, parse_domain


def test_interval_cells():
    g = build_interval(-1, 1, 4)
    assert g.n_active == 4
    assert g.cell_measure == 0.5
    np.testing.assert_allclose(g.centers[:, 0], [-0.75, -0.25, 0.25, 0.75])


def test_single_cell_interval():
    g = build_interval(0, 1, 1)
    assert g.n_active == 1 and g.cell_measure == 1.0


def test_interval_measure():
    assert build_interval(-2, 2, 8).measure == pytest.approx(4.0)


def test_rectangle_square_cells():
    g = build_rectangle((1, 1), (4, 4))
    assert g.n_active == 16 and g.cell_measure == pytest.approx(1 / 16)
    assert build_rectangle((2, 1), (8, 4)).h == pytest.approx(0.25)


def test_rectangle_rejects_anisotropic_cells():
    with pytest.raises(ValueError, match="anisotropic"):
        build_rectangle((1, 2), (4, 4))


def test_tiny_disk_keeps_all_four_cells():
    g = build_disk(1.0, 2)
    assert g.n_active == 4
    np.testing.assert_allclose(np.hypot(*g.centers.T), np.sqrt(2) / 2)


def test_disk_area_converges():
    errs = [abs(build_disk(1.0, n).measure - np.pi) / np.pi for n in (16, 32, 64)]
    assert errs[-1] < 0.05
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("r,n", [(1.0, 7), (0.3, 10), (2.5, 33)])
def test_disk_is_reflection_symmetric(r, n):
    g = build_disk(r, n)
    assert np.array_equal(g.mask, g.reflect_mask())
    assert np.array_equal(g.mask, g.mask.T)


def test_asymmetric_mask_rejected():
    with pytest.raises(ValueError, match="symmetric"):
        Grid(1.0, (0.0,), [True, True, False], steiner_center=1.5)


def test_check_reports_grid_mismatch():
    g = build_interval(0, 1, 5)
    with pytest.raises(ValueError, match="grid mismatch"):
        g.check(np.zeros(4))


def test_to_array_scatter():
    g = build_disk(1.0, 4)
    arr = g.to_array(np.arange(g.n_active, dtype=float), fill=-1)
    assert arr.shape == (4, 4)
    assert np.all(arr[~g.mask] == -1)


def test_locate_inverts_centers():
    g = build_rectangle((2, 2), (6, 6))
    np.testing.assert_array_equal(g.locate(g.centers), g.lattice_index)


@pytest.mark.parametrize(
    "spec,n",
    [("interval:-1,1,128", 128), ("rect:2,1,8,4", 32), ("disk:1,2", 4)],
)
def test_parse_domain(spec, n):
    assert parse_domain(spec).n_active == n


@pytest.mark.parametrize("spec", ["blob:1", "interval:1,0,4", "disk:1", "rect:1,2,4,4", "interval:a,b,c"])
def test_parse_domain_errors(spec):
    with pytest.raises(ValueError, match="bad domain spec"):
        parse_domain(spec)
