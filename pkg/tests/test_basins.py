import numpy as np
import pytest

from mproots.basins import (
    BasinConfig,
    NoRootsFound,
    compute_basin,
    grid_points,
    polynomial_roots,
    render_basin,
    write_ppm,
)
from mproots.solvers import FamilyParams, MethodSpec

NEWTON = MethodSpec.newton()


def parse_ppm(data: bytes):
    magic, dims, maxval, rest = data.split(b"\n", 3)
    w, h = map(int, dims.split())
    assert (magic, maxval) == (b"P6", b"255")
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w, 3)


def test_ppm_header_and_size():
    cfg = BasinConfig((1, 0, -1), resolution=(7, 5), method=NEWTON)
    data = render_basin(cfg)
    assert data.startswith(b"P6\n7 5\n255\n")
    assert len(data) == len(b"P6\n7 5\n255\n") + 7 * 5 * 3


def test_grid_orientation_and_symmetry():
    cfg = BasinConfig((1, 0, -1), window=(-2, 2, -1, 3), resolution=(5, 3), method=NEWTON)
    g = grid_points(cfg)
    assert g[0, 0] == complex(-2, 3) and g[-1, -1] == complex(2, -1)
    sym = grid_points(BasinConfig((1, 0, -1), resolution=(9, 7), method=NEWTON))
    assert np.array_equal(sym, -sym[::-1, ::-1])


def test_roots_are_found_and_ordered():
    r = polynomial_roots((1, 0, 0, -1))
    assert np.allclose(r, np.exp(2j * np.pi * np.array([-1, 0, 1]) / 3))
    assert np.allclose(sorted(polynomial_roots((0, 2, 0, -8)).real), [-2, 2])


@pytest.mark.parametrize("coeffs", [(1, -1), (0, 0, 5, 1), (3,)])
def test_low_degree_rejected(coeffs):
    with pytest.raises(NoRootsFound):
        BasinConfig(coeffs)
    with pytest.raises(NoRootsFound):
        polynomial_roots(coeffs)


def test_non_finite_polynomial():
    with pytest.raises(NoRootsFound):
        polynomial_roots((1, float("nan"), 1))


@pytest.mark.parametrize(
    "kw",
    [
        {"window": (1, 0, -1, 1)},
        {"window": (-1, 1, 2, 2)},
        {"resolution": (1, 9)},
        {"max_iters": 0},
        {"tol": 0},
    ],
)
def test_config_invariants(kw):
    with pytest.raises(ValueError):
        BasinConfig((1, 0, -1), **kw)


@pytest.mark.parametrize("res", [(2, 2), (33, 17), (64, 64), (101, 80)])
def test_newton_z2_minus_1_point_symmetry(res):
    cfg = BasinConfig((1, 0, -1), resolution=res, method=NEWTON)
    out = compute_basin(cfg)
    idx = out.index
    # rotating by 180 degrees swaps the roots +1 and -1 and keeps iteration counts
    swapped = np.where(idx >= 0, 1 - idx, -1)
    assert np.array_equal(idx[::-1, ::-1], swapped)
    assert np.array_equal(out.iterations[::-1, ::-1], out.iterations)
    # the real polynomial also gives an exact mirror image across the real axis
    img = parse_ppm(render_basin(cfg))
    assert np.array_equal(img, img[::-1, :, :])


def test_z3_minus_1_three_balanced_basins():
    cfg = BasinConfig((1, 0, 0, -1), resolution=(301, 301))
    out = compute_basin(cfg)
    disc = np.abs(grid_points(cfg)) <= 2  # invariant under the 120-degree rotation
    counts = np.bincount(out.index[disc & (out.index >= 0)], minlength=3)
    assert (counts > 0).all()
    assert counts.max() <= 1.01 * counts.min()
    img = parse_ppm(render_basin(cfg))
    hues = {tuple(c) for c in img.reshape(-1, 3) if c.any()}
    assert len(hues) > 3  # shading by iteration count


def test_classification_invariant():
    cfg = BasinConfig((1, 0, 0, -1), resolution=(80, 60), method=MethodSpec.om8(FamilyParams(1, 2, 1, 0)))
    out = compute_basin(cfg)
    hit = out.index >= 0
    assert hit.any()
    dist = np.abs(out.final[hit] - out.roots[out.index[hit]])
    assert (dist < cfg.tol).all()


def test_unconverged_pixels_are_black():
    cfg = BasinConfig((1, 0, 1), window=(-1, 1, -1, 1), resolution=(21, 21), method=NEWTON, max_iters=3)
    out = compute_basin(cfg)
    img = parse_ppm(render_basin(cfg))
    assert (out.index < 0).any()
    assert not img[out.index < 0].any()
    assert img[out.index >= 0].any(axis=-1).all()


@pytest.mark.parametrize(
    "method",
    [MethodSpec.newton(), MethodSpec.steffensen(), MethodSpec.sm7(), MethodSpec.om8(), MethodSpec.om8df(), MethodSpec.om8df(1)],
    ids=lambda m: f"{m.label}-{m.shift_exponent}",
)
def test_every_method_renders_deterministically(method, tmp_path):
    cfg = BasinConfig((1, 0, 0, -1), resolution=(40, 30), method=method)
    a, b = render_basin(cfg), render_basin(cfg)
    assert a == b
    path = write_ppm(tmp_path / "b.ppm", a)
    assert path.read_bytes() == a
    assert (compute_basin(cfg).index >= 0).any()


def test_complex_coefficients():
    cfg = BasinConfig((1, 0, 1j), resolution=(30, 30), method=NEWTON)
    out = compute_basin(cfg)
    assert set(np.unique(out.index)) >= {0, 1}
