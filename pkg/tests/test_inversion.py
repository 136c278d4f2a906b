import numpy as np
import pytest

from nvmr.constants import GAMMA_1H, GAMMA_E
from nvmr.inversion import (
    DegenerateAxisError,
    distance_from_g,
    find_dips,
    invert_pair_geometry,
    scan_deltas,
)
from nvmr.protocols import pair_deltas


def lorentzian_dip(grid, center, depth, width):
    return depth / (1.0 + ((grid - center) / (width / 2)) ** 2)


# --------------------------------------------------------------------------
# dip detection
# --------------------------------------------------------------------------


def test_find_dips_double_lorentzian():
    grid = np.arange(400.0, 600.0, 0.5)
    values = 1.0 - lorentzian_dip(grid, 480.3, 0.3, 4.0) \
                 - lorentzian_dip(grid, 521.8, 0.2, 4.0)
    dips = find_dips(grid, values, depth_threshold=0.05)
    assert len(dips) == 2
    assert dips[0].center == pytest.approx(480.3, abs=0.05)
    assert dips[1].center == pytest.approx(521.8, abs=0.05)
    assert dips[0].depth == pytest.approx(0.3, abs=0.02)
    assert dips[0].width == pytest.approx(4.0, rel=0.3)


def test_find_dips_flat_scan_empty():
    grid = np.linspace(0.0, 1.0, 101)
    assert find_dips(grid, np.ones_like(grid), depth_threshold=0.02) == []


def test_find_dips_merged_flagged_unresolved():
    # two dips closer than their width blur into one broad feature
    grid = np.arange(400.0, 600.0, 0.5)
    values = 1.0 - lorentzian_dip(grid, 498.0, 0.3, 8.0) \
                 - lorentzian_dip(grid, 503.0, 0.3, 8.0)
    dips = find_dips(grid, values, depth_threshold=0.05, min_separation=8.0,
                     expected_width=4.0)
    assert len(dips) == 1
    assert dips[0].unresolved
    assert 498.0 < dips[0].center < 503.0


def test_find_dips_min_separation_merges_sidelobes():
    grid = np.arange(0.0, 100.0, 0.5)
    values = 1.0 - lorentzian_dip(grid, 50.0, 0.4, 3.0) \
                 - lorentzian_dip(grid, 54.0, 0.15, 2.0)
    merged = find_dips(grid, values, depth_threshold=0.05, min_separation=8.0)
    assert len(merged) == 1
    assert merged[0].unresolved
    split = find_dips(grid, values, depth_threshold=0.05)
    assert len(split) == 2


def test_find_dips_requires_monotone_grid():
    with pytest.raises(ValueError, match="increasing"):
        find_dips(np.array([0.0, 1.0, 0.5]), np.ones(3))


def test_scan_deltas_flags_missing():
    grid = np.linspace(0.0, 1.0, 101)
    flat = np.ones_like(grid)
    out = scan_deltas({"x": (grid, flat)})
    assert out.flags["x"] == "no-dips"
    assert out.deltas["x"] == 0.0


# --------------------------------------------------------------------------
# geometry inversion
# --------------------------------------------------------------------------


def random_direction(rng, margin=0.12):
    """Unit vector staying away from all nine magic-angle degeneracies."""
    while True:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        deltas = pair_deltas(1.0, v)
        if min(deltas[k] for k in ("x", "y", "z")) > margin:
            return v


@pytest.mark.parametrize("seed", range(12))
def test_roundtrip_exact(seed):
    rng = np.random.default_rng(seed)
    g = rng.uniform(10.0, 100.0)
    r = random_direction(rng)
    geometry = invert_pair_geometry(pair_deltas(g, r))
    assert geometry.g_khz == pytest.approx(g, rel=1e-9)
    r_est = geometry.r_hat
    if r_est @ r < 0:
        r_est = -r_est
    assert np.allclose(r_est, r, atol=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_roundtrip_exact_without_refinement(seed):
    # the bare closed forms already invert exact inputs
    rng = np.random.default_rng(50 + seed)
    g = rng.uniform(10.0, 100.0)
    r = random_direction(rng)
    geometry = invert_pair_geometry(pair_deltas(g, r), refine=False)
    assert geometry.g_khz == pytest.approx(g, rel=1e-9)
    r_est = geometry.r_hat
    if r_est @ r < 0:
        r_est = -r_est
    assert np.allclose(r_est, r, atol=1e-8)


def test_on_axis_roundtrip():
    g = 25.0
    geometry = invert_pair_geometry(pair_deltas(g, [0.0, 0.0, 1.0]))
    assert geometry.g_khz == pytest.approx(g, rel=1e-12)
    assert abs(geometry.r_hat[2]) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(geometry.r_hat[:2], 0.0, atol=1e-9)


def test_magic_angle_axis_rejected():
    # alignment at the magic angle of z: delta_z = 0 divides the closed form
    r = np.array([np.sqrt(1 - 1 / 3), 0.0, 1 / np.sqrt(3)])
    deltas = pair_deltas(30.0, r)
    assert deltas["z"] == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(DegenerateAxisError, match="rotated"):
        invert_pair_geometry(deltas)


def test_missing_direction_rejected():
    deltas = pair_deltas(30.0, [0.0, 0.0, 1.0])
    del deltas["x-y"]
    with pytest.raises(ValueError, match="missing"):
        invert_pair_geometry(deltas)


def test_noise_robustness():
    # one percent multiplicative noise: coupling within 3 percent and
    # alignment within 2 degrees, away from near-degenerate axes
    rng = np.random.default_rng(42)
    g = 34.5
    worst_g, worst_angle = 0.0, 0.0
    n_kept = 0
    while n_kept < 1000:
        r = random_direction(rng)
        deltas = pair_deltas(g, r)
        if min(deltas[k] for k in ("x", "y", "z")) < 0.05 * 1.5 * g:
            continue
        n_kept += 1
        noisy = {k: v * (1 + rng.normal(0, 0.01)) for k, v in deltas.items()}
        geometry = invert_pair_geometry(noisy)
        r_est = geometry.r_hat
        if r_est @ r < 0:
            r_est = -r_est
        angle = np.rad2deg(np.arccos(np.clip(r_est @ r, -1, 1)))
        worst_g = max(worst_g, abs(geometry.g_khz - g) / g)
        worst_angle = max(worst_angle, angle)
    assert worst_g <= 0.03
    assert worst_angle <= 2.0


def test_normalization_residual_reported_when_clipped():
    # inconsistent inputs force a negative squared component, which is
    # clipped and shows up in the normalisation residual
    deltas = pair_deltas(30.0, [0.0, 0.0, 1.0])
    deltas["x"] *= 1.25
    geometry = invert_pair_geometry(deltas)
    assert geometry.normalization_residual > 1e-6
    assert np.linalg.norm(geometry.r_hat) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "g,expected",
    [(416.1, 5.0), (101.6, 8.0)],
)
def test_distance_from_g_reference(g, expected):
    assert distance_from_g(g, GAMMA_E, GAMMA_E) == pytest.approx(expected, rel=2e-3)


def test_distance_from_g_rejects_nonpositive():
    with pytest.raises(ValueError, match="positive"):
        distance_from_g(0.0, GAMMA_1H, GAMMA_1H)
