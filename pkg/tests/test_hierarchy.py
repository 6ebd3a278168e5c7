import numpy as np
import pytest

from gazecut.energy import EnergyParams
from gazecut.hierarchy import coarsen, solve_level1, solve_level2, thin_skin
from gazecut.maxflow import solve_exact


def test_coarsen_hand_case():
    vol = np.arange(2 * 4 * 4, dtype=np.int64).reshape(2, 4, 4)
    params = EnergyParams(penalty=5, inhibit=99)
    coarse, cp = coarsen(vol, 2, params)
    assert coarse.shape == (1, 2, 2)
    # block (0,0,0) sums labels {0,1} of sites (0..1, 0..1)
    want = (vol[0:2, 0:2, 0:2]).sum()
    assert coarse[0, 0, 0] == want
    assert cp.penalty == 10
    assert cp.inhibit == 99


def test_coarsen_zero_pads_ragged_shapes():
    vol = np.ones((3, 5, 3), dtype=np.int64)
    coarse, _ = coarsen(vol, 2, EnergyParams())
    assert coarse.shape == (2, 3, 2)
    assert coarse.sum() == vol.sum()  # padding adds nothing
    assert coarse[1, 2, 1] == 1  # lone corner site, lone label
    with pytest.raises(ValueError):
        coarsen(vol, 0, EnergyParams())


def test_thin_skin_frozen_values():
    coarse = np.array([[0, 2], [1, 3]])
    lo, hi = thin_skin(coarse, (4, 4, 12), block=3, radius=1)
    assert lo.shape == hi.shape == (4, 4)
    # coarse label D, block b, radius r: [b(D-r), b(D+r+1)-1] clamped
    assert lo[0, 0] == 0 and hi[0, 0] == 5        # D=0 -> [-3, 5] clamped
    assert lo[0, 3] == 3 and hi[0, 3] == 11       # D=2 -> [3, 11]
    assert lo[3, 0] == 0 and hi[3, 0] == 8        # D=1 -> [0, 8]
    assert lo[3, 3] == 6 and hi[3, 3] == 11       # D=3 -> [6, 11] clamped
    assert (lo <= hi).all()


def test_thin_skin_covers_upsampled_labeling():
    rng = np.random.default_rng(41)
    coarse = rng.integers(0, 4, (3, 3))
    lo, hi = thin_skin(coarse, (8, 7, 11), block=3, radius=0)
    up = coarse.repeat(3, axis=0).repeat(3, axis=1)[:8, :7]
    assert (lo <= np.minimum(3 * up, 10)).all()
    assert (hi >= np.minimum(3 * up + 2, 10)).all()


def test_level1_block1_is_bit_identical_to_exact():
    rng = np.random.default_rng(42)
    vol = rng.integers(0, 120, (5, 6, 7)).astype(np.int64)
    params = EnergyParams(penalty=6, inhibit=30)
    exact = solve_exact(vol, params)
    l1 = solve_level1(vol, params, block=1)
    assert l1.energy == exact.energy
    assert np.array_equal(l1.labeling, exact.labeling)


def test_hierarchy_energies_are_monotone():
    """exact <= level1 <= level2 when level2's sweeps are capped hard."""
    rng = np.random.default_rng(43)
    for seed in range(5):
        vol = rng.integers(0, 300, (8, 9, 8)).astype(np.int64)
        params = EnergyParams(penalty=7, inhibit=60)
        e0 = solve_exact(vol, params).energy
        e1 = solve_level1(vol, params, block=2).energy
        e2 = solve_level2(vol, params, block=2, max_sweeps=1).energy
        assert e0 <= e1 <= e2


def test_level2_uncapped_equals_level1():
    rng = np.random.default_rng(44)
    vol = rng.integers(0, 200, (6, 7, 9)).astype(np.int64)
    params = EnergyParams(penalty=5, inhibit=40)
    l1 = solve_level1(vol, params, block=3)
    l2 = solve_level2(vol, params, block=3, max_sweeps=None)
    assert l2.energy == l1.energy
    assert np.array_equal(l2.labeling, l1.labeling)
    assert l2.stats["converged"]


def test_level_stats_shape():
    rng = np.random.default_rng(45)
    vol = rng.integers(0, 100, (4, 4, 6)).astype(np.int64)
    params = EnergyParams(penalty=4, inhibit=25)
    l1 = solve_level1(vol, params, block=2)
    assert l1.stats["level"] == 1
    assert l1.stats["block"] == 2
    assert l1.stats["mean_window"] <= 6.0
    assert l1.stats["coarse_energy"] >= 0
    l2 = solve_level2(vol, params, block=2)
    assert l2.stats["level"] == 2
    assert "wall_s" in l2.stats and "coarse_wall_s" in l2.stats


def test_labels_stay_inside_skin():
    rng = np.random.default_rng(46)
    vol = rng.integers(0, 150, (6, 6, 10)).astype(np.int64)
    params = EnergyParams(penalty=3, inhibit=20)
    coarse_vol, coarse_params = coarsen(vol, 2, params)
    coarse = solve_exact(coarse_vol, coarse_params)
    lo, hi = thin_skin(coarse.labeling, vol.shape, 2, 1)
    l1 = solve_level1(vol, params, block=2)
    assert (l1.labeling >= lo).all() and (l1.labeling <= hi).all()
