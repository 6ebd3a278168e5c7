import io
import itertools

import numpy as np
import pytest

from gazecut.energy import UNCUTTABLE, EnergyParams
from gazecut.flownet import (
    build_network,
    dump_network,
    expected_arc_count,
    expected_node_count,
    full_windows,
    network_from_arcs,
    node_blocks,
)
from gazecut.maxflow import maxflow_reference
from gazecut.oracle import plain_energy

INF = UNCUTTABLE

# Hand-worked reference: one row, two neighbouring gaze lines, three labels,
# data costs (5, 7, 9) and (6, 8, 10), penalty 3, inhibit 11.  Each site gets
# two chain nodes (site 0 -> 0, 1; site 1 -> 2, 3), then source 4 and sink 5.
# The chain runs source -> n0 -> n1 -> sink with the three data costs as
# forward capacities and uncuttable returns; neighbouring chains are tied by
# penalty arcs at matching levels and inhibit/zero diagonal pairs.
GOLDEN_1x2x3 = """\
nodes 6 source 4 sink 5 offset 0
0 4 {INF}
0 1 7
0 2 3
0 3 0
1 0 {INF}
1 5 9
1 3 3
1 2 11
2 0 3
2 1 0
2 4 {INF}
2 3 8
3 1 3
3 0 11
3 2 {INF}
3 5 10
4 0 5
4 2 6
5 1 {INF}
5 3 {INF}
""".format(INF=INF)


def _golden_net():
    vol = np.array([[[5, 7, 9], [6, 8, 10]]], dtype=np.int64)
    return build_network(vol, EnergyParams(penalty=3, inhibit=11))


def test_golden_dump_1x2x3():
    buf = io.StringIO()
    dump_network(_golden_net(), buf)
    assert buf.getvalue() == GOLDEN_1x2x3


def test_golden_chain_arc_capacities():
    net = _golden_net()
    assert net.chain_base.tolist() == [0, 3, 6]
    caps = net.cap[net.chain_arcs]
    assert caps[0:3].tolist() == [5, 7, 9]
    assert caps[3:6].tolist() == [6, 8, 10]


def test_count_formulas_match_built_networks():
    rng = np.random.default_rng(21)
    for rows, cols in [(1, 1), (1, 2), (2, 2), (3, 4), (2, 5)]:
        for m in [2, 3, 5, 7]:
            vol = rng.integers(0, 100, (rows, cols, m)).astype(np.int64)
            net = build_network(vol, EnergyParams(penalty=2, inhibit=9))
            assert net.n_nodes == expected_node_count((rows, cols), m)
            assert net.num_arcs == expected_arc_count((rows, cols), m)


def test_structural_invariants():
    rng = np.random.default_rng(22)
    vol = rng.integers(0, 80, (3, 4, 5)).astype(np.int64)
    net = build_network(vol, EnergyParams(penalty=4, inhibit=17))
    n, first_out = net.n_nodes, net.first_out
    assert first_out[0] == 0 and first_out[n] == net.num_arcs
    assert (np.diff(first_out) >= 0).all()
    owner = np.repeat(np.arange(n), np.diff(first_out))
    assert np.array_equal(net.rev[net.rev], np.arange(net.num_arcs))
    assert np.array_equal(net.head[net.rev], owner)
    assert (net.cap >= 0).all()
    assert np.array_equal(net.resid, net.cap)
    # no self loops, heads in range
    assert (net.head != owner).all()
    assert net.head.min() >= 0 and net.head.max() < n


def test_window_validation():
    vol = np.zeros((1, 2, 3), dtype=np.int64)
    p = EnergyParams()
    lo, hi = full_windows((1, 2), 3)
    with pytest.raises(ValueError):
        build_network(vol, p, lo=hi, hi=lo)  # lo > hi somewhere
    with pytest.raises(ValueError):
        build_network(vol, p, lo=lo - 1, hi=hi)
    with pytest.raises(ValueError):
        build_network(vol, p, lo=lo, hi=hi + 1)


def test_fully_forced_windows_fold_into_offset():
    rng = np.random.default_rng(23)
    for _ in range(20):
        rows, cols, m = 2, 3, 4
        vol = rng.integers(0, 60, (rows, cols, m)).astype(np.int64)
        params = EnergyParams(penalty=int(rng.integers(0, 5)),
                              inhibit=int(rng.integers(0, 30)))
        lab = rng.integers(0, m, (rows, cols)).astype(np.int32)
        net = build_network(vol, params, lo=lab, hi=lab)
        assert net.n_nodes == 2  # just the terminals
        result = maxflow_reference(net)
        assert result.flow == 0
        assert result.energy == plain_energy(lab, vol, params)
        assert np.array_equal(result.labeling, lab)


def test_restricted_windows_match_windowed_brute_force():
    rng = np.random.default_rng(24)
    for _ in range(25):
        rows, cols, m = 2, 2, 4
        vol = rng.integers(0, 60, (rows, cols, m)).astype(np.int64)
        params = EnergyParams(penalty=int(rng.integers(1, 5)),
                              inhibit=int(rng.integers(0, 30)))
        lo = rng.integers(0, m, rows * cols).astype(np.int32)
        hi = np.minimum(lo + rng.integers(0, m, rows * cols), m - 1).astype(np.int32)
        lo = np.minimum(lo, hi)

        net = build_network(vol, params, lo=lo, hi=hi)
        result = maxflow_reference(net)

        best = None
        ranges = [range(lo[s], hi[s] + 1) for s in range(rows * cols)]
        for combo in itertools.product(*ranges):
            lab = np.array(combo, dtype=np.int32).reshape(rows, cols)
            e = plain_energy(lab, vol, params)
            if best is None or e < best:
                best = e
        assert result.energy == best
        flat = result.labeling.reshape(-1)
        assert (flat >= lo).all() and (flat <= hi).all()


def test_single_label_volume():
    vol = np.arange(6, dtype=np.int64).reshape(2, 3, 1)
    net = build_network(vol, EnergyParams(penalty=3, inhibit=7))
    assert net.n_nodes == 2
    assert net.num_arcs == 0
    assert net.const_offset == vol.sum()


def test_network_from_arcs_classic():
    # small textbook instance: max flow 5
    arcs = [(0, 1, 3), (0, 2, 2), (1, 2, 1), (1, 3, 2), (2, 3, 3)]
    net = network_from_arcs(4, 0, 3, arcs)
    assert maxflow_reference(net).flow == 5
    with pytest.raises(ValueError):
        network_from_arcs(2, 0, 1, [(0, 5, 1)])
    with pytest.raises(ValueError):
        network_from_arcs(2, 0, 1, [(0, 1, -1)])


def test_network_from_arcs_resid_caps():
    # 4-tuple form seeds both directions of a pair
    net = network_from_arcs(3, 0, 2, [(0, 1, 4, 1), (1, 2, 3, 2)])
    assert maxflow_reference(net).flow == 3


def test_node_blocks_tiling():
    rng = np.random.default_rng(25)
    vol = rng.integers(0, 50, (4, 5, 6)).astype(np.int64)
    net = build_network(vol, EnergyParams(penalty=1, inhibit=3))
    blocks = node_blocks(net, 2)
    assert blocks.shape == (net.n_nodes,)
    assert blocks[net.source] == 0 and blocks[net.sink] == 0
    rows, cols, m = 4, 5, 6
    gb, mb = -(-cols // 2), -(-m // 2)
    # chain node j of site (y, g) sits at level lo+1+j
    for s in range(rows * cols):
        y, g = divmod(s, cols)
        for j in range(int(net.node_base[s + 1] - net.node_base[s])):
            t = int(net.lo[s]) + 1 + j
            want = (y // 2) * gb * mb + (g // 2) * mb + t // 2
            assert blocks[net.node_base[s] + j] == want


def test_reset_restores_residuals():
    net = _golden_net()
    maxflow_reference(net)
    assert not np.array_equal(net.resid, net.cap)
    net.reset()
    assert np.array_equal(net.resid, net.cap)
