"""Flow-network construction for exact labeling by minimum cut.

Each site gets a chain of ``m - 1`` interior nodes splitting a source-sink
path into ``m`` arcs, one per depth label; cutting the chain at arc ``k``
(capacity = the site's data cost for label ``k``) assigns label ``k``.
Uncuttable reverse arcs along each chain force exactly one cut per chain.
Between the chains of 4-neighbouring sites:

* same-level antiparallel arcs of capacity ``penalty`` (one crossing per
  unit of label difference);
* downward diagonal arcs of capacity ``inhibit`` in both directions (one
  crossing per unit beyond the first).

Together these charge exactly ``penalty*|delta| + inhibit*(|delta|-1 if
|delta|>1)`` across every cut, so minimum cut = minimum energy.

Chains can be restricted to per-site label windows ``[lo, hi]``: conceptual
chain positions at or below ``lo`` collapse into the source, positions
above ``hi`` into the sink, and arcs forced to cross by the windows are
folded into a constant energy offset.  A full window reproduces the exact
construction; narrow windows give the small graphs the hierarchy solves.

The network is stored flat (CSR adjacency; ``rev`` maps each directed arc
to its reverse) so the solvers in :mod:`gazecut.maxflow` can run compiled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .energy import UNCUTTABLE, EnergyParams

_SRC = np.int64(-1)  # terminal sentinels during emission
_SNK = np.int64(-2)


@dataclass
class FlowNetwork:
    """A directed flow network in CSR form.

    Arcs come in reverse pairs: ``rev[a]`` is the arc ``head[a] -> tail of
    a``, and ``rev[rev[a]] == a``.  ``cap`` is the construction capacity,
    ``resid`` the mutable residual the solvers work on.  ``const_offset``
    is energy the construction folded out of the graph; the energy of a
    minimum cut is ``flow + const_offset``.

    Networks built by :func:`build_network` also carry the chain metadata
    needed to read a labeling back out of a cut (site grid shape, label
    windows, node and chain-arc index tables).
    """

    n_nodes: int
    source: int
    sink: int
    first_out: np.ndarray
    head: np.ndarray
    rev: np.ndarray
    cap: np.ndarray
    resid: np.ndarray
    const_offset: int = 0
    site_shape: Optional[tuple[int, int]] = None
    num_labels: Optional[int] = None
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None
    node_base: Optional[np.ndarray] = None
    chain_arcs: Optional[np.ndarray] = None
    chain_base: Optional[np.ndarray] = None

    @property
    def num_arcs(self) -> int:
        return int(self.head.size)

    @property
    def has_chains(self) -> bool:
        return self.node_base is not None

    def reset(self) -> None:
        """Forget all flow."""
        self.resid[:] = self.cap

    def flow_sent(self) -> int:
        """Net flow currently arriving at the sink."""
        a0, a1 = self.first_out[self.sink], self.first_out[self.sink + 1]
        into = self.cap[a0:a1] - self.resid[a0:a1]
        return int(-into.sum())


@njit(cache=True)
def _chain_node(base, l0, h0, t):
    # conceptual chain position t of a window [l0, h0]; t in [0, m]
    if t <= l0:
        return _SRC
    if t > h0:
        return _SNK
    return base + (t - l0 - 1)


@njit(cache=True)
def _emit(vol, lo, hi, penalty, inhibit_cap, node_base, pu, pv, pc, prc, chain_pairs, fill):
    """Enumerate arc pairs (count when fill=0, write when fill=1).

    Returns (pair count, chain arc count, constant offset).  Emission order
    is fixed: per site row-major, chain arcs by label, then for each of the
    two forward neighbours the same-level arcs then both diagonal families
    by level.
    """
    rows, cols, m = vol.shape
    n = 0
    nchain = 0
    offset = np.int64(0)
    for y in range(rows):
        for g in range(cols):
            s = y * cols + g
            l0 = np.int64(lo[s])
            h0 = np.int64(hi[s])
            base = node_base[s]
            for lab in range(l0, h0 + 1):
                a = _chain_node(base, l0, h0, lab)
                b = _chain_node(base, l0, h0, lab + 1)
                if a == _SRC and b == _SNK:
                    offset += vol[y, g, lab]
                else:
                    if fill == 1:
                        pu[n] = a
                        pv[n] = b
                        pc[n] = vol[y, g, lab]
                        prc[n] = UNCUTTABLE
                        chain_pairs[nchain] = n
                    n += 1
                    nchain += 1
            for nb in range(2):
                if nb == 0:
                    yn, gn = y, g + 1
                else:
                    yn, gn = y + 1, g
                if yn >= rows or gn >= cols:
                    continue
                sn = yn * cols + gn
                ln = np.int64(lo[sn])
                hn = np.int64(hi[sn])
                basen = node_base[sn]
                for t in range(1, m):
                    # same level: antiparallel penalty arcs
                    a = _chain_node(base, l0, h0, t)
                    b = _chain_node(basen, ln, hn, t)
                    if a != b:
                        if a == _SNK or b == _SRC:
                            a, b = b, a
                        if a == _SRC and b == _SNK:
                            offset += penalty
                        else:
                            if fill == 1:
                                pu[n] = a
                                pv[n] = b
                                pc[n] = penalty
                                prc[n] = penalty
                            n += 1
                    # diagonals: inhibit arcs, both directions
                    for direction in range(2):
                        if direction == 0:
                            a = _chain_node(base, l0, h0, t)
                            b = _chain_node(basen, ln, hn, t - 1)
                        else:
                            a = _chain_node(basen, ln, hn, t)
                            b = _chain_node(base, l0, h0, t - 1)
                        if a == _SNK or b == _SRC or a == b:
                            continue
                        if a == _SRC and b == _SNK:
                            offset += inhibit_cap
                        else:
                            if fill == 1:
                                pu[n] = a
                                pv[n] = b
                                pc[n] = inhibit_cap
                                prc[n] = 0
                            n += 1
    return n, nchain, offset


@njit(cache=True)
def _pairs_to_csr(n_nodes, source, sink, pu, pv, pc, prc):
    """Turn arc pairs into CSR arrays; returns the forward arc id per pair."""
    npairs = pu.size
    deg = np.zeros(n_nodes, dtype=np.int64)
    for i in range(npairs):
        u = pu[i]
        v = pv[i]
        if u < 0:
            u = source if u == _SRC else sink
        if v < 0:
            v = source if v == _SRC else sink
        pu[i] = u
        pv[i] = v
        deg[u] += 1
        deg[v] += 1
    first_out = np.zeros(n_nodes + 1, dtype=np.int64)
    for u in range(n_nodes):
        first_out[u + 1] = first_out[u] + deg[u]
    cursor = first_out[:n_nodes].copy()
    head = np.empty(2 * npairs, dtype=np.int32)
    rev = np.empty(2 * npairs, dtype=np.int32)
    cap = np.empty(2 * npairs, dtype=np.int64)
    pair_arc = np.empty(npairs, dtype=np.int32)
    for i in range(npairs):
        u = pu[i]
        v = pv[i]
        au = cursor[u]
        cursor[u] += 1
        av = cursor[v]
        cursor[v] += 1
        head[au] = v
        head[av] = u
        cap[au] = pc[i]
        cap[av] = prc[i]
        rev[au] = np.int32(av)
        rev[av] = np.int32(au)
        pair_arc[i] = np.int32(au)
    return first_out, head, rev, cap, pair_arc


def full_windows(site_shape: tuple[int, int], num_labels: int):
    """Label windows admitting every label at every site."""
    rows, cols = site_shape
    lo = np.zeros(rows * cols, dtype=np.int32)
    hi = np.full(rows * cols, num_labels - 1, dtype=np.int32)
    return lo, hi


def build_network(volume, params: EnergyParams, lo=None, hi=None) -> FlowNetwork:
    """Build the cut network for a data-cost volume.

    ``volume`` is int64 ``(rows, cols, m)`` (see
    :func:`gazecut.energy.sad_volume`).  ``lo``/``hi`` are optional int32
    per-site label windows, flat or grid-shaped; omitted means the exact,
    unrestricted construction.
    """
    volume = np.ascontiguousarray(volume, dtype=np.int64)
    rows, cols, m = volume.shape
    sites = rows * cols
    if lo is None or hi is None:
        lo, hi = full_windows((rows, cols), m)
    lo = np.ascontiguousarray(np.asarray(lo, dtype=np.int32).reshape(sites))
    hi = np.ascontiguousarray(np.asarray(hi, dtype=np.int32).reshape(sites))
    if (lo < 0).any() or (hi >= m).any() or (lo > hi).any():
        raise ValueError("label windows must satisfy 0 <= lo <= hi < num_labels")

    widths = (hi - lo).astype(np.int64)
    node_base = np.zeros(sites + 1, dtype=np.int64)
    np.cumsum(widths, out=node_base[1:])
    n_interior = int(node_base[-1])
    n_nodes = n_interior + 2
    source, sink = n_interior, n_interior + 1

    dummy_i = np.empty(0, dtype=np.int64)
    npairs, nchain, offset = _emit(
        volume, lo, hi, params.penalty, params.inhibit_capacity,
        node_base, dummy_i, dummy_i, dummy_i, dummy_i, dummy_i, 0,
    )
    pu = np.empty(npairs, dtype=np.int64)
    pv = np.empty(npairs, dtype=np.int64)
    pc = np.empty(npairs, dtype=np.int64)
    prc = np.empty(npairs, dtype=np.int64)
    chain_pairs = np.empty(nchain, dtype=np.int64)
    _emit(
        volume, lo, hi, params.penalty, params.inhibit_capacity,
        node_base, pu, pv, pc, prc, chain_pairs, 1,
    )
    first_out, head, rev, cap, pair_arc = _pairs_to_csr(
        n_nodes, source, sink, pu, pv, pc, prc
    )
    chain_arcs = pair_arc[chain_pairs].astype(np.int32)
    chain_base = np.zeros(sites + 1, dtype=np.int64)
    np.cumsum((widths + 1) * (widths > 0), out=chain_base[1:])

    return FlowNetwork(
        n_nodes=n_nodes,
        source=source,
        sink=sink,
        first_out=first_out,
        head=head,
        rev=rev,
        cap=cap,
        resid=cap.copy(),
        const_offset=int(offset),
        site_shape=(rows, cols),
        num_labels=m,
        lo=lo,
        hi=hi,
        node_base=node_base,
        chain_arcs=chain_arcs,
        chain_base=chain_base,
    )


def expected_node_count(site_shape: tuple[int, int], num_labels: int) -> int:
    """Node count of the unrestricted construction: sites*(m-1) + 2."""
    rows, cols = site_shape
    return rows * cols * (num_labels - 1) + 2


def expected_arc_count(site_shape: tuple[int, int], num_labels: int) -> int:
    """Directed arc count of the unrestricted construction.

    Every emitted arc pair stores two directed arcs (forward + reverse):
    ``m`` chain pairs per site, ``m - 1`` same-level pairs and
    ``2*(m - 2)`` diagonal pairs per neighbouring site pair, so

        arcs = 2 * (sites*m + pairs*(m-1) + pairs*2*(m-2))    for m >= 2

    and a single-label volume folds into the offset entirely.
    """
    rows, cols = site_shape
    m = num_labels
    if m == 1:
        return 0
    sites = rows * cols
    pairs = rows * (cols - 1) + (rows - 1) * cols
    return 2 * (sites * m + pairs * (m - 1) + pairs * 2 * (m - 2))


def network_from_arcs(n_nodes: int, source: int, sink: int, arcs) -> FlowNetwork:
    """Build a generic network from ``(u, v, cap)`` or ``(u, v, cap, rcap)`` tuples."""
    npairs = len(arcs)
    pu = np.empty(npairs, dtype=np.int64)
    pv = np.empty(npairs, dtype=np.int64)
    pc = np.empty(npairs, dtype=np.int64)
    prc = np.zeros(npairs, dtype=np.int64)
    for i, arc in enumerate(arcs):
        u, v, c = arc[0], arc[1], arc[2]
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise ValueError(f"arc ({u}, {v}) outside node range")
        if c < 0 or (len(arc) > 3 and arc[3] < 0):
            raise ValueError("negative capacity")
        pu[i], pv[i], pc[i] = u, v, c
        if len(arc) > 3:
            prc[i] = arc[3]
    first_out, head, rev, cap, _ = _pairs_to_csr(
        n_nodes, source, sink, pu, pv, pc, prc
    )
    return FlowNetwork(
        n_nodes=n_nodes,
        source=source,
        sink=sink,
        first_out=first_out,
        head=head,
        rev=rev,
        cap=cap,
        resid=cap.copy(),
    )


def node_blocks(net: FlowNetwork, block: int) -> np.ndarray:
    """Scheduling block index of every node (terminals get block 0).

    Blocks tile the (row, gaze, level) space of chain nodes in cubes of
    side ``block``, numbered row-major; used by the level-2 solver to fix
    its discharge order.
    """
    if not net.has_chains:
        raise ValueError("network has no chain metadata")
    rows, cols = net.site_shape
    m = net.num_labels
    gb = -(-cols // block)
    mb = -(-m // block)
    out = np.zeros(net.n_nodes, dtype=np.int32)
    _fill_blocks(out, net.node_base, net.lo, rows, cols, block, gb, mb)
    return out


@njit(cache=True)
def _fill_blocks(out, node_base, lo, rows, cols, block, gb, mb):
    for y in range(rows):
        for g in range(cols):
            s = y * cols + g
            yb = (y // block) * gb * mb + (g // block) * mb
            for j in range(node_base[s + 1] - node_base[s]):
                t = lo[s] + 1 + j  # chain position of this node
                out[node_base[s] + j] = yb + (t // block)


def dump_network(net: FlowNetwork, file) -> None:
    """Write all directed arcs as text (debugging aid for small networks).

    Format: one header line ``nodes N source S sink T offset C``, then one
    ``tail head cap`` line per directed arc in CSR order.
    """
    file.write(
        f"nodes {net.n_nodes} source {net.source} sink {net.sink} "
        f"offset {net.const_offset}\n"
    )
    for u in range(net.n_nodes):
        for a in range(int(net.first_out[u]), int(net.first_out[u + 1])):
            file.write(f"{u} {int(net.head[a])} {int(net.cap[a])}\n")
