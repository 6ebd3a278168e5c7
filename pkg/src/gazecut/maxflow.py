"""Maximum-flow solvers and cut extraction.

Two independently written solvers operate on the same residual arrays:

* :func:`maxflow_reference`: Dinic's algorithm (BFS level graph + blocking
  flow).  Simple, exact, the cross-check route.
* :func:`maxflow_push_relabel`: FIFO preflow-push whose outer loop
  alternates global relabeling (reverse breadth-first height recomputation)
  with a fixed number of discharge rounds, optionally scheduling each
  round's nodes block by block and capping the number of sweeps.  Uncapped
  it is exact; capped it is the level-2 approximation.

Both leave the final flow in ``net.resid``; the labeling is read off the
source side of the residual graph (breadth-first from the source), which is
the canonical minimal minimum cut, so all exact solvers extract identical
labelings.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .energy import EnergyParams, total_energy
from .flownet import FlowNetwork, build_network, node_blocks

_BIG = np.int64(1) << np.int64(62)


@dataclass
class CutResult:
    """Outcome of a solve: flow, energy, labeling and bookkeeping.

    ``energy`` includes the network's constant offset.  For exact solves it
    equals both ``flow + const_offset`` and the labeling's energy recomputed
    from the volume; solvers stopped by a sweep cap report the recomputed
    labeling energy (their residual flow is not maximal).
    """

    flow: int
    energy: Optional[int] = None
    labeling: Optional[np.ndarray] = None
    source_side: Optional[np.ndarray] = None
    stats: dict = field(default_factory=dict)


class InternalConsistencyError(AssertionError):
    """A solver invariant failed (cut cost vs labeling energy, chain shape)."""


# ---------------------------------------------------------------------------
# Dinic (reference solver)


@njit(cache=True)
def _dinic(first_out, head, rev, resid, n, source, sink):
    level = np.empty(n, dtype=np.int32)
    cur = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int32)
    path = np.empty(n + 1, dtype=np.int64)
    nodes = np.empty(n + 1, dtype=np.int32)
    total = np.int64(0)

    while True:
        # BFS over the residual graph builds the level graph
        level[:] = -1
        level[source] = 0
        queue[0] = source
        qh, qt = 0, 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for a in range(first_out[u], first_out[u + 1]):
                if resid[a] > 0:
                    v = head[a]
                    if level[v] < 0:
                        level[v] = level[u] + 1
                        queue[qt] = v
                        qt += 1
        if level[sink] < 0:
            return total

        # blocking flow by advance/retreat
        for u in range(n):
            cur[u] = first_out[u]
        top = 0
        nodes[0] = source
        u = np.int32(source)
        while True:
            if u == sink:
                bottleneck = _BIG
                for i in range(top):
                    if resid[path[i]] < bottleneck:
                        bottleneck = resid[path[i]]
                for i in range(top):
                    a = path[i]
                    resid[a] -= bottleneck
                    resid[rev[a]] += bottleneck
                total += bottleneck
                newtop = top
                for i in range(top):
                    if resid[path[i]] == 0:
                        newtop = i
                        break
                top = newtop
                u = nodes[top]
                continue
            advanced = False
            while cur[u] < first_out[u + 1]:
                a = cur[u]
                v = head[a]
                if resid[a] > 0 and level[v] == level[u] + 1:
                    path[top] = a
                    nodes[top + 1] = v
                    top += 1
                    u = v
                    advanced = True
                    break
                cur[u] += 1
            if advanced:
                continue
            level[u] = -1  # dead end this phase
            if u == source:
                break
            top -= 1
            u = nodes[top]
            cur[u] += 1


# ---------------------------------------------------------------------------
# push-relabel


@njit(cache=True)
def _global_relabel(first_out, head, rev, resid, n, source, sink, h):
    """Heights = BFS distance to sink through residual arcs; nodes that
    cannot reach the sink get n + distance to source (so their excess can
    drain back).  Unreachable from both ends parks at 2n."""
    hmax = 2 * n
    queue = np.empty(n, dtype=np.int32)
    for u in range(n):
        h[u] = hmax
    h[sink] = 0
    queue[0] = sink
    qh, qt = 0, 1
    while qh < qt:
        w = queue[qh]
        qh += 1
        for a in range(first_out[w], first_out[w + 1]):
            v = head[a]
            if v != source and h[v] == hmax and resid[rev[a]] > 0:
                h[v] = h[w] + 1
                queue[qt] = v
                qt += 1
    h[source] = n
    queue[0] = source
    qh, qt = 0, 1
    while qh < qt:
        w = queue[qh]
        qh += 1
        for a in range(first_out[w], first_out[w + 1]):
            v = head[a]
            if v != sink and h[v] == hmax and resid[rev[a]] > 0:
                h[v] = h[w] + 1
                queue[qt] = v
                qt += 1


@njit(cache=True)
def _saturate_source(first_out, head, rev, resid, excess, source):
    for a in range(first_out[source], first_out[source + 1]):
        f = resid[a]
        if f > 0:
            resid[a] = 0
            resid[rev[a]] += f
            excess[head[a]] += f


@njit(cache=True)
def _discharge_rounds(
    first_out, head, rev, resid, n, source, sink,
    h, excess, cur, queue, nextq, in_queue, nq, rounds, order_key,
):
    """Run up to ``rounds`` FIFO rounds starting from queue[:nq].

    Each round fully discharges every queued node (relabeling in place as
    needed); nodes activated or left active move to the next round.  When
    ``order_key`` is non-empty each round is processed in ascending key
    order.  Returns (surviving queue length, pushes, relabels).
    """
    hmax = 2 * n
    pushes = np.int64(0)
    relabels = np.int64(0)
    for _ in range(rounds):
        if nq == 0:
            break
        if order_key.size > 0:
            keys = np.empty(nq, dtype=np.int64)
            for i in range(nq):
                keys[i] = order_key[queue[i]] * np.int64(n) + queue[i]
            perm = np.argsort(keys)
            tmp = np.empty(nq, dtype=np.int32)
            for i in range(nq):
                tmp[i] = queue[perm[i]]
            queue[:nq] = tmp
        nn = 0
        for qi in range(nq):
            u = queue[qi]
            in_queue[u] = 0
            if excess[u] <= 0 or h[u] >= hmax:
                continue
            while excess[u] > 0 and h[u] < hmax:
                if cur[u] >= first_out[u + 1]:
                    # relabel: one above the lowest reachable neighbour
                    newh = hmax
                    for a in range(first_out[u], first_out[u + 1]):
                        if resid[a] > 0 and h[head[a]] + 1 < newh:
                            newh = h[head[a]] + 1
                    h[u] = newh
                    cur[u] = first_out[u]
                    relabels += 1
                    if newh >= hmax:
                        break
                    continue
                a = cur[u]
                v = head[a]
                if resid[a] > 0 and h[u] == h[v] + 1:
                    f = excess[u] if excess[u] < resid[a] else resid[a]
                    resid[a] -= f
                    resid[rev[a]] += f
                    excess[u] -= f
                    excess[v] += f
                    pushes += 1
                    if v != source and v != sink and in_queue[v] == 0 and h[v] < hmax:
                        nextq[nn] = v
                        nn += 1
                        in_queue[v] = 1
                else:
                    cur[u] += 1
            if excess[u] > 0 and h[u] < hmax and in_queue[u] == 0:
                nextq[nn] = u
                nn += 1
                in_queue[u] = 1
        queue[:nn] = nextq[:nn]
        nq = nn
    return nq, pushes, relabels


@njit(cache=True)
def _collect_active(excess, h, n, source, sink, queue, in_queue):
    hmax = 2 * n
    nq = 0
    for u in range(n):
        in_queue[u] = 0
    for u in range(n):
        if u != source and u != sink and excess[u] > 0 and h[u] < hmax:
            queue[nq] = u
            in_queue[u] = 1
            nq += 1
    return nq


@njit(cache=True)
def _bfs_source_side(first_out, head, resid, n, source):
    side = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int32)
    side[source] = True
    queue[0] = source
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        for a in range(first_out[u], first_out[u + 1]):
            if resid[a] > 0:
                v = head[a]
                if not side[v]:
                    side[v] = True
                    queue[qt] = v
                    qt += 1
    return side


@njit(cache=True)
def _chain_presaturate(rev, resid, chain_arcs, chain_base, nsites):
    total = np.int64(0)
    for s in range(nsites):
        a0, a1 = chain_base[s], chain_base[s + 1]
        if a1 <= a0:
            continue
        f = _BIG
        for i in range(a0, a1):
            if resid[chain_arcs[i]] < f:
                f = resid[chain_arcs[i]]
        if f > 0:
            for i in range(a0, a1):
                a = chain_arcs[i]
                resid[a] -= f
                resid[rev[a]] += f
            total += f
    return total


@njit(cache=True)
def _extract_labels(side, node_base, lo, nsites, labels):
    bad = 0
    for s in range(nsites):
        count = 0
        prev = True
        for i in range(node_base[s], node_base[s + 1]):
            if side[i]:
                if not prev:
                    bad += 1  # chain cut more than once
                count += 1
            prev = side[i]
        labels[s] = lo[s] + count
    return bad


@njit(cache=True)
def _conservation_violations(first_out, cap, resid, n, source, sink):
    bad = 0
    for u in range(n):
        if u == source or u == sink:
            continue
        net = np.int64(0)
        for a in range(first_out[u], first_out[u + 1]):
            net += cap[a] - resid[a]
        if net != 0:
            bad += 1
    return bad


# ---------------------------------------------------------------------------
# python-level API


def chain_presaturate(net: FlowNetwork) -> int:
    """Push each chain's minimum data cost straight through it.

    A feasible starting flow (no excess anywhere); returns the amount
    pushed.  No-op on networks without chain metadata.
    """
    if not net.has_chains:
        return 0
    nsites = net.site_shape[0] * net.site_shape[1]
    return int(
        _chain_presaturate(net.rev, net.resid, net.chain_arcs, net.chain_base, nsites)
    )


def source_side(net: FlowNetwork) -> np.ndarray:
    """Nodes reachable from the source in the residual graph."""
    return _bfs_source_side(
        net.first_out, net.head, net.resid, net.n_nodes, net.source
    )


def extract_labeling(net: FlowNetwork, side: Optional[np.ndarray] = None) -> np.ndarray:
    """Read the labeling off a cut: per chain, how far the source side reaches."""
    if not net.has_chains:
        raise ValueError("network has no chain metadata")
    if side is None:
        side = source_side(net)
    rows, cols = net.site_shape
    labels = np.empty(rows * cols, dtype=np.int32)
    bad = _extract_labels(side, net.node_base, net.lo, rows * cols, labels)
    if bad:
        raise InternalConsistencyError(f"{bad} chains cut more than once")
    return labels.reshape(rows, cols)


def conservation_violations(net: FlowNetwork) -> int:
    """Number of non-terminal nodes whose net flow is not zero."""
    return int(
        _conservation_violations(
            net.first_out, net.cap, net.resid, net.n_nodes, net.source, net.sink
        )
    )


def maxflow_reference(net: FlowNetwork) -> CutResult:
    """Exact max flow by Dinic's algorithm."""
    t0 = time.perf_counter()
    flow = int(
        _dinic(
            net.first_out, net.head, net.rev, net.resid,
            net.n_nodes, net.source, net.sink,
        )
    )
    stats = {"solver": "dinic", "wall_s": time.perf_counter() - t0, "converged": True}
    side = source_side(net)
    result = CutResult(flow=flow, source_side=side, stats=stats)
    if net.has_chains:
        result.labeling = extract_labeling(net, side)
        result.energy = flow + net.const_offset
    return result


def maxflow_push_relabel(
    net: FlowNetwork,
    rounds_per_sweep: int = 12,
    max_sweeps: Optional[int] = None,
    block: Optional[int] = None,
    presaturate: bool = True,
) -> CutResult:
    """Preflow-push with periodic global relabeling.

    Alternates a global height recomputation with ``rounds_per_sweep`` FIFO
    discharge rounds until no active nodes remain, or until ``max_sweeps``
    sweeps have run (the approximate mode; ``stats['converged']`` says
    which).  ``block`` schedules each round's discharges in ascending
    block-index order (see :func:`gazecut.flownet.node_blocks`).
    """
    if rounds_per_sweep < 1:
        raise ValueError("rounds_per_sweep must be >= 1")
    t0 = time.perf_counter()
    n = net.n_nodes
    base_flow = chain_presaturate(net) if presaturate else 0
    if block is not None:
        order_key = node_blocks(net, block).astype(np.int64)
    else:
        order_key = np.empty(0, dtype=np.int64)

    h = np.zeros(n, dtype=np.int32)
    excess = np.zeros(n, dtype=np.int64)
    cur = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int32)
    nextq = np.empty(n, dtype=np.int32)
    in_queue = np.zeros(n, dtype=np.uint8)
    _saturate_source(net.first_out, net.head, net.rev, net.resid, excess, net.source)

    sweeps = 0
    pushes = np.int64(0)
    relabels = np.int64(0)
    converged = True
    while True:
        _global_relabel(
            net.first_out, net.head, net.rev, net.resid, n, net.source, net.sink, h
        )
        nq = _collect_active(excess, h, n, net.source, net.sink, queue, in_queue)
        if nq == 0:
            break
        if max_sweeps is not None and sweeps >= max_sweeps:
            converged = False
            break
        cur[:] = net.first_out[:n]
        nq, p, r = _discharge_rounds(
            net.first_out, net.head, net.rev, net.resid, n, net.source, net.sink,
            h, excess, cur, queue, nextq, in_queue, nq, rounds_per_sweep, order_key,
        )
        pushes += p
        relabels += r
        sweeps += 1

    flow = base_flow + int(excess[net.sink])
    stats = {
        "solver": "push-relabel",
        "wall_s": time.perf_counter() - t0,
        "converged": converged,
        "sweeps": sweeps,
        "pushes": int(pushes),
        "relabels": int(relabels),
        "presaturated": base_flow,
        "stranded_excess_nodes": int(
            ((excess > 0) & (np.arange(n) != net.source) & (np.arange(n) != net.sink)).sum()
        ),
    }
    side = source_side(net)
    result = CutResult(flow=flow, source_side=side, stats=stats)
    if net.has_chains:
        result.labeling = extract_labeling(net, side)
        if converged:
            result.energy = flow + net.const_offset
    return result


def solve_exact(
    volume,
    params: EnergyParams,
    solver: str = "push-relabel",
    rounds_per_sweep: int = 12,
) -> CutResult:
    """Globally minimize the labeling energy of a data-cost volume.

    Builds the cut network, runs the chosen exact solver and verifies the
    cut-cost identity (flow + offset == labeling energy) before returning.
    """
    t0 = time.perf_counter()
    net = build_network(volume, params)
    build_s = time.perf_counter() - t0
    if solver == "push-relabel":
        result = maxflow_push_relabel(net, rounds_per_sweep=rounds_per_sweep)
    elif solver == "dinic":
        result = maxflow_reference(net)
    else:
        raise ValueError(f"unknown solver {solver!r} (push-relabel or dinic)")
    check = total_energy(result.labeling, volume, params)
    if check != result.energy:
        raise InternalConsistencyError(
            f"cut cost {result.energy} != labeling energy {check}"
        )
    result.stats["build_s"] = build_s
    result.stats["nodes"] = net.n_nodes
    result.stats["arcs"] = net.num_arcs
    result.stats["const_offset"] = net.const_offset
    return result
