"""Brute-force reference implementations used to check the solvers.

Everything here is written the slow, obvious way, independent of the graph
construction and of the vectorized energy in :mod:`gazecut.energy`, so it
can serve as ground truth for both.
"""

from __future__ import annotations

import numpy as np

from .energy import UNCUTTABLE, EnergyParams


def plain_energy(labeling, volume, params: EnergyParams) -> int:
    """Energy by direct double loops over sites and neighbour pairs."""
    lab = np.asarray(labeling)
    rows, cols, m = volume.shape
    total = 0
    for y in range(rows):
        for g in range(cols):
            total += int(volume[y, g, lab[y, g]])
    for y in range(rows):
        for g in range(cols):
            for yn, gn in ((y, g + 1), (y + 1, g)):
                if yn < rows and gn < cols:
                    delta = abs(int(lab[y, g]) - int(lab[yn, gn]))
                    if delta == 0:
                        continue
                    if delta > 1 and params.hard_inhibit:
                        return UNCUTTABLE
                    total += params.penalty * delta + params.inhibit * (delta - 1)
    return total


def exhaustive_minimum(volume, params: EnergyParams):
    """Globally minimal energy and one minimizing labeling, by enumeration.

    Enumerates all m**sites labelings (vectorized in blocks); the first
    minimizer in mixed-radix order is returned, so results are
    deterministic.  Only sensible for a handful of sites.
    """
    rows, cols, m = volume.shape
    sites = rows * cols
    total = m**sites
    if total > 20_000_000:
        raise ValueError(f"{total} labelings is too many to enumerate")

    data = volume.reshape(sites, m).astype(np.int64)
    ua, va = _pairs(rows, cols)
    inhibit = params.inhibit_capacity

    best_energy = None
    best_index = -1
    block = 1 << 16
    for start in range(0, total, block):
        count = min(block, total - start)
        codes = np.arange(start, start + count, dtype=np.int64)
        labels = np.empty((count, sites), dtype=np.int64)
        rem = codes
        for s in range(sites - 1, -1, -1):  # last site varies fastest
            labels[:, s] = rem % m
            rem = rem // m
        energy = data[np.arange(sites), labels].sum(axis=1)
        delta = np.abs(labels[:, ua] - labels[:, va])
        energy += params.penalty * delta.sum(axis=1)
        energy += inhibit * np.maximum(delta - 1, 0).sum(axis=1)
        i = int(energy.argmin())
        if best_energy is None or energy[i] < best_energy:
            best_energy = int(energy[i])
            best_index = start + i

    rem = best_index
    lab = np.empty(sites, dtype=np.int32)
    for s in range(sites - 1, -1, -1):
        lab[s] = rem % m
        rem //= m
    return best_energy, lab.reshape(rows, cols)


def _pairs(rows, cols):
    idx = np.arange(rows * cols).reshape(rows, cols)
    ua = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    va = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return ua, va


def plain_maxflow(n_nodes, source, sink, arcs):
    """Max flow by repeated BFS augmentation over an adjacency-matrix residual.

    ``arcs`` is an iterable of ``(u, v, cap)``; parallel arcs add up.  Dense
    and slow, for cross-checking small networks only.
    """
    if n_nodes > 600:
        raise ValueError("plain_maxflow is for small networks")
    resid = np.zeros((n_nodes, n_nodes), dtype=np.int64)
    for u, v, cap in arcs:
        resid[u, v] += cap

    flow = 0
    while True:
        parent = np.full(n_nodes, -1, dtype=np.int64)
        parent[source] = source
        queue = [source]
        while queue and parent[sink] < 0:
            u = queue.pop(0)
            for v in np.nonzero(resid[u] > 0)[0]:
                if parent[v] < 0:
                    parent[v] = u
                    queue.append(v)
        if parent[sink] < 0:
            return flow
        bottleneck = None
        v = sink
        while v != source:
            u = int(parent[v])
            r = int(resid[u, v])
            bottleneck = r if bottleneck is None else min(bottleneck, r)
            v = u
        v = sink
        while v != source:
            u = int(parent[v])
            resid[u, v] -= bottleneck
            resid[v, u] += bottleneck
            v = u
        flow += bottleneck
