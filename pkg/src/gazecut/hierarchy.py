"""Hierarchical approximation: solve coarse, refine inside a thin skin.

Level 1: shrink the volume by an integer factor ``b`` along all three axes
(data costs of a coarse cell = sum of its fine cells, penalty scaled by
``b``, inhibit kept), cut the coarse problem exactly, then cut the fine
problem exactly but restricted to a thin skin of labels around the
upsampled coarse surface.

Level 2: same skin, but the fine solve runs the capped block-scheduled
push-relabel instead of converging, trading exactness inside the skin for
time.  With ``b = 1`` and no sweep cap both levels degenerate to the exact
solve.

Energies can only go up the ladder: exact <= level 1 <= level 2 (the skin
restricts the label space; the cap stops short of the skin's optimum).
"""

from __future__ import annotations

import time
from dataclasses import replace
from typing import Optional

import numpy as np

from .energy import EnergyParams, total_energy
from .flownet import build_network
from .maxflow import (
    CutResult,
    InternalConsistencyError,
    maxflow_push_relabel,
    maxflow_reference,
)

DEFAULT_SKIN_RADIUS = 1
DEFAULT_L2_SWEEPS = 8


def coarsen(volume, block: int, params: EnergyParams):
    """Sum the volume over ``block``-cubes (zero-padded) and scale penalty.

    Returns ``(coarse_volume, coarse_params)``.  Each coarse boundary
    bundles ``block`` fine boundaries of ``block`` sites each, hence the
    penalty scale; the inhibit term stays as is.
    """
    if block < 1:
        raise ValueError("block must be >= 1")
    volume = np.asarray(volume, dtype=np.int64)
    rows, cols, m = volume.shape
    rb, cb, mb = (-(-rows // block), -(-cols // block), -(-m // block))
    padded = np.zeros((rb * block, cb * block, mb * block), dtype=np.int64)
    padded[:rows, :cols, :m] = volume
    coarse = (
        padded.reshape(rb, block, cb, block, mb, block)
        .sum(axis=(1, 3, 5), dtype=np.int64)
    )
    return coarse, replace(params, penalty=params.penalty * block)


def thin_skin(coarse_labeling, fine_shape, block: int, radius: int = DEFAULT_SKIN_RADIUS):
    """Per-site fine label windows around an upsampled coarse labeling.

    A coarse label ``D`` covers fine labels ``[block*D, block*(D+1) - 1]``;
    the window widens by ``radius`` coarse steps on each side and clamps to
    the fine label range.  Returns int32 ``(lo, hi)`` grids of the fine
    site shape.
    """
    rows, cols, m = fine_shape
    coarse = np.asarray(coarse_labeling, dtype=np.int64)
    up = coarse.repeat(block, axis=0).repeat(block, axis=1)[:rows, :cols]
    lo = np.maximum(block * (up - radius), 0)
    hi = np.minimum(block * (up + radius + 1) - 1, m - 1)
    return lo.astype(np.int32), hi.astype(np.int32)


def _solve_restricted_exact(volume, params, lo, hi, solver, rounds_per_sweep):
    net = build_network(volume, params, lo=lo, hi=hi)
    if solver == "dinic":
        result = maxflow_reference(net)
    else:
        result = maxflow_push_relabel(net, rounds_per_sweep=rounds_per_sweep)
    check = total_energy(result.labeling, volume, params)
    if check != result.energy:
        raise InternalConsistencyError(
            f"cut cost {result.energy} != labeling energy {check}"
        )
    result.stats["nodes"] = net.n_nodes
    result.stats["arcs"] = net.num_arcs
    return result


def solve_level1(
    volume,
    params: EnergyParams,
    block: int,
    skin_radius: int = DEFAULT_SKIN_RADIUS,
    solver: str = "push-relabel",
    rounds_per_sweep: int = 12,
) -> CutResult:
    """Coarse exact cut, then exact cut inside the thin skin."""
    t0 = time.perf_counter()
    coarse_vol, coarse_params = coarsen(volume, block, params)
    coarse = _solve_restricted_exact(
        coarse_vol, coarse_params, None, None, solver, rounds_per_sweep
    )
    lo, hi = thin_skin(coarse.labeling, volume.shape, block, skin_radius)
    result = _solve_restricted_exact(volume, params, lo, hi, solver, rounds_per_sweep)
    result.stats.update(
        level=1,
        block=block,
        skin_radius=skin_radius,
        coarse_energy=coarse.energy,
        coarse_wall_s=coarse.stats["wall_s"],
        mean_window=float((hi - lo + 1).mean()),
        wall_s=time.perf_counter() - t0,
    )
    return result


def solve_level2(
    volume,
    params: EnergyParams,
    block: int,
    skin_radius: int = DEFAULT_SKIN_RADIUS,
    rounds_per_sweep: int = 12,
    max_sweeps: Optional[int] = DEFAULT_L2_SWEEPS,
) -> CutResult:
    """Coarse exact cut, then capped block-scheduled push-relabel in the skin.

    The fine stage schedules each discharge round block by block and stops
    after ``max_sweeps`` global sweeps even if flow could still grow; the
    labeling is read off whatever cut the residual then yields and its
    energy is recomputed from the volume.  ``max_sweeps=None`` removes the
    cap, making the result identical to level 1.
    """
    t0 = time.perf_counter()
    coarse_vol, coarse_params = coarsen(volume, block, params)
    coarse = _solve_restricted_exact(
        coarse_vol, coarse_params, None, None, "push-relabel", rounds_per_sweep
    )
    lo, hi = thin_skin(coarse.labeling, volume.shape, block, skin_radius)
    net = build_network(volume, params, lo=lo, hi=hi)
    result = maxflow_push_relabel(
        net,
        rounds_per_sweep=rounds_per_sweep,
        max_sweeps=max_sweeps,
        block=block,
    )
    result.energy = int(total_energy(result.labeling, volume, params))
    if result.stats["converged"] and result.energy != result.flow + net.const_offset:
        raise InternalConsistencyError(
            f"cut cost {result.flow + net.const_offset} != labeling energy {result.energy}"
        )
    result.stats.update(
        level=2,
        block=block,
        skin_radius=skin_radius,
        coarse_energy=coarse.energy,
        coarse_wall_s=coarse.stats["wall_s"],
        mean_window=float((hi - lo + 1).mean()),
        nodes=net.n_nodes,
        arcs=net.num_arcs,
        wall_s=time.perf_counter() - t0,
    )
    return result
