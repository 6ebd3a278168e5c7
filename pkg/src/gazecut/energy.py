"""Matching energy: per-site data costs and pairwise smoothing costs.

A labeling assigns one depth number to every matching site (gaze line x
row).  Its energy is

    E(X) = sum_sites data(site, X_site) + sum_4-neighbour-pairs smooth(X_u - X_v)

where ``data`` is the RGB sum of absolute differences of the two pixels a
cross point projects to (0..765 for 8-bit images) and ``smooth`` is the
convex profile

    smooth(delta) = penalty * |delta| + inhibit * (|delta| - 1)   for |delta| >= 2
    smooth(+-1)   = penalty
    smooth(0)     = 0

Its second differences are ``2*penalty`` at 0, ``inhibit`` at +-1 and zero
beyond, which is what the graph construction in :mod:`gazecut.flownet`
realizes arc by arc.  ``hard_inhibit`` replaces ``inhibit`` with an
uncuttable capacity, forbidding jumps of more than one depth step between
neighbours outright.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CuboidSpec, site_columns

# Capacity treated as infinite by the solvers.  Any finite cut here is far
# below 2**35, so 2**56 is uncuttable while leaving int64 headroom for the
# excess a preflow can pile onto one node (several saturated arcs of it).
UNCUTTABLE = 1 << 56


@dataclass(frozen=True)
class EnergyParams:
    penalty: int = 14
    inhibit: int = 1023
    hard_inhibit: bool = False

    def __post_init__(self):
        if self.penalty < 0 or self.inhibit < 0:
            raise ValueError("penalty and inhibit must be non-negative")

    @property
    def inhibit_capacity(self) -> int:
        """Arc capacity realizing the inhibit term (uncuttable when hard)."""
        return UNCUTTABLE if self.hard_inhibit else self.inhibit


def data_term(colour_a, colour_b) -> int:
    """Sum of absolute channel differences of two pixels."""
    a = np.asarray(colour_a, dtype=np.int64)
    b = np.asarray(colour_b, dtype=np.int64)
    return int(np.abs(a - b).sum())


def pairwise_term(i: int, j: int, params: EnergyParams) -> int:
    """Smoothing cost of neighbouring sites labelled ``i`` and ``j``."""
    delta = abs(i - j)
    if delta == 0:
        return 0
    if delta > 1 and params.hard_inhibit:
        return UNCUTTABLE
    return params.penalty * delta + params.inhibit * (delta - 1)


def is_convex_profile(h, max_delta: int) -> bool:
    """True iff ``h`` has non-negative second differences on [-max_delta, max_delta].

    ``h`` is called on integer label differences.  Convexity in this sense
    is exactly what makes the chain construction's arc capacities
    non-negative, hence the energy exactly minimizable.
    """
    for delta in range(-max_delta + 1, max_delta):
        if h(delta - 1) - 2 * h(delta) + h(delta + 1) < 0:
            return False
    return True


def sad_volume(left, right, cuboid: CuboidSpec, width: int | None = None) -> np.ndarray:
    """Data cost of every cross point in the cuboid.

    Returns an int64 array of shape ``(y_extent, g_extent, num_labels)``:
    the RGB sum of absolute differences between the left and right pixels
    each cross point projects to.  Cross points whose columns fall outside
    the image read the border column (the cuboid may be wider than the
    always-in-image gaze range).
    """
    left = np.asarray(left)
    right = np.asarray(right)
    if left.shape != right.shape:
        raise ValueError(f"image shapes differ: {left.shape} vs {right.shape}")
    if left.ndim == 2:
        left = left[:, :, None]
        right = right[:, :, None]
    h, w = left.shape[:2]
    if width is None:
        width = w
    cuboid.check_consistent(width, h)

    rows = slice(cuboid.y_min, cuboid.y_min + cuboid.y_extent)
    left_rows = left[rows].astype(np.int16)
    right_rows = right[rows].astype(np.int16)
    volume = np.empty(
        (cuboid.y_extent, cuboid.g_extent, cuboid.num_labels), dtype=np.int64
    )
    for k in range(cuboid.num_labels):
        x_l, x_r = site_columns(cuboid, k, width)
        diff = np.abs(left_rows[:, x_l, :] - right_rows[:, x_r, :])
        volume[:, :, k] = diff.sum(axis=2, dtype=np.int64)
    return volume


def neighbour_pairs(site_shape: tuple[int, int]):
    """Index arrays (ua, va) of all horizontal-then-vertical 4-neighbour pairs.

    Sites are numbered row-major over ``site_shape = (rows, gaze lines)``.
    """
    rows, cols = site_shape
    idx = np.arange(rows * cols).reshape(rows, cols)
    ua = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    va = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return ua, va


def total_energy(labeling, volume, params: EnergyParams) -> int:
    """Energy of a labeling against a data-cost volume.

    ``labeling`` is int, shape ``(rows, gaze lines)``; ``volume`` is the
    matching :func:`sad_volume` output.  Label values index the volume's
    last axis.
    """
    labeling = np.asarray(labeling)
    rows, cols, m = volume.shape
    if labeling.shape != (rows, cols):
        raise ValueError(f"labeling shape {labeling.shape} != site grid {(rows, cols)}")
    if labeling.min() < 0 or labeling.max() >= m:
        raise ValueError("label outside volume range")

    yy, gg = np.indices(labeling.shape)
    data = int(volume[yy, gg, labeling].sum())

    smooth = 0
    for du in (labeling[:, :-1] - labeling[:, 1:], labeling[:-1, :] - labeling[1:, :]):
        delta = np.abs(du.astype(np.int64))
        if params.hard_inhibit and (delta > 1).any():
            return UNCUTTABLE  # disallowed configuration
        smooth += int(
            params.penalty * delta.sum()
            + params.inhibit * np.maximum(delta - 1, 0).sum()
        )
    return data + smooth
