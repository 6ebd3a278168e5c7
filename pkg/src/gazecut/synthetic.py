"""Seeded synthetic stereo pairs with exact ground truth.

Scenes are a textured background plane plus a few textured rectangles and
ellipses floating in front of it, all fronto-parallel.  The right image
fixes the surface parameterization; the left image is the same surfaces
shifted by their disparity, nearer surfaces painted last, so occlusions and
disocclusions come out the way a real camera pair produces them.  All
disparities are odd, hence exactly representable by integer depth numbers
at even image widths, and the ground-truth image marks right pixels whose
match would fall off the left image with 0 (no ground truth).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SyntheticScene:
    left: np.ndarray       # uint8 (h, w, 3)
    right: np.ndarray      # uint8 (h, w, 3)
    gt_image: np.ndarray   # uint8 (h, w), disparity * gt_scale, 0 = none
    gt_scale: int
    disparity: np.ndarray  # int32 (h, w), true disparity of every right pixel
    dis_min: int
    dis_max: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.right.shape[:2]


def _blur3(a: np.ndarray, axis: int) -> np.ndarray:
    """Box blur of width 3 with clamped edges."""
    pad = [(0, 0)] * a.ndim
    pad[axis] = (1, 1)
    p = np.pad(a, pad, mode="edge")
    sl = [slice(None)] * a.ndim
    out = np.zeros_like(a, dtype=np.float64)
    for k in range(3):
        sl[axis] = slice(k, k + a.shape[axis])
        out += p[tuple(sl)]
    return out / 3.0


def _texture(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    t = rng.integers(0, 256, (height, width, 3)).astype(np.float64)
    for _ in range(2):
        t = _blur3(_blur3(t, 0), 1)
    lo, hi = t.min(), t.max()
    return ((t - lo) * (255.0 / max(hi - lo, 1e-9))).astype(np.uint8)


def make_scene(
    seed: int,
    width: int = 384,
    height: int = 288,
    dis_min: int = 10,
    dis_max: int = 28,
    n_shapes: int = 6,
    noise: int = 1,
    gt_scale: int | None = None,
) -> SyntheticScene:
    """Deterministic scene for a given seed.

    Disparities are drawn from the odd values in ``[dis_min, dis_max]``,
    background at the smallest.  ``noise`` is the amplitude of uniform
    pixel noise added to the left image.
    """
    if not 0 < dis_min <= dis_max < width // 2:
        raise ValueError("need 0 < dis_min <= dis_max < width/2")
    rng = np.random.default_rng(seed)
    odd = np.arange(dis_min + (dis_min % 2 == 0), dis_max + 1, 2)
    if odd.size == 0:
        raise ValueError("no odd disparity in range")
    if gt_scale is None:
        gt_scale = min(8, 255 // int(odd[-1]))

    bg_dis = int(odd[0])
    # background texture indexed by left column: the right view sees columns
    # bg_dis.. of it, the left view (including revealed strips) columns 0..
    tex_bg = _texture(rng, height, width + bg_dis)
    ys, xs = np.mgrid[0:height, 0:width]

    surfaces = [(bg_dis, np.ones((height, width), dtype=bool), tex_bg[:, bg_dis:])]
    if odd.size > 1:
        shape_dis = np.sort(rng.choice(odd[1:], size=n_shapes, replace=True))
    else:
        shape_dis = np.full(n_shapes, bg_dis)
    for dis in shape_dis:
        cx = rng.integers(width // 6, width - width // 6)
        cy = rng.integers(height // 6, height - height // 6)
        ax = max(2, rng.integers(width // 12, width // 5))
        ay = max(2, rng.integers(max(height // 12, 1), max(height // 4, 2)))
        if rng.integers(2) == 0:
            mask = (np.abs(xs - cx) <= ax) & (np.abs(ys - cy) <= ay)
        else:
            mask = ((xs - cx) / ax) ** 2 + ((ys - cy) / ay) ** 2 <= 1.0
        surfaces.append((int(dis), mask, _texture(rng, height, width)))

    right = np.zeros((height, width, 3), dtype=np.uint8)
    disparity = np.zeros((height, width), dtype=np.int32)
    left = np.zeros((height, width, 3), dtype=np.uint8)
    painted = np.zeros((height, width), dtype=bool)
    # ascending disparity: nearer surfaces overwrite farther ones
    for dis, mask, tex in surfaces:
        right[mask] = tex[mask]
        disparity[mask] = dis
        my, mx = np.nonzero(mask)
        xl = mx + dis
        keep = xl < width
        left[my[keep], xl[keep]] = tex[my[keep], mx[keep]]
        painted[my[keep], xl[keep]] = True

    # disocclusions: strips the right view cannot see; continue the background
    hy, hx = np.nonzero(~painted)
    left[hy, hx] = tex_bg[hy, hx]

    if noise > 0:
        jitter = rng.integers(-noise, noise + 1, left.shape)
        left = np.clip(left.astype(np.int16) + jitter, 0, 255).astype(np.uint8)

    gt = disparity * gt_scale
    gt[xs + disparity >= width] = 0  # match falls off the left image
    return SyntheticScene(
        left=left,
        right=right,
        gt_image=gt.astype(np.uint8),
        gt_scale=int(gt_scale),
        disparity=disparity,
        dis_min=int(odd[0]),
        dis_max=int(odd[-1]),
    )
