"""Integer coordinate systems for symmetric stereo matching.

The same 3D sample point has four equivalent integer descriptions:

* a pixel pair ``(x_l, x_r, y)``: one column in each rectified image of a
  row-aligned pair;
* gaze/depth coordinates ``(g, d, y)``: ``g`` indexes the family of sight
  lines with constant column sum ``x_l + x_r``, and ``d`` counts depth steps
  along a line, ``d = 0`` nearest to the cameras;
* cuboid coordinates ``(W, H, S)``: shifted copies of ``(g, y, d)`` used to
  address an axis-aligned solve volume;
* right-image disparity form ``(x, y, dis)`` with ``x = x_r`` and
  ``dis = x_l - x_r``.

For an image width ``w`` the exact relations are::

    x_r = g + d          x_l = (w - 1) + g - d       dis = (w - 1) - 2*d

so a pixel pair corresponds to integer ``(g, d)`` iff ``x_l + x_r`` has the
parity of ``w - 1``.  Every transform below is exact integer arithmetic
except the two halvings in :func:`whs_from_disparity`, which round away
from zero; with the offset conventions produced by
:func:`cuboid_from_disparity_range` the rounding cancels and write/read
round trips are exact (disparities emitted from depth labels are always
odd when ``w`` is even).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np


def round_away_half(a):
    """Halve ``a``, rounding .5 cases away from zero.

    Works on python ints and integer ndarrays:
    ``round_away_half(17) == 9``, ``round_away_half(-17) == -9``,
    ``round_away_half(16) == 8``.
    """
    if isinstance(a, np.ndarray):
        return np.sign(a) * ((np.abs(a) + 1) // 2)
    return -((abs(a) + 1) // 2) if a < 0 else (a + 1) // 2


class GazeDepthCoord(NamedTuple):
    g: int
    d: int
    y: int


class WhsCoord(NamedTuple):
    W: int
    H: int
    S: int


@dataclass(frozen=True)
class CuboidSpec:
    """Axis ranges and coordinate offsets of a solve volume.

    The cuboid covers gaze indices ``g_min .. g_min + g_extent - 1``, image
    rows ``y_min .. y_min + y_extent - 1`` and depth numbers
    ``d_min .. d_min + d_extent - 1``.  Cuboid coordinates are
    ``W = g + offset1``, ``H = y + offset2``, ``S = d + offset3``; the
    remaining offsets tie cuboid coordinates to right-image disparity form
    (see :func:`whs_from_disparity`) and must satisfy::

        offset1 + offset3 + rw_offset == 0
        lw_offset - rw_offset == (w - 1) + 2*offset3
        offset2 + h_offset == 0

    for the image width ``w`` the cuboid was built for.
    :func:`cuboid_from_disparity_range` constructs consistent instances.
    """

    g_min: int
    g_extent: int
    y_min: int
    y_extent: int
    d_min: int
    d_extent: int
    offset1: int
    offset2: int
    offset3: int
    lw_offset: int
    rw_offset: int
    h_offset: int

    @property
    def num_labels(self) -> int:
        return self.d_extent

    @property
    def site_shape(self) -> tuple[int, int]:
        """Grid of matching sites, row-major like images: (rows, gaze lines)."""
        return (self.y_extent, self.g_extent)

    @property
    def num_sites(self) -> int:
        return self.y_extent * self.g_extent

    @property
    def d_max(self) -> int:
        return self.d_min + self.d_extent - 1

    def depth_of_label(self, k):
        """Depth number for cuboid-local label index ``k``."""
        return self.d_min + k

    def label_of_depth(self, d):
        return d - self.d_min

    def implied_width(self) -> int:
        """Image width the offsets were derived for."""
        return self.lw_offset - self.rw_offset - 2 * self.offset3 + 1

    def check_consistent(self, width: int, height: int) -> None:
        """Raise ValueError if offsets do not fit ``width`` x ``height`` images."""
        if self.implied_width() != width:
            raise ValueError(
                f"cuboid offsets imply image width {self.implied_width()}, got {width}"
            )
        if self.offset1 + self.offset3 + self.rw_offset != 0:
            raise ValueError("offset1 + offset3 + rw_offset must be 0")
        if self.offset2 + self.h_offset != 0:
            raise ValueError("offset2 + h_offset must be 0")
        if not (0 <= self.d_min and self.d_max < (width + 1) // 2):
            raise ValueError(
                f"depth range [{self.d_min}, {self.d_max}] outside [0, {width}/2)"
            )
        if self.y_min < 0 or self.y_min + self.y_extent > height:
            raise ValueError("row range outside image")
        if min(self.g_extent, self.y_extent, self.d_extent) < 1:
            raise ValueError("empty cuboid")


def cross_from_pixels(x_l: int, x_r: int, y: int, width: int) -> Optional[GazeDepthCoord]:
    """Gaze/depth coordinates of the pixel pair, or None.

    Returns None when the column sum has the wrong parity (the sight lines
    cross between integer depth steps) or the implied depth falls outside
    ``[0, width/2)``.
    """
    two_g = x_l + x_r - (width - 1)
    if two_g % 2 != 0:
        return None
    d = (x_r - x_l + width - 1) // 2
    if not 0 <= d < (width + 1) // 2:
        return None
    return GazeDepthCoord(two_g // 2, d, y)


def pixels_from_gaze_depth(coord: GazeDepthCoord, width: int) -> tuple[int, int, int]:
    """Pixel pair ``(x_l, x_r, y)`` of a gaze/depth coordinate.

    Raises ValueError when either column falls outside ``[0, width)``.
    """
    g, d, y = coord
    x_r = g + d
    x_l = (width - 1) + g - d
    if not (0 <= x_l < width and 0 <= x_r < width):
        raise ValueError(
            f"(g={g}, d={d}) maps to columns (x_l={x_l}, x_r={x_r}) outside [0, {width})"
        )
    return (x_l, x_r, y)


def whs_from_disparity(x: int, y: int, dis: int, cuboid: CuboidSpec) -> WhsCoord:
    """Cuboid coordinates of right-image position ``(x, y)`` with disparity ``dis``.

    Both halvings round away from zero; everything else is exact.
    """
    lw, rw = cuboid.lw_offset, cuboid.rw_offset
    W = x - round_away_half(lw + rw) + round_away_half(dis)
    H = y - cuboid.h_offset
    S = round_away_half(lw - rw) - round_away_half(dis)
    return WhsCoord(W, H, S)


def disparity_from_whs(whs: WhsCoord, cuboid: CuboidSpec) -> tuple[int, int, int]:
    """Right-image ``(x, y, dis)`` of a cuboid coordinate.  Exact."""
    W, H, S = whs
    x = cuboid.rw_offset + S + W
    y = cuboid.h_offset + H
    dis = cuboid.lw_offset - cuboid.rw_offset - 2 * S
    return (x, y, dis)


def gaze_depth_from_whs(whs: WhsCoord, cuboid: CuboidSpec) -> GazeDepthCoord:
    return GazeDepthCoord(
        whs.W - cuboid.offset1, whs.S - cuboid.offset3, whs.H - cuboid.offset2
    )


def whs_from_gaze_depth(coord: GazeDepthCoord, cuboid: CuboidSpec) -> WhsCoord:
    g, d, y = coord
    return WhsCoord(g + cuboid.offset1, y + cuboid.offset2, d + cuboid.offset3)


def depth_of_disparity(dis: int, width: int) -> int:
    """Depth number whose cross points carry disparity ``dis`` (rounded).

    Exact for the representable parity (``dis`` odd when ``width`` is even);
    the other parity lands on the neighbouring depth step, shifting the
    disparity by one.
    """
    return (width - dis) // 2


def cuboid_from_disparity_range(
    width: int,
    height: int,
    dis_min: int,
    dis_max: int,
    margin: int = 0,
    num_labels: Optional[int] = None,
    g_extent: Optional[int] = None,
) -> CuboidSpec:
    """Build a consistent cuboid covering a disparity search range.

    The depth axis covers every depth number that
    :func:`depth_of_disparity` can produce for ``dis in [dis_min, dis_max]``
    plus ``margin`` spare labels on each side, or exactly ``num_labels``
    labels centred on that coverage; either way it is clamped into the
    representable range ``[0, width/2)``.  The gaze axis defaults to
    ``width - dis_min - 2`` lines centred on the image (cross points near
    the rim read border-clamped pixels), rows are covered fully, and the
    offsets place ``(W, H, S) = (0, 0, 0)`` at the cuboid corner.
    """
    if width < 2 or height < 1:
        raise ValueError("image too small")
    if not 0 <= dis_min <= dis_max < width:
        raise ValueError(f"bad disparity range [{dis_min}, {dis_max}] for width {width}")
    d_cap = (width + 1) // 2  # depth numbers live in [0, d_cap)

    d_lo_cov = depth_of_disparity(dis_max, width)
    d_hi_cov = depth_of_disparity(dis_min, width)
    if num_labels is not None:
        m = int(num_labels)
        if m < 1:
            raise ValueError("num_labels must be >= 1")
        centre = (d_lo_cov + d_hi_cov) // 2
        d_min = centre - (m - 1) // 2
    else:
        m = (d_hi_cov - d_lo_cov + 1) + 2 * margin
        d_min = d_lo_cov - margin
    if m > d_cap:
        raise ValueError(f"{m} depth labels cannot fit in [0, {d_cap})")
    d_min = max(0, min(d_min, d_cap - m))

    if g_extent is None:
        g_extent = max(1, width - dis_min - 2)
    g_min = -(g_extent // 2)

    offset1 = -g_min
    offset2 = 0
    offset3 = -d_min
    rw_offset = -offset1 - offset3
    lw_offset = (width - 1) + rw_offset + 2 * offset3
    cuboid = CuboidSpec(
        g_min=g_min,
        g_extent=g_extent,
        y_min=0,
        y_extent=height,
        d_min=d_min,
        d_extent=m,
        offset1=offset1,
        offset2=offset2,
        offset3=offset3,
        lw_offset=lw_offset,
        rw_offset=rw_offset,
        h_offset=-offset2,
    )
    cuboid.check_consistent(width, height)
    return cuboid


def cuboid_with_offsets(
    cuboid: CuboidSpec,
    offset1: int,
    offset2: int,
    offset3: int,
    width: int,
    height: int,
) -> CuboidSpec:
    """Re-place a cuboid with explicit coordinate offsets.

    Keeps the extents of ``cuboid`` and moves its corner so that
    ``(W, H, S) = (g + offset1, y + offset2, d + offset3)`` starts at zero;
    the three remaining offsets follow from the consistency identities.
    Raises ValueError when the re-placed cuboid does not fit the images,
    e.g. when ``-offset3`` pushes the depth axis outside ``[0, width/2)``.
    """
    placed = dataclasses.replace(
        cuboid,
        g_min=-offset1,
        y_min=-offset2,
        d_min=-offset3,
        offset1=offset1,
        offset2=offset2,
        offset3=offset3,
        rw_offset=-offset1 - offset3,
        lw_offset=(width - 1) - offset1 + offset3,
        h_offset=-offset2,
    )
    placed.check_consistent(width, height)
    return placed


def fully_covered_gaze_extent(width: int, d_min: int, d_max: int) -> int:
    """Widest gaze extent whose cross points all stay inside both images.

    A depth-``d`` cross point is in-image for ``g`` in
    ``[-min(d, w-1-d), min(d, w-1-d)]``; the binding depth is whichever end
    of the label range is farther from ``(w-1)/2``.
    """
    u = min(min(d, width - 1 - d) for d in (d_min, d_max))
    return 2 * u + 1


def site_columns(cuboid: CuboidSpec, label: int, width: int):
    """Image columns read by every gaze line at one depth label.

    Returns ``(x_l, x_r)`` int arrays of length ``g_extent``, clamped into
    the image; out-of-range gaze lines repeat the border column.
    """
    g = np.arange(cuboid.g_min, cuboid.g_min + cuboid.g_extent)
    d = cuboid.depth_of_label(label)
    x_r = np.clip(g + d, 0, width - 1)
    x_l = np.clip((width - 1) + g - d, 0, width - 1)
    return x_l, x_r
