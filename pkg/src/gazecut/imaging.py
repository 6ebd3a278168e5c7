"""Image and ground-truth file handling.

Covers the small slice of netpbm needed here (8-bit P2/P3/P5/P6), the
conversion of a disparity ground-truth image into per-site depth numbers,
and writing a labeling back out as a scaled disparity image.  Also a tiny
text format for dumping labelings losslessly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import CuboidSpec, round_away_half


class FileFormatError(ValueError):
    """A file exists but cannot be parsed as what it claims to be."""


# ---------------------------------------------------------------------------
# netpbm


def _read_tokens(data: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if pos == start:
            raise FileFormatError("truncated netpbm header")
        tokens.append(data[start:pos])
    return tokens, pos


def _load_netpbm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    (magic,), pos = _read_tokens(data, 1, 0)
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise FileFormatError(f"{path}: unsupported netpbm magic {magic!r}")
    (w_tok, h_tok, maxval_tok), pos = _read_tokens(data, 3, pos)
    width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    if width < 1 or height < 1:
        raise FileFormatError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise FileFormatError(f"{path}: only maxval 255 supported, got {maxval}")
    channels = 3 if magic in (b"P3", b"P6") else 1
    need = width * height * channels

    if magic in (b"P5", b"P6"):
        pos += 1  # single whitespace byte after maxval
        raw = data[pos : pos + need]
        if len(raw) < need:
            raise FileFormatError(f"{path}: truncated pixel data ({len(raw)}/{need} bytes)")
        img = np.frombuffer(raw, dtype=np.uint8, count=need)
    else:
        values = data[pos:].split()
        if len(values) < need:
            raise FileFormatError(f"{path}: truncated pixel data ({len(values)}/{need} values)")
        img = np.array(values[:need], dtype=np.int64)
        if img.min() < 0 or img.max() > maxval:
            raise FileFormatError(f"{path}: sample outside [0, {maxval}]")
        img = img.astype(np.uint8)

    if channels == 3:
        return img.reshape(height, width, 3)
    return img.reshape(height, width)


def load_ppm(path) -> np.ndarray:
    """Load an 8-bit colour image (P3/P6) as uint8 (h, w, 3)."""
    img = _load_netpbm(path)
    if img.ndim != 3:
        raise FileFormatError(f"{path}: expected a colour image, got greyscale")
    return img


def load_pgm(path) -> np.ndarray:
    """Load an 8-bit greyscale image (P2/P5) as uint8 (h, w)."""
    img = _load_netpbm(path)
    if img.ndim != 2:
        raise FileFormatError(f"{path}: expected a greyscale image, got colour")
    return img


def _write_netpbm(path, img: np.ndarray, magic: bytes, comments=()) -> None:
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got {img.dtype}")
    h, w = img.shape[:2]
    buf = io.BytesIO()
    buf.write(magic + b"\n")
    for line in comments:
        buf.write(b"# " + str(line).encode("ascii") + b"\n")
    buf.write(f"{w} {h}\n255\n".encode("ascii"))
    buf.write(img.tobytes())
    Path(path).write_bytes(buf.getvalue())


def write_ppm(path, img, comments=()) -> None:
    """Write uint8 (h, w, 3) as binary P6."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3), got {img.shape}")
    _write_netpbm(path, img, b"P6", comments)


def write_pgm(path, img, comments=()) -> None:
    """Write uint8 (h, w) as binary P5."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected (h, w), got {img.shape}")
    _write_netpbm(path, img, b"P5", comments)


# ---------------------------------------------------------------------------
# ground truth


@dataclass
class GroundTruthDepth:
    """Per-site depth numbers converted from a disparity image.

    ``depth`` holds cuboid-local label indices (int32, site grid shape);
    ``valid`` marks sites that received one.  ``out_of_range`` counts ground
    truth pixels whose depth number fell outside the cuboid's label range,
    ``off_grid`` those whose gaze line or row missed the cuboid, and
    ``collisions`` pixel pairs that landed on one site (the smaller depth
    number, i.e. the nearer surface, wins).
    """

    depth: np.ndarray
    valid: np.ndarray
    out_of_range: int = 0
    off_grid: int = 0
    collisions: int = 0

    @property
    def num_valid(self) -> int:
        return int(self.valid.sum())


def ground_truth_to_depth(gt_image, scale: int, cuboid: CuboidSpec) -> GroundTruthDepth:
    """Convert a scaled disparity image into per-site depth numbers.

    ``gt_image`` is a greyscale image registered to the right view; a pixel
    value ``v > 0`` means disparity ``round(v / scale)`` and ``v == 0``
    means no ground truth.  Each pixel is carried through the cuboid
    transform (halvings rounding away from zero, so off-parity disparities
    shift by at most one step).
    """
    gt = np.asarray(gt_image)
    if gt.ndim != 2:
        raise ValueError("ground truth must be a greyscale image")
    if scale < 1:
        raise ValueError("scale must be >= 1")
    h, w = gt.shape
    cuboid.check_consistent(w, h)

    ys, xs = np.nonzero(gt)
    dis = ((gt[ys, xs].astype(np.int64) * 2 + scale) // (2 * scale))  # round half up
    lw, rw = cuboid.lw_offset, cuboid.rw_offset
    W = xs - round_away_half(lw + rw) + round_away_half(dis)
    S = round_away_half(lw - rw) - round_away_half(dis)
    gi = (W - cuboid.offset1) - cuboid.g_min
    yi = (ys - cuboid.h_offset + cuboid.offset2) - cuboid.y_min
    k = (S - cuboid.offset3) - cuboid.d_min

    rows, cols = cuboid.site_shape
    on_grid = (gi >= 0) & (gi < cols) & (yi >= 0) & (yi < rows)
    in_range = (k >= 0) & (k < cuboid.num_labels)
    keep = on_grid & in_range
    off_grid = int((~on_grid).sum())
    out_of_range = int((on_grid & ~in_range).sum())

    sentinel = cuboid.num_labels  # anything larger than a real label
    best = np.full((rows, cols), sentinel, dtype=np.int64)
    np.minimum.at(best, (yi[keep], gi[keep]), k[keep])
    valid = best < sentinel
    collisions = int(keep.sum() - valid.sum())

    depth = np.where(valid, best, 0).astype(np.int32)
    return GroundTruthDepth(
        depth=depth,
        valid=valid,
        out_of_range=out_of_range,
        off_grid=off_grid,
        collisions=collisions,
    )


def disparity_of_labeling(labeling, cuboid: CuboidSpec) -> np.ndarray:
    """Disparity carried by each site's assigned depth label (int64 grid)."""
    labeling = np.asarray(labeling, dtype=np.int64)
    d = cuboid.d_min + labeling
    return (cuboid.lw_offset - cuboid.rw_offset) - 2 * (d + cuboid.offset3)


def write_disparity_image(
    labeling,
    cuboid: CuboidSpec,
    path,
    width: int,
    height: int,
    scale: int | None = None,
    comments=(),
) -> int:
    """Render a labeling as a scaled disparity image over the right view.

    Each site paints its right-image pixel with ``dis * scale``; where two
    sites share a pixel the nearer (larger disparity) wins, and pixels no
    site covers stay 0.  ``scale=None`` picks the largest scale that cannot
    clip for this cuboid; the scale used is recorded in a header comment
    and returned.  An explicit scale that would clip raises ValueError.
    """
    labeling = np.asarray(labeling, dtype=np.int64)
    cuboid.check_consistent(width, height)
    if labeling.shape != cuboid.site_shape:
        raise ValueError(f"labeling shape {labeling.shape} != {cuboid.site_shape}")

    dis_max = (width - 1) - 2 * cuboid.d_min  # largest disparity in the cuboid
    if scale is None:
        scale = max(1, 255 // max(dis_max, 1))
    if scale * dis_max > 255:
        raise ValueError(
            f"scale {scale} overflows: max disparity {dis_max} -> {scale * dis_max} > 255"
        )

    d = cuboid.d_min + labeling
    dis = (width - 1) - 2 * d
    yy, gg = np.indices(labeling.shape)
    g = cuboid.g_min + gg
    x = g + d
    y = cuboid.y_min + yy

    img = np.zeros((height, width), dtype=np.int64)
    inside = (x >= 0) & (x < width)
    np.maximum.at(img, (y[inside], x[inside]), dis[inside] * scale)
    write_pgm(
        path,
        img.astype(np.uint8),
        comments=tuple(comments) + (f"disparity scale {scale}",),
    )
    return scale


# ---------------------------------------------------------------------------
# labeling dumps


def write_labeling(path, labeling, comments=()) -> None:
    """Dump a labeling as text: header comments, 'rows R cols C', then rows."""
    labeling = np.asarray(labeling)
    rows, cols = labeling.shape
    with open(path, "w") as f:
        for line in comments:
            f.write(f"# {line}\n")
        f.write(f"rows {rows} cols {cols}\n")
        for r in range(rows):
            f.write(" ".join(str(int(v)) for v in labeling[r]) + "\n")


def read_labeling(path) -> np.ndarray:
    with open(path) as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    header = lines[0].split()
    if header[0] != "rows" or header[2] != "cols":
        raise FileFormatError(f"{path}: bad labeling header {lines[0]!r}")
    rows, cols = int(header[1]), int(header[3])
    values = np.array(" ".join(lines[1:]).split(), dtype=np.int32)
    if values.size != rows * cols:
        raise FileFormatError(f"{path}: expected {rows * cols} values, got {values.size}")
    return values.reshape(rows, cols)
