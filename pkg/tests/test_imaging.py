import numpy as np
import pytest

from gazecut.geometry import cuboid_from_disparity_range
from gazecut.imaging import (
    FileFormatError,
    disparity_of_labeling,
    ground_truth_to_depth,
    load_pgm,
    load_ppm,
    read_labeling,
    write_disparity_image,
    write_labeling,
    write_pgm,
    write_ppm,
)


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (17, 23, 3)).astype(np.uint8)
    path = tmp_path / "a.ppm"
    write_ppm(path, img, comments=("hello", "world"))
    back = load_ppm(path)
    assert back.dtype == np.uint8
    assert np.array_equal(back, img)


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (9, 31)).astype(np.uint8)
    path = tmp_path / "a.pgm"
    write_pgm(path, img)
    assert np.array_equal(load_pgm(path), img)


def test_ascii_variants_and_header_comments(tmp_path):
    p3 = tmp_path / "a.ppm"
    p3.write_bytes(b"P3\n# a comment\n2 1\n# another\n255\n1 2 3  4 5 6\n")
    img = load_ppm(p3)
    assert img.shape == (1, 2, 3)
    assert img[0, 0].tolist() == [1, 2, 3]
    assert img[0, 1].tolist() == [4, 5, 6]

    p2 = tmp_path / "a.pgm"
    p2.write_bytes(b"P2\n3 2\n255\n0 10 20 30 40 50\n")
    img = load_pgm(p2)
    assert img.shape == (2, 3)
    assert img[1, 2] == 50


def test_binary_comment_between_tokens(tmp_path):
    img = np.arange(6, dtype=np.uint8).reshape(2, 3)
    raw = b"P5 #inline\n3 2 255\n" + img.tobytes()
    path = tmp_path / "c.pgm"
    path.write_bytes(raw)
    assert np.array_equal(load_pgm(path), img)


def test_malformed_files_raise(tmp_path):
    path = tmp_path / "bad"
    path.write_bytes(b"P7\n1 1\n255\n\x00")
    with pytest.raises(FileFormatError):
        load_pgm(path)
    path.write_bytes(b"P5\n4 4\n255\nxy")  # truncated pixels
    with pytest.raises(FileFormatError):
        load_pgm(path)
    path.write_bytes(b"P5\n2 2\n65535\n\x00\x00\x00\x00")
    with pytest.raises(FileFormatError):
        load_pgm(path)
    path.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    with pytest.raises(FileFormatError):
        load_pgm(path)  # colour file through the greyscale loader
    with pytest.raises(FileNotFoundError):
        load_pgm(tmp_path / "missing.pgm")


def test_ground_truth_round_trip_via_written_image(tmp_path):
    """write_disparity_image -> ground_truth_to_depth recovers the labeling
    at every site that owns a pixel (all emitted disparities are odd)."""
    width, height = 64, 12
    c = cuboid_from_disparity_range(width, height, 3, 13)
    rng = np.random.default_rng(2)
    labeling = rng.integers(0, c.num_labels, c.site_shape).astype(np.int32)

    path = tmp_path / "gt.pgm"
    scale = write_disparity_image(labeling, c, path, width, height)
    gt = ground_truth_to_depth(load_pgm(path), scale, c)

    assert gt.num_valid > 0.5 * c.num_sites
    assert np.array_equal(gt.depth[gt.valid], labeling[gt.valid])
    # collision rule: where sites collide on a pixel the nearer one wins,
    # so a disagreeing site must map to the same pixel as a nearer site
    assert gt.out_of_range == 0


def test_ground_truth_zero_means_no_data():
    c = cuboid_from_disparity_range(32, 4, 1, 9)
    img = np.zeros((4, 32), dtype=np.uint8)
    gt = ground_truth_to_depth(img, 8, c)
    assert gt.num_valid == 0


def test_ground_truth_out_of_range_tally():
    width = 64
    c = cuboid_from_disparity_range(width, 4, 9, 13)  # labels cover dis 9..13
    img = np.zeros((4, width), dtype=np.uint8)
    img[2, 30] = 11 * 2   # in range
    img[2, 40] = 31 * 2   # far outside the window
    gt = ground_truth_to_depth(img, 2, c)
    assert gt.num_valid == 1
    assert gt.out_of_range == 1


def test_ground_truth_collision_keeps_nearer_surface():
    width = 32
    c = cuboid_from_disparity_range(width, 2, 1, 11)
    img = np.zeros((2, width), dtype=np.uint8)
    # two right pixels whose cross points share a site: (x, dis) and (x+1, dis+2)
    # both map to gaze line g = x - depth... construct via the transform:
    d1 = (width - 1 - 5) // 2   # dis 5
    d2 = (width - 1 - 7) // 2   # dis 7, one step nearer
    x1 = 3 + d1
    x2 = 3 + d2  # same g = 3 for both
    img[0, x1] = 5
    img[0, x2] = 7
    gt = ground_truth_to_depth(img, 1, c)
    assert gt.collisions == 1
    gi = 3 - c.g_min
    assert gt.valid[0, gi]
    assert gt.depth[0, gi] == c.label_of_depth(d2)  # smaller depth number wins


def test_write_disparity_image_scale_overflow(tmp_path):
    c = cuboid_from_disparity_range(64, 4, 1, 31)
    labeling = np.zeros(c.site_shape, dtype=np.int32)  # d_min: largest disparity
    with pytest.raises(ValueError):
        write_disparity_image(labeling, c, tmp_path / "x.pgm", 64, 4, scale=100)


def test_disparity_of_labeling():
    c = cuboid_from_disparity_range(384, 288, 10, 28, num_labels=24)
    lab = np.zeros(c.site_shape, dtype=np.int32)
    dis = disparity_of_labeling(lab, c)
    assert (dis == 383 - 2 * c.d_min).all()
    lab[:] = c.num_labels - 1
    assert (disparity_of_labeling(lab, c) == 383 - 2 * c.d_max).all()


def test_labeling_dump_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    lab = rng.integers(-1, 30, (7, 11)).astype(np.int32)
    path = tmp_path / "lab.txt"
    write_labeling(path, lab, comments=("config a", "config b"))
    assert np.array_equal(read_labeling(path), lab)
    with pytest.raises(FileFormatError):
        bad = tmp_path / "bad.txt"
        bad.write_text("rows 2 wrong 2\n1 2\n3 4\n")
        read_labeling(bad)
