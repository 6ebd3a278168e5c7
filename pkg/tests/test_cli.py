import subprocess
import sys

import numpy as np
import pytest

from gazecut.cli import main
from gazecut.imaging import load_pgm, read_labeling, write_pgm, write_ppm
from gazecut.synthetic import make_scene


@pytest.fixture(scope="module")
def pair(tmp_path_factory):
    """A small synthetic pair with ground truth, written to disk once."""
    root = tmp_path_factory.mktemp("pair")
    s = make_scene(seed=3, width=64, height=32, dis_min=3, dis_max=11)
    write_ppm(root / "left.ppm", s.left)
    write_ppm(root / "right.ppm", s.right)
    write_pgm(root / "gt.pgm", s.gt_image)
    return {"root": root, "scene": s}


def _solve_args(pair, out, extra=()):
    root = pair["root"]
    return [
        "solve",
        "--left", str(root / "left.ppm"),
        "--right", str(root / "right.ppm"),
        "--dis-min", "3", "--dis-max", "11",
        "--out", str(out),
        *extra,
    ]


def test_solve_writes_artifacts(pair, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(_solve_args(pair, out)) == 0
    text = capsys.readouterr().out
    assert "energy" in text

    disp = load_pgm(f"{out}.pgm")
    assert disp.shape == (32, 64)
    lab = read_labeling(f"{out}.labels.txt")
    assert lab.shape == (32, 64 - 3 - 2)  # gaze extent w - dis_min - 2

    stats = open(f"{out}.stats.txt").read()
    assert "energy=" in stats and "nodes=" in stats
    assert "wall_s" not in stats  # timings only on request


def test_solve_reruns_are_byte_identical(pair, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(_solve_args(pair, out1)) == 0
    assert main(_solve_args(pair, out2)) == 0
    for suffix in (".pgm", ".labels.txt", ".stats.txt"):
        b1 = open(f"{out1}{suffix}", "rb").read()
        b2 = open(f"{out2}{suffix}", "rb").read()
        assert b1 == b2, suffix


def test_solve_gt_report_and_timings(pair, tmp_path, capsys):
    out = tmp_path / "gtrun"
    args = _solve_args(pair, out, extra=(
        "--gt", str(pair["root"] / "gt.pgm"),
        "--gt-scale", str(pair["scene"].gt_scale),
        "--timings",
    ))
    assert main(args) == 0
    text = capsys.readouterr().out
    assert "error" in text and "exact" in text
    assert "wall_s" in open(f"{out}.stats.txt").read()


def test_solve_levels(pair, tmp_path):
    exact_out = tmp_path / "l0"
    l1_out = tmp_path / "l1"
    l2_out = tmp_path / "l2"
    assert main(_solve_args(pair, exact_out)) == 0
    assert main(_solve_args(pair, l1_out, ("--level", "1", "--block", "2"))) == 0
    assert main(_solve_args(pair, l2_out, ("--level", "2", "--block", "2"))) == 0

    def energy(prefix):
        for line in open(f"{prefix}.stats.txt"):
            if line.startswith("energy="):
                return int(line.split("=")[1])
        raise AssertionError("no energy line")

    assert energy(exact_out) <= energy(l1_out) <= energy(l2_out)


def test_dis_range_derived_from_gt(pair, tmp_path):
    out = tmp_path / "derived"
    root = pair["root"]
    args = [
        "solve",
        "--left", str(root / "left.ppm"),
        "--right", str(root / "right.ppm"),
        "--gt", str(root / "gt.pgm"),
        "--gt-scale", str(pair["scene"].gt_scale),
        "--out", str(out),
    ]
    assert main(args) == 0


def test_missing_range_is_usage_error(pair, tmp_path, capsys):
    out = tmp_path / "x"
    args = _solve_args(pair, out)
    i = args.index("--dis-min")
    del args[i:i + 4]
    assert main(args) == 2
    assert "dis-min" in capsys.readouterr().err


def test_missing_file_is_io_error(tmp_path, capsys):
    args = [
        "solve", "--left", str(tmp_path / "no.ppm"),
        "--right", str(tmp_path / "no.ppm"),
        "--dis-min", "3", "--dis-max", "9",
        "--out", str(tmp_path / "y"),
    ]
    assert main(args) == 3
    assert capsys.readouterr().err


def test_malformed_file_is_io_error(tmp_path, capsys):
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P6\n4 4\n255\nshort")
    args = [
        "solve", "--left", str(bad), "--right", str(bad),
        "--dis-min", "3", "--dis-max", "9", "--out", str(tmp_path / "z"),
    ]
    assert main(args) == 3


def test_sweep_table_and_csv(pair, tmp_path, capsys):
    csv_path = tmp_path / "sweep.csv"
    root = pair["root"]
    args = [
        "sweep",
        "--left", str(root / "left.ppm"),
        "--right", str(root / "right.ppm"),
        "--gt", str(root / "gt.pgm"),
        "--gt-scale", str(pair["scene"].gt_scale),
        "--dis-min", "3", "--dis-max", "11",
        "--penalties", "8,14",
        "--csv", str(csv_path),
    ]
    assert main(args) == 0
    text = capsys.readouterr().out
    assert "best penalty" in text
    body = [l for l in csv_path.read_text().splitlines() if not l.startswith("#")]
    assert body[0].startswith("penalty,")
    assert len(body) == 3


def test_sweep_csv_to_stdout(pair, capsys):
    root = pair["root"]
    args = [
        "sweep",
        "--left", str(root / "left.ppm"),
        "--right", str(root / "right.ppm"),
        "--gt", str(root / "gt.pgm"),
        "--gt-scale", str(pair["scene"].gt_scale),
        "--dis-min", "3", "--dis-max", "11",
        "--penalties", "8,14",
    ]
    assert main(args) == 0
    lines = capsys.readouterr().out.splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    assert any("gazecut sweep" in c for c in comments)
    assert comments[-1].startswith("# best penalty ")
    assert body[0].startswith("penalty,energy,flow,")
    assert len(body) == 3
    assert [int(r.split(",")[0]) for r in body[1:]] == [8, 14]


def test_threads_flag(pair, tmp_path, capsys):
    out = tmp_path / "thr"
    assert main(_solve_args(pair, out, ("--threads", "0"))) == 2
    capsys.readouterr()
    assert main(_solve_args(pair, out, ("--threads", "2"))) == 0
    captured = capsys.readouterr()
    assert "single-threaded" in captured.err
    assert "threads 2" in open(f"{out}.stats.txt").read()


def test_cuboid_override_flags(pair, tmp_path, capsys):
    out = tmp_path / "ext"
    assert main(_solve_args(pair, out, ("--g-extent", "32"))) == 0
    assert read_labeling(f"{out}.labels.txt").shape == (32, 32)

    moved = tmp_path / "moved"
    assert main(_solve_args(pair, moved, ("--offsets", "30,0,-25"))) == 0
    assert read_labeling(f"{moved}.labels.txt").shape == (32, 64 - 3 - 2)

    assert main(_solve_args(pair, out, ("--offsets", "nope"))) == 2
    assert "--offsets" in capsys.readouterr().err
    # a depth shift that pushes labels below zero is rejected up front
    assert main(_solve_args(pair, out, ("--offsets", "30,0,1"))) == 2
    capsys.readouterr()


def test_compare_csv(pair, tmp_path, capsys):
    csv_path = tmp_path / "cmp.csv"
    root = pair["root"]
    args = [
        "compare",
        "--left", str(root / "left.ppm"),
        "--right", str(root / "right.ppm"),
        "--dis-min", "3", "--dis-max", "11",
        "--configs", "0:1,1:2",
        "--csv", str(csv_path),
    ]
    assert main(args) == 0
    assert "level" in capsys.readouterr().out
    body = [l for l in csv_path.read_text().splitlines() if not l.startswith("#")]
    assert len(body) == 3


def test_convert_gt(pair, tmp_path):
    out = tmp_path / "depth.txt"
    root = pair["root"]
    args = [
        "convert-gt",
        "--gt", str(root / "gt.pgm"),
        "--gt-scale", str(pair["scene"].gt_scale),
        "--dis-min", "3", "--dis-max", "11",
        "--out", str(out),
    ]
    assert main(args) == 0
    table = read_labeling(out)
    assert table.min() >= -1  # -1 marks sites without ground truth
    assert table.max() <= 11 - 3  # at most num_labels - 1


def test_selftest_quick_and_force_fail(capsys):
    assert main(["selftest", "--quick", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "ok" in out
    assert main(["selftest", "--quick", "--force-fail"]) == 4
    assert "FAIL" in capsys.readouterr().out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "gazecut" in capsys.readouterr().out


def test_console_script_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "gazecut.cli", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "gazecut" in proc.stdout
