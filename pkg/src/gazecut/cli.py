"""Command line interface.

Subcommands::

    solve        estimate depth for one stereo pair, write image + labels + stats
    sweep        exact solves over a range of penalty values, report errors
    compare      run exact / level-1 / level-2 on one pair side by side
    convert-gt   turn a scaled disparity image into per-site depth numbers
    selftest     run the built-in consistency checks

Exit codes: 0 success, 2 bad usage or parameters, 3 unreadable or malformed
input files, 4 failed internal consistency check or selftest.

Output files carry the run configuration in header comments so they are
reproducible and byte-identical across reruns; wall-clock timings are
printed (and recorded in the stats file) only with ``--timings``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .energy import EnergyParams, sad_volume
from .evalreport import (
    best_penalty,
    compare_methods,
    error_count,
    sweep_penalty,
    write_compare_csv,
    write_sweep_csv,
)
from .geometry import cuboid_from_disparity_range, cuboid_with_offsets
from .hierarchy import DEFAULT_L2_SWEEPS, solve_level1, solve_level2
from .imaging import (
    FileFormatError,
    ground_truth_to_depth,
    load_pgm,
    load_ppm,
    write_disparity_image,
    write_labeling,
)
from .maxflow import InternalConsistencyError, solve_exact

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CHECK = 4


def _add_pair_args(p, with_gt=True, gt_required=False):
    p.add_argument("--left", required=True, help="left image (ppm)")
    p.add_argument("--right", required=True, help="right image (ppm)")
    if with_gt:
        p.add_argument(
            "--gt", required=gt_required,
            help="ground-truth disparity image (pgm), registered to the right view",
        )
        p.add_argument(
            "--gt-scale", type=int, default=8,
            help="ground-truth pixel value per disparity step (default 8)",
        )


def _add_cuboid_args(p):
    p.add_argument("--dis-min", type=int, help="smallest disparity searched")
    p.add_argument("--dis-max", type=int, help="largest disparity searched")
    p.add_argument(
        "--labels", type=int,
        help="number of depth labels (default: cover the disparity range)",
    )
    p.add_argument(
        "--margin", type=int, default=0,
        help="spare depth labels on each side of the covered range",
    )
    p.add_argument(
        "--g-extent", type=int,
        help="number of gaze lines (default: width - dis_min - 2)",
    )
    p.add_argument(
        "--offsets", metavar="O1,O2,O3",
        help="override the gaze/row/depth coordinate offsets (the remaining "
             "three follow from the consistency identities)",
    )


def _add_energy_args(p):
    p.add_argument("--penalty", type=int, default=14, help="cost per unit label step")
    p.add_argument(
        "--inhibit", type=int, default=1023,
        help="extra cost per unit beyond the first label step",
    )
    p.add_argument(
        "--hard-inhibit", action="store_true",
        help="forbid neighbour label jumps larger than one outright",
    )


def _load_pair(args):
    left = load_ppm(args.left)
    right = load_ppm(args.right)
    if left.shape != right.shape:
        raise ValueError(f"image shapes differ: {left.shape} vs {right.shape}")
    return left, right


def _disparity_range(args, gt_img):
    """Explicit --dis-min/--dis-max, else derived from the ground truth."""
    dis_min, dis_max = args.dis_min, args.dis_max
    if dis_min is None or dis_max is None:
        if gt_img is None:
            raise ValueError("--dis-min/--dis-max required when no --gt is given")
        vals = gt_img[gt_img > 0].astype(np.int64)
        if vals.size == 0:
            raise ValueError("ground truth image has no labelled pixels")
        scale = args.gt_scale
        if dis_min is None:
            dis_min = int((2 * vals.min() + scale) // (2 * scale))
        if dis_max is None:
            dis_max = int((2 * vals.max() + scale) // (2 * scale))
    return dis_min, dis_max


def _build_cuboid(args, width, height, dis_min, dis_max):
    cuboid = cuboid_from_disparity_range(
        width, height, dis_min, dis_max,
        margin=args.margin, num_labels=args.labels, g_extent=args.g_extent,
    )
    if args.offsets:
        try:
            o1, o2, o3 = (int(p) for p in args.offsets.split(","))
        except ValueError:
            raise ValueError(f"bad --offsets {args.offsets!r}, want O1,O2,O3")
        cuboid = cuboid_with_offsets(cuboid, o1, o2, o3, width, height)
    return cuboid


def _check_threads(args) -> None:
    threads = getattr(args, "threads", 1)
    if threads < 1:
        raise ValueError("--threads must be >= 1")
    if threads > 1:
        print(
            f"note: solvers are single-threaded; --threads {threads} only "
            "recorded in run provenance", file=sys.stderr,
        )


def _setup(args, gt_required=False):
    """Common solve setup: images, cuboid, data volume, optional ground truth."""
    left, right = _load_pair(args)
    gt_img = load_pgm(args.gt) if getattr(args, "gt", None) else None
    if gt_img is not None and gt_img.shape != left.shape[:2]:
        raise ValueError(
            f"ground truth shape {gt_img.shape} != image shape {left.shape[:2]}"
        )
    if gt_required and gt_img is None:
        raise ValueError("this command needs --gt")
    height, width = left.shape[:2]
    dis_min, dis_max = _disparity_range(args, gt_img)
    cuboid = _build_cuboid(args, width, height, dis_min, dis_max)
    volume = sad_volume(left, right, cuboid)
    gt = ground_truth_to_depth(gt_img, args.gt_scale, cuboid) if gt_img is not None else None
    return left, right, cuboid, volume, gt, (dis_min, dis_max)


def _config_lines(args, pairs):
    lines = [f"gazecut {args.command}"]
    lines += [f"{k} {v}" for k, v in pairs]
    return lines


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    _check_threads(args)
    left, right, cuboid, volume, gt, (dis_min, dis_max) = _setup(args)
    params = EnergyParams(
        penalty=args.penalty, inhibit=args.inhibit, hard_inhibit=args.hard_inhibit
    )
    if args.level == 0:
        result = solve_exact(volume, params, solver=args.solver)
    elif args.level == 1:
        result = solve_level1(
            volume, params, args.block, skin_radius=args.skin_radius,
            solver=args.solver,
        )
    else:
        result = solve_level2(
            volume, params, args.block, skin_radius=args.skin_radius,
            max_sweeps=args.max_sweeps,
        )

    height, width = left.shape[:2]
    config = _config_lines(args, [
        ("left", args.left), ("right", args.right),
        ("dis_range", f"{dis_min} {dis_max}"),
        ("labels", cuboid.num_labels),
        ("penalty", params.penalty), ("inhibit", params.inhibit),
        ("hard_inhibit", int(params.hard_inhibit)),
        ("level", args.level), ("block", args.block),
        ("skin_radius", args.skin_radius),
        ("solver", args.solver), ("threads", args.threads),
    ])

    out = args.out
    scale_used = write_disparity_image(
        result.labeling, cuboid, f"{out}.pgm", width, height,
        scale=args.scale, comments=config,
    )
    write_labeling(f"{out}.labels.txt", result.labeling, comments=config)

    stats_lines = [
        f"energy={result.energy}",
        f"flow={result.flow}",
        f"nodes={result.stats.get('nodes', 0)}",
        f"arcs={result.stats.get('arcs', 0)}",
        f"converged={int(result.stats.get('converged', True))}",
        f"disparity_scale={scale_used}",
    ]
    if gt is not None:
        report = error_count(result.labeling, gt)
        stats_lines += [
            f"error={report.total_error}",
            f"evaluated={report.evaluated}",
            f"exact_fraction={report.exact_fraction:.6f}",
            f"gt_out_of_range={gt.out_of_range}",
            f"gt_off_grid={gt.off_grid}",
            f"gt_collisions={gt.collisions}",
        ]
        print(f"error {report.total_error} over {report.evaluated} sites "
              f"({report.exact_fraction:.1%} exact)")
    if args.timings:
        stats_lines.append(f"wall_s={result.stats.get('wall_s', 0.0):.3f}")
        print(f"wall {result.stats.get('wall_s', 0.0):.3f}s")
    with open(f"{out}.stats.txt", "w") as f:
        for line in config:
            f.write(f"# {line}\n")
        f.write("\n".join(stats_lines) + "\n")

    print(f"energy {result.energy} (flow {result.flow})")
    if not result.stats.get("converged", True):
        print(f"note: sweep cap hit after {result.stats.get('sweeps')} sweeps")
    print(f"wrote {out}.pgm, {out}.labels.txt, {out}.stats.txt")
    return 0


# ---------------------------------------------------------------------------
# sweep


def _parse_range(text: str) -> list[int]:
    """'2:30:2' -> [2, 4, ..., 30]; '14' -> [14]; '3,5,9' -> [3, 5, 9]."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            lo, hi, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            lo, hi, step = parts
        else:
            raise ValueError(f"bad range {text!r}")
        if step < 1 or hi < lo:
            raise ValueError(f"bad range {text!r}")
        return list(range(lo, hi + 1, step))
    if "," in text:
        return [int(p) for p in text.split(",")]
    return [int(text)]


def cmd_sweep(args) -> int:
    _check_threads(args)
    _, _, cuboid, volume, gt, (dis_min, dis_max) = _setup(args, gt_required=True)
    penalties = _parse_range(args.penalties)
    records = sweep_penalty(
        volume, gt, penalties, inhibit=args.inhibit,
        hard_inhibit=args.hard_inhibit, solver=args.solver,
        progress=sys.stderr if args.timings else None,
    )
    best = best_penalty(records)
    config = _config_lines(args, [
        ("left", args.left), ("right", args.right),
        ("dis_range", f"{dis_min} {dis_max}"),
        ("labels", cuboid.num_labels),
        ("inhibit", args.inhibit),
        ("hard_inhibit", int(args.hard_inhibit)),
        ("penalties", args.penalties),
        ("solver", args.solver), ("threads", args.threads),
    ])
    if args.csv:
        print(f"{'penalty':>8} {'energy':>12} {'error':>8} {'exact':>7}")
        for r in records:
            print(f"{r.penalty:>8} {r.energy:>12} {r.error:>8} {r.exact_fraction:>6.1%}")
        write_sweep_csv(args.csv, records, comments=config, timings=args.timings)
        print(f"best penalty {best}")
        print(f"wrote {args.csv}")
    else:
        write_sweep_csv(sys.stdout, records, comments=config, timings=args.timings)
        print(f"# best penalty {best}")
    return 0


# ---------------------------------------------------------------------------
# compare


def _parse_configs(text: str) -> list[tuple[int, int]]:
    """'0:1,1:2,2:3' -> [(0, 1), (1, 2), (2, 3)] (level:block pairs)."""
    configs = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 2:
            raise ValueError(f"bad config {part!r}, want level:block")
        configs.append((int(bits[0]), int(bits[1])))
    return configs


def cmd_compare(args) -> int:
    _check_threads(args)
    _, _, cuboid, volume, gt, (dis_min, dis_max) = _setup(args)
    params = EnergyParams(
        penalty=args.penalty, inhibit=args.inhibit, hard_inhibit=args.hard_inhibit
    )
    configs = _parse_configs(args.configs)
    rows = compare_methods(
        volume, params, configs, gt=gt,
        skin_radius=args.skin_radius, max_sweeps=args.max_sweeps,
        progress=sys.stdout if args.timings else None,
    )
    print(f"{'level':>5} {'block':>5} {'energy':>12} {'error':>8} {'exact':>7} {'nodes':>9}")
    for r in rows:
        err = "-" if r.error is None else str(r.error)
        frac = "-" if r.exact_fraction is None else f"{r.exact_fraction:.1%}"
        print(f"{r.level:>5} {r.block:>5} {r.energy:>12} {err:>8} {frac:>7} {r.nodes:>9}")
    if args.csv:
        config = _config_lines(args, [
            ("left", args.left), ("right", args.right),
            ("dis_range", f"{dis_min} {dis_max}"),
            ("labels", cuboid.num_labels),
            ("penalty", args.penalty), ("inhibit", args.inhibit),
            ("hard_inhibit", int(args.hard_inhibit)),
            ("configs", args.configs),
            ("skin_radius", args.skin_radius),
            ("threads", args.threads),
        ])
        write_compare_csv(args.csv, rows, comments=config, timings=args.timings)
        print(f"wrote {args.csv}")
    return 0


# ---------------------------------------------------------------------------
# convert-gt


def cmd_convert_gt(args) -> int:
    gt_img = load_pgm(args.gt)
    height, width = gt_img.shape
    dis_min, dis_max = _disparity_range(args, gt_img)
    cuboid = _build_cuboid(args, width, height, dis_min, dis_max)
    gt = ground_truth_to_depth(gt_img, args.gt_scale, cuboid)
    depth = np.where(gt.valid, gt.depth, -1)
    config = _config_lines(args, [
        ("gt", args.gt), ("gt_scale", args.gt_scale),
        ("dis_range", f"{dis_min} {dis_max}"),
        ("labels", cuboid.num_labels),
        ("depth_range", f"{cuboid.d_min} {cuboid.d_max}"),
        ("invalid", -1),
    ])
    write_labeling(args.out, depth, comments=config)
    print(f"{gt.num_valid} sites with ground truth "
          f"({gt.out_of_range} out of range, {gt.off_grid} off grid, "
          f"{gt.collisions} collisions)")
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# selftest


def cmd_selftest(args) -> int:
    from . import selfcheck

    failures = selfcheck.run(
        seed=args.seed,
        quick=args.quick,
        force_fail=args.force_fail,
        out=sys.stdout,
    )
    if failures:
        print(f"selftest FAILED ({failures} check(s))", file=sys.stderr)
        return EXIT_CHECK
    print("selftest passed")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazecut",
        description="Stereo depth estimation by exact graph cuts over "
        "gaze-line / depth-number space.",
    )
    parser.add_argument("--version", action="version", version=f"gazecut {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="estimate depth for one stereo pair")
    _add_pair_args(p)
    _add_cuboid_args(p)
    _add_energy_args(p)
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--level", type=int, default=0, choices=(0, 1, 2),
                   help="0 exact, 1 hierarchical exact, 2 hierarchical capped")
    p.add_argument("--block", type=int, default=2, help="hierarchy block size")
    p.add_argument("--skin-radius", type=int, default=1,
                   help="label window radius around the coarse surface")
    p.add_argument("--max-sweeps", type=int, default=DEFAULT_L2_SWEEPS,
                   help="level-2 sweep cap")
    p.add_argument("--solver", default="push-relabel",
                   choices=("push-relabel", "dinic"))
    p.add_argument("--scale", type=int,
                   help="disparity image scale (default: widest that cannot clip)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (recorded in provenance; solvers run on one)")
    p.add_argument("--timings", action="store_true", help="report wall-clock times")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="exact solves over a penalty range")
    _add_pair_args(p, gt_required=True)
    _add_cuboid_args(p)
    p.add_argument("--penalties", default="2:30:2",
                   help="range lo:hi[:step] or comma list (default 2:30:2)")
    p.add_argument("--inhibit", type=int, default=1023)
    p.add_argument("--hard-inhibit", action="store_true")
    p.add_argument("--solver", default="push-relabel",
                   choices=("push-relabel", "dinic"))
    p.add_argument("--csv", help="write records to this csv file (default: csv to stdout)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (recorded in provenance; solvers run on one)")
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="exact vs hierarchy on one pair")
    _add_pair_args(p)
    _add_cuboid_args(p)
    _add_energy_args(p)
    p.add_argument("--configs", default="0:1,1:2,1:3,2:3",
                   help="comma list of level:block (default 0:1,1:2,1:3,2:3)")
    p.add_argument("--skin-radius", type=int, default=1)
    p.add_argument("--max-sweeps", type=int, default=None,
                   help="override the level-2 sweep cap")
    p.add_argument("--csv", help="write rows to this csv file")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (recorded in provenance; solvers run on one)")
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("convert-gt", help="disparity image -> per-site depth numbers")
    p.add_argument("--gt", required=True, help="disparity image (pgm)")
    p.add_argument("--gt-scale", type=int, default=8)
    _add_cuboid_args(p)
    p.add_argument("--out", required=True, help="output depth table")
    p.set_defaults(func=cmd_convert_gt)

    p = sub.add_parser("selftest", help="run built-in consistency checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true", help="fewer random trials")
    p.add_argument("--force-fail", action="store_true",
                   help="make one check fail (tests the failure path)")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, FileFormatError) as exc:
        print(f"gazecut: {exc}", file=sys.stderr)
        return EXIT_IO
    except InternalConsistencyError as exc:
        print(f"gazecut: consistency check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        print(f"gazecut: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
