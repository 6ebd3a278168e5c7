"""Accuracy accounting against ground truth, parameter sweeps, comparisons."""

from __future__ import annotations

import csv
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .energy import EnergyParams
from .hierarchy import solve_level1, solve_level2
from .imaging import GroundTruthDepth
from .maxflow import solve_exact

HISTOGRAM_TAIL = 9  # |error| >= this shares the last bucket


@dataclass
class ErrorReport:
    """Total depth error of a labeling against per-site ground truth.

    ``total_error`` is the exact sum of absolute depth differences over
    sites with ground truth; ``histogram[k]`` counts sites at absolute
    difference ``k``, with everything at or beyond ``tail`` pooled in the
    last entry.
    """

    total_error: int
    evaluated: int
    histogram: np.ndarray
    tail: int = HISTOGRAM_TAIL

    @property
    def exact_fraction(self) -> float:
        return float(self.histogram[0] / self.evaluated) if self.evaluated else 0.0

    def rows(self):
        """(difference, count) pairs; the last difference reads '<tail>~'."""
        out = [(str(k), int(self.histogram[k])) for k in range(self.tail)]
        out.append((f"{self.tail}~", int(self.histogram[self.tail])))
        return out


def error_count(labeling, gt: GroundTruthDepth, tail: int = HISTOGRAM_TAIL) -> ErrorReport:
    """Sum of absolute depth-number differences over ground-truth sites."""
    labeling = np.asarray(labeling, dtype=np.int64)
    if labeling.shape != gt.depth.shape:
        raise ValueError(
            f"labeling shape {labeling.shape} != ground truth {gt.depth.shape}"
        )
    diff = np.abs(labeling - gt.depth)[gt.valid]
    hist = np.bincount(np.minimum(diff, tail), minlength=tail + 1)
    return ErrorReport(
        total_error=int(diff.sum()),
        evaluated=int(diff.size),
        histogram=hist.astype(np.int64),
        tail=tail,
    )


def error_from_histogram(histogram) -> int:
    """Reduce a difference histogram to the total error it implies.

    Accepts a mapping ``difference -> count``; tail buckets are weighted at
    their threshold value, so this is a lower bound when the tail is
    non-empty and exact otherwise.
    """
    if isinstance(histogram, dict):
        items = histogram.items()
    else:
        items = enumerate(histogram)
    return int(sum(int(k) * int(c) for k, c in items))


@dataclass
class SweepRecord:
    penalty: int
    energy: int
    flow: int
    error: int
    exact_fraction: float
    wall_s: float = 0.0


def sweep_penalty(
    volume,
    gt: GroundTruthDepth,
    penalties: Sequence[int],
    inhibit: int = 1023,
    hard_inhibit: bool = False,
    solver: str = "push-relabel",
    progress=None,
) -> list[SweepRecord]:
    """Exact solve per penalty value; one record each."""
    records = []
    for penalty in penalties:
        params = EnergyParams(penalty=penalty, inhibit=inhibit, hard_inhibit=hard_inhibit)
        t0 = time.perf_counter()
        result = solve_exact(volume, params, solver=solver)
        report = error_count(result.labeling, gt)
        records.append(
            SweepRecord(
                penalty=penalty,
                energy=result.energy,
                flow=result.flow,
                error=report.total_error,
                exact_fraction=report.exact_fraction,
                wall_s=time.perf_counter() - t0,
            )
        )
        if progress:
            print(
                f"penalty {penalty:3d}: error {report.total_error}"
                f" exact {report.exact_fraction:.1%}",
                file=progress,
            )
    return records


def best_penalty(records: Sequence[SweepRecord]) -> int:
    """Penalty of the smallest error (first one on ties)."""
    best = min(records, key=lambda r: (r.error, r.penalty))
    return best.penalty


@dataclass
class MethodRow:
    level: int
    block: int
    energy: int
    error: Optional[int]
    exact_fraction: Optional[float]
    wall_s: float
    nodes: int
    converged: bool = True


def compare_methods(
    volume,
    params: EnergyParams,
    configs: Sequence[tuple[int, int]],
    gt: Optional[GroundTruthDepth] = None,
    skin_radius: int = 1,
    max_sweeps: Optional[int] = None,
    progress=None,
) -> list[MethodRow]:
    """Run (level, block) configurations on one volume; level 0 is exact.

    ``max_sweeps=None`` leaves the level-2 default cap in place.
    """
    rows = []
    for level, block in configs:
        t0 = time.perf_counter()
        if level == 0:
            result = solve_exact(volume, params)
        elif level == 1:
            result = solve_level1(volume, params, block, skin_radius=skin_radius)
        elif level == 2:
            kwargs = {} if max_sweeps is None else {"max_sweeps": max_sweeps}
            result = solve_level2(volume, params, block, skin_radius=skin_radius, **kwargs)
        else:
            raise ValueError(f"unknown level {level} (0, 1 or 2)")
        wall = time.perf_counter() - t0
        report = error_count(result.labeling, gt) if gt is not None else None
        rows.append(
            MethodRow(
                level=level,
                block=block,
                energy=result.energy,
                error=report.total_error if report else None,
                exact_fraction=report.exact_fraction if report else None,
                wall_s=wall,
                nodes=result.stats.get("nodes", 0),
                converged=result.stats.get("converged", True),
            )
        )
        if progress:
            err = f" error {report.total_error}" if report else ""
            print(f"level {level} block {block}: energy {result.energy}{err}", file=progress)
    return rows


@contextmanager
def _open_for_csv(path_or_file):
    """Yield a writable text stream; open (and close) ``path_or_file`` unless
    it already is one."""
    if hasattr(path_or_file, "write"):
        yield path_or_file
    else:
        with open(path_or_file, "w", newline="") as f:
            yield f


def write_sweep_csv(path, records: Sequence[SweepRecord], comments=(), timings=False) -> None:
    with _open_for_csv(path) as f:
        for line in comments:
            f.write(f"# {line}\n")
        fields = ["penalty", "energy", "flow", "error", "exact_fraction"]
        if timings:
            fields.append("wall_s")
        writer = csv.writer(f)
        writer.writerow(fields)
        for r in records:
            row = [r.penalty, r.energy, r.flow, r.error, f"{r.exact_fraction:.6f}"]
            if timings:
                row.append(f"{r.wall_s:.3f}")
            writer.writerow(row)


def write_compare_csv(path, rows: Sequence[MethodRow], comments=(), timings=False) -> None:
    with _open_for_csv(path) as f:
        for line in comments:
            f.write(f"# {line}\n")
        fields = ["level", "block", "energy", "error", "exact_fraction", "nodes", "converged"]
        if timings:
            fields.append("wall_s")
        writer = csv.writer(f)
        writer.writerow(fields)
        for r in rows:
            frac = "" if r.exact_fraction is None else f"{r.exact_fraction:.6f}"
            row = [
                r.level, r.block, r.energy,
                "" if r.error is None else r.error,
                frac, r.nodes, int(r.converged),
            ]
            if timings:
                row.append(f"{r.wall_s:.3f}")
            writer.writerow(row)
