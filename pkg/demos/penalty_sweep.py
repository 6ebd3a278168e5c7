"""
How the smoothing penalty shapes accuracy
=========================================

The pairwise cost charges ``penalty`` per unit depth step between
neighbouring gaze lines and ``inhibit`` for every further step.  This sweep
solves the same noisy scene exactly under a range of penalties and shows
the usual (here fairly shallow) U-shape: too little smoothing lets matching
noise through, too much flattens real depth steps away.
"""

from gazecut import (
    best_penalty,
    cuboid_from_disparity_range,
    ground_truth_to_depth,
    make_scene,
    sad_volume,
    sweep_penalty,
)

scene = make_scene(seed=11, width=160, height=120, dis_min=5, dis_max=13,
                   noise=12)
cuboid = cuboid_from_disparity_range(160, 120, scene.dis_min, scene.dis_max)
volume = sad_volume(scene.left, scene.right, cuboid)
gt = ground_truth_to_depth(scene.gt_image, scene.gt_scale, cuboid)

penalties = range(2, 31, 2)
print(f"{len(list(penalties))} exact solves on a {volume.shape} volume...")
records = sweep_penalty(volume, gt, penalties, inhibit=1023)

print()
print(f"{'penalty':>7} {'energy':>9} {'error':>7} {'exact':>7}")
for r in records:
    print(f"{r.penalty:>7} {r.energy:>9} {r.error:>7} {r.exact_fraction:>7.1%}")

best = best_penalty(records)
print()
print(f"minimum error at penalty {best}")
