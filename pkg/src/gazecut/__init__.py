"""Stereo depth estimation by exact graph cuts over gaze-line / depth-number space.

Instead of assigning a disparity to every pixel of one image, matching
sites are the gaze lines of the symmetric formulation (constant column sum
of the left/right pixel pair) and the unknowns are integer depth numbers
along them.  A convex smoothing profile makes the resulting labeling
energy exactly minimizable by a single minimum cut; two hierarchical modes
trade exactness for speed.
"""

from .energy import UNCUTTABLE, EnergyParams, sad_volume, total_energy
from .evalreport import (
    ErrorReport,
    best_penalty,
    compare_methods,
    error_count,
    error_from_histogram,
    sweep_penalty,
)
from .flownet import FlowNetwork, build_network, network_from_arcs
from .geometry import (
    CuboidSpec,
    GazeDepthCoord,
    WhsCoord,
    cross_from_pixels,
    cuboid_from_disparity_range,
    cuboid_with_offsets,
    disparity_from_whs,
    pixels_from_gaze_depth,
    whs_from_disparity,
)
from .hierarchy import coarsen, solve_level1, solve_level2, thin_skin
from .imaging import (
    GroundTruthDepth,
    ground_truth_to_depth,
    load_pgm,
    load_ppm,
    write_disparity_image,
    write_pgm,
    write_ppm,
)
from .maxflow import (
    CutResult,
    InternalConsistencyError,
    extract_labeling,
    maxflow_push_relabel,
    maxflow_reference,
    solve_exact,
)
from .synthetic import SyntheticScene, make_scene

__version__ = "0.1.0"

__all__ = [
    "CuboidSpec",
    "CutResult",
    "EnergyParams",
    "ErrorReport",
    "FlowNetwork",
    "GazeDepthCoord",
    "GroundTruthDepth",
    "InternalConsistencyError",
    "SyntheticScene",
    "UNCUTTABLE",
    "WhsCoord",
    "best_penalty",
    "build_network",
    "coarsen",
    "compare_methods",
    "cross_from_pixels",
    "cuboid_from_disparity_range",
    "cuboid_with_offsets",
    "disparity_from_whs",
    "error_count",
    "error_from_histogram",
    "extract_labeling",
    "ground_truth_to_depth",
    "load_pgm",
    "load_ppm",
    "make_scene",
    "maxflow_push_relabel",
    "maxflow_reference",
    "network_from_arcs",
    "pixels_from_gaze_depth",
    "sad_volume",
    "solve_exact",
    "solve_level1",
    "solve_level2",
    "sweep_penalty",
    "thin_skin",
    "total_energy",
    "whs_from_disparity",
    "write_disparity_image",
    "write_pgm",
    "write_ppm",
    "__version__",
]
