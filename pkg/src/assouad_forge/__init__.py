"""Finite truncations of a compact planar set whose projections realise a
prescribed dimension profile, with covering-number estimators and checks."""

__version__ = "0.1.0"

from .construction import Cluster, Truncation, build_f, cluster, e_set, y_set, z_set
from .estimator import WindowSpec, assouad_estimate, box_estimate, parse_window, sweep
from .metrics import cover_count_1d, cover_count_2d, hausdorff, normalize, project
from .profile import Profile, contraction_of, evaluate, load_profile, make_profile
from .scalar import Scalar, precision, scalar, set_precision, working_precision
from .scheduler import approximants, enumerate_directions, pair_index, unpair
from .tangents import convergence_study, reference_set, tangent_image

__all__ = [
    "Cluster", "Profile", "Scalar", "Truncation", "WindowSpec", "approximants",
    "assouad_estimate", "box_estimate", "build_f", "cluster", "contraction_of",
    "convergence_study", "cover_count_1d", "cover_count_2d", "e_set", "enumerate_directions",
    "evaluate", "hausdorff", "load_profile", "make_profile", "normalize", "pair_index",
    "parse_window", "precision", "project", "reference_set", "scalar", "set_precision",
    "sweep", "tangent_image", "unpair", "working_precision", "y_set", "z_set",
]
