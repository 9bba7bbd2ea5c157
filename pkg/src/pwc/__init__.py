"""Exact dynamics of piecewise affine contractions and the mod-1 shift family."""
from .errors import *  # noqa: F401,F403
from .maps import (
    AffineBranch,
    ModOneFamily,
    PiecewiseContraction,
    bad_delta_check,
    conjugate_shift,
    generic_position_check,
    map_from_json,
    map_to_json,
    piecewise,
    reduce_mod_one,
)
from .orbits import detect_cycle, fixed_point_of_composition, iterate_with_itinerary, omega_limit
from .partition import (
    attractor_iterates,
    backward_closure,
    build_quasi_partition,
    extract_periodic_orbits,
    preimages,
    verify_certificate,
)
from .counting import boundary_intervals, equivalence_classes, verify_orbit_bound
from .ifs import IFSSpec, clamp_construction, compose_enumerate, highly_contractive_check, real_line_radius
from .sweep import Budgets, Classification, SweepRecord, estimate_exceptional, sweep_classify

__version__ = "0.1.0"
