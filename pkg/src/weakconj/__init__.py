"""Weakly conjugate operator tools for adjacency operators on periodic graphs
and convolution operators on F x Z^d."""

__version__ = "0.1.0"

from .gaussq import GaussQ
from .graph_core import PeriodicGraph, VertexFunction, Orientation, load_graph, load_vertex_function, neighbors, ball
from .certify import (
    check_admissible,
    check_adapted,
    check_semi_adapted,
    check_uniform,
    filter_adapted,
    find_position_function,
    solve_semi_adapted,
)
from .operators import (
    FinVector,
    apply_A,
    apply_H,
    apply_K,
    kernel_H_membership,
    kernel_K_membership,
    truncate,
    verify_B_equals_K2,
    verify_HK_commute,
    virial_check,
)
from .laurent import LaurentMatrix, LaurentPoly
from .bloch import band_samples, certify_flat_band, classify_spectrum, fiber_matrix, flat_band_candidates
from .groupconv import (
    Character,
    DiscreteGroup,
    Measure,
    adjoint_measure,
    babel_report,
    centreaza_check,
    check_hom1,
    check_hom2,
    conv_fiber,
    convolve,
    corollary_precis_check,
    k_subspace_report,
    phi_measure,
    symmetric_group_s3,
)
