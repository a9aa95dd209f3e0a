"""COGS: generative-sampling training pipeline for neural TSP solvers.

The heavy lifting lives in the C++ extension module `_cogs`; this package
re-exports its surface.
"""

from ._cogs import (  # noqa: F401
    SolverPolicy,
    VaeModel,
    __version__,
    brute_force,
    distance_matrix,
    held_karp,
    local_search,
    normalize_to_unit_square,
    optimality_gap,
    parse_tsplib,
    pearson_correlation,
    reweight,
    sample_clustered_uniform,
    sample_diagonal,
    sample_gaussian_mixture,
    sample_uniform,
    tour_length,
    welch_t_test,
    worst_tail_mean,
    write_tsplib,
)
