"""Total-variation regularized inversion by domain decomposition.

Solves ``min_u ||T u - g||^2 + 2 alpha TV(u)`` on regular grids by
alternating (or averaged) surrogate minimizations over stripes of the
grid, with nonoverlapping or overlapping subdomains.
"""

from ._accel import backend
from .decomposition import Decomposition, project_onto_subspace, split_nonoverlapping, split_overlapping
from .grid import GridShape, divergence, energy, gradient, total_variation
from .operators import (
    DegenerateProblemError,
    MaskOperator,
    MeasurementOperator,
    PartialFourierOperator,
    estimate_norm,
    fourier_sampling_mask,
    normalize_problem,
)
from .oracles import check_optimality, oracle_minimize, taut_string_1d
from .prox import ProjectionConfig, project_onto_alphaK, tv_denoise
from .solver import (
    ALGORITHMS,
    SolverConfig,
    SolverState,
    solve_parallel_nonoverlapping,
    solve_sequential_nonoverlapping,
    solve_sequential_overlapping,
    surrogate_inner_step,
)

__version__ = "0.1.0"
