"""CP decomposition of dense third-order tensors.

Library layout:

- tensors      dense tensor values, Khatri-Rao products, unfoldings
- linalg       deterministic eigendecomposition / SVD / pseudo-inverse
- reduced      eliminated-factor objective and its three evaluation routes
- centroid     residual bounds and the centroid-projection initializer
- solve        ALS-family solvers and the run driver
- diagnostics  swamp metrics and rank-1 critical-point tools
- generate     synthetic tensor generators
- io           text file formats
- cli          the `cpkit` command

The hot kernels live in a compiled extension when available, with a NumPy
fallback selected at import (`cpkit.kernels.backend()` reports which).
"""

from . import kernels
from .centroid import (CentroidBundle, centroid, centroid_init,
                       centroid_init_symmetric, gap_bound, lower_bound,
                       per_mode_bounds, upper_bound)
from .diagnostics import (SwampReport, kr_condition, rank1_critical_residual,
                          rank1_stationarity_check, subspace_proj_distance,
                          swamp_report)
from .generate import GeneratorSpec, generate
from .linalg import EigResult, SvdResult, numerical_rank, pinv_gram, svd, sym_eig
from .reduced import (ContractionKernel, GramianG, contraction_kernel,
                      gramian, objective, rayleigh_sum, reduced_objective,
                      reduced_objective_projection, reduced_objective_spectral,
                      reduced_objective_trace, solve_factor)
from .solve import (ConvergenceTrace, SolverConfig, als_sweep, decompose,
                    lsals_sweep, rals_schedule, rals_sweep, random_init)
from .tensors import (FactorSet, frobenius_sq, inner, khatri_rao, outer3,
                      refold, tucker_23, unfold)

__version__ = "0.1.0"
