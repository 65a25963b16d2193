"""
rsfsmooth - random spanning forests for graph Tikhonov regularization.

Smooths graph signals x = (L + Q)^-1 Q y exactly or by Monte Carlo over
random spanning forests, tunes the regularization by SURE or LOOCV, and
reuses the smoother inside interpolation, label propagation, generalized
semi-supervised learning, Newton's method for Poisson data and IRLS for l1
penalties. Conjugate gradient and Chebyshev filters serve as baselines.
"""

from .baselines import cg_solve, chebyshev_apply, chebyshev_setup, lambda_max
from .errors import (
    CapabilityError,
    ConfigError,
    DataError,
    DegenerateSmootherError,
    DimensionError,
    NumericError,
    ParameterError,
    RSFError,
    SingularReductionError,
    StepBudgetError,
    TuningError,
    UsageError,
)
from .forest import (
    DiagQ,
    Forest,
    ForestEnsemble,
    enumerate_forests,
    expected_roots_oracle,
    root_marginal_empirical,
    sample_ensemble,
    sample_forest,
    sample_forests,
    walk_cost_oracle,
)
from .graph import (
    Graph,
    bandlimited_signal,
    graph_from_spec,
    grid2d,
    laplacian_apply,
    laplacian_spectrum,
    load_edge_list,
    load_labels,
    load_linqs,
    load_pgm,
)
from .smoother import (
    DenseOracle,
    SmoothEstimate,
    estimate_bar,
    estimate_tilde,
    exact_smooth,
    variance_oracle,
)
from .tasks import (
    LabeledProblem,
    accuracy,
    generalized_ssl,
    interpolate,
    irls_l1,
    label_propagate,
    newton_poisson,
    psnr,
)
from .tuning import grid_search, loocv_exact, loocv_rsf, sure_exact, sure_rsf

__version__ = "0.1.0"
