"""Stochastic convex optimization with double-momentum gradient estimation.

Library layout:

- :mod:`mu2opt.geometry` - feasible sets, projections, diameters.
- :mod:`mu2opt.problems` - stochastic first-order oracles with known constants.
- :mod:`mu2opt.schedules` - weight and momentum schedules (exact-arithmetic API).
- :mod:`mu2opt.estimator` - corrected-momentum and double-momentum estimators.
- :mod:`mu2opt.optimizers` - update rules and trajectory logging.
- :mod:`mu2opt.harness` - sweeps, stability analysis, CSV persistence.
- :mod:`mu2opt.cli` - the ``mu2opt`` command.
"""

from .errors import (
    ConfigurationError,
    DiagnosticUnavailable,
    IngestionError,
    NumericError,
)
from .geometry import FeasibleSet, ball, box, contains, diameter, project, unconstrained
from .problems import (
    StochasticProblem,
    draw_sample,
    estimate_sigma_sq,
    load_csv_corpus,
    make_additive_quadratic,
    make_curvature_quadratic,
    make_finite_sum,
    stoch_grad,
    stoch_value,
)
from .schedules import (
    MomentumSchedule,
    WeightSchedule,
    fixed_gamma_weights,
    fixed_momentum,
    inverse_alpha_momentum,
    inverse_t_momentum,
    linear_weights,
    uniform_weights,
)
from .estimator import (
    Mu2State,
    QueryAverage,
    StormState,
    epsilon_sq,
    mu2_advance,
    mu2_advance_batched,
    mu2_init,
    storm_init,
    storm_update,
)
from .optimizers import ALGORITHMS, OptimizerConfig, Trajectory, run
from .harness import (
    RESULTS_HEADER,
    RunRecord,
    StabilityEntry,
    SweepGrid,
    eps_decay_slope,
    gap_vs_horizon_slope,
    log_space,
    read_results_csv,
    run_single,
    slope_fit,
    solve_reference_optimum,
    stability_ratio,
    summarize_rows,
    sweep,
    write_results_csv,
)

__version__ = "0.1.0"
