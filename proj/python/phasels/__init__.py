"""Phase retrieval by nonlinear least squares: solvers, geometry and experiment harness."""

from ._phasels import (
    PhaselsError,
    Record,
    SolverResult,
    amplitude_gradient,
    compute_lambda,
    constrained_lasso,
    dist_sign,
    error_reduction,
    expected_abs_xi,
    expected_abs_xi_closed_form,
    f_theta,
    fit_loglog,
    fixed_point_residual,
    gaussian_width,
    gen_gaussian_matrix,
    gen_noise,
    gen_signal,
    linear_least_squares,
    project_l1_ball,
    regularized_lasso,
    run_cli,
    run_sweep,
    soft_threshold,
    spectral_init,
    srip_constants,
)

__all__ = [
    "PhaselsError",
    "Record",
    "SolverResult",
    "amplitude_gradient",
    "compute_lambda",
    "constrained_lasso",
    "dist_sign",
    "error_reduction",
    "expected_abs_xi",
    "expected_abs_xi_closed_form",
    "f_theta",
    "fit_loglog",
    "fixed_point_residual",
    "gaussian_width",
    "gen_gaussian_matrix",
    "gen_noise",
    "gen_signal",
    "linear_least_squares",
    "project_l1_ball",
    "regularized_lasso",
    "run_cli",
    "run_sweep",
    "soft_threshold",
    "spectral_init",
    "srip_constants",
]
