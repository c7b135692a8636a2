"""Multi-index (quasi-)Monte Carlo estimation for elliptic PDEs with
lognormal diffusion coefficients."""

from ._core import (
    KLBasis,
    LatticeRule,
    MaternParams,
    RunConfig,
    apply_shift,
    boundary,
    build_kl_basis,
    corner_expansion,
    default_lattice,
    evaluate_field,
    field_preset,
    fit_rate,
    generate_index_set,
    inv_normal_cdf,
    is_admissible,
    lattice_point,
    load_generating_vector,
    matern_cov,
    optimal_samples,
    qmc_normal_sample,
    run,
    run_sweep_config,
)

__all__ = [
    "KLBasis",
    "LatticeRule",
    "MaternParams",
    "RunConfig",
    "apply_shift",
    "boundary",
    "build_kl_basis",
    "corner_expansion",
    "default_lattice",
    "evaluate_field",
    "field_preset",
    "fit_rate",
    "generate_index_set",
    "inv_normal_cdf",
    "is_admissible",
    "lattice_point",
    "load_generating_vector",
    "matern_cov",
    "optimal_samples",
    "qmc_normal_sample",
    "run",
    "run_sweep_config",
]

__version__ = "0.1.0"
