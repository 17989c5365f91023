"""Stationary distributions of stochastic mappings driven by contracting
feedback: exact characteristic functions, multifractal integrals over
self-similar weighted point sets, and the chaotic-ring density of the
noisy Ikeda map."""

__version__ = "0.1.0"

from .numkit import (
    Grid1D,
    Grid2D,
    GridFunction,
    ProductTruncation,
    ProductResult,
    QuadratureError,
    RngSeed,
    bessel_j0,
    bessel_y0,
    chain_generator,
    gaussian_sample,
    make_generator,
    quad_adaptive,
    truncated_product,
    truncated_product_grid,
)
from .models import (
    DIVERGENCE_GUARD,
    DivergenceError,
    GaussianNoise,
    IkedaMap,
    KuboAndersen,
    LinearDet,
    MixedNoise,
    NoNoise,
    OrnsteinUhlenbeck,
    apply_map,
    iterate,
    map_dim,
    noise_block,
    noise_dim,
    sample_noise,
)
from .stationary import (
    CharFnResult,
    charfn_gauss_ka,
    charfn_linear_det,
    charfn_linear_gauss,
    density_from_charfn,
    noise_charfn,
)
from .mfi import (
    Dimensions,
    FractalSpec,
    MfiResult,
    NormalizationError,
    WeightedPointSet,
    box_counting_dimension,
    cauchy_tail_bound,
    dilatation_factor,
    dimensions,
    measure_charfn,
    mfi_2d_eval,
    mfi_box_eval,
    mfi_eval,
    prefractal,
    singular_measure_approx,
    weight_bound,
)
from .ikeda import (
    RadialDensity,
    XiFunction,
    j0_envelope_split,
    p_ch,
    p_st_ikeda,
    xi,
    xi_values,
)
from .simulate import (
    EmpiricalSummary,
    EnsembleSpec,
    compare,
    empirical_charfn,
    radial_center,
    read_samples_binary,
    run_ensemble,
    write_samples_binary,
)

__all__ = [
    "__version__",
    # grids, special functions, rng plumbing
    "Grid1D",
    "Grid2D",
    "GridFunction",
    "ProductTruncation",
    "ProductResult",
    "QuadratureError",
    "RngSeed",
    "bessel_j0",
    "bessel_y0",
    "chain_generator",
    "gaussian_sample",
    "make_generator",
    "quad_adaptive",
    "truncated_product",
    "truncated_product_grid",
    # maps and noises
    "DIVERGENCE_GUARD",
    "DivergenceError",
    "GaussianNoise",
    "IkedaMap",
    "KuboAndersen",
    "LinearDet",
    "MixedNoise",
    "NoNoise",
    "OrnsteinUhlenbeck",
    "apply_map",
    "iterate",
    "map_dim",
    "noise_block",
    "noise_dim",
    "sample_noise",
    # closed-form stationary laws
    "CharFnResult",
    "charfn_gauss_ka",
    "charfn_linear_det",
    "charfn_linear_gauss",
    "density_from_charfn",
    "noise_charfn",
    # multifractal integrals
    "Dimensions",
    "FractalSpec",
    "MfiResult",
    "NormalizationError",
    "WeightedPointSet",
    "box_counting_dimension",
    "cauchy_tail_bound",
    "dilatation_factor",
    "dimensions",
    "measure_charfn",
    "mfi_2d_eval",
    "mfi_box_eval",
    "mfi_eval",
    "prefractal",
    "singular_measure_approx",
    "weight_bound",
    # chaotic ring
    "RadialDensity",
    "XiFunction",
    "j0_envelope_split",
    "p_ch",
    "p_st_ikeda",
    "xi",
    "xi_values",
    # ensembles and comparison
    "EmpiricalSummary",
    "EnsembleSpec",
    "compare",
    "empirical_charfn",
    "radial_center",
    "read_samples_binary",
    "run_ensemble",
    "write_samples_binary",
]
