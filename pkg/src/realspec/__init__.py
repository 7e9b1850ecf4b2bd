"""Probability that a product of real Gaussian matrices has only real eigenvalues."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .ensemble import EnsembleSpec, rng_stream
from .equilibrium import (
    EquilibriumMeasure,
    decay_base,
    equilibrium_density,
    equilibrium_energy,
    freud_constant,
    limit_ratio,
    log_p_asymptotic,
)
from .mellin_barnes import alpha_entry, weight_density
from .montecarlo import MCConfig, MCResult, count_real_eigenvalues, estimate_p, sample_product
from .precision import DEFAULT_PRECISION, bessel_k0, digamma, log_gamma
from .probability import (
    PiRationalForm,
    ProbabilityResult,
    p_all_real_exact,
    p_all_real_ratio,
    p_all_real_single,
    recognize_pi_rational,
)

__all__ = [
    "DEFAULT_PRECISION",
    "EnsembleSpec",
    "EquilibriumMeasure",
    "MCConfig",
    "MCResult",
    "PiRationalForm",
    "ProbabilityResult",
    "alpha_entry",
    "bessel_k0",
    "count_real_eigenvalues",
    "decay_base",
    "digamma",
    "equilibrium_density",
    "equilibrium_energy",
    "estimate_p",
    "freud_constant",
    "limit_ratio",
    "log_gamma",
    "log_p_asymptotic",
    "p_all_real_exact",
    "p_all_real_ratio",
    "p_all_real_single",
    "recognize_pi_rational",
    "rng_stream",
    "sample_product",
    "weight_density",
]
