"""Strong stationary duality for birth-and-death chains.

Build classical, anti- and spectral duals of birth-and-death kernels and
generators, compute absorption-time laws exactly, and check by seeded
simulation that the dual absorption time is a strong stationary time.
"""

from ._accel import backend_name
from .absorption import (
    LatticePmf,
    TimeGridCdf,
    absorption_cdf_continuous,
    absorption_pmf,
    gaussian_split_residual,
    geometric_convolution,
    hitting_laplace,
    hypoexponential_cdf,
    lazy_pgf_identity_check,
    occupation_laplace,
    pgf_product,
)
from .core import (
    ContinuousGenerator,
    DiscreteKernel,
    Pmf,
    ValidationReport,
    auto_eps,
    discretize,
    lazy,
    stationary_pmf,
    stationary_pmf_generator,
    validate_discrete,
)
from .coupling import (
    CoupledTrajectory,
    RngSpec,
    SstReport,
    dual_birth_probability,
    monte_carlo_sst,
    run_coordinate_dual,
    run_coupled_continuous,
    run_coupled_discrete,
)
from .duality import (
    AntiDualResult,
    DualPair,
    Link,
    anti_dual,
    anti_dual_generator,
    classical_dual,
    classical_dual_generator,
    intertwining_residual,
    spectral_dual_discrete,
    spectral_dual_generator,
)
from .errors import BDError
from .spectral import QFamily, Spectrum, eigenvalues_discrete, eigenvalues_generator, q_family_continuous, q_family_discrete
from .specfile import load_fixture, parse_chain_spec

__version__ = "0.1.0"

__all__ = [
    "AntiDualResult",
    "BDError",
    "ContinuousGenerator",
    "CoupledTrajectory",
    "DiscreteKernel",
    "DualPair",
    "LatticePmf",
    "Link",
    "Pmf",
    "QFamily",
    "RngSpec",
    "Spectrum",
    "SstReport",
    "TimeGridCdf",
    "ValidationReport",
    "absorption_cdf_continuous",
    "absorption_pmf",
    "anti_dual",
    "anti_dual_generator",
    "auto_eps",
    "backend_name",
    "classical_dual",
    "classical_dual_generator",
    "discretize",
    "dual_birth_probability",
    "eigenvalues_discrete",
    "eigenvalues_generator",
    "gaussian_split_residual",
    "geometric_convolution",
    "hitting_laplace",
    "hypoexponential_cdf",
    "intertwining_residual",
    "lazy",
    "lazy_pgf_identity_check",
    "load_fixture",
    "monte_carlo_sst",
    "occupation_laplace",
    "parse_chain_spec",
    "pgf_product",
    "q_family_continuous",
    "q_family_discrete",
    "run_coordinate_dual",
    "run_coupled_continuous",
    "run_coupled_discrete",
    "spectral_dual_discrete",
    "spectral_dual_generator",
    "stationary_pmf",
    "stationary_pmf_generator",
    "validate_discrete",
]
