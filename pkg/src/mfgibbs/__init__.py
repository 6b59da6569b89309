"""Mean-field Gibbs measures: energy functionals, particle systems,
theorem constants for Poincare/log-Sobolev inequalities, samplers, and
numerical oracles that verify the bounds."""

__version__ = "0.1.0"

from .bounds import (
    ConstantsReport,
    LsiInputs,
    PoincareInputs,
    defective_lsi_constants,
    full_report,
    kernel_example_constants,
    poincare_constant,
    quadratic_example_constants,
    tight_lsi_constant,
)
from .energies import (
    LinearPotentialEnergy,
    MeanFieldEnergy,
    PairwiseKernelEnergy,
    ParametrizedEnergy,
    ParticleSystem,
    QuadraticMeanEnergy,
)
from .errors import BlowUpError, GibbsUndefinedError, TheoremInvalidError
from .measures import DiscreteMeasure, empirical, mix, w2_squared

__all__ = [
    "__version__",
    "DiscreteMeasure",
    "empirical",
    "mix",
    "w2_squared",
    "MeanFieldEnergy",
    "QuadraticMeanEnergy",
    "LinearPotentialEnergy",
    "PairwiseKernelEnergy",
    "ParametrizedEnergy",
    "ParticleSystem",
    "PoincareInputs",
    "LsiInputs",
    "ConstantsReport",
    "poincare_constant",
    "defective_lsi_constants",
    "tight_lsi_constant",
    "full_report",
    "quadratic_example_constants",
    "kernel_example_constants",
    "BlowUpError",
    "GibbsUndefinedError",
    "TheoremInvalidError",
]
