"""Trace-distance non-Markovianity toolkit for the zero-temperature,
unbiased spin-boson model.

Three interoperable dynamics backends (excitation-truncated exact
propagation, TCL2 master equation, weak-coupling closed forms) feed a
shared trace-distance measurement layer and a command line driver.
"""

__version__ = "0.1.0"

from .errors import (
    BackflowError,
    ConfigError,
    DomainError,
    NumericalError,
    ResourceError,
    SchemaError,
    ShapeError,
)
from .model import (
    BathMode,
    DiscretizedBath,
    ModelConfig,
    OhmicSpectralDensity,
    discretize_bath,
    ohmic_j,
    reorganization_sum,
)
from .analytic import (
    WeakCouplingParams,
    analytic_trajectory,
    nonmarkovianity_alpha_zero,
    partitioned_nonmarkovianity,
    resummed_nonmarkovianity,
    sigma_z_analytic,
    trace_distance_analytic,
    weak_coupling_params,
)
from .measure import (
    BackflowInterval,
    BlochTrajectory,
    NonMarkovianityReport,
    TraceDistanceSeries,
    detect_intervals,
    mirror_bloch,
    nonmarkovianity,
    trace_distance_pair,
    trace_distance_sigma_z,
)
from .tcl2 import (
    BathCorrelation,
    CoefficientTable,
    Tcl2Coefficients,
    bath_correlation,
    tcl2_coefficients,
    tcl2_propagate,
)

__all__ = [
    "__version__",
    "BackflowError",
    "ConfigError",
    "DomainError",
    "NumericalError",
    "ResourceError",
    "SchemaError",
    "ShapeError",
    "BathMode",
    "DiscretizedBath",
    "ModelConfig",
    "OhmicSpectralDensity",
    "discretize_bath",
    "ohmic_j",
    "reorganization_sum",
    "WeakCouplingParams",
    "analytic_trajectory",
    "nonmarkovianity_alpha_zero",
    "partitioned_nonmarkovianity",
    "resummed_nonmarkovianity",
    "sigma_z_analytic",
    "trace_distance_analytic",
    "weak_coupling_params",
    "BackflowInterval",
    "BlochTrajectory",
    "NonMarkovianityReport",
    "TraceDistanceSeries",
    "detect_intervals",
    "mirror_bloch",
    "nonmarkovianity",
    "trace_distance_pair",
    "trace_distance_sigma_z",
    "BathCorrelation",
    "CoefficientTable",
    "Tcl2Coefficients",
    "bath_correlation",
    "tcl2_coefficients",
    "tcl2_propagate",
]
