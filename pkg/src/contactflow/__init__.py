"""Numerical contact Hamiltonian dynamics.

Contact Hamiltonian vector fields and flows with conformal factors, the
group operations on contact dynamical systems, Heisenberg-group
mollification, symplectization lifts and geodesic flows as Reeb flows,
plus an experiment runner (``contactflow`` on the command line).
"""
__version__ = "0.1.0"

from .charts import (ContactChart, check_contact_condition, flat_unit_cotangent_torus, rescaled_chart,
                     standard_heisenberg, volume_density)
from .core import (ConformalFactor, TimeDependentHamiltonian, constant_hamiltonian, contact_vector_field,
                   defining_residuals, is_basic, linear_combination, pullback_residual, reeb_derivative, reeb_field)
from .errors import (ConfigError, ContactFlowError, DegenerateContactForm, DomainEscape, GeometryError,
                     SingularMetric, StepResolutionError, SupportOverflow, ThetaCapExceeded, WindowEscape)
from .flow import (ContactSystem, FlowMap, IntegratorConfig, Trajectory, c0_distance, contact_distance,
                   generate_system, integrate_system, inverse_flow)
from .algebra import compose, invert, recover_hamiltonian, reparameterize, transform
from .norms import contact_norm, uniform_norm
from .transforms import ContactTransform, dilation

__all__ = [
    "ContactChart", "check_contact_condition", "flat_unit_cotangent_torus", "rescaled_chart",
    "standard_heisenberg", "volume_density", "ConformalFactor", "TimeDependentHamiltonian",
    "constant_hamiltonian", "contact_vector_field", "defining_residuals", "is_basic", "linear_combination",
    "pullback_residual", "reeb_derivative", "reeb_field", "ConfigError", "ContactFlowError",
    "DegenerateContactForm", "DomainEscape", "GeometryError", "SingularMetric", "StepResolutionError",
    "SupportOverflow", "ThetaCapExceeded", "WindowEscape", "ContactSystem", "FlowMap", "IntegratorConfig",
    "Trajectory", "c0_distance", "contact_distance", "generate_system", "integrate_system", "inverse_flow",
    "compose", "invert", "recover_hamiltonian", "reparameterize", "transform", "contact_norm", "uniform_norm",
    "ContactTransform", "dilation",
]
