"""Series solutions of Heun's general equation.

Frobenius solutions, derivative identities between Heun equations, and
expansions in Gauss and Appell hypergeometric functions, each checked
against an independent numerical oracle.
"""

from .core import (
    Branch,
    Exponents,
    HeunParams,
    LocalSeries,
    Point,
    convergence_radius,
    eval_series,
    eval_series_all,
    eval_series_derivative,
    frobenius_series,
    heun_coefficients,
    indicial_exponents,
    ode_residual,
    validate_params,
)
from .errors import HeunError, NumericalError, TruncationWarning, ValidationError
from .expansions import (
    Kind,
    closed_form_case1,
    expand_case3_2f1,
    expand_case3_appell,
    expand_case3_beta,
    find_closed_form_params,
    term_singular_exponent,
)
from .hypergeo import (
    AppellF1Spec,
    Gauss2F1Spec,
    antiderivative_term,
    appell_f1,
    eq33_reduction,
    gauss_2f1,
    incomplete_beta,
)
from .identities import (
    Case,
    IdentityCase,
    PrimedParams,
    VerificationReport,
    closed_form_admissible,
    derived_coefficients,
    map_case,
    verify_identity,
)
from .oracle import IntegrationSpec, adaptive_quadrature, integrate_heun, integrate_heun_many

__version__ = "0.1.0"

_SUBMODULES = {"cli", "core", "errors", "expansions", "hypergeo", "identities", "oracle"}
__all__ = [name for name in dir() if not name.startswith("_") and name not in _SUBMODULES]
