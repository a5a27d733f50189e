"""Galerkin/continuation solver for even positive homoclinic solutions of

    -(A(u) u')' + u = lam a1(t) |u|^(q-1) + |u|^(p-1) + g(|u'|)   on R.
"""

__version__ = "0.1.0"

from .basis import EvenBasis, GalerkinCoeffs, build_basis
from .constants import ConstantsReport, constants_report
from .continuation import (HomoclinicSolution, lambda_sweep, solve_homoclinic,
                           solve_Pn)
from .errors import HomoclinicError
from .galerkin import GalerkinSolution, GalerkinSystem, solve_in_ball
from .problem import (CATALOG, ProblemInstance, catalog_instance,
                      make_instance, validate_hypotheses)
from .strauss import StraussApproximant

__all__ = [
    "CATALOG", "ConstantsReport", "EvenBasis", "GalerkinCoeffs",
    "GalerkinSolution", "GalerkinSystem", "HomoclinicError",
    "HomoclinicSolution", "ProblemInstance", "StraussApproximant",
    "build_basis", "catalog_instance", "constants_report", "lambda_sweep",
    "make_instance", "solve_Pn", "solve_homoclinic", "solve_in_ball",
    "validate_hypotheses",
]
