"""Numerical checks around rigidity of smooth-almost-everywhere Burgers solutions on the plane.

Catalog fields live in :mod:`.solutions`, the eikonal transform in
:mod:`.transform`, checkers in :mod:`.verify`, the Godunov solver in
:mod:`.entropy` and singular-set estimates in :mod:`.singular`.
"""

from .fields import Domain, FieldEvaluationError, GridField, SolutionField, sample
from .solutions import (ConeInducedParams, RiemannData, constant_solution, cone_induced_solution, field_from_spec,
                        lift_flux, rarefaction_solution, riemann_entropy_solution)
from .transform import GluedEikonalField, GraphCurve, StripDecomposition, transform_multistrip, transform_simple
from .verify import (ClassificationResult, OleinikParams, ResidualReport, burgers_residual, check_gradient_identities,
                     check_oleinik, classify, eikonal_residual)
from .entropy import IVPConfig, solve_ivp
from .singular import SingularSetEstimate, detect_singular

__version__ = "0.1.0"

__all__ = [
    "Domain", "FieldEvaluationError", "GridField", "SolutionField", "sample",
    "ConeInducedParams", "RiemannData", "constant_solution", "cone_induced_solution", "field_from_spec", "lift_flux",
    "rarefaction_solution", "riemann_entropy_solution",
    "GluedEikonalField", "GraphCurve", "StripDecomposition", "transform_multistrip", "transform_simple",
    "ClassificationResult", "OleinikParams", "ResidualReport", "burgers_residual", "check_gradient_identities",
    "check_oleinik", "classify", "eikonal_residual",
    "IVPConfig", "solve_ivp", "SingularSetEstimate", "detect_singular",
]
