"""Radial operators on weighted Bergman spaces of Reinhardt domains."""

from .errors import NumericFailure, PreconditionError, RadopError
from .geometry import DomainSpec, ball, disk, hartogs_triangle, poly_annulus, polydisc
from .lattice import IndexBox, IndexSet, enumerate_allowable
from .norms import BergmanSpace, DirichletSpace, HardySpace, monomial_norm_sq
from .operators import LaurentPoly, RadialOperator, apply_diagonal, apply_integral, spectrum_report
from .algebra import AlgebraElement, classify_membership

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement", "BergmanSpace", "DirichletSpace", "DomainSpec", "HardySpace", "IndexBox", "IndexSet",
    "LaurentPoly", "NumericFailure", "PreconditionError", "RadialOperator", "RadopError", "apply_diagonal",
    "apply_integral", "ball", "classify_membership", "disk", "enumerate_allowable", "hartogs_triangle",
    "monomial_norm_sq", "poly_annulus", "polydisc", "spectrum_report",
]
