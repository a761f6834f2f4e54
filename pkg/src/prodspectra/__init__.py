"""Limiting squared-singular-value densities of products of complex Ginibre
and truncated Haar unitary matrices."""

from .analytic import density, integrate_moments, model_cdf, support_edge
from .closed_form import (
    density_arcsine,
    density_fc,
    density_mp,
    density_murr,
    density_murr1,
    edge_constants_murr,
    invert_parameterization,
    rho_r,
)
from .contour import (
    EdgeBehavior,
    HypothesisViolation,
    RationalDensityProblem,
    count_sector_roots,
    density_general,
    edge_constant_right,
    support_edge_general,
    validate_problem,
)
from .moments import jacobi_at_zero, moment_murs, raney_number
from .murs import build_problem, density_murs, support_edge_closed
from .numkit import RealPoly
from .oracle import density_oracle, edge_search, trace_branch
from .product import ProductSpec, SupportEdge
from .sampler import EnsembleConfig, EmpiricalSpectrum, ks_distance, sample_spectrum

__version__ = "0.1.0"
