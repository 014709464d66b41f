"""Numerical toolkit for weighted isoperimetric quotients in convex cones.

The package measures the weighted quotient P(E)/m(E)^((D-1)/D) for star
domains in a cone, searches for shapes beating the cap ball, locates the
opening angle where ball minimality fails for radial-power weights, and
certifies the sliding-plane proof chain on concrete planar domains.
"""

from .cone import CapGrid, ConvexCone, cap_quadrature, orthant, sector
from .weight import (
    ConcavityReport,
    HomogeneousWeight,
    check_concavity,
    compatible,
    concavity_pairwise,
    constant,
    monomial,
    radial_power,
)
from .domain import PlanarProfile, StarDomain, ball, from_profile, perturb
from .measure import (
    MeasureReport,
    ball_reference,
    ball_report,
    closed_form_ball,
    effective_dimension,
    perimeter_inside_cone,
    quotient,
    volume,
)
from .optimize import (
    AngleScan,
    ModeObjective,
    OptimResult,
    minimize_quotient,
    scan_critical_angle,
    second_variation_coefficient,
)
from .abp import (
    AbpCertificate,
    InteriorDomain,
    NeumannSolution,
    certify,
    contact_set,
    disk,
    gradient_image_cover,
    solve_neumann,
    verify_chain,
    weighted_amgm,
)

__version__ = "0.1.0"

__all__ = [
    "AbpCertificate",
    "AngleScan",
    "CapGrid",
    "ConcavityReport",
    "ConvexCone",
    "HomogeneousWeight",
    "InteriorDomain",
    "MeasureReport",
    "ModeObjective",
    "NeumannSolution",
    "OptimResult",
    "PlanarProfile",
    "StarDomain",
    "ball",
    "ball_reference",
    "ball_report",
    "cap_quadrature",
    "certify",
    "check_concavity",
    "closed_form_ball",
    "compatible",
    "concavity_pairwise",
    "constant",
    "contact_set",
    "disk",
    "effective_dimension",
    "from_profile",
    "gradient_image_cover",
    "minimize_quotient",
    "monomial",
    "orthant",
    "perimeter_inside_cone",
    "perturb",
    "quotient",
    "radial_power",
    "scan_critical_angle",
    "second_variation_coefficient",
    "sector",
    "solve_neumann",
    "verify_chain",
    "volume",
    "weighted_amgm",
]
