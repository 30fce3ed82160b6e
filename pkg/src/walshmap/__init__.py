"""Conformal maps onto lemniscatic domains for polynomial pre-images.

For ``E = P^{-1}(Omega)`` with ``Omega`` a disk, segment or Chebyshev
ellipse, the map ``Phi(z) = z + O(1/z)`` from the exterior of E onto the
exterior of ``L = {|Q| <= 1}`` satisfies ``Q o Phi = Psi o P``.
"""

from .green import (
    ContourPath,
    LemniscateGreen,
    PreimageGreen,
    contour_moment,
    contour_period,
    dw_green_L,
    dz_green_E,
    green_E,
    green_L,
)
from .model_sets import ModelSet
from .poly import Polynomial, RootFindingError, aberth
from .preimage import (
    DegenerateConfigurationError,
    GridResolutionError,
    PreimageStructure,
    analyze,
    trace_boundary,
)
from .solver import (
    LemniscaticScheme,
    UnsolvedError,
    capacity,
    centers_general,
    centers_two_components,
    exponents,
    moment_centers,
    solve,
    validate_scheme,
)
from .walsh import (
    BoundaryCorrespondence,
    check_identity,
    phi_boundary,
    phi_cauchy,
    phi_closed_form,
    phi_track,
)

__all__ = [
    "BoundaryCorrespondence",
    "ContourPath",
    "DegenerateConfigurationError",
    "GridResolutionError",
    "LemniscateGreen",
    "LemniscaticScheme",
    "ModelSet",
    "Polynomial",
    "PreimageGreen",
    "PreimageStructure",
    "RootFindingError",
    "UnsolvedError",
    "aberth",
    "analyze",
    "capacity",
    "centers_general",
    "centers_two_components",
    "check_identity",
    "contour_moment",
    "contour_period",
    "dw_green_L",
    "dz_green_E",
    "exponents",
    "green_E",
    "green_L",
    "moment_centers",
    "phi_boundary",
    "phi_cauchy",
    "phi_closed_form",
    "phi_track",
    "solve",
    "trace_boundary",
    "validate_scheme",
]
