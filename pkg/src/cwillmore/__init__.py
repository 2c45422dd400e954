"""Confined Willmore surfaces of revolution in the unit ball.

Constructions (catenoid necks, polar bumps), exact integral identities turned
into numerical checks, and a penalized gradient-descent probe for the minimal
bending energy at prescribed area.
"""

from .geometry import (
    Arc,
    Catenary,
    Graph,
    ParametricSegment,
    PointFrame,
    RevolutionSurface,
    SurfaceReport,
    frame_at,
    integrate,
    integrate_many,
    report,
    sphere,
)
from .bump import (
    BumpSpec,
    alpha_star,
    area_excess,
    bracket_integrals,
    build_bump_sphere,
    eta_std,
    sweep_bump,
    willmore_excess,
)
from .neck import (
    NeckEnergies,
    NeckSolution,
    build_double_sphere,
    build_sigma_plus,
    closed_form_energies,
    eval_F,
    nested_family,
    solve_neck,
)
from .identities import (
    IdentityReport,
    verify_all,
    verify_area_defect,
    verify_first_variation,
    willmore_area_gap,
)
from .probe import (
    DiscreteProfile,
    ProbeConfig,
    ProbeResult,
    discrete_energy,
    minimize,
    sandwich_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
