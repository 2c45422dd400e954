"""Sphere-catenoid-sphere neck construction and the nested-sphere family.

Given an inner radius 0 < r < 1, the tangency system determines a small
bridging sphere (radius r1, center (x1, y1)), a tangency angle beta, and a
catenary (waist lam, axis offset y0) so that the chain

    gamma_4 (inner sphere arc) - catenary lower/upper branch -
    gamma_2 (small sphere arc) - gamma_1 (unit sphere arc)

is a C^1 profile curve in the upper right quadrant.  The reduced system is
two equations F(r, r1, beta) = 0 plus closed-form back-substitutions:

    F1 = r cos b + 2 r sin^2 b arccosh(1/sin b) - r1 cos b - (1 - r1) sin b
    F2 = (r + r1) sin b - (1 - r1) cos b
    x1 = (1 - r1) cos b,  y1 = (1 - r1) sin b,
    x0 = r sin b,  lam = x0 sin b,  y0 = (y1 + (r + r1) cos b) / 2.

F(1, 1, 0) = 0 with nonsingular Jacobian in (r1, beta), and the implicit
branch has r1'(1) = 1, beta'(1) = -1/2, which seeds the Newton iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bump import amplitude_ceiling, bump_graph, excess_pair
from .errors import (
    AreaTargetError,
    ConstructionError,
    ParameterRangeError,
    SolverError,
)
from .geometry import Arc, Catenary, RevolutionSurface, integrate_many

R_MIN = 0.5
RESIDUAL_TOL = 1e-12
NEWTON_MAX_ITER = 50
CONTINUATION_START = 0.999
CONTINUATION_STEP = 0.01

_BETA_FLOOR = 1e-12


@dataclass(frozen=True)
class NeckSolution:
    """Solved tangency data for one inner radius r."""

    r: float
    r1: float
    beta: float
    x1: float
    y1: float
    x0: float
    y0: float
    lam: float
    residual: float

    def as_dict(self) -> dict:
        return {
            "r": self.r, "r1": self.r1, "beta": self.beta,
            "x1": self.x1, "y1": self.y1, "x0": self.x0, "y0": self.y0,
            "lambda": self.lam, "residual": self.residual,
        }

    @property
    def u_plus(self) -> float:
        """Catenary parameter of the tangency points: cosh(u+) = 1/sin(beta)."""
        return float(np.arccosh(1.0 / np.sin(self.beta)))


@dataclass(frozen=True)
class NeckEnergies:
    """Closed-form component areas and Willmore energy of the upper surface."""

    A1: float
    A2: float
    A3: float
    A4: float
    A_plus: float
    W_plus: float


def eval_F(r: float, r1: float, beta: float) -> tuple[float, float]:
    """The two tangency equations; the sin^2 b arccosh(1/sin b) term tends to
    zero as beta -> 0 and is evaluated as that limit below 1e-12."""
    sb, cb = math.sin(beta), math.cos(beta)
    if beta <= _BETA_FLOOR:
        term = 0.0
    else:
        term = 2.0 * r * sb * sb * math.acosh(1.0 / sb)
    f1 = r * cb + term - r1 * cb - (1.0 - r1) * sb
    f2 = (r + r1) * sb - (1.0 - r1) * cb
    return f1, f2


def neck_jacobian(r: float, r1: float, beta: float) -> np.ndarray:
    """Analytic Jacobian of F in (r1, beta)."""
    sb, cb = math.sin(beta), math.cos(beta)
    ac = math.acosh(1.0 / sb) if beta > _BETA_FLOOR else 0.0
    d11 = -cb + sb
    d12 = -r * sb + 4.0 * r * sb * cb * ac - 2.0 * r * sb + r1 * sb - (1.0 - r1) * cb
    d21 = sb + cb
    d22 = (r + r1) * cb + (1.0 - r1) * sb
    return np.array([[d11, d12], [d21, d22]])


def _newton(r: float, r1: float, beta: float) -> tuple[float, float, float]:
    for _ in range(NEWTON_MAX_ITER):
        f = np.array(eval_F(r, r1, beta))
        res = float(np.max(np.abs(f)))
        if res <= RESIDUAL_TOL:
            return r1, beta, res
        try:
            step = np.linalg.solve(neck_jacobian(r, r1, beta), -f)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular Jacobian in neck solve",
                              last_iterate=(r1, beta)) from exc
        lam = 1.0
        while lam > 1e-8:
            cand = (r1 + lam * step[0], beta + lam * step[1])
            if 0.0 < cand[0] < 1.0 and 0.0 < cand[1] < math.pi / 2:
                break
            lam *= 0.5
        r1, beta = r1 + lam * step[0], beta + lam * step[1]
    f = np.array(eval_F(r, r1, beta))
    res = float(np.max(np.abs(f)))
    if res <= RESIDUAL_TOL:
        return r1, beta, res
    raise SolverError(
        f"Newton did not reach residual {RESIDUAL_TOL:g} at r={r} (got {res:.3e})",
        last_iterate=(r1, beta))


def _fill(r: float, r1: float, beta: float, res: float) -> NeckSolution:
    sb, cb = math.sin(beta), math.cos(beta)
    x1 = (1.0 - r1) * cb
    y1 = (1.0 - r1) * sb
    x0 = r * sb
    lam = x0 * sb
    y0 = 0.5 * (y1 + (r + r1) * cb)
    return NeckSolution(r=r, r1=r1, beta=beta, x1=x1, y1=y1,
                        x0=x0, y0=y0, lam=lam, residual=res)


def solve_neck(r: float) -> NeckSolution:
    """Solve the tangency system for inner radius r in (R_MIN, 1).

    Newton iteration with the analytic Jacobian, seeded by the linearization
    r1 ~ r, beta ~ (1-r)/2 near r = 1 and by continuation in steps of 0.01
    from r = 0.999 further away.
    """
    if not R_MIN < r < 1.0:
        raise ParameterRangeError(
            f"solve_neck requires r in ({R_MIN}, 1), got {r}")
    if r >= CONTINUATION_START - 1e-12:
        r1, beta, res = _newton(r, r, (1.0 - r) / 2.0)
    else:
        rr = CONTINUATION_START
        r1, beta, res = _newton(rr, rr, (1.0 - rr) / 2.0)
        while rr > r + 1e-15:
            rr = max(r, rr - CONTINUATION_STEP)
            r1, beta, res = _newton(rr, r1, beta)
    if not (0.0 < r1 < 1.0 and 0.0 < beta < math.pi / 2):
        raise SolverError(f"neck solution out of domain at r={r}",
                          last_iterate=(r1, beta))
    return _fill(r, r1, beta, res)


def closed_form_energies(sol: NeckSolution) -> NeckEnergies:
    """Component areas A1..A4, total A+, and Willmore energy W+ of Sigma_+."""
    r, r1, b = sol.r, sol.r1, sol.beta
    sb, cb = math.sin(b), math.cos(b)
    ac = math.acosh(1.0 / sb)
    A1 = 2.0 * math.pi * sb
    A2 = 2.0 * math.pi * (r1 * (1.0 - r1) * (math.pi / 2.0) * cb
                          + r1**2 * (cb - sb))
    A3 = 2.0 * math.pi * (r**2 * sb**2 * cb + r**2 * sb**4 * ac)
    A4 = 2.0 * math.pi * r**2 * cb
    W = math.pi**2 * (1.0 - r1) / r1 * cb + 4.0 * math.pi * cb
    return NeckEnergies(A1=A1, A2=A2, A3=A3, A4=A4,
                        A_plus=A1 + A2 + A3 + A4, W_plus=W)


def neck_segments(sol: NeckSolution, *, outer_normal: int = 1) -> tuple:
    """The five profile segments gamma_4 .. gamma_1, traversed from (r, 0).

    ``outer_normal`` is the normal sign of the outer (unit-sphere side)
    pieces; the inner sphere and the catenary carry the opposite sign so the
    normal field is continuous across the tangencies.
    """
    r, r1, b = sol.r, sol.r1, sol.beta
    up = sol.u_plus
    s = outer_normal
    gamma4 = Arc(center=(0.0, 0.0), radius=r, t0=0.0, t1=math.pi / 2 - b,
                 normal_sign=-s)
    cat_lower = Catenary(lam=sol.lam, y0=sol.y0, branch=-1, t0=up, t1=0.0,
                         normal_sign=-s)
    cat_upper = Catenary(lam=sol.lam, y0=sol.y0, branch=1, t0=0.0, t1=up,
                         normal_sign=-s)
    gamma2 = Arc(center=(sol.x1, sol.y1), radius=r1, t0=b + math.pi / 2,
                 t1=b, normal_sign=s)
    gamma1 = Arc(center=(0.0, 0.0), radius=1.0, t0=b, t1=0.0, normal_sign=s)
    return gamma4, cat_lower, cat_upper, gamma2, gamma1


def build_sigma_plus(sol: NeckSolution) -> RevolutionSurface:
    """Upper construction Sigma_+: open chain from (r, 0) to (1, 0)."""
    try:
        return RevolutionSurface(neck_segments(sol),
                                 label=f"sigma_plus(r={sol.r:g})")
    except ConstructionError as exc:
        raise ConstructionError(
            f"neck tangency violated at r={sol.r}: {exc}") from exc


DEFAULT_BUMP_SUPPORT_FRACTION = 0.3


def _double_sphere_chain(sol: NeckSolution, s_b: float, t_b: float):
    """Closed double-sphere chain; the inner south cap carries the tuning bump."""
    r = sol.r
    cap = bump_graph(s_b, t_b, rho=r, pole="south")
    theta_edge = -math.acos(min(s_b / r, 1.0))
    inner_rest = Arc(center=(0.0, 0.0), radius=r, t0=theta_edge, t1=0.0,
                     normal_sign=-1)
    lower_unit = Arc(center=(0.0, 0.0), radius=1.0, t0=0.0, t1=-math.pi / 2,
                     normal_sign=1)
    return (cap, inner_rest) + neck_segments(sol) + (lower_unit,)


def _chain_area(segments) -> float:
    surf = RevolutionSurface(tuple(segments), label="tmp")
    return float(integrate_many(surf, [lambda fr: np.ones_like(fr.x)],
                                atol=1e-12, rtol=1e-12)[0])


def tune_double_sphere(r: float, target_area: float = 8.0 * math.pi,
                       bump_support: float | None = None,
                       area_tol: float = 1e-10) -> tuple[NeckSolution, float, float]:
    """Find the bump amplitude making the double-sphere area hit the target.

    Returns (neck solution, bump support, amplitude).  Bisection on the
    amplitude against the exact quadrature area, tolerance ``area_tol`` on the
    area residual.
    """
    sol = solve_neck(r)
    if bump_support is None:
        s_b = DEFAULT_BUMP_SUPPORT_FRACTION * r
    else:
        s_b = bump_support
    base = _chain_area(_double_sphere_chain(sol, s_b, 0.0))
    t_b = _tune_amplitude(target_area - base, s_b, r, area_tol)
    return sol, s_b, t_b


def build_double_sphere(r: float, target_area: float = 8.0 * math.pi,
                        bump_support: float | None = None) -> RevolutionSurface:
    """Closed k = 2 surface: unit sphere and inner sphere joined by a neck.

    The inner sphere's south cap carries an inward bump whose amplitude is
    tuned by bisection so the total area hits ``target_area`` (default 8 pi)
    to 1e-10.
    """
    sol, s_b, t_b = tune_double_sphere(r, target_area, bump_support)
    return RevolutionSurface(_double_sphere_chain(sol, s_b, t_b),
                             label=f"double_sphere(r={r:g})")


def _tune_amplitude(deficit: float, s_b: float, rho: float,
                    area_tol: float = 1e-10) -> float:
    """Bisect the bump amplitude so its area excess equals ``deficit``."""
    if abs(deficit) <= area_tol:
        return 0.0
    if deficit < 0:
        raise AreaTargetError(
            f"construction exceeds the target area by {-deficit:.3e} before tuning")

    def f_excess(t: float) -> float:
        return excess_pair(s_b, t, rho=rho)[0]

    t_hi = 0.05 * rho
    t_cap = 0.98 * amplitude_ceiling(s_b, rho)
    while f_excess(t_hi) < deficit:
        t_hi *= 2.0
        if t_hi > t_cap:
            raise AreaTargetError(
                f"area deficit {deficit:.3e} unreachable with bump support "
                f"{s_b:g}; use a larger bump scale s")
    t_lo = 0.0
    for _ in range(200):
        t_mid = 0.5 * (t_lo + t_hi)
        fm = f_excess(t_mid) - deficit
        if abs(fm) <= area_tol:
            return t_mid
        if fm < 0:
            t_lo = t_mid
        else:
            t_hi = t_mid
    raise AreaTargetError("area bisection failed to reach tolerance")


def nested_family(k: int, r: float,
                  target_area: float | None = None) -> RevolutionSurface:
    """k nested spheres of radii r^0 .. r^{k-1} joined by k-1 necks.

    Neck i joins sphere i to sphere i+1; even-index necks attach at the north
    pole, odd ones are mirrored to the south pole, so consecutive necks never
    collide.  Each is the k = 2 construction dilated by r^i with normal parity
    (-1)^i.  The innermost free polar cap carries the area-tuning bump so the
    total area hits 4 pi k.  The geometric radii are a design choice.
    """
    if k not in (2, 3, 4):
        raise ParameterRangeError("nested_family supports k in {2, 3, 4}")
    if target_area is None:
        target_area = 4.0 * math.pi * k
    if k == 2:
        return build_double_sphere(r, target_area)

    sol = solve_neck(r)
    necks: list[list] = []
    for i in range(k - 1):
        segs = [seg.dilate(r**i) for seg in
                neck_segments(sol, outer_normal=(-1) ** i)]
        if i % 2 == 1:
            segs = [seg.mirror_y() for seg in segs]
        necks.append(segs)

    # Innermost sphere: the last neck occupies one polar side; the free pole
    # is south for even k, north for odd k, and the cap's canonical upward
    # normal is the globally consistent one in both cases.
    free_pole = "south" if k % 2 == 0 else "north"
    rho_in = r ** (k - 1)
    inner_normal = (-1) ** (k - 1)
    s_b = DEFAULT_BUMP_SUPPORT_FRACTION * rho_in

    def assemble(t_b: float) -> RevolutionSurface:
        cap = bump_graph(s_b, t_b, rho=rho_in, pole=free_pole)
        theta_edge = math.acos(min(s_b / rho_in, 1.0))
        if free_pole == "south":
            theta_edge = -theta_edge
        inner_rest = Arc(center=(0.0, 0.0), radius=rho_in, t0=theta_edge,
                         t1=0.0, normal_sign=inner_normal)
        segs: list = [cap, inner_rest]
        for i in range(k - 2, -1, -1):
            segs.extend(necks[i])
        # outer unit sphere's far hemisphere (neck 0 sits at the north pole)
        segs.append(Arc(center=(0.0, 0.0), radius=1.0, t0=0.0,
                        t1=-math.pi / 2, normal_sign=1))
        return RevolutionSurface(tuple(segs), label=f"nested(k={k},r={r:g})")

    base = _chain_area(assemble(0.0).segments)
    t_b = _tune_amplitude(target_area - base, s_b, rho_in)
    return assemble(t_b)
