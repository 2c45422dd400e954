"""Inward polar bumps on spheres and the square-root energy growth sweep.

The family deforms a sphere of radius ``rho`` near a pole by an inward graph
perturbation with compactly supported profile eta:

    north pole:  psi(x) = sqrt(rho^2 - x^2) - t * eta(x / s),   0 <= x <= s
    south pole:  psi(x) = -sqrt(rho^2 - x^2) + t * eta(x / s)

The amplitude is tied to the support by t = alpha * s^2.  The leading-order
area excess of the bumped sphere is

    2 pi alpha s^4 * (I1 + alpha I2),   I1 = int_0^1 u^2 eta'(u) du < 0,
                                        I2 = int_0^1 (u/2) eta'(u)^2 du,

so the excess is positive only above the threshold ratio
alpha* = |I1| / I2; the default working ratio is 2 alpha*.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AmplitudeError, ParameterRangeError
from .geometry import Arc, Graph, RevolutionSurface, report
from .quadrature import adaptive_quad

S_MAX = 0.3  # graph region stays well inside the unit disk


def eta_std(u):
    """Standard bump profile and its first two derivatives.

    eta(u) = exp(1 - 1/(1 - u^2)) inside |u| < 1, zero outside; smooth,
    symmetric, eta(0) = 1, decreasing on (0, 1).
    """
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    val = np.zeros_like(u)
    d1 = np.zeros_like(u)
    d2 = np.zeros_like(u)
    m = np.abs(u) < 1.0
    w = 1.0 - u[m] ** 2
    e = np.exp(1.0 - 1.0 / w)
    q = 2.0 * u[m] / w**2  # -(d/du) of the exponent
    val[m] = e
    d1[m] = -q * e
    d2[m] = (q**2 - 2.0 / w**2 - 8.0 * u[m] ** 2 / w**3) * e
    if scalar:
        return float(val[0]), float(d1[0]), float(d2[0])
    return val, d1, d2


@lru_cache(maxsize=None)
def bracket_integrals() -> tuple[float, float]:
    """(I1, I2) of the area-excess bracket for the standard profile."""

    def rows(u):
        _, d1, _ = eta_std(u)
        return np.stack([u**2 * d1, 0.5 * u * d1**2])

    i1, i2 = adaptive_quad(rows, 0.0, 1.0, atol=1e-13, rtol=1e-13)
    return float(i1), float(i2)


@lru_cache(maxsize=None)
def alpha_star() -> float:
    """Threshold ratio making the leading-order area excess vanish."""
    i1, i2 = bracket_integrals()
    return abs(i1) / i2


def bracket_value(alpha: float) -> float:
    """C_eta(alpha) = I1 + alpha I2; positive iff alpha > alpha*."""
    i1, i2 = bracket_integrals()
    return i1 + alpha * i2


def default_alpha() -> float:
    return 2.0 * alpha_star()


@dataclass(frozen=True)
class BumpSpec:
    """Parameters of one inward bump: support s, amplitude t = alpha s^2."""

    s: float
    alpha: float
    eta: str = "std_bump"
    rho: float = 1.0      # radius of the carrying sphere
    pole: str = "north"   # which pole carries the bump

    def __post_init__(self):
        if not 0 < self.s <= S_MAX * self.rho + 1e-15:
            raise ParameterRangeError(
                f"bump support must lie in (0, {S_MAX * self.rho:g}] "
                f"(rho={self.rho:g}), got {self.s}")
        if self.alpha < 0:
            raise ParameterRangeError("alpha must be nonnegative")
        if self.eta != "std_bump":
            raise ParameterRangeError(f"unknown bump profile {self.eta!r}")
        if self.pole not in ("north", "south"):
            raise ParameterRangeError("pole must be 'north' or 'south'")
        t = self.t
        if t > 0 and t >= amplitude_ceiling(self.s, self.rho):
            raise AmplitudeError(
                f"amplitude t={t:g} at or above embeddedness ceiling "
                f"t0={amplitude_ceiling(self.s, self.rho):g}")

    @property
    def t(self) -> float:
        return self.alpha * self.s**2


@lru_cache(maxsize=256)
def amplitude_ceiling(s: float, rho: float = 1.0, grid: int = 4001) -> float:
    """Largest amplitude t0 keeping the bumped sphere embedded and confined.

    Determined on a fine grid rather than analytically: the north-pole profile
    sqrt(rho^2 - x^2) - t eta(x/s) must stay positive (the graph may not cross
    the equatorial plane), which also keeps the surface inside the ball since
    the bump points inward.
    """
    x = np.linspace(0.0, s, grid)
    e, _, _ = eta_std(x / s)
    base = np.sqrt(np.maximum(rho**2 - x**2, 0.0))
    mask = e > 0
    return float(np.min(base[mask] / e[mask]))


def bump_graph(s: float, t: float, rho: float = 1.0, pole: str = "north") -> Graph:
    """Graph segment of the bumped polar cap over [0, s]."""
    sign = 1.0 if pole == "north" else -1.0

    def psi(x):
        x = np.asarray(x, dtype=float)
        e, d1, d2 = eta_std(x / s)
        root = np.sqrt(rho**2 - x**2)
        val = sign * (root - t * e)
        dp = sign * (-x / root - (t / s) * d1)
        ddp = sign * (-(rho**2) / root**3 - (t / s**2) * d2)
        return val, dp, ddp

    return Graph(psi=psi, t0=0.0, t1=s, normal_sign=1,
                 label=f"bump(s={s:g},t={t:g},{pole})")


def build_bump_sphere(s: float, alpha: float, *, rho: float = 1.0) -> RevolutionSurface:
    """Unit-ball sphere of radius rho with an inward bump at the north pole.

    For alpha = 0 this is exactly the round sphere (as a graph cap plus arc).
    """
    spec = BumpSpec(s=s, alpha=alpha, rho=rho)
    t = spec.t
    x_edge = s
    theta_edge = np.arccos(np.clip(x_edge / rho, -1.0, 1.0))
    cap = bump_graph(s, t, rho=rho, pole="north")
    rest = Arc(center=(0.0, 0.0), radius=rho, t0=theta_edge, t1=-np.pi / 2,
               normal_sign=1)
    surf = RevolutionSurface((cap, rest), label=f"bump_sphere(s={s:g},alpha={alpha:g})")
    # embeddedness: the cap must stay strictly above the equatorial plane
    xs = np.linspace(0.0, s, 2001)
    val, _, _ = cap.psi(xs)
    if np.any(val <= 0.0):
        raise AmplitudeError("bump amplitude too large: cap touches the equator plane")
    return surf


def _excess_rows(s: float, t: float, rho: float):
    """Integrand rows for (area excess, willmore excess) over the cap.

    Both are exact differences against the round sphere, evaluated without
    cancellation: the area row integrates 2 pi x (g_t - g_0) and the energy
    row integrates (1/2)|Aring|^2 2 pi x g_t (the round cap contributes zero).
    """

    def rows(x):
        x = np.asarray(x, dtype=float)
        e, d1, _ = eta_std(x / s)
        root = np.sqrt(rho**2 - x**2)
        dp0 = -x / root
        dp = dp0 - (t / s) * d1
        g0 = np.sqrt(1.0 + dp0**2)
        g = np.sqrt(1.0 + dp**2)
        # g - g0 without subtractive cancellation
        diff = (dp - dp0) * (dp + dp0) / (g + g0)
        area_row = 2.0 * np.pi * x * diff

        fr = bump_graph(s, t, rho=rho).frame(x)
        w_row = 0.5 * fr.tracefree_sq * fr.area_factor * fr.speed
        return np.stack([area_row, w_row])

    return rows


def area_excess(s: float, alpha: float, *, rho: float = 1.0,
                atol: float = 1e-13, rtol: float = 1e-13) -> float:
    """Exact area difference ar(bumped sphere) - ar(round sphere).

    Evaluated as the quadrature of the area-element difference over the cap,
    which avoids the 4 pi cancellation of subtracting two reports.
    """
    t = alpha * s**2
    vals = adaptive_quad(_excess_rows(s, t, rho), 0.0, s, atol=atol, rtol=rtol)
    return float(vals[0])


def willmore_excess(s: float, alpha: float, *, rho: float = 1.0,
                    atol: float = 1e-13, rtol: float = 1e-13) -> float:
    """W(bumped sphere) - 4 pi = (1/2) int |Aring|^2 over the cap."""
    t = alpha * s**2
    vals = adaptive_quad(_excess_rows(s, t, rho), 0.0, s, atol=atol, rtol=rtol)
    return float(vals[1])


def excess_pair(s: float, t: float, *, rho: float = 1.0,
                atol: float = 1e-13, rtol: float = 1e-13) -> tuple[float, float]:
    """(area excess, willmore excess) for an explicit amplitude t."""
    vals = adaptive_quad(_excess_rows(s, t, rho), 0.0, s, atol=atol, rtol=rtol)
    return float(vals[0]), float(vals[1])


@dataclass(frozen=True)
class SweepRow:
    s: float
    t: float
    area: float
    area_excess: float
    willmore: float
    willmore_excess: float
    slope_partial: float  # pairwise log-log slope against the previous row


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    slope: float
    intercept: float
    r_squared: float

    @property
    def growth_coefficient(self) -> float:
        """C in (W - 4 pi) ~ C sqrt(a - 4 pi), from the fitted intercept."""
        return float(np.exp(self.intercept))

    def upper_bound(self, a: float) -> float:
        """Fitted construction upper bound for w(a), a >= 4 pi."""
        if a < 4 * np.pi:
            return 4 * np.pi
        return 4 * np.pi + self.growth_coefficient * (a - 4 * np.pi) ** self.slope


def sweep_bump(s_list, alpha: float | None = None) -> SweepResult:
    """Evaluate the bump family over supports ``s_list``.

    Returns per-s reports plus the least-squares slope of
    log(W - 4 pi) against log(a - 4 pi).
    """
    if alpha is None:
        alpha = default_alpha()
    rows = []
    prev = None
    for s in sorted(float(v) for v in s_list):
        da, dw = excess_pair(s, alpha * s**2)
        slope_partial = float("nan")
        if prev is not None:
            pa, pw = prev
            slope_partial = (np.log(dw) - np.log(pw)) / (np.log(da) - np.log(pa))
        rows.append(SweepRow(
            s=s, t=alpha * s**2,
            area=4.0 * np.pi + da, area_excess=da,
            willmore=4.0 * np.pi + dw, willmore_excess=dw,
            slope_partial=slope_partial,
        ))
        prev = (da, dw)
    la = np.log([r.area_excess for r in rows])
    lw = np.log([r.willmore_excess for r in rows])
    slope, intercept = np.polyfit(la, lw, 1)
    fit = np.polyval([slope, intercept], la)
    ss_res = float(np.sum((lw - fit) ** 2))
    ss_tot = float(np.sum((lw - np.mean(lw)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SweepResult(rows=tuple(rows), slope=float(slope),
                       intercept=float(intercept), r_squared=r2)


def comp_area_element_sq(r, s: float, t: float):
    """Direct evaluation of the squared area element of the bumped unit cap.

    g(r)^2 = 1/(1-r^2) + 2 (t/s) r/sqrt(1-r^2) eta'(r/s) + (t/s)^2 eta'(r/s)^2,
    the Taylor-expansion form used for the area-difference integrand.  Serves
    as an independent oracle for the Graph frame's speed.
    """
    r = np.asarray(r, dtype=float)
    _, d1, _ = eta_std(r / s)
    return (1.0 / (1.0 - r**2)
            + 2.0 * (t / s) * r / np.sqrt(1.0 - r**2) * d1
            + (t / s) ** 2 * d1**2)


def comp_mean_curvature(r, s: float, t: float):
    """Direct evaluation of the scalar mean curvature of the bumped unit cap.

    g^3 H = 2(1-r^2)^{-3/2} + (t/s^2) eta'' + (t/s)(1/r) eta'
            + 3 (t/s) r/(1-r^2) eta' + 3 (t/s)^2 (1-r^2)^{-1/2} eta'^2
            + (t/s)^3 (1/r) eta'^3,

    an independent oracle for the Graph frame's kappa_1 + kappa_2.
    """
    r = np.asarray(r, dtype=float)
    _, d1, d2 = eta_std(r / s)
    g2 = comp_area_element_sq(r, s, t)
    g3h = (2.0 * (1.0 - r**2) ** (-1.5)
           + (t / s**2) * d2
           + (t / s) * d1 / r
           + 3.0 * (t / s) * r / (1.0 - r**2) * d1
           + 3.0 * (t / s) ** 2 * d1**2 / np.sqrt(1.0 - r**2)
           + (t / s) ** 3 * d1**3 / r)
    return g3h / g2**1.5
