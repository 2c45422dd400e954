"""Penalized gradient-descent probe for the minimal Willmore energy w(a).

An axisymmetric profile is discretized as a polyline (x_i, y_i), i = 0..N,
with both endpoints pinned to the axis.  Node curvature comes from the
circumscribed circle of each node triple; the parallel curvature from the
tangent and the distance to the axis.  The probe minimizes

    E = W + mu_A (area - a)^2 + mu_C sum_i max(0, |p_i| - 1)^2 w_i

by steepest descent with central finite-difference gradients (step 1e-6) and
a backtracking Armijo line search, with penalty continuation over mu.  The
area, bending and confinement sums are all local in the nodes, so their
per-node difference quotients are assembled from strided vector passes; the
penalty squares are combined by the chain rule.  Deterministic throughout.
This estimates an upper bound near w(a); it certifies nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ParameterRangeError
from .geometry import ParametricSegment, RevolutionSurface

DEFAULT_N = 400
_X_FLOOR = 1e-9


@dataclass(frozen=True)
class DiscreteProfile:
    """Polyline profile from pole to pole; x >= 0, endpoints on the axis."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.shape != y.shape or x.ndim != 1 or len(x) < 5:
            raise ParameterRangeError("profile needs >= 5 nodes of equal shape")
        if abs(x[0]) > 1e-12 or abs(x[-1]) > 1e-12:
            raise ParameterRangeError("profile endpoints must lie on the axis")
        if np.any(x[1:-1] <= 0):
            raise ParameterRangeError("interior nodes must have x > 0")

    @property
    def n_nodes(self) -> int:
        return len(self.x)

    @staticmethod
    def sphere(radius: float, n: int = DEFAULT_N, center_y: float = 0.0) -> "DiscreteProfile":
        theta = np.linspace(-np.pi / 2, np.pi / 2, n + 1)
        x = radius * np.cos(theta)
        x[0] = 0.0
        x[-1] = 0.0
        return DiscreteProfile(x=x, y=center_y + radius * np.sin(theta))

    @staticmethod
    def from_surface(surface: RevolutionSurface, n: int = DEFAULT_N) -> "DiscreteProfile":
        """Resample a profile chain at near-uniform arclength."""
        pts = []
        for seg in surface.segments:
            lo, hi = seg.bounds
            ts = np.linspace(lo, hi, 512)
            if seg.t0 > seg.t1:
                ts = ts[::-1]
            fr = seg.frame(ts)
            pts.append(np.column_stack([np.atleast_1d(fr.x), np.atleast_1d(fr.y)]))
        chain = np.vstack(pts)
        seglen = np.hypot(np.diff(chain[:, 0]), np.diff(chain[:, 1]))
        s = np.concatenate([[0.0], np.cumsum(seglen)])
        s_new = np.linspace(0.0, s[-1], n + 1)
        x = np.interp(s_new, s, chain[:, 0])
        y = np.interp(s_new, s, chain[:, 1])
        x[0] = 0.0
        x[-1] = 0.0
        x[1:-1] = np.maximum(x[1:-1], _X_FLOOR)
        return DiscreteProfile(x=x, y=y)

    def redistributed(self) -> "DiscreteProfile":
        """Nodes moved to uniform arclength along the current polyline."""
        seglen = np.hypot(np.diff(self.x), np.diff(self.y))
        s = np.concatenate([[0.0], np.cumsum(seglen)])
        s_new = np.linspace(0.0, s[-1], len(self.x))
        x = np.interp(s_new, s, self.x)
        y = np.interp(s_new, s, self.y)
        x[0] = 0.0
        x[-1] = 0.0
        x[1:-1] = np.maximum(x[1:-1], _X_FLOOR)
        return DiscreteProfile(x=x, y=y)

    def min_branch_distance(self) -> float:
        """Minimum distance between nodes more than 4 steps apart.

        Near-touching branches signal a would-be neck pinch (the infimum may
        only be approached by surfaces leaving the embedded class).
        """
        pts = np.column_stack([self.x, self.y])
        n = len(pts)
        best = np.inf
        gap = 5
        for i in range(0, n - gap):
            d = np.hypot(pts[i + gap:, 0] - pts[i, 0], pts[i + gap:, 1] - pts[i, 1])
            if d.size:
                best = min(best, float(d.min()))
        return best

    def to_spline_surface(self, label: str = "probe") -> RevolutionSurface:
        """Cubic-spline fit of the polyline as a chain of parametric segments.

        The y-spline is clamped to horizontal tangents at the poles (any
        smooth closed profile crosses the axis horizontally), which keeps the
        parallel curvature t_y/x finite at the axis.  The chain is split at
        the spline knots so every quadrature panel sees a C-infinity curve.
        """
        seglen = np.hypot(np.diff(self.x), np.diff(self.y))
        s = np.concatenate([[0.0], np.cumsum(seglen)])
        cx = CubicSpline(s, self.x)
        cy = CubicSpline(s, self.y, bc_type=((1, 0.0), (1, 0.0)))

        def curve(t):
            return (cx(t), cy(t), cx(t, 1), cy(t, 1), cx(t, 2), cy(t, 2))

        segs = tuple(
            ParametricSegment(curve=curve, t0=float(s[i]), t1=float(s[i + 1]),
                              label=f"{label}[{i}]")
            for i in range(len(s) - 1)
        )
        return RevolutionSurface(segs, label=label)


def _term_sums(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Stacked per-node terms: rows (area, willmore, confinement penalty).

    Row arrays are indexed by interior node (1..N-1).  Node triple
    (i-1, i, i+1): circumscribed-circle (Menger) curvature for the meridian
    direction, chord tangent, parallel curvature t_y / x, trapezoidal weight
    w = (|d1| + |d2|)/2, area factor 2 pi x.  Collinear triples have zero
    curvature; coincident nodes raise.
    """
    d1x = x[1:-1] - x[:-2]
    d1y = y[1:-1] - y[:-2]
    d2x = x[2:] - x[1:-1]
    d2y = y[2:] - y[1:-1]
    a = np.hypot(d1x, d1y)
    b = np.hypot(d2x, d2y)
    if np.any(a < 1e-14) or np.any(b < 1e-14):
        raise ParameterRangeError("coincident profile nodes")
    cx = x[2:] - x[:-2]
    cy = y[2:] - y[:-2]
    c = np.hypot(cx, cy)
    cross = d1x * d2y - d1y * d2x
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa1 = np.where(np.abs(cross) < 1e-14, 0.0, 2.0 * cross / (a * b * c))
        ty = np.where(c < 1e-14, 0.0, cy / c)
    xm = x[1:-1]
    kappa2 = ty / xm
    w = 0.5 * (a + b)
    area = 2.0 * np.pi * xm * w
    h = kappa1 + kappa2
    willmore = 0.25 * h**2 * area
    viol = np.maximum(0.0, np.hypot(xm, y[1:-1]) - 1.0)
    penalty = viol**2 * w
    return np.stack([area, willmore, penalty])


def discrete_energy(profile: DiscreteProfile) -> tuple[float, float]:
    """(area, willmore) of the discretized revolved profile."""
    t = _term_sums(profile.x, profile.y)
    return float(t[0].sum()), float(t[1].sum())


def _fd_sums_gradient(x: np.ndarray, y: np.ndarray, h: float):
    """Central-difference per-node gradients of the three energy sums.

    Returns (gx, gy) of shape (3, n): d(area, willmore, penalty)/d(node).
    Perturbing node j only touches interior terms j-1, j, j+1, so nodes at
    stride 3 are independent and one vector pass per (offset, coordinate,
    sign) reproduces per-component central differencing exactly.
    """
    n = len(x)
    gx = np.zeros((3, n))
    gy = np.zeros((3, n))
    base = _term_sums(x, y)
    padded = np.zeros((3, n + 2))

    def window_sums(diff_terms):
        # diff_terms has one column per interior node (node i at column i-1);
        # value for node j is the sum over terms j-1, j, j+1.
        padded[:] = 0.0
        padded[:, 2:n] = diff_terms
        return padded[:, :n] + padded[:, 1:n + 1] + padded[:, 2:]

    for off in range(3):
        for coord in (0, 1):
            idx = np.arange(off, n, 3)
            if coord == 0:
                idx = idx[(idx >= 1) & (idx <= n - 2)]
            if idx.size == 0:
                continue
            deltas = []
            for sign in (1.0, -1.0):
                xp, yp = x.copy(), y.copy()
                if coord == 0:
                    xp[idx] += sign * h
                else:
                    yp[idx] += sign * h
                deltas.append(_term_sums(xp, yp) - base)
            diff = (deltas[0] - deltas[1]) / (2.0 * h)
            windows = window_sums(diff)
            if coord == 0:
                gx[:, idx] = windows[:, idx]
            else:
                gy[:, idx] = windows[:, idx]
    sums = base.sum(axis=1)
    return sums, gx, gy


def _is_simple(x: np.ndarray, y: np.ndarray) -> bool:
    """Cheap polyline self-intersection test on a coarse sweep.

    Exact segment-pair testing is O(N^2); the probe uses a vectorized sweep
    over all segment pairs with a stride-decimated fallback for speed.
    """
    # all interior x positive is required separately; here test crossings
    p = np.column_stack([x, y])
    d = np.diff(p, axis=0)
    n = len(d)
    # bounding: compare each segment against all non-adjacent ones, vectorized
    # in one (n, n) pass; n ~ 400 keeps this affordable.
    x0, y0 = p[:-1, 0], p[:-1, 1]
    dx, dy = d[:, 0], d[:, 1]
    rx = x0[:, None] - x0[None, :]
    ry = y0[:, None] - y0[None, :]
    denom = dx[None, :] * dy[:, None] - dy[None, :] * dx[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rx * dy[:, None] - ry * dx[:, None]) / denom
        u = (rx * dy[None, :] - ry * dx[None, :]) / denom
    hit = (np.abs(denom) > 1e-14) & (t > 1e-12) & (t < 1 - 1e-12) \
        & (u > 1e-12) & (u < 1 - 1e-12)
    i_idx, j_idx = np.nonzero(hit)
    mask = np.abs(i_idx - j_idx) > 1
    return not np.any(mask)


def default_initial_profile(a_target: float, n: int = DEFAULT_N) -> DiscreteProfile:
    """Admissible (confined) starting profile with area close to the target.

    At a_target = 4 pi this is the unit sphere.  Moderate excess area is
    seeded by inward polar bumps (split across both poles when one cannot
    carry it); larger targets resample a nested-sphere construction dilated
    to the exact area.  Starting confined matters: from an inflated sphere
    the penalty descent stalls in an inadmissible bulge outside the ball.
    """
    import math

    from scipy.optimize import brentq

    from .bump import bump_graph, excess_pair
    from .geometry import Arc

    excess = a_target - 4.0 * np.pi
    if excess <= 1e-9:
        return DiscreteProfile.sphere(min(1.0, math.sqrt(a_target / (4 * np.pi))), n)

    s = 0.3
    t_hi = 0.93
    max_one = excess_pair(s, t_hi)[0]

    def cap_amplitude(target: float) -> float:
        t_root = brentq(lambda t: excess_pair(s, t)[0], 1e-9, t_hi, xtol=1e-13)
        return brentq(lambda t: excess_pair(s, t)[0] - target, t_root, t_hi,
                      xtol=1e-13)

    if excess <= 2.0 * max_one:
        targets = [excess] if excess <= 0.9 * max_one else [excess / 2, excess / 2]
        segs = []
        t_n = cap_amplitude(targets[0])
        segs.append(bump_graph(s, t_n, rho=1.0, pole="north"))
        if len(targets) == 2:
            from dataclasses import replace

            t_s = cap_amplitude(targets[1])
            segs.append(Arc(center=(0.0, 0.0), radius=1.0, t0=np.arccos(s),
                            t1=-np.arccos(s), normal_sign=1))
            # traverse the south cap from the sphere edge back to the axis;
            # the outward normal points below the graph there
            south = replace(bump_graph(s, t_s, rho=1.0, pole="south"),
                            t0=s, t1=0.0, normal_sign=-1)
            segs.append(south)
        else:
            segs.append(Arc(center=(0.0, 0.0), radius=1.0, t0=np.arccos(s),
                            t1=-np.pi / 2, normal_sign=1))
        surf = RevolutionSurface(tuple(segs), label="probe-init")
        return DiscreteProfile.from_surface(surf, n)

    # heavy targets: nested construction dilated to the exact area
    from .neck import nested_family

    k = min(4, max(2, math.ceil(a_target / (4 * np.pi))))
    base = nested_family(k, 0.9999)
    surf = base.dilate(math.sqrt(a_target / (4 * np.pi * k)))
    return DiscreteProfile.from_surface(surf, n)


@dataclass(frozen=True)
class ProbeConfig:
    n_nodes: int = DEFAULT_N
    mu_area: tuple[float, ...] = (1e2, 1e3, 1e4, 1e5)
    mu_confine: tuple[float, ...] = (1e2, 1e3, 1e4, 1e5)
    fd_step: float = 1e-6
    armijo_c: float = 1e-4
    max_iterations: int = 20000
    grad_tol: float = 1e-6
    redistribute_every: int = 50
    initial_step: float = 1e-3


@dataclass(frozen=True)
class ProbeResult:
    profile: DiscreteProfile
    willmore: float            # discrete energy of the final profile
    willmore_spline: float     # same profile, spline fit + quadrature
    area: float
    area_error: float
    confinement_violation: float
    iterations: int
    converged: bool
    min_branch_distance: float

    def as_dict(self) -> dict:
        return {
            "willmore": self.willmore,
            "willmore_spline": self.willmore_spline,
            "area": self.area,
            "area_error": self.area_error,
            "confinement_violation": self.confinement_violation,
            "iterations": self.iterations,
            "converged": self.converged,
            "min_branch_distance": self.min_branch_distance,
            "nodes": np.column_stack([self.profile.x, self.profile.y]).tolist(),
        }


def _objective(sums: np.ndarray, a_target: float, mu_a: float, mu_c: float) -> float:
    area, willmore, penalty = sums
    return float(willmore + mu_a * (area - a_target) ** 2 + mu_c * penalty)


def _spline_willmore(profile: DiscreteProfile) -> float:
    """Quadrature Willmore energy of the spline fit of a polyline.

    Near-pinched profiles can defeat the adaptive tolerance in a few spans
    (the spline parallel curvature degenerates where branches almost touch);
    those spans fall back to their best refinement estimate, which keeps the
    value meaningful as a cross-check.
    """
    from .errors import QuadratureError
    from .quadrature import adaptive_quad

    surf = profile.to_spline_surface()
    total = 0.0
    for seg in surf.segments:
        lo, hi = seg.bounds

        def row(ts, seg=seg):
            fr = seg.frame(ts)
            return 0.25 * fr.mean_curvature**2 * fr.area_factor * fr.speed

        try:
            total += float(adaptive_quad(row, lo, hi, atol=1e-9, rtol=1e-9)[0])
        except QuadratureError as exc:
            total += float(np.atleast_1d(exc.estimate)[0])
    return total


def minimize(a_target: float, init: DiscreteProfile | None = None,
             config: ProbeConfig = ProbeConfig()) -> ProbeResult:
    """Descend the penalized energy at prescribed area ``a_target``.

    Deterministic: same inputs and config give identical iterates.
    """
    if not 4 * np.pi - 1e-9 <= a_target <= 16 * np.pi + 1e-9:
        raise ParameterRangeError("a_target must lie in [4 pi, 16 pi]")
    if init is None:
        radius = min(1.0, float(np.sqrt(a_target / (4 * np.pi))))
        init = DiscreteProfile.sphere(radius, config.n_nodes)

    x = init.x.copy()
    y = init.y.copy()
    n = len(x)
    stages = list(zip(config.mu_area, config.mu_confine))
    per_stage = max(1, config.max_iterations // len(stages))
    total_iters = 0
    converged = False
    step = config.initial_step
    branch_gap = init.min_branch_distance()
    moved = 0.0

    for mu_a, mu_c in stages:
        converged = False
        for it in range(per_stage):
            sums, gx, gy = _fd_sums_gradient(x, y, config.fd_step)
            area = sums[0]
            # chain rule for E = W + mu_a (A - a)^2 + mu_c P
            gxE = gx[1] + 2.0 * mu_a * (area - a_target) * gx[0] + mu_c * gx[2]
            gyE = gy[1] + 2.0 * mu_a * (area - a_target) * gy[0] + mu_c * gy[2]
            gnorm = float(np.sqrt(np.sum(gxE**2) + np.sum(gyE**2)))
            e0 = _objective(sums, a_target, mu_a, mu_c)
            if gnorm <= config.grad_tol:
                converged = True
                break

            # Mass-lumped descent direction: dividing by the local arclength
            # weight makes the step an L2(ds)-gradient flow, which keeps a few
            # tightly-spaced high-curvature nodes from stalling the search.
            seglen = np.hypot(np.diff(x), np.diff(y))
            mass = np.empty_like(x)
            mass[0] = seglen[0]
            mass[-1] = seglen[-1]
            mass[1:-1] = 0.5 * (seglen[:-1] + seglen[1:])
            mass = np.maximum(mass, 1e-12)
            dx = -gxE / mass
            dy = -gyE / mass
            slope = float(np.sum(dx * gxE + dy * gyE))  # dE along (dx, dy) < 0

            accepted = False
            trial = min(step * 2.0, 1.0)
            dmax = float(np.max(np.hypot(dx, dy)))
            for _ in range(40):
                xn = x + trial * dx
                yn = y + trial * dy
                xn[0] = 0.0
                xn[-1] = 0.0
                valid = not np.any(xn[1:-1] <= _X_FLOOR)
                if valid:
                    try:
                        en = _objective(_term_sums(xn, yn).sum(axis=1),
                                        a_target, mu_a, mu_c)
                    except ParameterRangeError:
                        en = np.inf
                    if en <= e0 + config.armijo_c * trial * slope:
                        # Self-intersection guard: distant branches cannot
                        # cross while the accumulated motion stays below the
                        # last measured branch gap, so the O(N^2) test runs
                        # only when that budget is spent.
                        moved += trial * dmax
                        if moved < 0.4 * branch_gap:
                            accepted = True
                            break
                        if _is_simple(xn, yn):
                            branch_gap = DiscreteProfile(
                                x=xn, y=yn).min_branch_distance()
                            moved = 0.0
                            accepted = True
                            break
                        moved -= trial * dmax
                        valid = False
                trial *= 0.5
            total_iters += 1
            if not accepted:
                break
            x, y, step = xn, yn, trial
            if (it + 1) % config.redistribute_every == 0:
                prof = DiscreteProfile(x=x, y=y).redistributed()
                x, y = prof.x.copy(), prof.y.copy()
                branch_gap = prof.min_branch_distance()
                moved = 0.0
            if total_iters >= config.max_iterations:
                break
        if total_iters >= config.max_iterations:
            break

    final = DiscreteProfile(x=x, y=y)
    sums = _term_sums(x, y).sum(axis=1)
    area = float(sums[0])
    willmore = float(sums[1])
    willmore_spline = _spline_willmore(final)
    radius = np.hypot(x, y)
    return ProbeResult(
        profile=final,
        willmore=willmore,
        willmore_spline=willmore_spline,
        area=area,
        area_error=abs(area - a_target),
        confinement_violation=float(max(0.0, radius.max() - 1.0)),
        iterations=total_iters,
        converged=converged,
        min_branch_distance=final.min_branch_distance(),
    )


@dataclass(frozen=True)
class SandwichReport:
    a: float
    w_est: float
    lower: float
    upper: float
    lower_margin: float
    upper_margin: float
    passed: bool

    def as_dict(self) -> dict:
        return {"a": self.a, "w_est": self.w_est, "lower": self.lower,
                "upper": self.upper, "lower_margin": self.lower_margin,
                "upper_margin": self.upper_margin, "passed": self.passed}


def sandwich_check(a: float, result: ProbeResult, upper: float,
                   tol_lower: float | None = None,
                   tol_upper: float = 1e-6) -> SandwichReport:
    """Check a - tol <= W_est <= upper + tol around the probe estimate."""
    if tol_lower is None:
        tol_lower = max(1e-3 * a, 2.0 * result.area_error)
    w = result.willmore
    lower = a - tol_lower
    upper_eff = upper + tol_upper
    return SandwichReport(
        a=a, w_est=w, lower=lower, upper=upper_eff,
        lower_margin=w - lower, upper_margin=upper_eff - w,
        passed=bool(lower <= w <= upper_eff),
    )
