"""Profile curves in the (x, y) half-plane revolved about the y-axis.

A surface is an ordered chain of profile segments.  Each segment evaluates a
full point frame (position, tangent, normal, principal curvatures) at any
parameter value; all fields vectorize over numpy arrays.  Sign conventions are
anchored to the round sphere: the unit sphere with outward normal has
kappa_1 = kappa_2 = 1, H = 2, K = 1.

For a surface of revolution the principal directions split into the meridian
(profile) direction and the parallel (rotation) direction:

    kappa_1 = -(dT/ds) . n        (profile curvature against the chosen normal)
    kappa_2 = n_x / x             (parallel curvature; -> kappa_1 at the axis)

where n is the in-plane unit normal whose rotation gives the surface normal.
Both are invariant under reversing the traversal direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import AxisSingularityError, ConstructionError, ParameterRangeError
from .quadrature import adaptive_quad

# Chain/validation tolerances: one order below the acceptance tolerances so a
# failed verification indicates geometry, not numerics.
TAU_POS = 1e-10
TAU_TAN = 1e-8
TAU_CONF = 1e-9

_AXIS_EPS = 1e-13


@dataclass(frozen=True)
class PointFrame:
    """Pointwise geometric data of the revolved surface along a profile.

    All fields are floats or same-shape arrays.  ``tx, ty`` follow the
    traversal direction of the segment; ``nx, ny`` are the chosen unit normal.
    """

    x: np.ndarray
    y: np.ndarray
    tx: np.ndarray
    ty: np.ndarray
    nx: np.ndarray
    ny: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    speed: np.ndarray

    @property
    def mean_curvature(self):
        return self.kappa1 + self.kappa2

    @property
    def gauss_curvature(self):
        return self.kappa1 * self.kappa2

    @property
    def tracefree_sq(self):
        """|A - (H/2) g|^2 = (kappa_1 - kappa_2)^2 / 2."""
        return 0.5 * (self.kappa1 - self.kappa2) ** 2

    @property
    def area_factor(self):
        """Arclength-to-area factor 2 pi x."""
        return 2.0 * np.pi * self.x

    @property
    def position_dot_normal(self):
        """p . nu; equals |x^perp| up to sign for an embedded surface."""
        return self.x * self.nx + self.y * self.ny

    @property
    def radius(self):
        return np.hypot(self.x, self.y)


class Segment:
    """Base class; concrete segments define point/frame evaluation."""

    t0: float
    t1: float
    normal_sign: int

    @property
    def bounds(self) -> tuple[float, float]:
        return (min(self.t0, self.t1), max(self.t0, self.t1))

    @property
    def direction(self) -> float:
        return 1.0 if self.t1 >= self.t0 else -1.0

    def _check_param(self, t):
        lo, hi = self.bounds
        t = np.asarray(t, dtype=float)
        pad = 1e-12 * max(1.0, hi - lo)
        if np.any(t < lo - pad) or np.any(t > hi + pad):
            raise ParameterRangeError(
                f"parameter outside [{lo}, {hi}] for {type(self).__name__}")
        return t

    def point(self, t):
        fr = self.frame(t)
        return fr.x, fr.y

    def frame(self, t) -> PointFrame:  # pragma: no cover - abstract
        raise NotImplementedError

    def dilate(self, s: float) -> "Segment":  # pragma: no cover - abstract
        raise NotImplementedError

    # Endpoints in traversal order.
    def start(self):
        return self.point(self.t0)

    def end(self):
        return self.point(self.t1)

    def frame_at_start(self) -> PointFrame:
        return self.frame(np.array([self.t0]))

    def frame_at_end(self) -> PointFrame:
        return self.frame(np.array([self.t1]))


def _axis_limit(x, kappa1, kappa2_raw, nx):
    """Parallel curvature with the umbilical pole limit kappa_2 -> kappa_1.

    Away from the axis kappa_2 = sign * n_x / x is well defined.  On the axis
    a smooth closed profile has n_x -> 0 proportionally to x; anywhere else an
    on-axis evaluation is a genuine singularity.
    """
    x = np.asarray(x)
    on_axis = np.abs(x) <= _AXIS_EPS
    if not np.any(on_axis):
        return kappa2_raw
    bad = on_axis & (np.abs(np.asarray(nx)) > 1e-6)
    if np.any(bad):
        raise AxisSingularityError(
            "parallel curvature undefined: on-axis point with non-vertical normal")
    return np.where(on_axis, kappa1, kappa2_raw)


@dataclass(frozen=True)
class Arc(Segment):
    """Circle arc: point = center + radius (cos t, sin t), t in [t0, t1].

    ``normal_sign=+1`` orients the normal away from the center.
    """

    center: tuple[float, float]
    radius: float
    t0: float
    t1: float
    normal_sign: int = 1

    def __post_init__(self):
        if self.radius <= 0:
            raise ParameterRangeError("arc radius must be positive")
        if self.normal_sign not in (-1, 1):
            raise ParameterRangeError("normal_sign must be +1 or -1")

    def frame(self, t) -> PointFrame:
        t = self._check_param(t)
        ct, st = np.cos(t), np.sin(t)
        x = self.center[0] + self.radius * ct
        y = self.center[1] + self.radius * st
        d = self.direction
        s = float(self.normal_sign)
        nx, ny = s * ct, s * st
        kappa1 = np.full_like(np.asarray(t, dtype=float), s / self.radius)
        if abs(self.center[0]) <= _AXIS_EPS:
            # sphere about the axis: exactly umbilical, including the poles
            kappa2 = kappa1.copy()
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                kappa2 = _axis_limit(x, kappa1, nx / x, nx)
        return PointFrame(x=x, y=y, tx=-d * st, ty=d * ct, nx=nx, ny=ny,
                          kappa1=kappa1, kappa2=kappa2,
                          speed=np.full_like(kappa1, self.radius))

    def dilate(self, s: float) -> "Arc":
        return replace(self, center=(self.center[0] * s, self.center[1] * s),
                       radius=self.radius * s)

    def mirror_y(self) -> "Arc":
        return replace(self, center=(self.center[0], -self.center[1]),
                       t0=-self.t0, t1=-self.t1)


@dataclass(frozen=True)
class Catenary(Segment):
    """Catenary branch: point = (lam cosh t, y0 + branch * lam * t).

    This parametrization of y = y0 +/- lam arccosh(x / lam) is smooth at the
    waist x = lam, where the graph form has infinite slope.  ``normal_sign=+1``
    orients the normal away from the axis.  The revolved surface is minimal:
    H = 0 identically.
    """

    lam: float
    y0: float
    branch: int
    t0: float
    t1: float
    normal_sign: int = 1

    def __post_init__(self):
        if self.lam <= 0:
            raise ParameterRangeError("catenary waist lam must be positive")
        if self.branch not in (-1, 1):
            raise ParameterRangeError("branch must be +1 or -1")
        if self.normal_sign not in (-1, 1):
            raise ParameterRangeError("normal_sign must be +1 or -1")

    def frame(self, t) -> PointFrame:
        t = self._check_param(t)
        ch, sh = np.cosh(t), np.sinh(t)
        x = self.lam * ch
        y = self.y0 + self.branch * self.lam * t
        d = self.direction
        b = float(self.branch)
        s = float(self.normal_sign)
        speed = self.lam * ch
        tx = d * sh / ch
        ty = d * b / ch
        nx = s / ch
        ny = -s * b * sh / ch
        kappa1 = -s / (self.lam * ch**2)
        kappa2 = s / (self.lam * ch**2)
        return PointFrame(x=x, y=y, tx=tx, ty=ty, nx=nx, ny=ny,
                          kappa1=kappa1, kappa2=kappa2, speed=speed)

    def dilate(self, s: float) -> "Catenary":
        return replace(self, lam=self.lam * s, y0=self.y0 * s)

    def mirror_y(self) -> "Catenary":
        return replace(self, y0=-self.y0, branch=-self.branch)


@dataclass(frozen=True)
class Graph(Segment):
    """Radial height field: point = (t, psi(t)) for t in [r_a, r_b].

    ``psi`` returns (value, first, second derivative) and must vectorize.
    ``normal_sign=+1`` orients the normal with positive y-component.
    """

    psi: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
    t0: float
    t1: float
    normal_sign: int = 1
    label: str = ""

    def frame(self, t) -> PointFrame:
        t = self._check_param(t)
        val, dp, ddp = self.psi(np.asarray(t, dtype=float))
        d = self.direction
        s = float(self.normal_sign)
        speed = np.sqrt(1.0 + dp**2)
        tx = d / speed
        ty = d * dp / speed
        nx = -s * dp / speed
        ny = s / speed
        kappa1 = -s * ddp / speed**3
        with np.errstate(divide="ignore", invalid="ignore"):
            kappa2_raw = -s * dp / (np.asarray(t, dtype=float) * speed)
        kappa2 = _axis_limit(t, kappa1, kappa2_raw, nx)
        return PointFrame(x=np.asarray(t, dtype=float), y=val, tx=tx, ty=ty,
                          nx=nx, ny=ny, kappa1=kappa1, kappa2=kappa2, speed=speed)

    def dilate(self, s: float) -> "Graph":
        inner = self.psi

        def scaled(t):
            v, d1, d2 = inner(np.asarray(t) / s)
            return s * v, d1, d2 / s

        return replace(self, psi=scaled, t0=self.t0 * s, t1=self.t1 * s)


@dataclass(frozen=True)
class ParametricSegment(Segment):
    """General C^2 planar curve t -> (x, y) with derivatives.

    ``curve`` returns (x, y, dx, dy, ddx, ddy).  Used to bridge spline fits of
    discrete profiles into the evaluator; not part of the JSON schema.
    ``normal_sign=+1`` keeps the right-hand normal of the increasing-t
    direction, n = (dy, -dx)/speed.
    """

    curve: Callable[[np.ndarray], tuple]
    t0: float
    t1: float
    normal_sign: int = 1
    label: str = ""

    def frame(self, t) -> PointFrame:
        t = self._check_param(t)
        x, y, dx, dy, ddx, ddy = self.curve(np.asarray(t, dtype=float))
        d = self.direction
        s = float(self.normal_sign)
        speed = np.hypot(dx, dy)
        tx = d * dx / speed
        ty = d * dy / speed
        nx = s * dy / speed
        ny = -s * dx / speed
        kappa1 = s * (dx * ddy - dy * ddx) / speed**3
        with np.errstate(divide="ignore", invalid="ignore"):
            kappa2_raw = nx / x
        x = np.asarray(x, dtype=float)
        near_axis = np.abs(x) <= 1e-9
        kappa2 = np.where(near_axis, kappa1, kappa2_raw)
        return PointFrame(x=x, y=y, tx=tx, ty=ty, nx=nx, ny=ny,
                          kappa1=kappa1, kappa2=kappa2, speed=speed)

    def dilate(self, s: float) -> "ParametricSegment":
        inner = self.curve

        def scaled(t):
            x, y, dx, dy, ddx, ddy = inner(np.asarray(t))
            return s * x, s * y, s * dx, s * dy, s * ddx, s * ddy

        return replace(self, curve=scaled)


def frame_at(segment: Segment, t) -> PointFrame:
    """Full point frame of ``segment`` at parameter ``t`` (scalar or array)."""
    return segment.frame(t)


@dataclass(frozen=True)
class SurfaceReport:
    """Evaluated scalars of a revolved surface."""

    area: float
    willmore: float
    gauss_integral: float
    tracefree_integral: float
    max_radius: float
    confined: bool
    closed: bool
    identity: object | None = None

    def as_dict(self) -> dict:
        out = {
            "area": self.area,
            "willmore": self.willmore,
            "gauss_integral": self.gauss_integral,
            "tracefree_integral": self.tracefree_integral,
            "max_radius": self.max_radius,
            "confined": self.confined,
            "closed": self.closed,
        }
        if self.identity is not None:
            out["identity"] = self.identity.as_dict()
        return out


@dataclass(frozen=True)
class RevolutionSurface:
    """Ordered chain of profile segments revolved about the y-axis.

    Junction continuity (positions within TAU_POS, tangents and normals within
    TAU_TAN) is validated at construction.  A chain whose first and last points
    lie on the axis revolves to a closed sphere-type surface; open chains (for
    example the upper construction of a neck) are permitted and flagged.
    """

    segments: tuple[Segment, ...]
    label: str = ""

    def __post_init__(self):
        if not self.segments:
            raise ConstructionError("surface needs at least one segment")
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for prev, nxt in zip(segs[:-1], segs[1:]):
            fe = prev.frame_at_end()
            fs = nxt.frame_at_start()
            gap = float(np.hypot(fe.x[0] - fs.x[0], fe.y[0] - fs.y[0]))
            if gap > TAU_POS:
                raise ConstructionError(
                    f"junction gap {gap:.3e} exceeds {TAU_POS} between "
                    f"{type(prev).__name__} and {type(nxt).__name__}")
            # atan2(cross, dot) resolves angles down to roundoff; an
            # arccos(dot) would bottom out near sqrt(eps) ~ 1.5e-8.
            tcross = float(fe.tx[0] * fs.ty[0] - fe.ty[0] * fs.tx[0])
            tdot = float(fe.tx[0] * fs.tx[0] + fe.ty[0] * fs.ty[0])
            angle = abs(float(np.arctan2(tcross, tdot)))
            if angle > TAU_TAN:
                raise ConstructionError(
                    f"tangent kink {angle:.3e} rad exceeds {TAU_TAN}")
            ncross = float(fe.nx[0] * fs.ny[0] - fe.ny[0] * fs.nx[0])
            ndot = float(fe.nx[0] * fs.nx[0] + fe.ny[0] * fs.ny[0])
            nangle = abs(float(np.arctan2(ncross, ndot)))
            if nangle > TAU_TAN:
                raise ConstructionError(
                    f"normal flip {nangle:.3e} rad across a junction")

    @property
    def is_closed(self) -> bool:
        x0 = abs(self.segments[0].start()[0])
        x1 = abs(self.segments[-1].end()[0])
        return x0 <= TAU_POS and x1 <= TAU_POS

    def require_closed(self):
        if not self.is_closed:
            raise ConstructionError(
                "operation requires a closed (axis-to-axis) profile chain")

    def sample_frames(self, per_segment: int = 512) -> list[PointFrame]:
        frames = []
        for seg in self.segments:
            lo, hi = seg.bounds
            ts = np.linspace(lo, hi, per_segment)
            frames.append(seg.frame(ts))
        return frames

    def max_radius(self, per_segment: int = 2048) -> float:
        """max |p| over the surface, by dense sampling plus parabolic polish."""
        best = 0.0
        for seg in self.segments:
            lo, hi = seg.bounds
            ts = np.linspace(lo, hi, per_segment)
            fr = seg.frame(ts)
            r = np.asarray(fr.radius)
            i = int(np.argmax(r))
            best = max(best, float(r[i]))
            if 0 < i < len(ts) - 1:
                # one parabolic refinement around the best sample
                h = ts[1] - ts[0]
                r0, r1, r2 = r[i - 1], r[i], r[i + 1]
                denom = r0 - 2 * r1 + r2
                if denom < 0:
                    dt = 0.5 * h * (r0 - r2) / denom
                    tstar = np.clip(ts[i] + dt, lo, hi)
                    best = max(best, float(seg.frame(np.array([tstar])).radius[0]))
        return best

    def dilate(self, s: float) -> "RevolutionSurface":
        if s <= 0:
            raise ParameterRangeError("dilation factor must be positive")
        return RevolutionSurface(
            tuple(seg.dilate(s) for seg in self.segments),
            label=f"{self.label}*dilate({s:g})" if self.label else f"dilate({s:g})",
        )


def integrate_rows(surface: RevolutionSurface, rows_fn, nrows: int,
                   *, atol: float | None = None, rtol: float | None = None) -> np.ndarray:
    """Integrate several frame functions at once over the revolved surface.

    ``rows_fn(frame)`` returns an array of shape (nrows, npoints); the measure
    is dH^2 = 2 pi x ds.  All rows share one adaptive refinement, so coupled
    quantities (identity left/right sides) are evaluated on common nodes.
    """
    total = np.zeros(nrows)
    for seg in surface.segments:
        lo, hi = seg.bounds

        def weighted(ts, seg=seg):
            fr = seg.frame(ts)
            base = fr.area_factor * fr.speed
            rows = np.asarray(rows_fn(fr), dtype=float)
            if rows.ndim == 1:
                rows = rows[None, :]
            return rows * base[None, :]

        total += adaptive_quad(weighted, lo, hi, atol=atol, rtol=rtol)
    return total


def integrate_many(surface: RevolutionSurface,
                   integrands: Sequence[Callable[[PointFrame], np.ndarray]],
                   *, atol: float | None = None, rtol: float | None = None) -> np.ndarray:
    """Integrate pointwise functions of the frame over the revolved surface."""

    def rows_fn(fr):
        shape = np.shape(fr.x)
        return np.stack([np.broadcast_to(np.asarray(g(fr), dtype=float), shape)
                         for g in integrands])

    return integrate_rows(surface, rows_fn, len(integrands), atol=atol, rtol=rtol)


def integrate(surface: RevolutionSurface, integrand, **kw) -> float:
    """Integral of one pointwise function of the frame over the surface."""
    return float(integrate_many(surface, [integrand], **kw)[0])


def report(surface: RevolutionSurface, *, atol: float | None = None,
           rtol: float | None = None) -> SurfaceReport:
    """Areas, energies and confinement data of a revolved surface."""

    def rows_fn(fr):
        return np.stack([
            np.ones_like(fr.x),
            0.25 * fr.mean_curvature**2,
            fr.gauss_curvature,
            0.5 * fr.tracefree_sq,
        ])

    vals = integrate_rows(surface, rows_fn, 4, atol=atol, rtol=rtol)
    area, willmore, gauss, tracefree = map(float, vals)
    max_radius = surface.max_radius()
    return SurfaceReport(
        area=area,
        willmore=willmore,
        gauss_integral=gauss,
        tracefree_integral=tracefree,
        max_radius=max_radius,
        confined=max_radius <= 1.0 + TAU_CONF,
        closed=surface.is_closed,
    )


def sphere(radius: float = 1.0, center_y: float = 0.0, label: str = "",
           normal_sign: int = 1) -> RevolutionSurface:
    """Round sphere about the axis as a single profile arc (south to north)."""
    return RevolutionSurface(
        (Arc(center=(0.0, center_y), radius=radius, t0=-np.pi / 2,
             t1=np.pi / 2, normal_sign=normal_sign),),
        label=label or f"sphere(r={radius:g})",
    )
