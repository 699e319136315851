"""Charts, transition maps, partitions of unity and quadrature.

The numerical substrate is deliberately plain: a manifold is a finite
atlas of tensor-product grids on boxes, glued by explicit transition
maps, with a smooth partition of unity used for integration.  Axes are
either periodic (node 0 identified with node N) or plain boxes.

Integration of a global scalar is the weighted sum of per-chart
integrals of (partition weight) * (integrand).  Because each weighted
integrand is smooth and compactly supported inside its chart box, the
composite trapezoid rule converges super-algebraically, which is what
makes desk-scale tolerances reachable on modest grids.

Integrable point singularities are handled by a smooth splitting: for a
declared singular point p with radius rho, the integrand is written as
(1 - eta) f + eta f where eta is a radial C-infinity blend equal to 1
near p and 0 outside the disk of radius rho.  The first summand is
handled by the base grid (it vanishes identically near p), the second by
a graded polar patch whose radial nodes never touch r = 0.  The polar
patch needs pointwise access to the integrand, so singular integrands
must be supplied as callables, not node arrays.

Orientation is fixed by chart coordinate order; the standard two-chart
sphere below uses the transition z -> 1/z, whose real Jacobian
determinant 1/|z|^4 is positive, so both charts carry the same
orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, NumericalSingularityError, UsageError

__all__ = [
    "Chart",
    "Transition",
    "SingularPoint",
    "QuadratureRule",
    "Manifold",
    "build_standard_manifold",
    "refine_manifold",
    "integrate_scalar",
    "smoothstep",
    "partition_weights_at",
    "STANDARD_MANIFOLDS",
]

STANDARD_MANIFOLDS = ("torus2", "torus3", "sphere2_stereographic", "cp1")


# ---------------------------------------------------------------------------
# smooth bump utilities
# ---------------------------------------------------------------------------

def _flat_exp(t: np.ndarray) -> np.ndarray:
    """exp(-1/t) for t > 0, identically 0 for t <= 0 (C-infinity)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t):
    """C-infinity monotone step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    g0 = _flat_exp(t)
    g1 = _flat_exp(1.0 - t)
    return g0 / (g0 + g1)


def _blend_eta(r: np.ndarray, radius: float) -> np.ndarray:
    """Radial blend: 1 for r <= radius/2, 0 for r >= radius, smooth between."""
    return smoothstep((radius - np.asarray(r, dtype=float)) / (0.5 * radius))


# ---------------------------------------------------------------------------
# charts and transitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    """A tensor-product grid on a box.

    Periodic axes place nodes at lo + i*h, i = 0..n-1 with h = (hi-lo)/n
    (node n would coincide with node 0); plain axes include both
    endpoints with h = (hi-lo)/(n-1).
    """

    name: str
    box: tuple[tuple[float, float], ...]
    shape: tuple[int, ...]
    periodic: tuple[bool, ...]

    def __post_init__(self):
        if not (len(self.box) == len(self.shape) == len(self.periodic)):
            raise UsageError("chart box/shape/periodic ranks disagree")
        if any(n < 4 for n in self.shape):
            raise UsageError(f"chart {self.name!r}: fewer than 4 nodes on an axis")
        for lo, hi in self.box:
            if not hi > lo:
                raise UsageError(f"chart {self.name!r}: empty box axis")

    @property
    def dim(self) -> int:
        return len(self.shape)

    def spacing(self, axis: int) -> float:
        lo, hi = self.box[axis]
        n = self.shape[axis]
        return (hi - lo) / (n if self.periodic[axis] else n - 1)

    def axis_nodes(self, axis: int) -> np.ndarray:
        lo, hi = self.box[axis]
        n = self.shape[axis]
        h = self.spacing(axis)
        return lo + h * np.arange(n)

    def grids(self) -> list[np.ndarray]:
        """Meshgrid coordinate arrays (indexing='ij'), one per axis."""
        return list(np.meshgrid(*[self.axis_nodes(a) for a in range(self.dim)],
                                indexing="ij"))

    def points(self) -> np.ndarray:
        """All nodes as an (N, dim) array in C order."""
        gs = self.grids()
        return np.stack([g.reshape(-1) for g in gs], axis=-1)

    def trapezoid_weights(self) -> np.ndarray:
        """Tensor-product trapezoid weights over the box (shape = grid shape)."""
        axes = []
        for a in range(self.dim):
            n = self.shape[a]
            h = self.spacing(a)
            w = np.full(n, h)
            if not self.periodic[a]:
                w[0] *= 0.5
                w[-1] *= 0.5
            axes.append(w)
        out = axes[0]
        for w in axes[1:]:
            out = np.multiply.outer(out, w)
        return out


@dataclass(frozen=True)
class Transition:
    """Coordinate change between two overlapping charts.

    ``apply`` maps source-chart coordinates to destination-chart
    coordinates on the overlap; ``domain`` masks the points where the
    map is defined.  ``jacobian`` returns the (N, d, d) matrix
    d(dst)/d(src); if omitted it is computed by centered differences of
    ``apply``.
    """

    src: str
    dst: str
    apply: Callable[[np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None

    def jacobian_at(self, pts: np.ndarray, step: float = 1e-6) -> np.ndarray:
        if self.jacobian is not None:
            return self.jacobian(pts)
        pts = np.asarray(pts, dtype=float)
        n, d = pts.shape
        jac = np.empty((n, d, d))
        for j in range(d):
            dp = np.zeros_like(pts)
            dp[:, j] = step
            jac[:, :, j] = (self.apply(pts + dp) - self.apply(pts - dp)) / (2 * step)
        return jac


@dataclass(frozen=True)
class SingularPoint:
    """A declared integrable point singularity inside one chart."""

    chart: str
    coords: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise UsageError("singular point radius must be positive")


@dataclass(frozen=True)
class QuadratureRule:
    """Parameters of the composite rule.

    ``rings``/``angular`` control the polar patches around declared
    singular points; ``grading`` is the radial grading exponent p in the
    substitution r = rho * u**p (p = 2 resolves 1/r integrands).
    """

    rings: int = 64
    angular: int = 128
    grading: float = 2.0

    def __post_init__(self):
        if self.rings < 2 or self.angular < 4:
            raise UsageError("quadrature rule too coarse")
        if self.grading < 1.0:
            raise UsageError("radial grading exponent must be >= 1")


# ---------------------------------------------------------------------------
# manifold
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Manifold:
    """A finite atlas with a partition of unity.

    ``weights`` maps chart name to a callable returning the partition
    weight at (N, dim) points of that chart.  Weights must sum to one
    over the atlas and vanish near any non-periodic chart boundary that
    another chart covers.  Instances are immutable; all operations
    produce new objects, so values can be shared freely across threads.
    """

    name: str
    charts: tuple[Chart, ...]
    transitions: tuple[Transition, ...] = ()
    weights: Mapping[str, Callable[[np.ndarray], np.ndarray]] | None = None
    singular_points: tuple[SingularPoint, ...] = ()
    rule: QuadratureRule = field(default_factory=QuadratureRule)

    def __post_init__(self):
        names = [c.name for c in self.charts]
        if len(set(names)) != len(names):
            raise UsageError("duplicate chart names")
        dims = {c.dim for c in self.charts}
        if len(dims) != 1:
            raise UsageError("charts of mixed dimension")
        for p in self.singular_points:
            self.chart(p.chart)  # raises if unknown

    @property
    def dim(self) -> int:
        return self.charts[0].dim

    def chart(self, name: str) -> Chart:
        for c in self.charts:
            if c.name == name:
                return c
        raise UsageError(f"unknown chart {name!r}")

    def chart_names(self) -> list[str]:
        return [c.name for c in self.charts]

    def weight_fn(self, name: str) -> Callable[[np.ndarray], np.ndarray]:
        if self.weights is None:
            return lambda pts: np.ones(len(np.atleast_2d(pts)))
        return self.weights[name]

    def weight_nodes(self, name: str) -> np.ndarray:
        c = self.chart(name)
        return self.weight_fn(name)(c.points()).reshape(c.shape)

    def transitions_from(self, name: str) -> list[Transition]:
        return [t for t in self.transitions if t.src == name]

    def singular_points_in(self, name: str) -> list[SingularPoint]:
        return [p for p in self.singular_points if p.chart == name]

    def with_singular_points(self, points: Iterable[SingularPoint]) -> "Manifold":
        return replace(self, singular_points=tuple(points))

    def with_rule(self, rule: QuadratureRule) -> "Manifold":
        return replace(self, rule=rule)


def partition_weights_at(M: Manifold, chart: str, pts: np.ndarray) -> np.ndarray:
    """Sum of all partition weights at points given in ``chart`` coordinates.

    Used by validity checks; equals 1 everywhere for a correct atlas.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    total = self_w = M.weight_fn(chart)(pts)
    total = np.array(total, dtype=float, copy=True)
    for t in M.transitions_from(chart):
        mask = t.domain(pts)
        if not np.any(mask):
            continue
        mapped = t.apply(pts[mask])
        total[mask] += M.weight_fn(t.dst)(mapped)
    return total


# ---------------------------------------------------------------------------
# standard manifolds
# ---------------------------------------------------------------------------

def _torus(name: str, dim: int, resolution: int) -> Manifold:
    chart = Chart(
        name="t",
        box=((0.0, 1.0),) * dim,
        shape=(resolution,) * dim,
        periodic=(True,) * dim,
    )
    return Manifold(name=name, charts=(chart,))


def _inversion(pts: np.ndarray) -> np.ndarray:
    """z -> 1/z in real coordinates: (x, y) -> (x, -y)/(x^2+y^2)."""
    pts = np.asarray(pts, dtype=float)
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    out = np.empty_like(pts)
    out[:, 0] = pts[:, 0] / r2
    out[:, 1] = -pts[:, 1] / r2
    return out


def _inversion_jacobian(pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    r2 = x * x + y * y
    jac = np.empty((len(pts), 2, 2))
    jac[:, 0, 0] = (y * y - x * x) / r2 ** 2
    jac[:, 0, 1] = -2 * x * y / r2 ** 2
    jac[:, 1, 0] = 2 * x * y / r2 ** 2
    jac[:, 1, 1] = (y * y - x * x) / r2 ** 2
    return jac


def _sphere_weight(blend: float) -> Callable[[np.ndarray], np.ndarray]:
    """Radially symmetric weight: 1 for |z| <= 1/blend, 0 for |z| >= blend.

    Built so that w(z) + w(1/z) = 1 exactly: with u = log|z| / log(blend),
    w = S((1 - u)/2) and the smoothstep satisfies S(x) + S(1-x) = 1.
    """
    log_tau = math.log(blend)

    def weight(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.hypot(pts[:, 0], pts[:, 1])
        with np.errstate(divide="ignore"):
            u = np.clip(np.log(np.maximum(r, 1e-300)) / log_tau, -1.0, 1.0)
        return smoothstep(0.5 * (1.0 - u))

    return weight


def _two_chart_sphere(name: str, resolution: int, box_radius: float,
                      blend: float) -> Manifold:
    if not 1.0 < blend < box_radius:
        raise ConfigError("need 1 < blend < box_radius for the sphere atlas")
    box = ((-box_radius, box_radius), (-box_radius, box_radius))
    north = Chart("north", box, (resolution, resolution), (False, False))
    south = Chart("south", box, (resolution, resolution), (False, False))

    def domain(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        return (r > 1.0 / box_radius) & (r < np.inf)

    trans = (
        Transition("north", "south", _inversion, domain, _inversion_jacobian),
        Transition("south", "north", _inversion, domain, _inversion_jacobian),
    )
    w = _sphere_weight(blend)
    return Manifold(name=name, charts=(north, south), transitions=trans,
                    weights={"north": w, "south": w})


def build_standard_manifold(name: str, resolution: int = 64, *,
                            singular_points: Sequence[SingularPoint] = (),
                            box_radius: float = 2.4, blend: float = 2.0,
                            rule: QuadratureRule | None = None) -> Manifold:
    """Construct one of the desk-scale manifolds by name.

    ``torus2`` and ``torus3`` are single periodic charts on the unit
    cube.  ``sphere2_stereographic`` and ``cp1`` share the same
    two-chart atlas (stereographic coordinates from the two poles with
    transition z -> 1/z); the two names exist because the former is used
    with real oriented bundles and the latter with holomorphic line
    bundles.
    """
    if name == "torus2":
        m = _torus(name, 2, resolution)
    elif name == "torus3":
        m = _torus(name, 3, resolution)
    elif name in ("sphere2_stereographic", "cp1"):
        m = _two_chart_sphere(name, resolution, box_radius, blend)
    else:
        raise ConfigError(
            f"unknown manifold {name!r}; expected one of {STANDARD_MANIFOLDS}")
    if rule is not None:
        m = m.with_rule(rule)
    if singular_points:
        m = m.with_singular_points(tuple(singular_points))
        _validate_singular_points(m)
    return m


def _validate_singular_points(M: Manifold) -> None:
    """Declared singularities must sit where their chart has full weight
    and must not overlap each other (the smooth splitting assumes both)."""
    for p in M.singular_points:
        c = np.asarray(p.coords, dtype=float)[None, :]
        w = M.weight_fn(p.chart)(c)[0]
        if abs(w - 1.0) > 1e-10:
            raise ConfigError(
                f"singular point {p.coords} in chart {p.chart!r} lies where the "
                f"partition weight is {w:.3f}; it must sit in the full-weight region")
    pts = M.singular_points
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if pts[i].chart != pts[j].chart:
                continue
            d = math.dist(pts[i].coords, pts[j].coords)
            if d < pts[i].radius + pts[j].radius:
                raise ConfigError("singular point patches overlap")


def refine_manifold(M: Manifold, factor: int) -> Manifold:
    """Uniformly refine every chart (and the polar rings) by ``factor``.

    Deterministic: refining twice by 2 gives the same atlas as once by 4.
    """
    if factor < 1 or int(factor) != factor:
        raise UsageError("refinement factor must be a positive integer")
    factor = int(factor)
    charts = []
    for c in M.charts:
        shape = tuple(
            n * factor if per else (n - 1) * factor + 1
            for n, per in zip(c.shape, c.periodic)
        )
        charts.append(replace(c, shape=shape))
    rule = replace(M.rule, rings=M.rule.rings * factor,
                   angular=M.rule.angular * factor)
    return replace(M, charts=tuple(charts), rule=rule)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

FieldLike = Mapping[str, "np.ndarray | Callable[[np.ndarray], np.ndarray]"]


def _eval_field(entry, pts: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if callable(entry):
        vals = np.asarray(entry(pts))
        return vals.reshape(shape)
    arr = np.asarray(entry)
    if arr.shape != shape:
        raise UsageError(f"node array of shape {arr.shape}, grid is {shape}")
    return arr


def _polar_patch(M: Manifold, point: SingularPoint, f, rule: QuadratureRule):
    """Integral of eta * weight * f over the graded polar patch at ``point``.

    Radial substitution r = rho * u**p with midpoint nodes in u, so the
    integrand is never evaluated at r = 0; for an r**-1 singularity and
    p = 2 the substituted integrand is smooth.
    """
    chart = M.chart(point.chart)
    if chart.dim == 2:
        return _polar_patch_2d(M, point, f, rule)
    if chart.dim == 3:
        return _polar_patch_3d(M, point, f, rule)
    raise UsageError("polar refinement implemented for 2D and 3D charts only")


def _radial_nodes(rho: float, p: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights for the graded substitution r = rho*u**p.

    Gauss nodes keep u strictly inside (0, 1) (so r = 0 is never sampled)
    and integrate the polynomial jacobians exactly, which is what lets
    the patch weights reproduce the patch area to round-off.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    du = 0.5 * w
    r = rho * u ** p
    dr_du = rho * p * u ** (p - 1)
    return r, dr_du * du


def _polar_patch_2d(M: Manifold, point: SingularPoint, f, rule: QuadratureRule):
    rho = point.radius
    n_r, n_t = rule.rings, rule.angular
    r, dr = _radial_nodes(rho, rule.grading, n_r)
    w_r = r * dr                                    # polar measure r dr
    theta = 2.0 * np.pi * np.arange(n_t) / n_t
    w_t = 2.0 * np.pi / n_t
    cx, cy = point.coords
    xx = cx + np.outer(r, np.cos(theta))
    yy = cy + np.outer(r, np.sin(theta))
    pts = np.stack([xx.reshape(-1), yy.reshape(-1)], axis=-1)
    vals = np.asarray(f(pts)).reshape(n_r, n_t)
    if not np.all(np.isfinite(vals)):
        raise NumericalSingularityError(
            f"non-finite integrand inside the declared patch at {point.coords}")
    pou = M.weight_fn(point.chart)(pts).reshape(n_r, n_t)
    eta = _blend_eta(r, rho)[:, None]
    return complex(np.sum(vals * pou * eta * w_r[:, None] * w_t))


def _polar_patch_3d(M: Manifold, point: SingularPoint, f, rule: QuadratureRule):
    rho = point.radius
    n_r, n_t = rule.rings, rule.angular
    n_phi = max(4, n_t // 2)
    r, dr = _radial_nodes(rho, rule.grading, n_r)
    w_r = r ** 2 * dr
    # latitude via Gauss nodes in mu = cos(phi): d(cos phi) = -sin(phi) dphi
    mu, w_phi = np.polynomial.legendre.leggauss(n_phi)
    sin_phi = np.sqrt(1.0 - mu ** 2)
    theta = 2.0 * np.pi * np.arange(n_t) / n_t
    w_t = 2.0 * np.pi / n_t
    c = np.asarray(point.coords)
    dirs = np.stack([
        np.outer(sin_phi, np.cos(theta)),
        np.outer(sin_phi, np.sin(theta)),
        np.broadcast_to(mu[:, None], (n_phi, n_t)),
    ], axis=-1)                                          # (n_phi, n_t, 3)
    pts = (c[None, None, None, :] + r[:, None, None, None] * dirs[None])
    pts = pts.reshape(-1, 3)
    vals = np.asarray(f(pts)).reshape(n_r, n_phi, n_t)
    if not np.all(np.isfinite(vals)):
        raise NumericalSingularityError(
            f"non-finite integrand inside the declared patch at {point.coords}")
    pou = M.weight_fn(point.chart)(pts).reshape(n_r, n_phi, n_t)
    eta = _blend_eta(r, rho)[:, None, None]
    w = w_r[:, None, None] * w_phi[None, :, None] * w_t
    return complex(np.sum(vals * pou * eta * w))


def integrate_scalar(M: Manifold, fields: FieldLike,
                     rule: QuadratureRule | None = None) -> complex | float:
    """Integrate a global scalar given per chart as node arrays or callables.

    Declared singular points are handled by the smooth splitting described
    in the module docstring; they require callable fields.  Non-finite
    samples at any point carrying quadrature weight outside the declared
    patches raise ``NumericalSingularityError``.
    """
    rule = rule or M.rule
    parts: list[complex] = []
    any_complex = False
    for chart in M.charts:
        entry = fields.get(chart.name) if hasattr(fields, "get") else None
        if entry is None:
            raise UsageError(f"no field supplied for chart {chart.name!r}")
        sing = M.singular_points_in(chart.name)
        if sing and not callable(entry):
            raise UsageError(
                "singular integration needs a callable field (node arrays "
                "cannot be resampled on the polar patch)")
        pts = chart.points()
        vals = _eval_field(entry, pts, chart.shape).astype(complex)
        any_complex = any_complex or np.iscomplexobj(np.asarray(entry(pts) if callable(entry) else entry))
        w = chart.trapezoid_weights() * M.weight_nodes(chart.name)
        for point in sing:
            c = np.asarray(point.coords)
            r = np.linalg.norm(pts - c[None, :], axis=1).reshape(chart.shape)
            keep = 1.0 - _blend_eta(r, point.radius)
            vals = np.where(keep < 1e-300, 0.0, vals)   # kill NaN at the core
            w = w * keep
        live = w != 0
        if not np.all(np.isfinite(vals[live])):
            raise NumericalSingularityError(
                f"non-finite samples in chart {chart.name!r} outside declared "
                "singular regions")
        parts.append(complex(np.sum(vals * w)))
        for point in sing:
            parts.append(_polar_patch(M, point, entry, rule))
    total = complex(math.fsum(p.real for p in parts),
                    math.fsum(p.imag for p in parts))
    return total if any_complex else total.real
