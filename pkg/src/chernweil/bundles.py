"""Vector bundles, connections, bundle maps, and smoothing families.

A Bundle holds per-chart analytic data: a connection 1-form matrix, a
metric 0-form, and transition cocycles.  The local-representative
convention is

    s_B = g_{A->B} s_A,      omega_B = g omega_A g^{-1} - (dg) g^{-1},

so a bundle map F <- E with matrices a transforms as a_B = g_F a_A
g_E^{-1}.  Covariant derivative on column sections: D s = ds + omega s.

The smoothing machinery: beta = (alpha* alpha)^{-1} alpha* is the
metric least-squares inverse, singular on the degeneracy locus; beta_s =
chi(alpha* alpha / s) beta is globally smooth and is computed by
spectral functional calculus with u(lambda) = chi(lambda/s)/lambda
(continuously extended by chi'(0)/s at lambda = 0).  alpha* alpha is
self-adjoint for the E-metric, not symmetric as a raw matrix, so the
eigenproblem is symmetrized through the Cholesky factor of h_E.

The transplanted connections are

    push:  omega~ = a omega_E b - (da) b + omega_F (1 - a b)
    pull:  omega~ = b (da) + b omega_F a + (1 - b a) omega_E

obtained by expanding alpha D_E beta + D_F (1 - alpha beta) and
beta D_F alpha + (1 - beta alpha) D_E on column sections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (ConfigError, DegeneracyError, UndeclaredSingularityError,
                     UsageError)
from .fields import FD_STEP, FieldForm, MatrixFieldForm, constant_field
from .meshes import Manifold, SingularPoint, smoothstep

__all__ = [
    "Bundle",
    "BundleMap",
    "DeclaredSingularity",
    "ApproximationMode",
    "MODES",
    "get_mode",
    "validate_mode",
    "curvature",
    "least_squares_inverse",
    "smoothed_beta",
    "pushforward_connection",
    "pullback_connection",
    "gauge_transform",
    "adjoint_map",
    "flat_bundle",
    "fubini_study_bundle",
    "oriented_round_sphere_bundle",
    "section_map",
    "atomicity_diagnostic",
    "connection_compatibility_residual",
    "metric_compatibility_residual",
    "cocycle_residual",
    "equivariance_residual",
    "map_min_singular_value",
]

MatrixFn = Callable[[np.ndarray], np.ndarray]  # pts (N, d) -> (N, r, c)


# ---------------------------------------------------------------------------
# bundles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bundle:
    """A smooth vector bundle with metric and connection, chart by chart."""

    manifold: Manifold
    rank: int
    field: str                                   # "real" | "complex"
    connection: MatrixFieldForm                  # degree-1, rank x rank
    metric: MatrixFieldForm                      # degree-0, positive definite
    cocycles: Mapping[tuple[str, str], MatrixFn]
    oriented: bool = False
    name: str = "bundle"
    curvature_exact: MatrixFieldForm | None = None

    def __post_init__(self):
        if self.rank < 1:
            raise UsageError("bundle rank must be positive")
        if self.field not in ("real", "complex"):
            raise UsageError("bundle field must be 'real' or 'complex'")
        if self.connection.value_shape != (self.rank, self.rank):
            raise UsageError("connection matrix size does not match rank")
        if self.connection.degree != 1:
            raise UsageError("connection must be a 1-form")
        if self.metric.degree != 0:
            raise UsageError("metric must be a 0-form")

    def cocycle(self, src: str, dst: str) -> MatrixFn:
        got = self.cocycles.get((src, dst))
        if got is None:
            raise UsageError(f"no cocycle {src!r} -> {dst!r}")
        return got

    def with_connection(self, omega: MatrixFieldForm,
                        curvature_exact: MatrixFieldForm | None = None,
                        name: str | None = None) -> "Bundle":
        return replace(self, connection=omega, curvature_exact=curvature_exact,
                       name=name if name is not None else self.name)


def curvature(B: Bundle) -> MatrixFieldForm:
    """Omega = d omega + omega ^ omega (exact formula used when attached)."""
    if B.curvature_exact is not None:
        return B.curvature_exact
    omega = B.connection
    return omega.d() + omega.matmul(omega)


def gauge_transform(B: Bundle, g: Mapping[str, MatrixFn],
                    g_inv: Mapping[str, MatrixFn] | None = None) -> Bundle:
    """New connection g omega g^{-1} - (dg) g^{-1} (frame change by g)."""
    M = B.manifold
    gf = MatrixFieldForm(M, 0, {c.name: (lambda pts, f=g[c.name]: {0: f(pts)})
                                for c in M.charts}, (B.rank, B.rank))
    if g_inv is None:
        inv_evals = {}
        for c in M.charts:
            inv_evals[c.name] = lambda pts, f=g[c.name]: {0: np.linalg.inv(f(pts))}
        gi = MatrixFieldForm(M, 0, inv_evals, (B.rank, B.rank))
    else:
        gi = MatrixFieldForm(M, 0, {c.name: (lambda pts, f=g_inv[c.name]: {0: f(pts)})
                                    for c in M.charts}, (B.rank, B.rank))
    omega = gf.matmul(B.connection).matmul(gi) - gf.d().matmul(gi)
    return B.with_connection(omega, name=B.name + "+gauge")


# ---------------------------------------------------------------------------
# bundle maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeclaredSingularity:
    """A declared degeneracy point of a bundle map."""

    chart: str
    coords: tuple[float, ...]
    radius: float
    model: str = "simple_zero"          # local model tag, informational
    multiplicity: int | None = None     # winding hint, informational

    def as_singular_point(self) -> SingularPoint:
        return SingularPoint(self.chart, self.coords, self.radius)


@dataclass(frozen=True)
class BundleMap:
    """alpha: E -> F as per-chart matrix functions (rank_F x rank_E)."""

    source: Bundle
    target: Bundle
    matrices: Mapping[str, MatrixFn]
    singularities: tuple[DeclaredSingularity, ...] = ()
    atomic_declared: bool = False
    name: str = "alpha"

    def __post_init__(self):
        if self.source.manifold != self.target.manifold:
            raise UsageError("bundle map endpoints on different manifolds")
        if self.source.rank > self.target.rank:
            raise DegeneracyError(
                "rank(E) > rank(F) is outside the numerical scope; "
                "only the symbolic layer handles the surjective case")

    @property
    def manifold(self) -> Manifold:
        return self.source.manifold

    def at(self, chart: str, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(self.matrices[chart](pts))

    def as_field(self) -> MatrixFieldForm:
        M = self.manifold
        evals = {c.name: (lambda pts, f=self.matrices[c.name]: {0: np.asarray(f(pts))})
                 for c in M.charts}
        return MatrixFieldForm(M, 0, evals,
                               (self.target.rank, self.source.rank))

    def singular_points(self) -> list[SingularPoint]:
        return [s.as_singular_point() for s in self.singularities]

    def outside_mask(self, chart: str, pts: np.ndarray) -> np.ndarray:
        """True where the point is outside every declared radius."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        keep = np.ones(len(pts), dtype=bool)
        for s in self.singularities:
            if s.chart != chart:
                continue
            d = np.linalg.norm(pts - np.asarray(s.coords)[None, :], axis=1)
            keep &= d > s.radius
        return keep


def adjoint_map(alpha: BundleMap) -> Callable[[str, np.ndarray], np.ndarray]:
    """alpha* = h_E^{-1} a^dagger h_F, the metric adjoint, as a chart function."""
    hE = alpha.source.metric
    hF = alpha.target.metric

    def at(chart: str, pts: np.ndarray) -> np.ndarray:
        a = alpha.at(chart, pts)
        he = hE.at(chart, pts)[0]
        hf = hF.at(chart, pts)[0]
        adag = np.conj(np.swapaxes(a, -1, -2))
        return np.linalg.solve(he, adag @ hf)

    return at


def _gram_eig(alpha: BundleMap, chart: str, pts: np.ndarray):
    """Eigen-data of alpha* alpha, symmetrized through chol(h_E).

    Returns (lam, V, L) with alpha*alpha = L^{-dagger} V lam V^dagger
    L^dagger; lam ascending, clamped below at 0 (tolerating -1e-14 of
    round-off, which the PSD analysis says is noise).
    """
    a = alpha.at(chart, pts)
    he = alpha.source.metric.at(chart, pts)[0]
    hf = alpha.target.metric.at(chart, pts)[0]
    K = np.conj(np.swapaxes(a, -1, -2)) @ hf @ a
    L = np.linalg.cholesky(he)
    Linv = np.linalg.inv(L)
    H = Linv @ K @ np.conj(np.swapaxes(Linv, -1, -2))
    H = 0.5 * (H + np.conj(np.swapaxes(H, -1, -2)))
    lam, V = np.linalg.eigh(H)
    if np.min(lam) < -1e-14 * max(1.0, float(np.max(np.abs(lam)))):
        raise UsageError("alpha* alpha has a significantly negative eigenvalue; "
                         "check the metrics")
    return np.maximum(lam, 0.0), V, L


def _apply_calculus(u_of_lam: np.ndarray, V: np.ndarray, L: np.ndarray) -> np.ndarray:
    """Assemble u(alpha* alpha) = L^{-dagger} V u(lam) V^dagger L^dagger."""
    Ldag = np.conj(np.swapaxes(L, -1, -2))
    Linvdag = np.linalg.inv(Ldag)
    core = (V * u_of_lam[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))
    return Linvdag @ core @ Ldag


def map_min_singular_value(alpha: BundleMap, chart: str, pts: np.ndarray) -> np.ndarray:
    lam, _, _ = _gram_eig(alpha, chart, pts)
    return np.sqrt(lam[..., 0])


def least_squares_inverse(alpha: BundleMap, floor: float = 1e-6) -> BundleMap:
    """beta = (alpha* alpha)^{-1} alpha*, valid off the declared radii.

    Evaluating beta at a point where the smallest singular value of
    alpha drops below ``floor`` raises UndeclaredSingularityError: the
    degeneracy locus must be declared, not discovered.
    """
    adj = adjoint_map(alpha)

    def make(chart: str) -> MatrixFn:
        def fn(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            lam, V, L = _gram_eig(alpha, chart, pts)
            bad = np.sqrt(lam[:, 0]) <= floor
            outside = alpha.outside_mask(chart, pts)
            if np.any(bad & outside):
                i = int(np.argmax(bad & outside))
                raise UndeclaredSingularityError(
                    f"alpha is degenerate at {pts[i]} in chart {chart!r} "
                    "outside every declared singular radius")
            lam_safe = np.where(lam > floor ** 2, lam, np.inf)
            inv = _apply_calculus(1.0 / lam_safe, V, L)
            return inv @ adj(chart, pts)
        return fn

    return BundleMap(alpha.target, alpha.source,
                     {c.name: make(c.name) for c in alpha.manifold.charts},
                     name=f"lsq_inverse({alpha.name})")


def smoothed_beta(alpha: BundleMap, mode: "ApproximationMode",
                  s: float) -> BundleMap:
    """beta_s = chi(alpha* alpha / s) beta, smooth on the whole base.

    Functional calculus with u(lambda) = chi(lambda/s)/lambda extended
    continuously by chi'(0)/s at lambda = 0, applied to alpha*.
    """
    if s <= 0:
        raise UsageError("smoothing scale s must be positive")
    adj = adjoint_map(alpha)

    def u(lam: np.ndarray) -> np.ndarray:
        tiny = lam < 1e-300
        lam_safe = np.where(tiny, 1.0, lam)
        vals = mode.chi(lam_safe / s) / lam_safe
        return np.where(tiny, mode.chi_prime(np.zeros_like(lam)) / s, vals)

    def make(chart: str) -> MatrixFn:
        def fn(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            lam, V, L = _gram_eig(alpha, chart, pts)
            return _apply_calculus(u(lam), V, L) @ adj(chart, pts)
        return fn

    return BundleMap(alpha.target, alpha.source,
                     {c.name: make(c.name) for c in alpha.manifold.charts},
                     name=f"beta_s({alpha.name},{mode.name},s={s:g})")


# ---------------------------------------------------------------------------
# transplanted connections
# ---------------------------------------------------------------------------

def _one(M: Manifold, rank: int) -> MatrixFieldForm:
    return constant_field(M, np.eye(rank))


def pushforward_connection(alpha: BundleMap, beta: BundleMap,
                           name: str | None = None) -> Bundle:
    """Connection alpha D_E beta + D_F (1 - alpha beta) on the target bundle."""
    E, F = alpha.source, alpha.target
    a = alpha.as_field()
    b = beta.as_field()
    one = _one(alpha.manifold, F.rank)
    omega = (a.matmul(E.connection).matmul(b)
             - a.d().matmul(b)
             + F.connection.matmul(one - a.matmul(b)))
    return F.with_connection(omega,
                             name=name or f"push({alpha.name})")


def pullback_connection(alpha: BundleMap, beta: BundleMap,
                        name: str | None = None) -> Bundle:
    """Connection beta D_F alpha + (1 - beta alpha) D_E on the source bundle."""
    E, F = alpha.source, alpha.target
    a = alpha.as_field()
    b = beta.as_field()
    one = _one(alpha.manifold, E.rank)
    omega = (b.matmul(a.d())
             + b.matmul(F.connection).matmul(a)
             + (one - b.matmul(a)).matmul(E.connection))
    return E.with_connection(omega,
                             name=name or f"pull({alpha.name})")


# ---------------------------------------------------------------------------
# approximation modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ApproximationMode:
    """A C-infinity cutoff profile chi on [0, inf).

    ``tail_exponent`` declares the decay rate of 1 - chi(t) (t^-p, with
    math.inf for compactly supported or exponentially small tails); the
    endpoint validation uses it because a t^-1/2 tail cannot meet an
    absolute 1e-6 bound at t = 1e8 even though chi(inf) = 1 holds.
    """

    name: str
    chi: Callable[[np.ndarray], np.ndarray]
    chi_prime: Callable[[np.ndarray], np.ndarray]
    tail_exponent: float
    compact_support: bool = False       # chi == 1 for t >= 1


def _chi_algebraic(t):
    t = np.asarray(t, dtype=float)
    return t / (1.0 + t)


def _chi_algebraic_prime(t):
    t = np.asarray(t, dtype=float)
    return 1.0 / (1.0 + t) ** 2


def _smoothstep_prime(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mid = (t > 0) & (t < 1)
    tm = t[mid]
    with np.errstate(over="ignore"):
        g0 = np.exp(-1.0 / tm)
        g1 = np.exp(-1.0 / (1.0 - tm))
        d0 = g0 / tm ** 2
        d1 = g1 / (1.0 - tm) ** 2
        out[mid] = (d0 * g1 + d1 * g0) / (g0 + g1) ** 2
    return out


def _chi_sqrt(t):
    t = np.asarray(t, dtype=float)
    # 1 - (1+t)^{-1/2}, stable for tiny t
    return -np.expm1(-0.5 * np.log1p(t))


def _chi_sqrt_prime(t):
    t = np.asarray(t, dtype=float)
    return 0.5 / (1.0 + t) ** 1.5


def _chi_exp(t):
    t = np.asarray(t, dtype=float)
    return -np.expm1(-t)


def _chi_exp_prime(t):
    t = np.asarray(t, dtype=float)
    return np.exp(-t)


MODES: dict[str, ApproximationMode] = {
    "algebraic": ApproximationMode("algebraic", _chi_algebraic,
                                   _chi_algebraic_prime, tail_exponent=1.0),
    "compact": ApproximationMode("compact", smoothstep, _smoothstep_prime,
                                 tail_exponent=math.inf, compact_support=True),
    "sqrt": ApproximationMode("sqrt", _chi_sqrt, _chi_sqrt_prime,
                              tail_exponent=0.5),
    "exponential": ApproximationMode("exponential", _chi_exp, _chi_exp_prime,
                                     tail_exponent=math.inf),
}


def get_mode(name: str) -> ApproximationMode:
    try:
        return MODES[name]
    except KeyError:
        raise ConfigError(
            f"unknown approximation mode {name!r}; expected one of "
            f"{sorted(MODES)}") from None


def validate_mode(mode: ApproximationMode) -> None:
    """chi(0) = 0, monotone samples, and the declared endpoint decay."""
    if abs(float(mode.chi(np.zeros(1))[0])) > 1e-14:
        raise UsageError(f"mode {mode.name}: chi(0) != 0")
    t = np.concatenate([[0.0], np.logspace(-6, 8, 200)])
    vals = mode.chi(t)
    if np.any(np.diff(vals) < -1e-12):
        raise UsageError(f"mode {mode.name}: chi is not monotone")
    if np.any(mode.chi_prime(t) < -1e-12):
        raise UsageError(f"mode {mode.name}: chi' < 0")
    t_end = 1e8
    gap = abs(1.0 - float(mode.chi(np.array([t_end]))[0]))
    if math.isinf(mode.tail_exponent):
        bound = 1e-12
    else:
        bound = 10.0 * t_end ** (-mode.tail_exponent)
    if gap > max(bound, 1e-12):
        raise UsageError(
            f"mode {mode.name}: 1 - chi(1e8) = {gap:.2e} exceeds the declared "
            f"tail bound {bound:.2e}")


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def _const_matrix(M: Manifold, mat: np.ndarray) -> Mapping[str, MatrixFn]:
    mat = np.asarray(mat)
    return {c.name: (lambda pts, m=mat: np.broadcast_to(
        m, (len(np.atleast_2d(pts)),) + m.shape).copy()) for c in M.charts}


def flat_bundle(M: Manifold, rank: int = 1, field: str = "complex",
                name: str = "flat", oriented: bool = False) -> Bundle:
    """Trivial bundle, identity metric and cocycles, zero connection."""
    dtype = complex if field == "complex" else float
    zero_conn = MatrixFieldForm(M, 1, {c.name: (lambda pts: {}) for c in M.charts},
                                (rank, rank))
    exact = MatrixFieldForm(M, 2, {c.name: (lambda pts: {}) for c in M.charts},
                            (rank, rank))
    metric = constant_field(M, np.eye(rank, dtype=dtype))
    cocycles = {}
    for t in M.transitions:
        cocycles[(t.src, t.dst)] = _const_matrix(M, np.eye(rank, dtype=dtype))[t.src]
    return Bundle(M, rank, field, zero_conn, metric, cocycles,
                  oriented=oriented, name=name, curvature_exact=exact)


def _fs_metric_fn(k: int, scale: float = 1.0):
    def h(pts):
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return (scale * (1.0 + r2) ** (-k))[:, None, None].astype(complex)
    return h


def _fs_connection_ev(k: int, rho_amp: float = 0.0, rho_sign: float = 1.0):
    """omega = -k zbar dz/(1+|z|^2) + amp * d-bar-free part of the bump.

    With rho = amp*sign*(r^2-1)/(r^2+1), the perturbed Chern connection
    gains del(rho) = 2*amp*sign*zbar dz/(1+r^2)^2.
    """
    def ev(pts):
        x, y = pts[:, 0], pts[:, 1]
        r2 = x * x + y * y
        zbar = x - 1j * y
        coeff = -k * zbar / (1.0 + r2)
        if rho_amp:
            coeff = coeff + 2.0 * rho_amp * rho_sign * zbar / (1.0 + r2) ** 2
        # omega = coeff * dz = coeff dx + i coeff dy
        return {1: coeff[:, None, None], 2: (1j * coeff)[:, None, None]}
    return ev


def _fs_curvature_ev(k: int, rho_amp: float = 0.0, rho_sign: float = 1.0):
    """Omega = -2ik dxdy/(1+r^2)^2 + del-bar del rho (exact)."""
    def ev(pts):
        x, y = pts[:, 0], pts[:, 1]
        r2 = x * x + y * y
        coeff = -2j * k / (1.0 + r2) ** 2
        if rho_amp:
            coeff = coeff + 4j * rho_amp * rho_sign * (1.0 - r2) / (1.0 + r2) ** 3
        return {3: coeff[:, None, None]}
    return ev


def fubini_study_bundle(M: Manifold, k: int, *, perturbation: float = 0.0,
                        name: str | None = None) -> Bundle:
    """The degree-k line bundle on the two-chart sphere.

    Cocycle g_{north->south}(z) = z^{-k}; metric h = (1+|z|^2)^{-k} in
    each chart; Chern connection del log h with exact curvature.  With
    ``perturbation`` = c != 0 the metric is multiplied by exp(rho) for
    the global height function rho = c (r^2-1)/(r^2+1) (north), which
    changes connection and curvature but no characteristic number.
    """
    if set(M.chart_names()) != {"north", "south"}:
        raise UsageError("fubini_study_bundle expects the two-chart sphere")

    conn = MatrixFieldForm(M, 1, {
        "north": _fs_connection_ev(k, perturbation, +1.0),
        "south": _fs_connection_ev(k, perturbation, -1.0),
    }, (1, 1))
    curv = MatrixFieldForm(M, 2, {
        "north": _fs_curvature_ev(k, perturbation, +1.0),
        "south": _fs_curvature_ev(k, perturbation, -1.0),
    }, (1, 1))

    def metric_fn(sign):
        base = _fs_metric_fn(k)

        def h(pts):
            vals = base(pts)
            if perturbation:
                r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
                rho = perturbation * sign * (r2 - 1.0) / (r2 + 1.0)
                vals = vals * np.exp(rho)[:, None, None]
            return vals
        return h

    metric = MatrixFieldForm(M, 0, {
        "north": (lambda pts, f=metric_fn(+1.0): {0: f(pts)}),
        "south": (lambda pts, f=metric_fn(-1.0): {0: f(pts)}),
    }, (1, 1))

    def cocycle(pts):
        z = pts[:, 0] + 1j * pts[:, 1]
        return (z ** (-k))[:, None, None]

    cocycles = {("north", "south"): cocycle, ("south", "north"): cocycle}
    return Bundle(M, 1, "complex", conn, metric, cocycles,
                  name=name or f"O({k})" + (f"+rho({perturbation:g})"
                                            if perturbation else ""),
                  curvature_exact=curv)


def oriented_round_sphere_bundle(M: Manifold, *, perturbation: float = 0.0
                                 ) -> Bundle:
    """The oriented rank-2 real bundle of the round sphere.

    This is the realification of the degree-2 line bundle in its unit
    frame, by (u1, u2) <-> u1 - i u2: connection [[0, B], [-B, 0]] with
    B = Im(del log h - (1/2) d log h), curvature [[0, dB], [-dB, 0]]
    with dB = Omega / i.  Its Pfaffian form integrates to 2, the Euler
    number of the sphere; the underlying metric connection is the
    Levi-Civita connection of the round metric in stereographic frames.
    """
    line = fubini_study_bundle(M, 2, perturbation=perturbation)

    def conn_ev(sign):
        base = _fs_connection_ev(2, perturbation, sign)

        def ev(pts):
            vals = base(pts)
            n = len(pts)
            out = {}
            for mask, v in vals.items():
                B = np.imag(v[:, 0, 0])
                m = np.zeros((n, 2, 2))
                m[:, 0, 1] = B
                m[:, 1, 0] = -B
                out[mask] = m
            return out
        return ev

    def curv_ev(sign):
        base = _fs_curvature_ev(2, perturbation, sign)

        def ev(pts):
            vals = base(pts)
            n = len(pts)
            out = {}
            for mask, v in vals.items():
                dB = np.real(v[:, 0, 0] / 1j)
                m = np.zeros((n, 2, 2))
                m[:, 0, 1] = dB
                m[:, 1, 0] = -dB
                out[mask] = m
            return out
        return ev

    conn = MatrixFieldForm(M, 1, {"north": conn_ev(+1.0), "south": conn_ev(-1.0)},
                           (2, 2))
    curv = MatrixFieldForm(M, 2, {"north": curv_ev(+1.0), "south": curv_ev(-1.0)},
                           (2, 2))

    def cocycle(pts):
        z = pts[:, 0] + 1j * pts[:, 1]
        phase = (np.conj(z) / np.abs(z)) ** 2
        c, s = np.real(phase), np.imag(phase)
        m = np.empty((len(pts), 2, 2))
        m[:, 0, 0] = c
        m[:, 0, 1] = s
        m[:, 1, 0] = -s
        m[:, 1, 1] = c
        return m

    metric = constant_field(M, np.eye(2))
    cocycles = {("north", "south"): cocycle, ("south", "north"): cocycle}
    return Bundle(M, 2, "real", conn, metric, cocycles, oriented=True,
                  name="TS2_round" + (f"+rho({perturbation:g})"
                                      if perturbation else ""),
                  curvature_exact=curv)


def section_map(F: Bundle, reps: Mapping[str, Callable[[np.ndarray], np.ndarray]],
                singularities: Sequence[DeclaredSingularity] = (),
                atomic_declared: bool = True, name: str = "section") -> BundleMap:
    """A section of F viewed as a map from the trivial flat line bundle.

    ``reps`` gives the per-chart scalar representatives (complex values,
    shape (N,) or (N, rank_F)); they must satisfy rep_B = g rep_A.
    """
    E = flat_bundle(F.manifold, 1, F.field, name="triv")
    matrices = {}
    for cname, f in reps.items():
        def fn(pts, f=f):
            vals = np.asarray(f(np.atleast_2d(pts)))
            if vals.ndim == 1:
                vals = vals[:, None]
            return vals[:, :, None]           # (N, rank_F, 1)
        matrices[cname] = fn
    return BundleMap(E, F, matrices, tuple(singularities),
                     atomic_declared=atomic_declared, name=name)


# ---------------------------------------------------------------------------
# residual checks (used by tests and the validation scenarios)
# ---------------------------------------------------------------------------

def _dg_fd(g: MatrixFn, pts: np.ndarray, axis: int, step: float = FD_STEP):
    e = np.zeros(pts.shape[1])
    e[axis] = step
    return (-g(pts + 2 * e) + 8.0 * g(pts + e)
            - 8.0 * g(pts - e) + g(pts - 2 * e)) / (12.0 * step)


def cocycle_residual(B: Bundle, n: int = 60, seed: int = 0) -> float:
    """Composition consistency: g_{B->A} g_{A->B} = 1 on overlap samples,
    and the cocycle identity on triple overlaps when three charts exist."""
    from .forms import overlap_samples
    M = B.manifold
    worst = 0.0
    for t in M.transitions:
        back = B.cocycles.get((t.dst, t.src))
        if back is None:
            continue
        pts = overlap_samples(M, t, n, seed)
        g = B.cocycle(t.src, t.dst)(pts)
        mapped = t.apply(pts)
        gb = back(mapped)
        eye = np.eye(B.rank)
        worst = max(worst, float(np.max(np.abs(gb @ g - eye))))
    return worst


def equivariance_residual(alpha: BundleMap, n: int = 60, seed: int = 0) -> float:
    """a_B(T(x)) = g_F a_A(x) g_E^{-1} at overlap samples."""
    from .forms import overlap_samples
    M = alpha.manifold
    worst = 0.0
    for t in M.transitions:
        pts = overlap_samples(M, t, n, seed)
        mapped = t.apply(pts)
        a_src = alpha.at(t.src, pts)
        a_dst = alpha.at(t.dst, mapped)
        gF = alpha.target.cocycle(t.src, t.dst)(pts)
        gE = alpha.source.cocycle(t.src, t.dst)(pts)
        pred = gF @ a_src @ np.linalg.inv(gE)
        worst = max(worst, float(np.max(np.abs(a_dst - pred))))
    return worst


def connection_compatibility_residual(B: Bundle, n: int = 40, seed: int = 0) -> float:
    """omega_B pulled back through the transition vs g omega_A g^{-1} - (dg) g^{-1}."""
    from .forms import overlap_samples, pullback_components
    M = B.manifold
    worst = 0.0
    for t in M.transitions:
        pts = overlap_samples(M, t, n, seed)
        g_fn = B.cocycle(t.src, t.dst)
        g = g_fn(pts)
        ginv = np.linalg.inv(g)
        pulled = pullback_components(B.connection.evals[t.dst], t.apply,
                                     t.jacobian_at, pts, 1, M.chart(t.src).dim)
        direct = B.connection.at(t.src, pts)
        for k in range(M.dim):
            mask = 1 << k
            om_a = direct.get(mask, np.zeros((len(pts), B.rank, B.rank)))
            dg = _dg_fd(g_fn, pts, k)
            pred = g @ om_a @ ginv - dg @ ginv
            got = pulled.get(mask, np.zeros_like(pred))
            worst = max(worst, float(np.max(np.abs(got - pred))))
    return worst


def metric_compatibility_residual(B: Bundle, n: int = 40, seed: int = 0) -> float:
    """Residual of dh = omega^dagger h + h omega at random points.

    Zero (to FD accuracy) exactly when parallel transport preserves the
    metric, i.e. d<s,t> = <Ds,t> + <s,Dt> for all section pairs.
    """
    rng = np.random.default_rng(seed)
    M = B.manifold
    worst = 0.0
    for c in M.charts:
        lo = np.array([b[0] for b in c.box])
        hi = np.array([b[1] for b in c.box])
        pts = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo),
                          size=(n, c.dim))
        h = B.metric.component(c.name, 0)
        om = B.connection.at(c.name, pts)
        hv = h(pts)
        for k in range(c.dim):
            mask = 1 << k
            dh = _dg_fd(h, pts, k)
            w = om.get(mask, np.zeros_like(hv))
            res = dh - np.conj(np.swapaxes(w, -1, -2)) @ hv - hv @ w
            worst = max(worst, float(np.max(np.abs(res))))
    return worst


# ---------------------------------------------------------------------------
# atomicity diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomicityReport:
    """Shrinking-annulus integrals of |da^I| / |a|^{|I|} per order."""

    orders: tuple[int, ...]
    radii: tuple[float, ...]
    integrals: Mapping[int, tuple[float, ...]]
    trends: Mapping[int, str]            # bounded | divergent | inconclusive

    def consistent_with_atomic(self) -> bool:
        return all(t == "bounded" for t in self.trends.values())


def atomicity_diagnostic(alpha: BundleMap, orders: Sequence[int] = (1,),
                         levels: int = 6, n_theta: int = 96,
                         n_r: int = 24) -> AtomicityReport:
    """Estimate local integrability of |da^I| / |a|^{|I|} near each declared zero.

    For each declared singular point, integrates over the dyadic annuli
    rho 2^{-k-1} <= r <= rho 2^{-k}; a geometrically decreasing annulus
    sequence is consistent with an L1loc quotient (the series of annulus
    contributions converges), while growth flags divergence.  Heuristic
    evidence, not a proof.
    """
    if alpha.source.rank != 1:
        raise UsageError("atomicity diagnostic covers the section case rank_E = 1")
    if not alpha.singularities:
        return AtomicityReport(tuple(orders), (), {o: () for o in orders},
                               {o: "bounded" for o in orders})

    rows: dict[int, list[float]] = {o: [] for o in orders}
    radii: list[float] = []
    for k in range(levels):
        total = {o: 0.0 for o in orders}
        for s in alpha.singularities:
            r_hi = s.radius * 0.5 ** k
            r_lo = r_hi * 0.5
            step = max(r_lo / 64.0, 1e-9)
            x, w = np.polynomial.legendre.leggauss(n_r)
            r = 0.5 * (r_hi + r_lo) + 0.5 * (r_hi - r_lo) * x
            wr = 0.5 * (r_hi - r_lo) * w
            th = 2.0 * np.pi * np.arange(n_theta) / n_theta
            wt = 2.0 * np.pi / n_theta
            cx, cy = s.coords
            xx = cx + np.outer(r, np.cos(th))
            yy = cy + np.outer(r, np.sin(th))
            pts = np.stack([xx.reshape(-1), yy.reshape(-1)], axis=-1)
            a = alpha.at(s.chart, pts)[:, :, 0]           # (N, rank_F)
            mag = np.linalg.norm(a, axis=1)
            da = np.stack([_da_component(alpha, s.chart, pts, axis, step)
                           for axis in range(2)], axis=1)  # (N, 2, rank_F)
            for o in orders:
                dens = _wedge_density(da, o)
                with np.errstate(over="ignore", divide="ignore",
                                 invalid="ignore"):
                    quot = dens / np.maximum(mag, 1e-300) ** o
                quot = np.nan_to_num(quot, nan=0.0, posinf=np.inf)
                quot = quot.reshape(len(r), n_theta)
                total[o] += float(np.sum(quot * (r * wr)[:, None] * wt))
        radii.append(r_hi)
        for o in orders:
            rows[o].append(total[o])

    # Classify on the longest finite prefix; an overflowing annulus
    # integral is itself divergence evidence (flat zeros do this long
    # before the radii reach machine scale).  A summable octave series
    # needs geometrically decaying increments, so the median ratio is
    # the decision statistic.
    trends = {}
    for o in orders:
        finite: list[float] = []
        overflowed = False
        for v in rows[o]:
            if not math.isfinite(v) or v > 1e100:
                overflowed = True
                break
            finite.append(v)
        ratios = [finite[i + 1] / finite[i] for i in range(len(finite) - 1)
                  if finite[i] > 1e-280 and finite[i + 1] > 1e-280]
        if overflowed:
            trends[o] = "divergent"
        elif not ratios:
            trends[o] = "inconclusive" if any(v > 0 for v in finite) else "bounded"
        else:
            med = sorted(ratios)[len(ratios) // 2]
            if med <= 0.8:
                trends[o] = "bounded"
            elif med >= 0.95:
                trends[o] = "divergent"
            else:
                trends[o] = "inconclusive"
    return AtomicityReport(tuple(orders), tuple(radii),
                           {o: tuple(rows[o]) for o in orders}, trends)


def _da_component(alpha: BundleMap, chart: str, pts: np.ndarray, axis: int,
                  step: float) -> np.ndarray:
    e = np.zeros(2)
    e[axis] = step
    f = lambda p: alpha.at(chart, p)[:, :, 0]
    return (-f(pts + 2 * e) + 8.0 * f(pts + e)
            - 8.0 * f(pts - e) + f(pts - 2 * e)) / (12.0 * step)


def _wedge_density(da: np.ndarray, order: int) -> np.ndarray:
    """Euclidean norm over all multi-indices of |da^I|, |I| = order, in 2D."""
    from itertools import combinations
    n, d, rank = da.shape
    if order == 1:
        return np.sqrt(np.sum(np.abs(da) ** 2, axis=(1, 2)))
    if order == 2:
        total = np.zeros(n)
        for i, j in combinations(range(rank), 2):
            det = da[:, 0, i] * da[:, 1, j] - da[:, 1, i] * da[:, 0, j]
            total += np.abs(det) ** 2
        return np.sqrt(total)
    raise UsageError("diagnostic orders above 2 exceed a 2D base")
