"""Currents as pairings, divisors of sections, and transgression families.

A current is represented operationally: the only thing the desk scale
ever observes is its pairing with a battery of smooth test forms.  The
boundary convention is fixed by graded integration by parts,

    <dS, psi> = (-1)^(q+1) <S, d psi>,   q = degree of the representing form,

so that on smooth forms the boundary pairs like the exterior derivative
(d(u ^ psi) = du ^ psi + (-1)^q u ^ d psi plus Stokes on a closed base).

The blow-up forms (da/a pieces) are integrable but unbounded; every
pairing with one runs the graded polar quadrature around the declared
points, and the smooth factor keeps finite differences well away from
the singular nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .battery import TestForm, away_battery, test_battery
from .bundles import (ApproximationMode, Bundle, BundleMap, curvature,
                      map_min_singular_value, pushforward_connection,
                      smoothed_beta)
from .conventions import CHERN_FACTOR, REALIFICATION_SIGN
from .errors import DegeneracyError, UndeclaredSingularityError, UsageError
from .fields import FieldForm, MatrixFieldForm
from .invariants import eval_chern, eval_pfaffian
from .meshes import Manifold, SingularPoint
from .series import parse_polynomial

__all__ = [
    "Current",
    "TransgressionResult",
    "CharacteristicLimitReport",
    "smooth_form_current",
    "l1loc_current",
    "weighted_points_current",
    "pair_current",
    "current_boundary",
    "divisor_from_section",
    "section_scalar",
    "section_sigma",
    "spherical_potential",
    "transgression_family",
    "characteristic_current_limit",
    "local_degree",
]

PointWeight = tuple[str, tuple[float, ...], float]


@dataclass(frozen=True)
class Current:
    """A functional on test forms, with enough structure to print."""

    manifold: Manifold
    kind: str           # smooth_form | l1loc_form | weighted_points |
                        # zero_section | boundary | limit
    codegree: int
    form: FieldForm | None = None
    points: tuple[PointWeight, ...] = ()
    tags: tuple[SingularPoint, ...] = ()
    custom_pair: Callable[[FieldForm], complex] | None = None
    name: str = ""

    def total_mass(self) -> float:
        if self.kind != "weighted_points":
            raise UsageError("total_mass is defined for weighted point currents")
        return float(sum(abs(w) for _, _, w in self.points))


def smooth_form_current(form: FieldForm, name: str = "") -> Current:
    return Current(form.manifold, "smooth_form", form.degree, form=form,
                   name=name)


def l1loc_current(form: FieldForm, tags: Sequence[SingularPoint],
                  name: str = "") -> Current:
    return Current(form.manifold, "l1loc_form", form.degree, form=form,
                   tags=tuple(tags), name=name)


def weighted_points_current(M: Manifold, points: Sequence[PointWeight],
                            name: str = "") -> Current:
    pts = tuple((c, tuple(float(v) for v in xy), float(w))
                for c, xy, w in points)
    return Current(M, "weighted_points", M.dim, points=pts, name=name)


def pair_current(S: Current, psi: FieldForm):
    """<S, psi>; degree(psi) + codegree(S) must equal dim."""
    M = S.manifold
    if psi.degree + S.codegree != M.dim:
        raise UsageError(
            f"test form degree {psi.degree} does not complement codegree "
            f"{S.codegree} in dimension {M.dim}")
    if S.custom_pair is not None:
        return S.custom_pair(psi)
    if S.kind == "weighted_points":
        total = 0.0
        for chart, coords, w in S.points:
            val = psi.at(chart, np.array([coords]))
            total = total + w * val.get(0, np.zeros(1))[0]
        return total
    if S.kind == "smooth_form":
        return S.form.wedge(psi.on(S.form.manifold)).integrate()
    if S.kind == "l1loc_form":
        Mq = M.with_singular_points(tuple(S.tags))
        return S.form.on(Mq).wedge(psi.on(Mq)).integrate()
    raise UsageError(f"current kind {S.kind!r} has no pairing rule")


def current_boundary(S: Current) -> Current:
    """The current d S, paired as (-1)^(q+1) <S, d psi>."""
    if S.kind not in ("smooth_form", "l1loc_form", "boundary"):
        raise UsageError(f"boundary of a {S.kind} current is not represented")
    q = S.codegree
    sign = (-1.0) ** (q + 1)

    def pair(psi: FieldForm):
        return sign * pair_current(S, psi.d())

    return Current(S.manifold, "boundary", q + 1, custom_pair=pair,
                   name=f"d({S.name})" if S.name else "boundary")


# ---------------------------------------------------------------------------
# divisors of sections
# ---------------------------------------------------------------------------

def section_scalar(alpha: BundleMap, chart: str) -> Callable[[np.ndarray], np.ndarray]:
    """The complex scalar representative of a section map.

    Complex line target: the single entry.  Oriented real rank-2
    target: v1 + sign * i v2 with the frozen realification sign, so the
    winding of the scalar is the geometric index of the real section.
    """
    F = alpha.target
    if F.field == "complex" and F.rank == 1:
        def f(pts):
            return alpha.at(chart, pts)[:, 0, 0]
        return f
    if F.field == "real" and F.rank == 2 and F.oriented:
        def f(pts):
            a = alpha.at(chart, pts)
            return a[:, 0, 0] + REALIFICATION_SIGN * 1j * a[:, 1, 0]
        return f
    raise UsageError("sections live in a complex line or an oriented real 2-plane")


def local_degree(alpha: BundleMap, sing: "SingularPoint | object",
                 n: int = 720) -> float:
    """Winding of the section scalar on the circle of half the declared radius."""
    chart = sing.chart
    center = np.asarray(sing.coords, dtype=float)
    radius = 0.5 * sing.radius
    th = 2.0 * np.pi * np.arange(n + 1) / n
    pts = center[None, :] + radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    vals = section_scalar(alpha, chart)(pts)
    if np.min(np.abs(vals)) < 1e-13:
        raise DegeneracyError("section vanishes on the winding circle")
    inc = np.angle(vals[1:] / vals[:-1])
    return float(np.sum(inc) / (2.0 * np.pi))


def _scan_for_zeros(alpha: BundleMap, floor: float) -> None:
    M = alpha.manifold
    for c in M.charts:
        pts = c.points()
        w = M.weight_fn(c.name)(pts)
        keep = (w > 1e-9) & alpha.outside_mask(c.name, pts)
        if not np.any(keep):
            continue
        sv = map_min_singular_value(alpha, c.name, pts[keep])
        if np.min(sv) <= floor:
            i = int(np.argmin(sv))
            bad = pts[keep][i]
            raise UndeclaredSingularityError(
                f"section is numerically degenerate at {bad} in chart "
                f"{c.name!r} outside every declared radius")


def divisor_from_section(alpha: BundleMap, kernel: str = "angle2d", *,
                         floor: float = 1e-6) -> Current:
    """Div(alpha) as a weighted point current, weights = local winding degrees.

    The degree at a declared zero is the pairing of d(a* theta) against
    a bump at the zero, which for the 2D angle kernel collapses to the
    winding of the section scalar around the zero.
    """
    if kernel != "angle2d":
        raise UsageError("only the 2D normalized angle kernel is implemented")
    if alpha.source.rank != 1:
        raise UsageError("divisors are taken for sections (rank-1 source)")
    if not alpha.atomic_declared:
        raise UsageError("divisor needs atomic_declared on the section")
    _scan_for_zeros(alpha, floor)
    pts: list[PointWeight] = []
    for s in alpha.singularities:
        w = local_degree(alpha, s)
        if abs(w - round(w)) > 0.1:
            raise DegeneracyError(
                f"non-integer local degree {w:.3f} at {s.coords} in {s.chart!r}")
        if round(w) != 0:
            pts.append((s.chart, tuple(s.coords), float(round(w))))
    return weighted_points_current(alpha.manifold, pts,
                                   name=f"Div({alpha.name})")


# ---------------------------------------------------------------------------
# spherical potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransgressionResult:
    T: FieldForm
    residual: float
    mode: str
    s_values: tuple[float, ...] = ()
    details: Mapping[str, float] = field(default_factory=dict)


def _connection_scalar(B: Bundle, chart: str) -> Callable[[np.ndarray], dict]:
    """omega as a complex scalar 1-form evaluator (line or oriented 2-plane)."""
    if B.rank == 1:
        def ev(pts):
            return {m: v[:, 0, 0] for m, v in B.connection.at(chart, pts).items()}
        return ev
    if B.rank == 2 and B.field == "real" and B.oriented:
        def ev(pts):
            out = {}
            for m, v in B.connection.at(chart, pts).items():
                out[m] = v[:, 0, 0] - REALIFICATION_SIGN * 1j * v[:, 0, 1]
            return out
        return ev
    raise UsageError("no scalar model for this bundle")


def section_sigma(alpha: BundleMap, step_scale: float = 1e-3) -> FieldForm:
    """sigma = da/a + omega_F - omega_E as a scalar 1-form field.

    Smooth away from the zeros, blows up like 1/r at a simple zero but
    stays integrable; evaluation uses centered differences with a step
    shrunk near the declared zeros so the quotient keeps its accuracy.
    """
    M = alpha.manifold
    E, F = alpha.source, alpha.target

    def make(chart):
        a_fn = section_scalar(alpha, chart)
        omF = _connection_scalar(F, chart)
        omE = _connection_scalar(E, chart)
        sings = [s for s in alpha.singularities if s.chart == chart]

        def ev(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            a = a_fn(pts)
            step = np.full(len(pts), 5e-4)
            for s in sings:
                d = np.linalg.norm(pts - np.asarray(s.coords)[None, :], axis=1)
                step = np.minimum(step, np.maximum(d / 64.0, 1e-9))
            vals_F, vals_E = omF(pts), omE(pts)
            out = {}
            for axis in range(M.dim):
                e = np.zeros(M.dim)
                e[axis] = 1.0
                ap = a_fn(pts + step[:, None] * e)
                am = a_fn(pts - step[:, None] * e)
                da = (ap - am) / (2.0 * step)
                with np.errstate(divide="ignore", invalid="ignore"):
                    quot = da / a
                mask = 1 << axis
                term = quot
                if mask in vals_F:
                    term = term + vals_F[mask]
                if mask in vals_E:
                    term = term - vals_E[mask]
                out[mask] = term
            return out
        return ev

    return FieldForm(M, 1, {c.name: make(c.name) for c in M.charts})


def spherical_potential(alpha: BundleMap, phi: str = "c1", *,
                        seed: int = 0) -> TransgressionResult:
    """sigma with  phi(Omega_F) - phi(Omega_E) - Div(alpha) = d sigma, weakly.

    ``phi`` is "c1" (complex line target) or "euler" (oriented real
    2-plane target); both reduce to the same scalar model.  The source
    term drops out for the usual flat-source sections but carries the
    Clifford-map case where both endpoints are curved lines.  The stored
    residual is the worst battery defect of the identity, with the
    boundary taken weakly through the graded integration-by-parts sign.
    """
    E, F = alpha.source, alpha.target
    if phi == "c1":
        f_form = eval_chern(curvature(F), 1)
        e_form = eval_chern(curvature(E), 1)
    elif phi == "euler":
        f_form = eval_pfaffian(curvature(F))
        e_form = eval_pfaffian(curvature(E))
    else:
        raise UsageError("phi must be 'c1' or 'euler' here")
    sigma = section_sigma(alpha) * CHERN_FACTOR
    tags = tuple(alpha.singular_points())
    div = divisor_from_section(alpha)
    sigma_cur = l1loc_current(sigma, tags, name="sigma")
    f_cur = smooth_form_current(f_form, name="phi(Omega_F)")
    e_cur = smooth_form_current(e_form, name="phi(Omega_E)")

    battery = test_battery(alpha.manifold, 0, seed=seed, sigma=tags)
    worst = 0.0
    details = {}
    for tf in battery:
        lhs = pair_current(f_cur, tf.form) - pair_current(e_cur, tf.form)
        mid = pair_current(div, tf.form)
        rhs = pair_current(current_boundary(sigma_cur), tf.form)
        r = abs(lhs - mid - rhs)
        details[tf.form_id] = float(r)
        worst = max(worst, float(r))
    return TransgressionResult(T=sigma, residual=worst, mode="exact",
                               details=details)


# ---------------------------------------------------------------------------
# transgression along the straight-line path
# ---------------------------------------------------------------------------

def transgression_family(phi: str, D_from: Bundle, D_to: Bundle, *,
                         path: str = "linear", nodes: int = 8, seed: int = 0,
                         tags: Sequence[SingularPoint] = ()
                         ) -> TransgressionResult:
    """T with dT = phi(Omega_to) - phi(Omega_from), straight-line path.

    Abelian case (line bundles / oriented 2-planes through the scalar
    model): T = sum_k c_k (i/2pi)^k k int_0^1 eta ^ Omega_t^{k-1} dt
    with eta = omega_to - omega_from; Gauss-Legendre in t is exact for
    polynomial degree below the node count.  All nonconstant terms of
    ``phi`` must share one power, since the transgression pieces of
    different powers have different degrees.
    """
    if path != "linear":
        raise UsageError("only the straight-line connection path is implemented")
    if D_from.manifold != D_to.manifold:
        raise UsageError("connections on different bases")
    M = D_from.manifold
    coeffs = parse_polynomial(phi)
    powers = {exps[0] for exps in coeffs.terms if exps[0] > 0}
    if len(powers) > 1:
        raise UsageError("transgress monomial invariants separately; "
                         f"{phi!r} mixes powers {sorted(powers)}")
    # scalar models
    eta = _scalar_from(D_to.connection) - _scalar_from(D_from.connection)
    Om0 = _scalar_from(curvature(D_from))
    Om1 = _scalar_from(curvature(D_to))
    dOm = Om1 - Om0
    x, w = np.polynomial.legendre.leggauss(nodes)
    t_nodes = 0.5 * (x + 1.0)
    t_weights = 0.5 * w

    T: FieldForm | None = None
    for exps, c in coeffs.terms.items():
        k = exps[0]
        if k == 0:
            continue
        piece: FieldForm | None = None
        for t, wt in zip(t_nodes, t_weights):
            Om_t = Om0 + dOm * t
            pw = eta
            for _ in range(k - 1):
                pw = pw.wedge(Om_t)
            term = pw * (wt * k)
            piece = term if piece is None else piece + term
        piece = piece * (float(c) * CHERN_FACTOR ** k)
        T = piece if T is None else T + piece
    if T is None:
        T = _scalar_from(D_from.connection) * 0.0

    # residual of d T = phi(Omega_to) - phi(Omega_from) against the battery
    worst = 0.0
    details = {}
    Mq = M.with_singular_points(tuple(tags)) if tags else M
    for exps, c in coeffs.terms.items():
        k = exps[0]
        if k == 0 or 2 * k > M.dim:
            continue
        for tf in test_battery(M, M.dim - 2 * k, seed=seed, sigma=tuple(tags)):
            lhs = _pair_forms(T, tf.form.d(), Mq)          # <T, d psi>, sign +1
            delta = _power_diff(Om1, Om0, k) * (float(c) * CHERN_FACTOR ** k)
            rhs = _pair_forms(delta, tf.form, Mq)
            r = abs(lhs - rhs)
            details[f"u^{k}:{tf.form_id}"] = float(r)
            worst = max(worst, float(r))
    return TransgressionResult(T=T, residual=worst, mode="linear-path",
                               details=details)


def _scalar_from(A: MatrixFieldForm) -> FieldForm:
    if A.value_shape == (1, 1):
        evals = {}
        for name, f in A.evals.items():
            evals[name] = lambda pts, f=f: {m: v[:, 0, 0] for m, v in f(pts).items()}
        return FieldForm(A.manifold, A.degree, evals)
    if A.value_shape == (2, 2):
        evals = {}
        for name, f in A.evals.items():
            def ev(pts, f=f):
                return {m: v[:, 0, 0] - REALIFICATION_SIGN * 1j * v[:, 0, 1]
                        for m, v in f(pts).items()}
            evals[name] = ev
        return FieldForm(A.manifold, A.degree, evals)
    raise UsageError("transgression scalar model needs rank 1 or oriented rank 2")


def _power_diff(Om1: FieldForm, Om0: FieldForm, k: int) -> FieldForm:
    def wedge_power(f, n):
        out = f
        for _ in range(n - 1):
            out = out.wedge(f)
        return out
    return wedge_power(Om1, k) - wedge_power(Om0, k)


def _pair_forms(a: FieldForm, b: FieldForm, M: Manifold):
    if a.degree + b.degree != M.dim:
        return 0.0
    return a.on(M).wedge(b.on(M)).integrate()


# ---------------------------------------------------------------------------
# Definition A: the characteristic current as a limit
# ---------------------------------------------------------------------------

def _extrapolate(s_values: Sequence[float], pairings: Sequence[complex]) -> complex:
    """Richardson value at s = 0 without assuming a convergence rate.

    The existence of the limit is guaranteed; its rate is not, and the
    boundary-layer analysis puts it anywhere between s^(1/2) and
    s log s depending on mode and test form.  Aitken's delta-squared on
    the three finest values is rate-free Richardson; with fewer values
    fall back to linear-in-s, then to the finest pairing itself.
    """
    if len(pairings) >= 3:
        p1, p2, p3 = pairings[-3], pairings[-2], pairings[-1]
        den = (p3 - p2) - (p2 - p1)
        if abs(den) > 1e-14 * max(1.0, abs(p3)):
            return p3 - (p3 - p2) ** 2 / den
        return p3
    if len(pairings) == 2:
        s1, s2 = s_values[-2], s_values[-1]
        return (s1 * pairings[-1] - s2 * pairings[-2]) / (s1 - s2)
    return pairings[-1]


@dataclass(frozen=True)
class PairingRow:
    form_id: str
    degree: int
    away_from_sigma: bool
    pairings: tuple[complex, ...]          # one per s, coarsest first
    zero_route: complex                    # <phi(transplanted 0-curvature), psi>
    extrapolated: complex                  # Richardson on the two finest s
    cauchy_deltas: tuple[float, ...]

    @property
    def s_limit_defect(self) -> float:
        return self.cauchy_deltas[-1] if self.cauchy_deltas else 0.0


@dataclass(frozen=True)
class CharacteristicLimitReport:
    phi: str
    mode: str
    s_values: tuple[float, ...]
    rows: tuple[PairingRow, ...]
    divergent: bool
    support_ok: bool
    support_tol: float

    def row(self, form_id: str) -> PairingRow:
        for r in self.rows:
            if r.form_id == form_id:
                return r
        raise KeyError(form_id)


def characteristic_current_limit(phi: str, alpha: BundleMap,
                                 mode: ApproximationMode,
                                 s_schedule: Sequence[float], *,
                                 seed: int = 0, support_tol: float = 1e-3,
                                 include_away: bool = True
                                 ) -> tuple[Current, CharacteristicLimitReport]:
    """Pairings of phi of the transplanted curvature along s -> 0.

    Desk scale runs the scalar model: the section's target is a complex
    line (or oriented 2-plane), the source the trivial flat line.  For
    each s the transplanted connection is formed with the smoothed
    beta_s, its curvature taken pointwise, and the battery pairings
    recorded; the finest values are extrapolated to s = 0 (see
    _extrapolate) for the singular part S_phi = lim phi(Omega_s) -
    phi(Omega_0).
    """
    s_values = tuple(float(s) for s in s_schedule)
    if any(b >= a for a, b in zip(s_values, s_values[1:])) or not s_values:
        raise UsageError("s_schedule must be strictly decreasing and nonempty")
    if alpha.source.rank != 1:
        raise UsageError("the numerical limit covers the section case")
    coeffs = parse_polynomial(phi)
    M = alpha.manifold
    tags = tuple(alpha.singular_points())
    Mq = M.with_singular_points(tags) if tags else M

    degrees = sorted({M.dim - 2 * exps[0] for exps in coeffs.terms
                      if exps[0] > 0 and 2 * exps[0] <= M.dim})
    if not degrees:
        raise UsageError("phi has no term pairable on this base")

    forms: list[TestForm] = []
    for deg in degrees:
        forms.extend(test_battery(M, deg, seed=seed, sigma=tags))
        if include_away and tags:
            forms.extend(away_battery(M, deg, sigma=tags))

    # curvature scalars per s, plus the s = 0 transplant (smooth route)
    def phi_pair(Om_scalar: FieldForm, psi: FieldForm) -> complex:
        total = 0.0 + 0.0j
        for exps, c in coeffs.terms.items():
            k = exps[0]
            if k == 0 or 2 * k + psi.degree != M.dim:
                continue
            pw = Om_scalar
            for _ in range(k - 1):
                pw = pw.wedge(Om_scalar)
            total += float(c) * CHERN_FACTOR ** k * _pair_forms(pw, psi, Mq)
        return total

    scalars = []
    for s in s_values:
        beta_s = smoothed_beta(alpha, mode, s)
        Bs = pushforward_connection(alpha, beta_s)
        scalars.append(_scalar_from(curvature(Bs)))
    zero_scalar = _scalar_from(curvature(alpha.source))

    rows = []
    divergent = False
    support_ok = True
    for tf in forms:
        pairings = tuple(phi_pair(om, tf.form) for om in scalars)
        zero_route = phi_pair(zero_scalar, tf.form)
        extrap = _extrapolate(s_values, pairings)
        deltas = tuple(abs(b - a) for a, b in zip(pairings, pairings[1:]))
        scale = max(1.0, max(abs(p) for p in pairings))
        if len(deltas) >= 2 and deltas[-1] > 1.5 * deltas[0] \
                and deltas[-1] > 1e-8 * scale:
            divergent = True
        S_phi = extrap - zero_route
        if tf.away_from_sigma and abs(S_phi) > support_tol * scale:
            support_ok = False
        rows.append(PairingRow(tf.form_id, tf.form.degree, tf.away_from_sigma,
                               pairings, zero_route, extrap, deltas))

    report = CharacteristicLimitReport(phi, mode.name, s_values, tuple(rows),
                                       divergent, support_ok, support_tol)

    def limit_pair(psi: FieldForm) -> complex:
        vals = tuple(phi_pair(om, psi) for om in scalars[-3:])
        return _extrapolate(s_values[-3:], vals)

    cur = Current(M, "limit", M.dim - max(degrees), custom_pair=limit_pair,
                  name=f"phi((D))[{phi}]")
    return cur, report
