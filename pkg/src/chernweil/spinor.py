"""Spinor line-bundle pairs over surfaces and the Riemann-Roch check.

Rank-2 only: an oriented real 2-plane bundle V with metric connection
carries a rotation complex structure, making V a complex line L, and
the half-spin bundles are honest line bundles S+ = L^(-1/2),
S- = L^(+1/2) with S- = S+ (x) L.  Clifford multiplication by a section
of V is then multiplication by its complex scalar, a line-bundle map
S+ -> S-, and the index identity degenerates to the Poincare-Lelong
machinery of the currents module.  Nothing here is a general spin
implementation; the rank >= 4 Clifford algebra is out of scope.

The square root of the cocycle is where the spin condition bites: it
exists for the standard presets exactly when the line degree is even,
and the construction refuses otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .bundles import Bundle, BundleMap, DeclaredSingularity, curvature, \
    flat_bundle, section_map
from .conventions import CHERN_FACTOR, REALIFICATION_SIGN, RR_DIVISOR_SIGN
from .currents import (current_boundary, divisor_from_section, l1loc_current,
                       pair_current, section_scalar, section_sigma,
                       smooth_form_current)
from .errors import SpinStructureError, UsageError
from .fields import FieldForm, MatrixFieldForm, constant_field
from .invariants import eval_chern
from .battery import test_battery

__all__ = [
    "SpinorPair",
    "build_spinor_pair",
    "reverse_orientation",
    "clifford_map",
    "polar_vector_field",
    "constant_vector_field",
    "GrrReport",
    "grr_check",
]


@dataclass(frozen=True)
class SpinorPair:
    """V with its line model L and the half-spin lines S+- = L^(-+1/2)."""

    vector: Bundle          # oriented real rank 2, orthonormal frames
    line: Bundle            # complex line model of vector
    s_plus: Bundle
    s_minus: Bundle
    half_degree: int        # degree of s_plus
    line_degree: int        # degree of line

    def curvature_identity_residual(self, n: int = 40, seed: int = 0) -> float:
        """sup of Omega_{S-} - Omega_{S+} - Omega_L at random points."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        Om = (curvature(self.s_minus) - curvature(self.s_plus),
              curvature(self.line))
        for c in self.vector.manifold.charts:
            pts = rng.uniform(-1.0, 1.0, size=(n, 2)) + 0.1
            a = Om[0].at(c.name, pts)
            b = Om[1].at(c.name, pts)
            for m in set(a) | set(b):
                va = a.get(m, 0.0)
                vb = b.get(m, np.zeros((n, 1, 1)))
                worst = max(worst, float(np.max(np.abs(va - vb))))
        return worst


def _scalar_line_model(V: Bundle) -> Bundle:
    """The complex line (V, J) in the frozen realification convention."""
    M = V.manifold
    sgn = REALIFICATION_SIGN

    def wrap(ev):
        def f(pts):
            out = {}
            for m, v in ev(pts).items():
                out[m] = (v[:, 0, 0] - sgn * 1j * v[:, 0, 1])[:, None, None]
            return out
        return f

    conn = MatrixFieldForm(M, 1, {c.name: wrap(V.connection.evals[c.name])
                                  for c in M.charts}, (1, 1))
    curv_src = curvature(V)
    curv = MatrixFieldForm(M, 2, {c.name: wrap(curv_src.evals[c.name])
                                  for c in M.charts}, (1, 1))
    cocycles = {}
    for key, g in V.cocycles.items():
        def phase(pts, g=g):
            m = np.asarray(g(np.atleast_2d(pts)))
            return (m[:, 0, 0] + 1j * m[:, 0, 1])[:, None, None]
        cocycles[key] = phase
    return Bundle(M, 1, "complex", conn, constant_field(M, np.eye(1, dtype=complex)),
                  cocycles, name=f"line({V.name})", curvature_exact=curv)


def _half_power_bundle(L: Bundle, power: int, denom_degree: int) -> Bundle:
    """L^(power/2) for the two-chart sphere presets, unit frames.

    The cocycle of L is a pure phase (conj(z)/|z|)^degree; its canonical
    square root to the given power is (conj(z)/|z|)^(degree*power/2),
    defined because the exponent is an integer.
    """
    M = L.manifold
    exponent = denom_degree * power
    if exponent % 2 != 0:
        raise SpinStructureError(
            f"no square root: line degree {denom_degree} is odd")
    exponent //= 2

    def half(ev, power=power):
        def f(pts):
            return {m: 0.5 * power * v for m, v in ev(pts).items()}
        return f

    conn = MatrixFieldForm(M, 1, {c.name: half(L.connection.evals[c.name])
                                  for c in M.charts}, (1, 1))
    curv = MatrixFieldForm(M, 2, {c.name: half(curvature(L).evals[c.name])
                                  for c in M.charts}, (1, 1))

    def root(pts):
        pts = np.atleast_2d(pts)
        z = pts[:, 0] + 1j * pts[:, 1]
        return ((np.conj(z) / np.abs(z)) ** exponent)[:, None, None]

    cocycles = {key: root for key in L.cocycles}
    return Bundle(M, 1, "complex", conn,
                  constant_field(M, np.eye(1, dtype=complex)), cocycles,
                  name=f"{L.name}^({power}/2)", curvature_exact=curv)


def _detected_degree(L: Bundle) -> int:
    val = eval_chern(curvature(L), 1).integrate()
    k = float(np.real(val))
    if abs(k - round(k)) > 1e-3:
        raise UsageError(f"line model degree {k:.4f} is not an integer; "
                         "expected a standard preset")
    return int(round(k))


def build_spinor_pair(V: Bundle, half_degree_choice: int) -> SpinorPair:
    """Half-spin line bundles of an oriented plane bundle over a preset base.

    ``half_degree_choice`` is the degree of S+ and must equal minus half
    the degree of the line model (on the round-sphere preset, -1); an
    odd line degree admits no square root and raises the spin error.
    """
    if V.rank != 2 or V.field != "real" or not V.oriented:
        raise UsageError("spinor pairs take an oriented real rank-2 bundle")
    M = V.manifold
    L = _scalar_line_model(V)
    if not M.transitions:
        # flat torus style base: everything trivial
        k = 0
        if half_degree_choice != 0:
            raise SpinStructureError(
                "flat base: the only half degree available is 0")
        probe = np.array([[0.3, 0.4]])
        for c in M.charts:
            for v in V.connection.at(c.name, probe).values():
                if np.max(np.abs(v)) > 1e-12:
                    raise UsageError("spinor pairs over a torus need the "
                                     "flat preset connection")
        sp = flat_bundle(M, 1, "complex", name="S+")
        sm = flat_bundle(M, 1, "complex", name="S-")
        return SpinorPair(V, L, sp, sm, 0, 0)

    if set(M.chart_names()) != {"north", "south"}:
        raise UsageError("spinor pairs are built over the standard presets")
    k = _detected_degree(L)
    if k % 2 != 0:
        raise SpinStructureError(f"no square root: line degree {k} is odd")
    if 2 * half_degree_choice != -k:
        raise SpinStructureError(
            f"half degree {half_degree_choice} does not square to the "
            f"inverse of the degree-{k} line")
    sp = _half_power_bundle(L, -1, k)
    sm = _half_power_bundle(L, +1, k)
    _validate_root(V, sp, sm)
    return SpinorPair(V, L, sp, sm, half_degree_choice, k)


def _validate_root(V: Bundle, sp: Bundle, sm: Bundle, n: int = 24) -> None:
    """g_{S-} / g_{S+} must reproduce the phase of V's cocycle at samples."""
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.3, 1.2, size=(n, 2))
    for key in V.cocycles:
        g = np.asarray(V.cocycle(*key)(pts))
        phase = g[:, 0, 0] + 1j * g[:, 0, 1]
        gp = sp.cocycle(*key)(pts)[:, 0, 0]
        gm = sm.cocycle(*key)(pts)[:, 0, 0]
        if np.max(np.abs(gm / gp - phase)) > 1e-10:
            raise SpinStructureError(
                "half-degree cocycles do not assemble the plane bundle's "
                "rotation phase; the connection is not a supported preset")


def reverse_orientation(P: SpinorPair) -> SpinorPair:
    """Opposite orientation: the complex structure conjugates, S+- swap."""
    V = P.vector
    M = V.manifold
    S = np.array([[0.0, 1.0], [1.0, 0.0]])

    def swap(ev):
        def f(pts):
            return {m: S @ v @ S for m, v in ev(pts).items()}
        return f

    conn = MatrixFieldForm(M, 1, {c.name: swap(V.connection.evals[c.name])
                                  for c in M.charts}, (2, 2))
    curv = MatrixFieldForm(M, 2, {c.name: swap(curvature(V).evals[c.name])
                                  for c in M.charts}, (2, 2))
    cocycles = {key: (lambda pts, g=g: S @ np.asarray(g(np.atleast_2d(pts))) @ S)
                for key, g in V.cocycles.items()}
    Vr = Bundle(M, 2, "real", conn, V.metric, cocycles, oriented=True,
                name=f"rev({V.name})", curvature_exact=curv)
    return SpinorPair(Vr, _scalar_line_model(Vr), P.s_minus, P.s_plus,
                      -P.half_degree, -P.line_degree)


# ---------------------------------------------------------------------------
# Clifford multiplication and section presets
# ---------------------------------------------------------------------------

def clifford_map(P: SpinorPair, alpha: BundleMap) -> BundleMap:
    """Multiplication by a section of V as a line map S+ -> S-.

    In unit frames the matrix is the complex scalar of the section; the
    quotient cocycle g_{S-}/g_{S+} is exactly the rotation phase, so
    equivariance is inherited from the section itself.
    """
    tgt = alpha.target
    if (tgt.manifold != P.vector.manifold or tgt.rank != 2
            or tgt.field != "real" or not tgt.oriented):
        raise UsageError("the section must take values in the pair's plane bundle")
    matrices = {}
    for c in alpha.manifold.charts:
        f = section_scalar(alpha, c.name)
        matrices[c.name] = (lambda pts, f=f:
                            np.asarray(f(np.atleast_2d(pts)))[:, None, None])
    return BundleMap(P.s_plus, P.s_minus, matrices,
                     singularities=alpha.singularities,
                     atomic_declared=alpha.atomic_declared,
                     name=f"clifford({alpha.name})")


def polar_vector_field(V: Bundle, radius: float = 0.2) -> BundleMap:
    """Rotation-type section of the round-sphere plane bundle.

    Unit-frame scalar z/(1+|z|^2) in both stereographic charts: one
    zero per pole, each of winding +1, total index 2 (Poincare-Hopf).
    """
    if set(V.manifold.chart_names()) != {"north", "south"}:
        raise UsageError("the polar field preset needs the two-chart sphere")
    sgn = REALIFICATION_SIGN

    def rep(pts):
        pts = np.atleast_2d(pts)
        q = 1.0 + pts[:, 0] ** 2 + pts[:, 1] ** 2
        scal = (pts[:, 0] + 1j * pts[:, 1]) / q
        return np.stack([np.real(scal), sgn * np.imag(scal)], axis=-1)

    sing = (DeclaredSingularity("north", (0.0, 0.0), radius),
            DeclaredSingularity("south", (0.0, 0.0), radius))
    return section_map(V, {"north": rep, "south": rep}, sing,
                       atomic_declared=True, name="polar_field")


def constant_vector_field(V: Bundle, value=(1.0, 0.0)) -> BundleMap:
    """Nowhere-zero constant section of a flat plane bundle."""
    if V.manifold.transitions:
        raise UsageError("constant sections need a single-chart base")
    v = np.asarray(value, dtype=float)
    if np.linalg.norm(v) == 0:
        raise UsageError("the constant section must be nonzero")

    def rep(pts):
        pts = np.atleast_2d(pts)
        return np.broadcast_to(v, (len(pts), 2)).copy()

    return section_map(V, {c.name: rep for c in V.manifold.charts}, (),
                       atomic_declared=True, name="constant_field")


# ---------------------------------------------------------------------------
# the Riemann-Roch style check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrrReport:
    rows: Mapping[str, tuple[float, float, float, float]]  # lhs, div, dT, resid
    residual: float
    c1_difference_total: float
    div_mass: float
    twist_rank: int
    kappa: float

    def ok(self, tol: float = 1e-2) -> bool:
        return self.residual <= tol


def _assert_flat(E: Bundle) -> None:
    probe = np.array([[0.25, 0.55], [-0.6, 0.35]])
    for c in E.manifold.charts:
        for v in curvature(E).at(c.name, probe).values():
            if np.max(np.abs(v)) > 1e-10:
                raise UsageError("desk-scale twists must be flat")


def grr_check(P: SpinorPair, alpha: BundleMap,
              twist: Bundle | None = None, *, seed: int = 0) -> GrrReport:
    """Weak test of c1(S+) - c1(S-) = kappa (rk E) (Div(alpha) + dT).

    T is the spherical potential of the Clifford line map; on a surface
    the A-hat inverse factor is identically 1, and a flat twist enters
    only through its rank (the degree-0 part of its Chern character).
    The orientation constant kappa is the frozen divisor-sign
    convention, fixed once on the round-sphere scenario.
    """
    factor = 1.0
    if twist is not None:
        if twist.manifold != P.vector.manifold:
            raise UsageError("twist lives on a different base")
        _assert_flat(twist)
        factor = float(twist.rank)

    cl = clifford_map(P, alpha)
    diff_form = eval_chern(curvature(P.s_plus), 1) \
        - eval_chern(curvature(P.s_minus), 1)
    diff_cur = smooth_form_current(diff_form, name="c1(S+)-c1(S-)")
    sigma = section_sigma(cl) * CHERN_FACTOR
    tags = tuple(cl.singular_points())
    div = divisor_from_section(cl)
    bd = current_boundary(l1loc_current(sigma, tags, name="T"))

    battery = test_battery(P.vector.manifold, 0, seed=seed, sigma=tags)
    rows = {}
    worst = 0.0
    for tf in battery:
        lhs = factor * complex(pair_current(diff_cur, tf.form))
        dv = RR_DIVISOR_SIGN * factor * complex(pair_current(div, tf.form))
        dT = RR_DIVISOR_SIGN * factor * complex(pair_current(bd, tf.form))
        r = abs(lhs - dv - dT)
        rows[tf.form_id] = (lhs.real, dv.real, dT.real, float(r))
        worst = max(worst, float(r))

    total = factor * complex(diff_form.integrate()).real
    return GrrReport(rows, worst, total, div.total_mass(),
                     int(factor), RR_DIVISOR_SIGN)
