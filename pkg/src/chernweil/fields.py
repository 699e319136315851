"""Analytic (point-evaluated) differential forms.

Grid forms (forms.py) hold node samples; the objects here hold callables
that evaluate components at arbitrary points of a chart.  That is what
the polar quadrature patches need, since they sample points that are on
no grid, and it is the natural home for closed-form connection matrices
and transgression kernels.

Exterior derivatives are taken per point with 4th-order centered
differences of the component callables (default step 5e-4), so callables
must tolerate evaluation slightly outside the chart box; every preset
here is a globally defined formula, so this costs nothing.  Whenever an
exact derivative is known, pass it explicitly instead (see ``with_d``).

The evaluator convention: ``evals[chart](pts)`` maps (N, dim) points to
a dict from coordinate bitmask to values of shape (N,) for scalar forms
or (N, rows, cols) for matrix forms.  Missing masks are zero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .errors import UsageError
from .forms import (Form, MatrixForm, _insert_sign, _wedge_sign, interp_grid,
                    mask_axes, masks_of_degree, pullback_components)
from .meshes import Manifold, integrate_scalar

__all__ = [
    "FieldForm",
    "MatrixFieldForm",
    "constant_field",
    "scalar_field",
    "coordinate_1forms",
    "matrix_field_from_scalars",
    "field_from_grid",
    "field_overlap_residual",
    "circle_integral",
    "FD_STEP",
]

FD_STEP = 5e-4

PointEval = Callable[[np.ndarray], Mapping[int, np.ndarray]]


def _zeros(n: int, value_shape: tuple[int, ...]) -> np.ndarray:
    return np.zeros((n,) + value_shape)


@dataclass(frozen=True)
class FieldForm:
    """Scalar-valued form given by per-chart point evaluators.

    ``exact_d``, when set, is returned by ``d()`` in place of the
    finite-difference derivative; it is intentionally not inherited by
    sums or products, which recompute their own derivatives.
    """

    manifold: Manifold
    degree: int
    evals: Mapping[str, PointEval]
    value_shape: tuple[int, ...] = ()
    exact_d: "FieldForm | None" = None

    def __post_init__(self):
        for c in self.manifold.charts:
            if c.name not in self.evals:
                raise UsageError(f"no evaluator for chart {c.name!r}")

    # -- evaluation --------------------------------------------------------

    def at(self, chart: str, pts: np.ndarray) -> dict[int, np.ndarray]:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return dict(self.evals[chart](pts))

    def component(self, chart: str, mask: int) -> Callable[[np.ndarray], np.ndarray]:
        def comp(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            vals = self.evals[chart](pts)
            got = vals.get(mask)
            return got if got is not None else _zeros(len(pts), self.value_shape)
        return comp

    # -- linear structure ---------------------------------------------------

    def _make(self, evals, degree=None, value_shape=None):
        return type(self)(self.manifold, self.degree if degree is None else degree,
                          evals,
                          self.value_shape if value_shape is None else value_shape)

    def __add__(self, other: "FieldForm") -> "FieldForm":
        if (self.degree, self.value_shape) != (other.degree, other.value_shape):
            raise UsageError("field form degree/shape mismatch")
        evals = {}
        for name in self.evals:
            fa, fb = self.evals[name], other.evals[name]
            def ev(pts, fa=fa, fb=fb):
                out = dict(fa(pts))
                for m, v in fb(pts).items():
                    out[m] = out[m] + v if m in out else v
                return out
            evals[name] = ev
        return self._make(evals)

    def __sub__(self, other: "FieldForm") -> "FieldForm":
        return self + (other * (-1))

    def __neg__(self) -> "FieldForm":
        return self * (-1)

    def __mul__(self, c) -> "FieldForm":
        evals = {}
        for name, f in self.evals.items():
            evals[name] = lambda pts, f=f: {m: c * v for m, v in f(pts).items()}
        return self._make(evals)

    __rmul__ = __mul__

    # -- calculus -----------------------------------------------------------

    def _axis_partial(self, name: str, axis: int, step: float) -> PointEval:
        f = self.evals[name]

        def pe(pts):
            pts = np.asarray(pts, dtype=float)
            e = np.zeros(pts.shape[1])
            e[axis] = step
            f1, f2 = f(pts + e), f(pts + 2 * e)
            b1, b2 = f(pts - e), f(pts - 2 * e)
            masks = set(f1) | set(f2) | set(b1) | set(b2)
            n = len(pts)
            out = {}
            for m in masks:
                z = _zeros(n, self.value_shape)
                out[m] = (-f2.get(m, z) + 8.0 * f1.get(m, z)
                          - 8.0 * b1.get(m, z) + b2.get(m, z)) / (12.0 * step)
            return out

        return pe

    def d(self, step: float = FD_STEP) -> "FieldForm":
        """Exterior derivative; exact when attached, else pointwise FD."""
        if self.exact_d is not None:
            return self.exact_d
        M = self.manifold
        if self.degree >= M.dim:
            z = {c.name: (lambda pts: {}) for c in M.charts}
            return self._make(z, degree=self.degree + 1)
        evals = {}
        for c in M.charts:
            partials = [self._axis_partial(c.name, k, step) for k in range(c.dim)]

            def ev(pts, partials=partials, dim=c.dim):
                out: dict[int, np.ndarray] = {}
                for k in range(dim):
                    bit = 1 << k
                    for mask, dv in partials[k](pts).items():
                        if mask & bit:
                            continue
                        m = mask | bit
                        term = _insert_sign(k, mask) * dv
                        out[m] = out[m] + term if m in out else term
                return out

            evals[c.name] = ev
        return self._make(evals, degree=self.degree + 1)

    def with_d(self, exact: "FieldForm") -> "FieldForm":
        """Attach an exact derivative, returned by d() instead of the FD one."""
        return replace(self, exact_d=exact)

    def on(self, manifold: Manifold) -> "FieldForm":
        """Rebase onto a manifold with the same charts.

        Used to move analytic data onto a copy of the base carrying
        different singular-point tags or quadrature rules; the chart
        names (hence the evaluators) must match.
        """
        if tuple(c.name for c in manifold.charts) != \
                tuple(c.name for c in self.manifold.charts):
            raise UsageError("rebasing requires identical chart names")
        exact = self.exact_d.on(manifold) if self.exact_d is not None else None
        return replace(self, manifold=manifold, exact_d=exact)

    # -- products ------------------------------------------------------------

    def _product(self, other: "FieldForm", pointwise, value_shape):
        if self.manifold != other.manifold:
            raise UsageError("field forms on different manifolds")
        deg = self.degree + other.degree
        evals = {}
        for name in self.evals:
            fa, fb = self.evals[name], other.evals[name]

            def ev(pts, fa=fa, fb=fb):
                va, vb = fa(pts), fb(pts)
                out: dict[int, np.ndarray] = {}
                for ma, xa in va.items():
                    for mb, xb in vb.items():
                        if ma & mb:
                            continue
                        term = _wedge_sign(ma, mb) * pointwise(xa, xb)
                        m = ma | mb
                        out[m] = out[m] + term if m in out else term
                return out

            evals[name] = ev
        cls = MatrixFieldForm if len(value_shape) == 2 else FieldForm
        return cls(self.manifold, deg, evals, value_shape)

    def wedge(self, other: "FieldForm") -> "FieldForm":
        if self.value_shape or other.value_shape:
            raise UsageError("use matmul for matrix-valued factors")
        return self._product(other, np.multiply, ())

    # -- transfers -----------------------------------------------------------

    def to_grid(self) -> Form:
        data = {}
        for c in self.manifold.charts:
            vals = self.at(c.name, c.points())
            data[c.name] = {m: v.reshape(c.shape + self.value_shape)
                            for m, v in vals.items()}
        cls = MatrixForm if len(self.value_shape) == 2 else Form
        return cls(self.manifold, self.degree, data, self.value_shape)

    def integrate(self):
        """Top-degree integral; honors declared singular points."""
        M = self.manifold
        if self.degree != M.dim or self.value_shape:
            raise UsageError("integrate needs a scalar top-degree form")
        full = (1 << M.dim) - 1
        fields = {c.name: self.component(c.name, full) for c in M.charts}
        return integrate_scalar(M, fields)

    def sup_on_nodes(self, weighted: bool = True) -> float:
        best = 0.0
        for c in self.manifold.charts:
            pts = c.points()
            keep = self.manifold.weight_fn(c.name)(pts) > 1e-8 if weighted else \
                np.ones(len(pts), dtype=bool)
            for v in self.at(c.name, pts).values():
                mag = np.abs(v[keep])
                if mag.size:
                    best = max(best, float(np.max(mag)))
        return best


@dataclass(frozen=True)
class MatrixFieldForm(FieldForm):
    """Matrix-valued analytic form; values (N, rows, cols)."""

    @property
    def rows(self) -> int:
        return self.value_shape[0]

    @property
    def cols(self) -> int:
        return self.value_shape[1]

    def __post_init__(self):
        if len(self.value_shape) != 2:
            raise UsageError("MatrixFieldForm needs a (rows, cols) value shape")
        super().__post_init__()

    def matmul(self, other: "MatrixFieldForm") -> "MatrixFieldForm":
        if self.cols != other.rows:
            raise UsageError(f"matrix shapes {self.value_shape} x {other.value_shape}")
        return self._product(other, lambda x, y: np.einsum("nij,njk->nik", x, y),
                             (self.rows, other.cols))

    def scale_by(self, f: FieldForm) -> "MatrixFieldForm":
        """Left multiplication by a scalar-valued form."""
        return f._product(self, lambda x, y: x[:, None, None] * y, self.value_shape)

    def trace(self) -> FieldForm:
        evals = {}
        for name, fn in self.evals.items():
            evals[name] = lambda pts, fn=fn: {
                m: np.einsum("nii->n", v) for m, v in fn(pts).items()}
        return FieldForm(self.manifold, self.degree, evals)

    def adjoint(self) -> "MatrixFieldForm":
        """Plain conjugate transpose (no metric factors)."""
        evals = {}
        for name, fn in self.evals.items():
            evals[name] = lambda pts, fn=fn: {
                m: np.conj(np.swapaxes(v, -1, -2)) for m, v in fn(pts).items()}
        return MatrixFieldForm(self.manifold, self.degree, evals,
                               (self.cols, self.rows))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def constant_field(M: Manifold, value, degree: int = 0,
                   mask: int = 0) -> FieldForm:
    value = np.asarray(value)
    vs = value.shape

    def ev(pts):
        n = len(pts)
        return {mask: np.broadcast_to(value, (n,) + vs).copy()}

    cls = MatrixFieldForm if len(vs) == 2 else FieldForm
    return cls(M, degree, {c.name: ev for c in M.charts}, vs)


def scalar_field(M: Manifold, fns: "Mapping[str, Callable] | Callable") -> FieldForm:
    """Degree-0 form from per-chart scalar callables pts -> (N,)."""
    evals = {}
    for c in M.charts:
        f = fns[c.name] if isinstance(fns, Mapping) else fns
        evals[c.name] = lambda pts, f=f: {0: np.asarray(f(pts))}
    return FieldForm(M, 0, evals)


def coordinate_1forms(M: Manifold, chart: str) -> list[FieldForm]:
    """dx_i of one chart, extended by zero elsewhere (test helper)."""
    out = []
    for k in range(M.dim):
        evals = {}
        for c in M.charts:
            if c.name == chart:
                evals[c.name] = lambda pts, k=k: {1 << k: np.ones(len(pts))}
            else:
                evals[c.name] = lambda pts: {}
        out.append(FieldForm(M, 1, evals))
    return out


def matrix_field_from_scalars(M: Manifold, degree: int, rows: int, cols: int,
                              entries: Mapping[str, Callable[[np.ndarray], Mapping[int, np.ndarray]]]
                              ) -> MatrixFieldForm:
    return MatrixFieldForm(M, degree, entries, (rows, cols))


def field_from_grid(a: Form) -> FieldForm:
    """Analytic wrapper around a grid form via multilinear interpolation."""
    evals = {}
    for c in a.manifold.charts:
        comps = a.data[c.name]
        evals[c.name] = lambda pts, comps=comps, c=c: {
            m: interp_grid(c, arr, pts) for m, arr in comps.items()}
    cls = MatrixFieldForm if len(a.value_shape) == 2 else FieldForm
    return cls(a.manifold, a.degree, evals, a.value_shape)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def field_overlap_residual(a: FieldForm, n: int = 100, seed: int = 0) -> float:
    """Exact-pullback mismatch across transitions at random overlap samples.

    Analytic forms with exact transition jacobians should agree to near
    round-off; finite-difference artifacts do not enter.
    """
    from .forms import overlap_samples
    M = a.manifold
    worst = 0.0
    for t in M.transitions:
        pts = overlap_samples(M, t, n, seed)
        pulled = pullback_components(a.evals[t.dst], t.apply, t.jacobian_at,
                                     pts, a.degree, M.chart(t.src).dim)
        direct = a.at(t.src, pts)
        for mask in masks_of_degree(M.chart(t.src).dim, a.degree):
            d = direct.get(mask, _zeros(len(pts), a.value_shape))
            p = pulled.get(mask, _zeros(len(pts), a.value_shape))
            worst = max(worst, float(np.max(np.abs(d - p))))
    return worst


def circle_integral(a: FieldForm, chart: str, center, radius: float,
                    n: int = 720) -> complex:
    """Line integral of a 1-form over a positively oriented circle.

    Trapezoid in the angle, spectrally accurate for smooth closed-form
    integrands; used for windings and residue checks.
    """
    if a.degree != 1 or a.value_shape:
        raise UsageError("circle_integral needs a scalar 1-form")
    t = 2.0 * np.pi * np.arange(n) / n
    cx, cy = center
    pts = np.stack([cx + radius * np.cos(t), cy + radius * np.sin(t)], axis=-1)
    vel = np.stack([-radius * np.sin(t), radius * np.cos(t)], axis=-1)
    vals = a.at(chart, pts)
    integrand = np.zeros(n, dtype=complex)
    for mask, v in vals.items():
        (axis,) = mask_axes(mask)
        integrand = integrand + v * vel[:, axis]
    return complex(np.sum(integrand) * (2.0 * np.pi / n))
