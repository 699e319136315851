"""Ad-invariant polynomials evaluated on curvature forms.

The series coefficients come from series.py in exact rational
arithmetic; here they are substituted with matrix-valued 2-forms, with
wedge as the ring multiplication.  Every evaluator accepts either the
grid layer (MatrixForm) or the analytic layer (MatrixFieldForm) and
returns a scalar form of the matching layer.

Normalizations (centralized in conventions.py):

    chern      det(I + (i/2pi) Omega)         -> c_k = elementary symmetric
    character  tr exp((i/2pi) Omega)          (degree-2 part equals c_1)
    pfaffian   Pf(-(1/2pi) Omega)             (real skew input)
    pontryagin det(I - (1/2pi) Omega)         -> p_k = degree-4k part
    ahat^-1    det^{1/2}(sinh(X)/X), X = Omega/4pi
    todd       det(X / (1 - e^{-X})), X = (i/2pi) Omega
    instanton  (1/16pi^2) tr(Omega^2)

Inhomogeneous results (character, Todd, inverse A-hat) are returned as
GradedForm, a sparse map from even degree to a scalar form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import forms as gridforms
from .conventions import (AHAT_FACTOR, CHERN_FACTOR, INSTANTON_FACTOR,
                          PFAFFIAN_FACTOR, PONTRYAGIN_FACTOR)
from .errors import UsageError
from .fields import FieldForm, MatrixFieldForm, constant_field
from .forms import Form, MatrixForm
from .meshes import Manifold
from .series import (GradedSeries, log_sinhc_half_series, log_todd_series)

__all__ = [
    "GradedForm",
    "eval_chern",
    "eval_chern_character",
    "eval_pfaffian",
    "eval_pontryagin",
    "eval_ahat_inverse",
    "eval_todd",
    "residue_quotient_forms",
    "thom_porteous",
    "instanton_form",
    "pfaffian_scalar",
    "conjugate_matrix",
    "matrix_power_traces",
]


# ---------------------------------------------------------------------------
# layer dispatch: make grid and analytic forms speak one dialect
# ---------------------------------------------------------------------------

def _is_field(x) -> bool:
    return isinstance(x, FieldForm)


def _wedge(a, b):
    return a.wedge(b) if _is_field(a) else gridforms.wedge(a, b)


def _mat_mul(A, B):
    return A.matmul(B) if _is_field(A) else gridforms.matrix_wedge(A, B)


def _mat_trace(A):
    return A.trace() if _is_field(A) else gridforms.matrix_trace(A)


def _constant(M: Manifold, value, like) -> "Form | FieldForm":
    if _is_field(like):
        return constant_field(M, value)
    return gridforms.scalar_form(M, value)


def _entry(A, i: int, j: int):
    """Scalar form picking out one matrix entry."""
    if _is_field(A):
        evals = {}
        for name, fn in A.evals.items():
            evals[name] = lambda pts, fn=fn: {m: v[:, i, j]
                                              for m, v in fn(pts).items()}
        return FieldForm(A.manifold, A.degree, evals)
    data = {name: {m: arr[..., i, j] for m, arr in comps.items()}
            for name, comps in A.data.items()}
    return Form(A.manifold, A.degree, data)


def _rank(A) -> int:
    if A.value_shape[0] != A.value_shape[1]:
        raise UsageError("curvature matrix must be square")
    return A.value_shape[0]


def _node_values(A) -> list[np.ndarray]:
    """All component arrays sampled at chart nodes (both layers)."""
    out = []
    for c in A.manifold.charts:
        if _is_field(A):
            out.extend(A.at(c.name, c.points()).values())
        else:
            out.extend(A.data[c.name].values())
    return out


def _check_real_skew(A, tol: float = 1e-10) -> None:
    worst = 0.0
    scale = 1.0
    for arr in _node_values(A):
        worst = max(worst, float(np.max(np.abs(arr + np.swapaxes(arr, -1, -2)))),
                    float(np.max(np.abs(np.imag(arr)))))
        scale = max(scale, float(np.max(np.abs(arr))))
    if worst > tol * scale:
        raise UsageError(f"matrix form is not real skew (residual {worst:.2e})")


# ---------------------------------------------------------------------------
# inhomogeneous forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradedForm:
    """Sparse sum of even-degree scalar forms (grid or analytic layer)."""

    manifold: Manifold
    parts: Mapping[int, "Form | FieldForm"]

    def __post_init__(self):
        clean = {}
        for deg, f in self.parts.items():
            if f.degree != deg:
                raise UsageError("graded part filed under the wrong degree")
            if deg <= self.manifold.dim:
                clean[deg] = f
        object.__setattr__(self, "parts", clean)

    def part(self, degree: int):
        return self.parts.get(degree)

    def part_or_zero(self, degree: int, like=None):
        got = self.parts.get(degree)
        if got is not None:
            return got
        if like is None:
            if not self.parts:
                raise UsageError("cannot infer the layer of an empty graded form")
            like = next(iter(self.parts.values()))
        if degree == 0:
            return _constant(self.manifold, 0.0, like)
        if _is_field(like):
            return FieldForm(self.manifold, degree,
                             {c.name: (lambda pts: {}) for c in self.manifold.charts})
        return gridforms.zero_form(self.manifold, degree)

    def __add__(self, other: "GradedForm") -> "GradedForm":
        parts = dict(self.parts)
        for deg, f in other.parts.items():
            parts[deg] = parts[deg] + f if deg in parts else f
        return GradedForm(self.manifold, parts)

    def __sub__(self, other: "GradedForm") -> "GradedForm":
        return self + other.scale(-1.0)

    def scale(self, c) -> "GradedForm":
        return GradedForm(self.manifold, {d: f * c for d, f in self.parts.items()})

    def wedge(self, other: "GradedForm") -> "GradedForm":
        parts: dict[int, object] = {}
        for da, fa in self.parts.items():
            for db, fb in other.parts.items():
                if da + db > self.manifold.dim:
                    continue
                term = _wedge(fa, fb)
                key = da + db
                parts[key] = parts[key] + term if key in parts else term
        return GradedForm(self.manifold, parts)

    def integrate_top(self):
        top = self.part(self.manifold.dim)
        if top is None:
            return 0.0
        if _is_field(top):
            return top.integrate()
        return gridforms.integrate_top(self.manifold, top)


# ---------------------------------------------------------------------------
# power traces and Newton's identities
# ---------------------------------------------------------------------------

def matrix_power_traces(X, jmax: int) -> list:
    """[tr(X), tr(X^2), ..., tr(X^jmax)] with wedge products."""
    traces = []
    power = X
    for j in range(1, jmax + 1):
        traces.append(_mat_trace(power))
        if j < jmax:
            power = _mat_mul(power, X)
    return traces


def _elementary_from_traces(M: Manifold, traces: list, kmax: int, like):
    """Newton's identities: e_k from power sums p_j (forms of degree 2j)."""
    ones = _constant(M, 1.0, like)
    es: list = [ones]
    for k in range(1, kmax + 1):
        acc = None
        for i in range(1, k + 1):
            if i > len(traces):
                break
            term = traces[i - 1] if k - i == 0 else _wedge(es[k - i], traces[i - 1])
            term = term * ((-1) ** (i - 1))
            acc = term if acc is None else acc + term
        if acc is None:
            break
        es.append(acc * (1.0 / k))
    return es


def eval_chern(Omega, k: int):
    """k-th Chern form: degree-2k coefficient of det(I + (i/2pi) Omega)."""
    if k < 0:
        raise UsageError("negative Chern index")
    M = Omega.manifold
    if k == 0:
        return _constant(M, 1.0, Omega)
    if 2 * k > M.dim or k > _rank(Omega):
        return _zero_scalar(Omega, 2 * k)
    X = Omega * CHERN_FACTOR
    traces = matrix_power_traces(X, k)
    es = _elementary_from_traces(M, traces, k, Omega)
    return es[k]


def _zero_scalar(Omega, degree: int):
    M = Omega.manifold
    if _is_field(Omega):
        return FieldForm(M, degree, {c.name: (lambda pts: {}) for c in M.charts})
    return gridforms.zero_form(M, degree)


def eval_chern_character(Omega, order: int = None) -> GradedForm:
    """tr exp((i/2pi) Omega), degree-2 part equals the first Chern form."""
    M = Omega.manifold
    order = M.dim // 2 if order is None else min(order, M.dim // 2)
    rank = _rank(Omega)
    parts = {0: _constant(M, float(rank), Omega)}
    if order >= 1:
        X = Omega * CHERN_FACTOR
        traces = matrix_power_traces(X, order)
        for j in range(1, order + 1):
            parts[2 * j] = traces[j - 1] * (1.0 / math.factorial(j))
    return GradedForm(M, parts)


def eval_pontryagin(Omega, k: int):
    """k-th Pontryagin form, the degree-4k part of det(I - Omega/2pi)."""
    _check_real_skew(Omega)
    if k < 0:
        raise UsageError("negative Pontryagin index")
    M = Omega.manifold
    if k == 0:
        return _constant(M, 1.0, Omega)
    if 4 * k > M.dim or 2 * k > _rank(Omega):
        return _zero_scalar(Omega, 4 * k)
    X = Omega * PONTRYAGIN_FACTOR
    traces = matrix_power_traces(X, 2 * k)
    es = _elementary_from_traces(M, traces, 2 * k, Omega)
    return es[2 * k]


def eval_pfaffian(Omega):
    """Euler form Pf(-(1/2pi) Omega) via the perfect-matching sum.

    Real skew input of even size 2n gives a 2n-form; odd size gives the
    zero form of the same degree convention (odd-rank Euler class is 0).
    """
    _check_real_skew(Omega)
    M = Omega.manifold
    r = _rank(Omega)
    if r % 2 == 1:
        return _zero_scalar(Omega, M.dim)
    n = r // 2
    if Omega.degree * n > M.dim:
        return _zero_scalar(Omega, Omega.degree * n)
    if r > 8:
        raise UsageError("pfaffian implemented for size up to 8")
    X = Omega * PFAFFIAN_FACTOR
    acc = None
    for sign, pairs in _perfect_matchings(tuple(range(r))):
        term = None
        for (i, j) in pairs:
            e = _entry(X, i, j)
            term = e if term is None else _wedge(term, e)
        term = term * float(sign)
        acc = term if acc is None else acc + term
    return acc


def _perfect_matchings(idx: tuple):
    """Yield (sign, pairs) over perfect matchings of the index tuple."""
    if not idx:
        yield 1, []
        return
    i = idx[0]
    for pos in range(1, len(idx)):
        j = idx[pos]
        sign = -1 if (pos - 1) % 2 else 1
        rest = idx[1:pos] + idx[pos + 1:]
        for s2, pairs in _perfect_matchings(rest):
            yield sign * s2, [(i, j)] + pairs


def pfaffian_scalar(A: np.ndarray) -> float:
    """Plain numeric Pfaffian of a scalar skew matrix (oracle helper)."""
    A = np.asarray(A)
    n = A.shape[0]
    if n % 2:
        return 0.0
    total = 0.0
    for sign, pairs in _perfect_matchings(tuple(range(n))):
        prod = 1.0
        for (i, j) in pairs:
            prod *= A[i, j]
        total += sign * prod
    return total


def _series_evaluator(Omega, log_coeffs, factor, order: int = None) -> GradedForm:
    """exp(sum_j L_j tr(X^j)) with X = factor * Omega, truncated by degree."""
    M = Omega.manifold
    jmax = M.dim // 2 if order is None else min(order, M.dim // 2)
    parts = {0: _constant(M, 1.0, Omega)}
    if jmax < 1:
        return GradedForm(M, parts)
    X = Omega * factor
    traces = matrix_power_traces(X, jmax)
    # L = sum over degrees of the log series evaluated on traces
    log_parts: dict[int, object] = {}
    for j in range(1, jmax + 1):
        c = log_coeffs[j] if j < len(log_coeffs) else Fraction(0)
        if c:
            log_parts[2 * j] = traces[j - 1] * float(c)
    L = GradedForm(M, log_parts)
    out = GradedForm(M, parts)          # 1
    term = GradedForm(M, parts)         # L^k / k!
    for k in range(1, jmax + 1):
        term = term.wedge(L).scale(1.0 / k)
        if not term.parts:
            break
        out = out + term
    return out


def eval_ahat_inverse(Omega, order: int = None) -> GradedForm:
    """det^{1/2}(sinh(X)/X) with X = Omega/4pi; real skew input."""
    _check_real_skew(Omega)
    jmax = Omega.manifold.dim // 2 if order is None else order
    return _series_evaluator(Omega, log_sinhc_half_series(max(jmax, 1)),
                             AHAT_FACTOR, order)


def eval_todd(Omega, order: int = None) -> GradedForm:
    """Todd form det(X/(1 - e^{-X})) with X = (i/2pi) Omega."""
    jmax = Omega.manifold.dim // 2 if order is None else order
    return _series_evaluator(Omega, log_todd_series(max(jmax, 1)),
                             CHERN_FACTOR, order)


# ---------------------------------------------------------------------------
# residue quotient and Thom-Porteous
# ---------------------------------------------------------------------------

def residue_quotient_forms(phi: GradedSeries, f, e) -> GradedForm:
    """Q(f, e) with Q wedge (f - e) = phi(f) - phi(e).

    ``phi`` is a one-variable polynomial; f and e are scalar even-degree
    forms of one layer.  The expansion of u^k contributes
    sum_{i+j=k-1} f^i e^j.
    """
    if len(phi.variables) != 1:
        raise UsageError("residue quotient needs a one-variable polynomial")
    M = f.manifold
    dim = M.dim
    fdeg = f.degree
    parts: dict[int, object] = {}

    def add(deg, form):
        parts[deg] = parts[deg] + form if deg in parts else form

    max_pow = max((exp[0] for exp in phi.terms), default=0)
    powers_f = _wedge_powers(f, max_pow - 1)
    powers_e = _wedge_powers(e, max_pow - 1)
    for (k,), coeff in phi.terms.items():
        for i in range(k):
            j = k - 1 - i
            deg = fdeg * (i + j)
            if deg > dim:
                continue
            if i == 0 and j == 0:
                add(0, _constant(M, float(coeff), f))
                continue
            if i == 0:
                term = powers_e[j]
            elif j == 0:
                term = powers_f[i]
            else:
                term = _wedge(powers_f[i], powers_e[j])
            add(deg, term * float(coeff))
    return GradedForm(M, parts)


def _wedge_powers(f, kmax: int) -> list:
    out = [None, f]
    for k in range(2, kmax + 1):
        if f.degree * k > f.manifold.dim:
            out.append(_zero_scalar(f, min(f.degree * k, f.manifold.dim + 1)))
        else:
            out.append(_wedge(out[-1], f))
    return out


def thom_porteous(m: int, n: int, chern_difference: GradedSeries) -> GradedSeries:
    """m x m determinant with (i, j) entry = degree-2(n-i+j) component.

    Exact cofactor expansion in the graded ring; entries of negative
    degree are zero.  The constant term of ``chern_difference`` must be 1
    (it is a total Chern quotient).
    """
    if m < 1 or m > n:
        raise UsageError("need 1 <= m <= n")
    zero_exp = (0,) * len(chern_difference.variables)
    if chern_difference.coefficient(zero_exp) != 1:
        raise UsageError("total Chern series must have constant term 1")
    entries = []
    for i in range(1, m + 1):
        row = []
        for j in range(1, m + 1):
            d = n - i + j
            if d < 0:
                row.append(chern_difference.component(-1))  # empty
            elif d == 0:
                row.append(chern_difference.component(0))
            else:
                row.append(chern_difference.component(2 * d))
        entries.append(row)
    return _graded_det(entries)


def _graded_det(rows: list) -> GradedSeries:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = None
    for j in range(n):
        minor = [[rows[i][jj] for jj in range(n) if jj != j] for i in range(1, n)]
        term = rows[0][j] * _graded_det(minor)
        if j % 2:
            term = term.scale(-1)
        acc = term if acc is None else acc + term
    return acc


# ---------------------------------------------------------------------------
# instanton form and diagnostics
# ---------------------------------------------------------------------------

def instanton_form(Omega, tol: float = 1e-8):
    """(1/16pi^2) tr(Omega^2) for sp(1)-valued curvature.

    The quaternion-compatible constraint is checked at chart nodes:
    trace zero, quaternionic linearity (Omega_21 = -conj(Omega_12),
    Omega_22 = conj(Omega_11)), and skew-Hermitian diagonal.
    """
    if _rank(Omega) != 2:
        raise UsageError("instanton form expects a 2x2 curvature")
    worst, scale = 0.0, 1.0
    for arr in _node_values(Omega):
        a = np.asarray(arr)
        scale = max(scale, float(np.max(np.abs(a))))
        worst = max(
            worst,
            float(np.max(np.abs(a[..., 0, 0] + a[..., 1, 1]))),
            float(np.max(np.abs(a[..., 1, 0] + np.conj(a[..., 0, 1])))),
            float(np.max(np.abs(a[..., 1, 1] - np.conj(a[..., 0, 0])))),
        )
    if worst > tol * scale:
        raise UsageError(
            f"curvature violates the symplectic constraint (residual {worst:.2e})")
    return _mat_trace(_mat_mul(Omega, Omega)) * INSTANTON_FACTOR


def conjugate_matrix(A, g: np.ndarray):
    """g^{-1} A g for a constant invertible matrix g (Ad-invariance tests)."""
    g = np.asarray(g)
    ginv = np.linalg.inv(g)
    if _is_field(A):
        evals = {}
        for name, fn in A.evals.items():
            evals[name] = lambda pts, fn=fn: {
                m: np.einsum("ij,njk,kl->nil", ginv, v, g) for m, v in fn(pts).items()}
        return MatrixFieldForm(A.manifold, A.degree, evals, A.value_shape)
    data = {name: {m: np.einsum("ij,...jk,kl->...il", ginv, arr, g)
                   for m, arr in comps.items()}
            for name, comps in A.data.items()}
    return MatrixForm(A.manifold, A.degree, data, A.value_shape)
