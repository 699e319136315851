"""Deterministic batteries of smooth global test forms.

Pairing a current against a finite battery is the desk-scale observable;
every battery is reproducible from its seed.  The composition is fixed:
three structured forms (constant-type, coordinate-aligned, concentrated
near the singular set) and five pseudo-random combinations.

On the two-chart sphere, globality is delicate: forms are assembled
from the ambient coordinate functions X1, X2, X3 of the unit-sphere
embedding, whose chart representatives are

    north: ( 2x/(1+r^2),  2y/(1+r^2), (r^2-1)/(1+r^2) )
    south: ( 2u/(1+s^2), -2v/(1+s^2), (1-s^2)/(1+s^2) )

(the sign on X2 and X3 is forced by the transition w = 1/z), together
with the global area-type form dx dy/(1+r^2)^2.  On tori everything is
a trigonometric polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UsageError
from .fields import FieldForm, constant_field, scalar_field
from .meshes import Manifold, SingularPoint, smoothstep

__all__ = ["TestForm", "test_battery", "away_battery", "ambient_point",
           "ambient_functions", "area_like_form"]


@dataclass(frozen=True)
class TestForm:
    form_id: str
    form: FieldForm
    away_from_sigma: bool = False


def _is_sphere(M: Manifold) -> bool:
    return set(M.chart_names()) == {"north", "south"}


# -- sphere building blocks -------------------------------------------------

def ambient_functions(M: Manifold) -> list[FieldForm]:
    """X1, X2, X3 of the unit-sphere embedding as global scalar fields."""

    def north(i):
        def f(pts):
            x, y = pts[:, 0], pts[:, 1]
            q = 1.0 + x * x + y * y
            return (2 * x / q, 2 * y / q, (q - 2.0) / q)[i]
        return f

    def south(i):
        def f(pts):
            u, v = pts[:, 0], pts[:, 1]
            q = 1.0 + u * u + v * v
            return (2 * u / q, -2 * v / q, (2.0 - q) / q)[i]
        return f

    return [scalar_field(M, {"north": north(i), "south": south(i)})
            for i in range(3)]


def ambient_point(M: Manifold, chart: str, coords: Sequence[float]) -> np.ndarray:
    """Ambient unit-sphere image of a chart point."""
    x, y = float(coords[0]), float(coords[1])
    q = 1.0 + x * x + y * y
    if chart == "north":
        return np.array([2 * x / q, 2 * y / q, (q - 2.0) / q])
    return np.array([2 * x / q, -2 * y / q, (2.0 - q) / q])


def area_like_form(M: Manifold) -> FieldForm:
    """dx dy/(1+r^2)^2 in both charts (global; the round area over 4pi-ish)."""
    def ev(pts):
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return {3: 1.0 / (1.0 + r2) ** 2}
    return FieldForm(M, 2, {"north": ev, "south": ev})


def _dot_with(M: Manifold, P: np.ndarray) -> FieldForm:
    """The global function X . P for a constant ambient vector P."""
    P = np.asarray(P, dtype=float)

    def north(pts):
        x, y = pts[:, 0], pts[:, 1]
        q = 1.0 + x * x + y * y
        return (2 * x * P[0] + 2 * y * P[1] + (q - 2.0) * P[2]) / q

    def south(pts):
        u, v = pts[:, 0], pts[:, 1]
        q = 1.0 + u * u + v * v
        return (2 * u * P[0] - 2 * v * P[1] + (2.0 - q) * P[2]) / q

    return scalar_field(M, {"north": north, "south": south})


# -- torus building blocks ---------------------------------------------------

def _trig_scalar(M: Manifold, rng: np.random.Generator) -> FieldForm:
    dim = M.dim
    modes = []
    for _ in range(4):
        k = rng.integers(0, 3, size=dim)
        c = rng.uniform(-1.0, 1.0)
        ph = rng.uniform(0.0, 2.0 * np.pi)
        modes.append((k, c, ph))

    def make(cname):
        def f(pts):
            out = np.zeros(len(pts))
            for k, c, ph in modes:
                out += c * np.cos(2.0 * np.pi * (pts @ k) + ph)
            return out
        return f

    return scalar_field(M, {c.name: make(c.name) for c in M.charts})


def _torus_center_bump(M: Manifold, center: np.ndarray, away: bool) -> FieldForm:
    """Bump at ``center``; with ``away`` it is exactly zero near the antipode."""
    center = np.asarray(center, dtype=float)

    def f(pts):
        c = np.ones(len(pts))
        for k in range(M.dim):
            c *= 0.5 * (np.cos(2.0 * np.pi * (pts[:, k] - center[k])) + 1.0)
        if away:
            return smoothstep((c - 0.2) / 0.6)
        return c
    return scalar_field(M, {ch.name: f for ch in M.charts})


def _frame_form(M: Manifold, degree: int, coeffs: Sequence[float]) -> FieldForm:
    """Constant-coefficient degree-form on a periodic chart frame."""
    from .forms import masks_of_degree
    masks = masks_of_degree(M.dim, degree)
    table = {m: c for m, c in zip(masks, coeffs)}

    def ev(pts):
        n = len(pts)
        return {m: np.full(n, c) for m, c in table.items() if c != 0.0}
    return FieldForm(M, degree, {c.name: ev for c in M.charts})


# -- batteries ----------------------------------------------------------------

def _sphere_battery(M: Manifold, degree: int, seed: int,
                    sigma: Sequence[SingularPoint]) -> list[TestForm]:
    rng = np.random.default_rng(seed)
    X = ambient_functions(M)
    vol = area_like_form(M)
    one = constant_field(M, 1.0)

    if sigma:
        P = ambient_point(M, sigma[0].chart, sigma[0].coords)
    else:
        P = np.array([0.0, 0.0, -1.0])
    bump = _dot_with(M, P)

    def exp_bump(c=9.0):
        # exp(c (X.P - 1)): 1 at P, exponentially small on the far side
        def make(cname):
            comp = bump.component(cname, 0)
            return lambda pts: np.exp(c * (comp(pts) - 1.0))
        return scalar_field(M, {ch.name: make(ch.name) for ch in M.charts})

    def carrier(f: FieldForm) -> FieldForm:
        if degree == 0:
            return f
        if degree == 1:
            return f.wedge(X[2].d()) + (f * 0.5).wedge(X[0].d())
        return f.wedge(vol)

    def rand_scalar() -> FieldForm:
        f = constant_field(M, rng.uniform(-1.0, 1.0))
        for i in range(3):
            f = f + X[i] * rng.uniform(-1.0, 1.0)
        for i in range(3):
            for j in range(i, 3):
                f = f + X[i].wedge(X[j]) * rng.uniform(-1.0, 1.0)
        return f

    out = [TestForm("const", carrier(one)),
           TestForm("coord", carrier(X[2] + X[0] * 0.3)),
           TestForm("sigma_bump", carrier(exp_bump()))]
    for i in range(5):
        if degree == 1:
            f1, f2 = rand_scalar(), rand_scalar()
            form = f1.wedge(X[0].d()) + f2.wedge(X[1].d())
        else:
            form = carrier(rand_scalar())
        out.append(TestForm(f"rand{i}", form))
    return out


def _torus_battery(M: Manifold, degree: int, seed: int,
                   sigma: Sequence[SingularPoint]) -> list[TestForm]:
    rng = np.random.default_rng(seed)
    from .forms import masks_of_degree
    masks = masks_of_degree(M.dim, degree)
    one = _frame_form(M, degree, [1.0] + [0.0] * (len(masks) - 1))
    coord = scalar_field(M, {c.name: (lambda pts: np.cos(2 * np.pi * pts[:, 0]))
                             for c in M.charts})
    center = np.asarray(sigma[0].coords) if sigma else np.full(M.dim, 0.5)

    def carrier(f: FieldForm) -> FieldForm:
        return f.wedge(_frame_form(M, degree,
                                   [1.0] * len(masks))) if degree else f

    out = [TestForm("const", one),
           TestForm("coord", carrier(coord)),
           TestForm("sigma_bump", carrier(_torus_center_bump(M, center, False)))]
    for i in range(5):
        f = _trig_scalar(M, rng)
        coeffs = rng.uniform(-1.0, 1.0, size=len(masks))
        out.append(TestForm(f"rand{i}", f.wedge(_frame_form(M, degree, coeffs))
                            if degree else f))
    return out


def test_battery(M: Manifold, degree: int, *, seed: int = 0,
                 sigma: Sequence[SingularPoint] = ()) -> list[TestForm]:
    """The 3 structured + 5 pseudo-random test forms of a given degree."""
    if degree < 0 or degree > M.dim:
        raise UsageError("battery degree outside [0, dim]")
    if _is_sphere(M):
        return _sphere_battery(M, degree, seed, sigma)
    return _torus_battery(M, degree, seed, sigma)


def away_battery(M: Manifold, degree: int, *,
                 sigma: Sequence[SingularPoint]) -> list[TestForm]:
    """Test forms exactly supported away from every listed singular point.

    On the sphere the cutoff smoothstep((X.P' - 0.3)/0.3) vanishes
    identically outside the cap X.P' > 0.3 around P', chosen antipodal
    to the singular set; points of sigma must satisfy X.P' < 0.25.
    """
    if not sigma:
        raise UsageError("away battery needs at least one singular point")
    if _is_sphere(M):
        pts = np.array([ambient_point(M, s.chart, s.coords) for s in sigma])
        # pick the ambient direction most antipodal to the whole set
        cands = np.concatenate([-pts, np.eye(3), -np.eye(3)], axis=0)
        score = [np.max(pts @ c) for c in cands]
        P = cands[int(np.argmin(score))]
        P = P / np.linalg.norm(P)
        if np.max(pts @ P) > 0.25:
            raise UsageError("singular set leaves no antipodal cap free")
        dot = _dot_with(M, P)

        def make(cname):
            comp = dot.component(cname, 0)
            return lambda pts2: smoothstep((comp(pts2) - 0.3) / 0.3)
        cut = scalar_field(M, {c.name: make(c.name) for c in M.charts})
        if degree == 0:
            forms = [cut, cut.wedge(_dot_with(M, P) * 0.7)]
        elif degree == 2:
            vol = area_like_form(M)
            forms = [cut.wedge(vol), cut.wedge(cut).wedge(vol)]
        else:
            X = ambient_functions(M)
            forms = [cut.wedge(X[0].d()), cut.wedge(X[1].d())]
        return [TestForm(f"away{i}", f, away_from_sigma=True)
                for i, f in enumerate(forms)]

    center = np.asarray(sigma[0].coords) + 0.5
    cut = _torus_center_bump(M, center, True)
    from .forms import masks_of_degree
    masks = masks_of_degree(M.dim, degree)
    if degree == 0:
        forms = [cut, cut.wedge(cut)]
    else:
        forms = [cut.wedge(_frame_form(M, degree, [1.0] * len(masks))),
                 cut.wedge(_frame_form(M, degree,
                                       [float(i + 1) for i in range(len(masks))]))]
    return [TestForm(f"away{i}", f, away_from_sigma=True)
            for i, f in enumerate(forms)]
