"""Exterior algebra on grid forms and pointwise field forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chernweil.fields import FieldForm, constant_field, scalar_field
from chernweil.forms import (exterior_derivative, integrate_top, interp_grid,
                             masks_of_degree, scalar_form, sup_norm, wedge,
                             zero_form)
from chernweil.meshes import build_standard_manifold


def _grid_scalar(M, fn):
    c = M.chart("t")
    return scalar_form(M, {"t": fn(c.points()).reshape(c.shape)})


def test_mask_counts():
    assert masks_of_degree(3, 0) == [0]
    assert len(masks_of_degree(3, 1)) == 3
    assert len(masks_of_degree(3, 2)) == 3
    assert len(masks_of_degree(4, 2)) == 6
    assert masks_of_degree(2, 2) == [3]


def test_dd_is_zero_at_second_order():
    # d(d f) for a smooth periodic scalar; sup norm must fall ~4x per
    # mesh doubling
    sups = []
    for res in (32, 64):
        M = build_standard_manifold("torus2", resolution=res)
        f = _grid_scalar(M, lambda p: np.sin(2 * np.pi * p[:, 0])
                         * np.cos(4 * np.pi * p[:, 1]))
        dd = exterior_derivative(exterior_derivative(f))
        sups.append(sup_norm(dd))
    assert sups[1] < 1e-8
    # already at round-off on the periodic grid: central differences
    # commute exactly up to floating noise
    assert sups[0] < 1e-8


def test_dd_is_zero_on_one_forms_3d():
    M = build_standard_manifold("torus3", resolution=16)
    c = M.chart("t")
    pts = c.points()

    def comp(k):
        return (np.sin(2 * np.pi * pts[:, k]) *
                np.cos(2 * np.pi * pts[:, (k + 1) % 3])).reshape(c.shape)

    a = zero_form(M, 1)
    a = type(a)(M, 1, {"t": {1: comp(0), 2: comp(1), 4: comp(2)}})
    dd = exterior_derivative(exterior_derivative(a))
    assert sup_norm(dd) < 1e-8


def test_exterior_derivative_matches_analytic():
    # interior stencil is 4th order on periodic axes
    errs = []
    for res in (32, 64):
        M = build_standard_manifold("torus2", resolution=res)
        f = _grid_scalar(M, lambda p: np.sin(2 * np.pi * p[:, 0]) *
                         np.sin(2 * np.pi * p[:, 1]))
        df = exterior_derivative(f)
        c = M.chart("t")
        pts = c.points()
        want_x = (2 * np.pi * np.cos(2 * np.pi * pts[:, 0]) *
                  np.sin(2 * np.pi * pts[:, 1])).reshape(c.shape)
        errs.append(np.max(np.abs(df.component("t", 1) - want_x)))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.2)


def test_exterior_derivative_bounded_chart_at_least_second_order():
    # boundary closures on non-periodic boxes drop to one-sided stencils;
    # the advertised floor is O(h^2)
    errs = []
    for res in (32, 64):
        M = build_standard_manifold("cp1", resolution=res)
        c = M.chart("north")
        pts = c.points()
        vals = np.sin(pts[:, 0] + 0.3 * pts[:, 1]).reshape(c.shape)
        f = scalar_form(M, {"north": vals,
                            "south": np.zeros(c.shape)})
        df = exterior_derivative(f)
        want = (np.cos(pts[:, 0] + 0.3 * pts[:, 1])).reshape(c.shape)
        errs.append(np.max(np.abs(df.component("north", 1) - want)))
    order = math.log(errs[0] / errs[1]) / math.log(2.0)
    assert order >= 1.9


def test_leibniz_rule_tracks_stencil_order():
    errs = []
    for res in (32, 64):
        M = build_standard_manifold("torus2", resolution=res)
        f = _grid_scalar(M, lambda p: np.sin(2 * np.pi * p[:, 0]) *
                         np.cos(2 * np.pi * p[:, 1]))
        g = _grid_scalar(M, lambda p: np.cos(2 * np.pi * (p[:, 0] + 2 * p[:, 1]))
                         + 2.0)
        lhs = exterior_derivative(wedge(f, g))
        rhs = wedge(exterior_derivative(f), g) + wedge(f, exterior_derivative(g))
        errs.append(sup_norm(lhs - rhs))
    order = math.log(errs[0] / errs[1]) / math.log(2.0)
    assert order >= 2.0


@settings(deadline=None, derandomize=True, max_examples=30)
@given(st.integers(0, 2 ** 31 - 1))
def test_wedge_graded_anticommutativity(seed):
    M = build_standard_manifold("torus2", resolution=8)
    rng = np.random.default_rng(seed)
    shape = M.chart("t").shape

    def rand_form(degree):
        comps = {m: rng.normal(size=shape) for m in masks_of_degree(2, degree)}
        return type(zero_form(M, degree))(M, degree, {"t": comps})

    for p, q in ((1, 1), (0, 1), (0, 2), (1, 2)):
        a, b = rand_form(p), rand_form(q)
        ab = wedge(a, b)
        ba = wedge(b, a)
        sign = (-1) ** (p * q)
        assert sup_norm(ab - ba * sign) < 1e-12


@settings(deadline=None, derandomize=True, max_examples=20)
@given(st.integers(0, 2 ** 31 - 1))
def test_wedge_associativity(seed):
    M = build_standard_manifold("torus3", resolution=6)
    rng = np.random.default_rng(seed)
    shape = M.chart("t").shape

    def rand_form(degree):
        comps = {m: rng.normal(size=shape) for m in masks_of_degree(3, degree)}
        return type(zero_form(M, degree))(M, degree, {"t": comps})

    a, b, c = rand_form(1), rand_form(1), rand_form(1)
    assert sup_norm(wedge(wedge(a, b), c) - wedge(a, wedge(b, c))) < 1e-12


def test_integrate_top_periodic_is_spectrally_accurate():
    M = build_standard_manifold("torus2", resolution=24)
    c = M.chart("t")
    pts = c.points()
    vals = (np.sin(2 * np.pi * pts[:, 0]) ** 2 *
            np.cos(2 * np.pi * pts[:, 1]) ** 2).reshape(c.shape)
    a = type(zero_form(M, 2))(M, 2, {"t": {3: vals}})
    assert integrate_top(M, a) == pytest.approx(0.25, abs=1e-12)


def test_interp_grid_reproduces_linear_fields():
    M = build_standard_manifold("torus2", resolution=16)
    c = M.chart("t")
    grid = (2.0 * c.points()[:, 0] - 0.5 * c.points()[:, 1]).reshape(c.shape)
    pts = np.array([[0.31, 0.47], [0.02, 0.9], [0.655, 0.111]])
    got = interp_grid(c, grid, pts)
    want = 2.0 * pts[:, 0] - 0.5 * pts[:, 1]
    assert np.max(np.abs(got - want)) < 1e-12


def test_fieldform_d_matches_analytic():
    M = build_standard_manifold("torus2", resolution=8)
    f = scalar_field(M, {"t": lambda p: np.sin(2 * np.pi * p[:, 0]) *
                         np.exp(np.cos(2 * np.pi * p[:, 1]))})
    df = f.d(step=1e-5)
    pts = np.array([[0.21, 0.68], [0.51, 0.055]])
    got = df.at("t", pts)
    want1 = (2 * np.pi * np.cos(2 * np.pi * pts[:, 0]) *
             np.exp(np.cos(2 * np.pi * pts[:, 1])))
    want2 = (np.sin(2 * np.pi * pts[:, 0]) *
             np.exp(np.cos(2 * np.pi * pts[:, 1])) *
             (-2 * np.pi * np.sin(2 * np.pi * pts[:, 1])))
    assert np.max(np.abs(got[1] - want1)) < 1e-8
    assert np.max(np.abs(got[2] - want2)) < 1e-8


def test_fieldform_dd_small():
    M = build_standard_manifold("torus2", resolution=8)
    f = scalar_field(M, {"t": lambda p: np.sin(2 * np.pi * p[:, 0]) *
                         np.cos(2 * np.pi * p[:, 1])})
    dd = f.d().d()
    pts = np.random.default_rng(1).uniform(0, 1, size=(20, 2))
    worst = max(np.max(np.abs(v)) for v in dd.at("t", pts).values())
    assert worst < 1e-5


def test_fieldform_wedge_on_against_integral():
    # int over T^2 of (a dx) ^ (b dy) with a = 2+sin(2 pi x), b = 1
    M = build_standard_manifold("torus2", resolution=32)
    ax = FieldForm(M, 1, {"t": lambda p: {1: 2.0 + np.sin(2 * np.pi * p[:, 0])}})
    by = FieldForm(M, 1, {"t": lambda p: {2: np.ones(len(p))}})
    w = ax.wedge(by)
    assert w.integrate() == pytest.approx(2.0, abs=1e-12)
    # orientation flip
    assert by.wedge(ax).integrate() == pytest.approx(-2.0, abs=1e-12)


def test_constant_field_and_algebra():
    M = build_standard_manifold("torus2", resolution=8)
    one = constant_field(M, 1.0)
    two = one + one
    pts = np.array([[0.1, 0.2]])
    assert two.at("t", pts)[0][0] == pytest.approx(2.0)
    assert (two * 0.5 - one).sup_on_nodes() < 1e-15
