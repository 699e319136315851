"""Charts, transitions, partitions of unity, and singular quadrature."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from chernweil.errors import ConfigError, NumericalSingularityError, UsageError
from chernweil.meshes import (QuadratureRule, SingularPoint,
                              build_standard_manifold, integrate_scalar,
                              partition_weights_at, refine_manifold)


def test_standard_names():
    for name, dim, ncharts in (("torus2", 2, 1), ("torus3", 3, 1),
                               ("cp1", 2, 2), ("sphere2_stereographic", 2, 2)):
        M = build_standard_manifold(name, resolution=8)
        assert M.dim == dim
        assert len(M.charts) == ncharts
    with pytest.raises(ConfigError):
        build_standard_manifold("klein_bottle")


def test_chart_geometry():
    M = build_standard_manifold("torus2", resolution=10)
    c = M.chart("t")
    assert c.dim == 2
    nodes = c.axis_nodes(0)
    assert len(nodes) == 10
    assert c.spacing(0) == pytest.approx(nodes[1] - nodes[0])
    assert c.points().shape == (100, 2)


def test_sphere_transition_involution():
    M = build_standard_manifold("cp1", resolution=16)
    tr = M.transitions_from("north")[0]
    pts = np.array([[0.8, 0.3], [1.2, -0.5], [0.4, 1.1]])
    back = tr.apply(tr.apply(pts))
    assert np.max(np.abs(back - pts)) < 1e-12
    # z -> 1/z has |jacobian det| = 1/|z|^4
    jac = tr.jacobian_at(pts)
    det = np.abs(jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0])
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    assert np.max(np.abs(det - 1.0 / r2 ** 2)) < 1e-6


def test_partition_of_unity_on_overlap():
    M = build_standard_manifold("cp1", resolution=16)
    rng = np.random.default_rng(0)
    r = rng.uniform(0.3, 2.2, size=40)
    th = rng.uniform(0.0, 2 * np.pi, size=40)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    for chart in ("north", "south"):
        total = partition_weights_at(M, chart, pts)
        assert np.max(np.abs(total - 1.0)) < 1e-12


def test_torus_unit_volume():
    M = build_standard_manifold("torus2", resolution=32)
    got = integrate_scalar(M, {"t": lambda pts: np.ones(len(pts))})
    assert got == pytest.approx(1.0, abs=1e-12)


def test_sphere_partition_integrates_smooth_function():
    # the blended two-chart sum must agree with a single-chart oracle for
    # a function supported inside one chart box
    M = build_standard_manifold("cp1", resolution=128)

    def bump(pts):
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        out = np.zeros(len(pts))
        inside = r2 < 0.25
        out[inside] = np.exp(-1.0 / (0.25 - r2[inside]))
        return out

    got = integrate_scalar(M, {"north": bump,
                               "south": lambda pts: np.zeros(len(pts))})
    oracle = 2 * math.pi * quad(
        lambda r: r * math.exp(-1.0 / (0.25 - r * r)), 0.0, 0.5)[0]
    assert got == pytest.approx(oracle, rel=1e-6)


def test_singular_quadrature_against_quad_oracle():
    # r^(-1/2) bump supported inside the patch core (r <= radius/2, where
    # the grid weight is killed exactly): the graded polar rule alone must
    # match a 1D adaptive oracle far beyond what the trapezoid grid can do
    rho, supp = 0.3, 0.12
    sp = SingularPoint("north", (0.0, 0.0), rho)
    M = build_standard_manifold("cp1", resolution=64, singular_points=[sp],
                                rule=QuadratureRule(rings=128, angular=64))

    def f(pts):
        r = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2)
        out = np.zeros(len(pts))
        inside = r < supp
        rr = r[inside]
        with np.errstate(divide="ignore"):
            out[inside] = (1.0 - (rr / supp) ** 2) ** 4 / np.sqrt(
                np.maximum(rr, 1e-300))
        return out

    got = integrate_scalar(M, {"north": f,
                               "south": lambda pts: np.zeros(len(pts))})
    oracle = 2 * math.pi * quad(
        lambda r: math.sqrt(r) * (1 - (r / supp) ** 2) ** 4, 0.0, supp)[0]
    assert got == pytest.approx(oracle, rel=1e-6)


def test_undeclared_singularity_is_refused():
    # odd resolution puts a node at the origin, where 1/r blows up
    M = build_standard_manifold("cp1", resolution=33)

    def f(pts):
        r = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2)
        with np.errstate(divide="ignore"):
            return 1.0 / r

    with pytest.raises(NumericalSingularityError):
        integrate_scalar(M, {"north": f, "south": lambda pts: np.zeros(len(pts))})


def test_refine_doubles_nodes():
    M = build_standard_manifold("torus2", resolution=12)
    R = refine_manifold(M, 2)
    assert len(R.chart("t").axis_nodes(0)) == 24


def test_rule_validation():
    with pytest.raises(UsageError):
        QuadratureRule(rings=1)
    with pytest.raises(UsageError):
        QuadratureRule(grading=0.5)
    with pytest.raises(UsageError):
        SingularPoint("north", (0.0, 0.0), 0.0)
