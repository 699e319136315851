"""Shared fixtures.

Heavy objects (manifolds, total spaces, spinor pairs) are built once per
session; all tests treat them as immutable.
"""

import numpy as np
import pytest

from chernweil.bundles import (DeclaredSingularity, flat_bundle,
                               fubini_study_bundle, get_mode,
                               oriented_round_sphere_bundle, section_map)
from chernweil.meshes import build_standard_manifold
from chernweil.spinor import build_spinor_pair
from chernweil.thom import build_total_space


@pytest.fixture(scope="session")
def cp1_64():
    return build_standard_manifold("cp1", resolution=64)


@pytest.fixture(scope="session")
def torus2_48():
    return build_standard_manifold("torus2", resolution=48)


@pytest.fixture(scope="session")
def sphere_96():
    return build_standard_manifold("sphere2_stereographic", resolution=96)


@pytest.fixture(scope="session")
def o1_section(cp1_64):
    """Degree-1 line bundle section with one simple zero at the north origin."""
    bundle = fubini_study_bundle(cp1_64, 1)
    sing = [DeclaredSingularity("north", (0.0, 0.0), 0.2)]
    return section_map(
        bundle,
        {"north": lambda pts: pts[:, 0] + 1j * pts[:, 1],
         "south": lambda pts: np.ones(len(pts), dtype=complex)},
        sing)


@pytest.fixture(scope="session")
def o2_section(cp1_64):
    """Degree-2 line bundle section with simple zeros at both poles."""
    bundle = fubini_study_bundle(cp1_64, 2)
    sing = [DeclaredSingularity("north", (0.0, 0.0), 0.2),
            DeclaredSingularity("south", (0.0, 0.0), 0.2)]

    def ev(pts):
        return pts[:, 0] + 1j * pts[:, 1]

    return section_map(bundle, {"north": ev, "south": ev}, sing)


@pytest.fixture(scope="session")
def spinor_sphere(sphere_96):
    V = oriented_round_sphere_bundle(sphere_96)
    return V, build_spinor_pair(V, -1)


@pytest.fixture(scope="session")
def flat_total_space():
    base = build_standard_manifold("torus2", resolution=16)
    E = flat_bundle(base, 2, "real", name="plane", oriented=True)
    return build_total_space(base, E, radius=8.0, fiber_resolution=24,
                             modes=(get_mode("sqrt"), get_mode("compact")))


@pytest.fixture(scope="session")
def sphere_total_space():
    sph = build_standard_manifold("sphere2_stereographic", resolution=24)
    V = oriented_round_sphere_bundle(sph)
    return build_total_space(sph, V, radius=8.0, fiber_resolution=24)
