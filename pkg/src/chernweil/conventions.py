"""Normalization and orientation conventions, fixed once for the package.

Every sign or 2*pi factor that the characteristic-form machinery depends on
is declared here and nowhere else.  The test suite asserts each entry by an
independent miniature computation, so a change here fails loudly.

Normalizations
--------------
* Chern forms:            c(Omega) = det(I + CHERN_FACTOR * Omega),
                          CHERN_FACTOR = i / (2 pi).
* Chern character:        ch(Omega) = tr exp(CHERN_FACTOR * Omega).
                          With this choice the degree-2 part of ch equals
                          c_1 for line bundles.
* Euler/Pfaffian forms:   Pf~(Omega) = Pfaff(PFAFFIAN_FACTOR * Omega),
                          PFAFFIAN_FACTOR = -1 / (2 pi), with the standard
                          combinatorial Pfaffian Pfaff([[0, a], [-a, 0]]) = a.
                          Hence Pf~([[0, a], [-a, 0]]) = -a / (2 pi).
* Pontryagin forms:       coefficients of det(I - Omega / (2 pi)) in degree 4k.
* A-hat inverse:          det^{1/2}( sinh(X)/X ) at X = AHAT_FACTOR * Omega,
                          AHAT_FACTOR = 1 / (4 pi).
* Instanton 4-forms:      INSTANTON_FACTOR * tr(Omega ^ Omega),
                          INSTANTON_FACTOR = 1 / (16 pi^2).

Oriented rank-2 real bundles
----------------------------
A metric-oriented rank-2 real bundle is stored and manipulated through its
complex line realization.  The realization used everywhere is

    z = u1 - i * u2          (REALIFICATION_SIGN = -1),

where (u1, u2) are components in an oriented orthonormal frame.  With this
choice, for the stored real curvature,

    Pf~(Omega_real) = c_1-form of the complex realization,

so Euler integrals computed from the Pfaffian agree with winding numbers of
stored section representatives.  The induced orientation of the fiber is
the complex one, which in (u1, u2) components is du2 ^ du1; fiber
integration weights carry the sign FIBER_ORIENTATION_SIGN = -1 relative to
the coordinate order (u1, u2).

Thom family parameterization
----------------------------
The smoothing profile chi enters transplanted connections as
chi(|alpha|^2 / s).  The Thom family tau_s is parameterized by a *length*
scale: tau_s uses the profile chi(|u|^2 / s^2).  With that choice the
compact mode is supported in {|u| <= s} and the sqrt mode reproduces the
closed-form family with prefactor s / sqrt(|u|^2 + s^2).

The explicit closed form is assembled as

    tau_s = s/sqrt(|u|^2+s^2) * Pf~( Du^t Du / (|u|^2+s^2) + Omega ),

i.e. the curvature enters the Pfaffian argument with a plus sign under the
curvature convention Omega = d omega + omega ^ omega used throughout this
package (THOM_CURVATURE_SIGN = +1).  Both Thom code paths then restrict to
Pf~(Omega) on the zero section and have fiber integral +1.

Riemann-Roch orientation
------------------------
On a surface the spinor check reads

    c_1(S+) - c_1(S-) = RR_DIVISOR_SIGN * ( Div(alpha) + (i/2pi) d sigma ),

with RR_DIVISOR_SIGN = -1 fixed once on the tangent-bundle-over-S^2
scenario (the divisor of the Clifford map of a rotational vector field has
total mass +2 while the c_1 difference integrates to -2).
"""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi

# i/(2 pi): Chern and Chern-character normalization.
CHERN_FACTOR = 1j / TWO_PI

# -1/(2 pi): argument scaling inside the Pfaffian for Euler forms.
PFAFFIAN_FACTOR = -1.0 / TWO_PI

# -1/(2 pi): argument scaling inside det(I - Omega/2pi) for Pontryagin forms.
PONTRYAGIN_FACTOR = -1.0 / TWO_PI

# 1/(4 pi): argument scaling inside det^{1/2}(sinh X / X).
AHAT_FACTOR = 1.0 / (4.0 * math.pi)

# 1/(16 pi^2): instanton 4-form normalization.
INSTANTON_FACTOR = 1.0 / (16.0 * math.pi ** 2)

# Complex realization of oriented rank-2 real bundles: z = u1 - i u2.
REALIFICATION_SIGN = -1

# Fiber orientation of oriented rank-2 fibers relative to coordinate order
# (u1, u2): the positive fiber volume form is du2 ^ du1.
FIBER_ORIENTATION_SIGN = -1

# Curvature sign inside the explicit Thom closed form (see module docstring).
THOM_CURVATURE_SIGN = +1

# tau_s smoothing profile is chi(|u|^2 / s**THOM_PARAM_POWER).
THOM_PARAM_POWER = 2

# Orientation constant relating the spinor c_1 difference to the divisor.
RR_DIVISOR_SIGN = -1
