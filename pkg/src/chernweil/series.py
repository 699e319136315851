"""Exact-rational truncated series and the graded commutative ring.

Characteristic-class generating functions (Todd, inverse A-hat, total
Chern) are derived here once, in Fraction arithmetic, and only then
substituted with floating-point curvature data.  Keeping the derivation
exact means series coefficients can be asserted with == in tests.

Two layers:

* one-variable truncated power series as plain coefficient lists
  [a_0, a_1, ...] of Fractions, with product, inverse, exp, log;
* GradedSeries, a commutative polynomial ring whose variables carry
  even degrees (c_1 has degree 2, c_2 degree 4, ...) and whose terms
  above the truncation degree are dropped on every operation.

Everything is immutable and hash-free (dict-backed); comparisons are
exact.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ConfigError, UsageError

__all__ = [
    "series_mul",
    "series_inv",
    "series_exp",
    "series_log",
    "todd_series",
    "sinhc_series",
    "log_todd_series",
    "log_sinhc_half_series",
    "GradedSeries",
    "graded_variable",
    "graded_constant",
    "chern_variables",
    "parse_polynomial",
    "residue_quotient_series",
]

Series1 = list  # one-variable truncated series: index = power, entries Fraction


# ---------------------------------------------------------------------------
# one-variable series
# ---------------------------------------------------------------------------

def _pad(a: Series1, order: int) -> Series1:
    a = list(a[: order + 1])
    return a + [Fraction(0)] * (order + 1 - len(a))


def series_mul(a: Series1, b: Series1, order: int) -> Series1:
    a, b = _pad(a, order), _pad(b, order)
    out = [Fraction(0)] * (order + 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j in range(order + 1 - i):
            if b[j]:
                out[i + j] += ai * b[j]
    return out


def series_inv(a: Series1, order: int) -> Series1:
    a = _pad(a, order)
    if a[0] == 0:
        raise UsageError("series inverse needs a unit constant term")
    inv = [Fraction(0)] * (order + 1)
    inv[0] = 1 / a[0]
    for n in range(1, order + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            acc += a[k] * inv[n - k]
        inv[n] = -acc / a[0]
    return inv


def series_exp(a: Series1, order: int) -> Series1:
    a = _pad(a, order)
    if a[0] != 0:
        raise UsageError("series exp needs zero constant term")
    # e' = a' e  =>  n e_n = sum_{k=1..n} k a_k e_{n-k}
    e = [Fraction(0)] * (order + 1)
    e[0] = Fraction(1)
    for n in range(1, order + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            acc += k * a[k] * e[n - k]
        e[n] = acc / n
    return e


def series_log(a: Series1, order: int) -> Series1:
    a = _pad(a, order)
    if a[0] != 1:
        raise UsageError("series log needs constant term 1")
    # l' = a'/a  =>  n a_0 l_n = n a_n - sum_{k=1..n-1} k l_k a_{n-k}
    l = [Fraction(0)] * (order + 1)
    for n in range(1, order + 1):
        acc = n * a[n]
        for k in range(1, n):
            acc -= k * l[k] * a[n - k]
        l[n] = acc / n
    return l


def todd_series(order: int) -> Series1:
    """x / (1 - e^{-x}) as a truncated series."""
    # (1 - e^{-x})/x = sum_{k>=0} (-1)^k x^k / (k+1)!
    den = [Fraction((-1) ** k, math.factorial(k + 1)) for k in range(order + 1)]
    return series_inv(den, order)


def log_todd_series(order: int) -> Series1:
    return series_log(todd_series(order), order)


def sinhc_series(order: int) -> Series1:
    """sinh(x)/x: even series 1 + x^2/6 + x^4/120 + ..."""
    out = [Fraction(0)] * (order + 1)
    for k in range(0, order + 1, 2):
        out[k] = Fraction(1, math.factorial(k + 1))
    return out


def log_sinhc_half_series(order: int) -> Series1:
    """(1/2) log(sinh(x)/x); the per-eigenvalue log of the inverse A-hat."""
    return [c / 2 for c in series_log(sinhc_series(order), order)]


# ---------------------------------------------------------------------------
# graded commutative ring
# ---------------------------------------------------------------------------

Exponents = tuple  # one integer exponent per variable


@dataclass(frozen=True)
class GradedSeries:
    """Polynomial in commuting variables of even degree, truncated by degree."""

    variables: tuple[tuple[str, int], ...]
    terms: Mapping[Exponents, Fraction]
    truncation: int

    def __post_init__(self):
        for name, deg in self.variables:
            if deg % 2 or deg <= 0:
                raise UsageError(f"variable {name} must have positive even degree")
        clean = {}
        for exps, coeff in self.terms.items():
            if len(exps) != len(self.variables):
                raise UsageError("exponent tuple rank mismatch")
            coeff = Fraction(coeff)
            if coeff and self._degree(exps) <= self.truncation:
                clean[tuple(int(e) for e in exps)] = coeff
        object.__setattr__(self, "terms", clean)

    def _degree(self, exps: Exponents) -> int:
        return sum(e * deg for e, (_, deg) in zip(exps, self.variables))

    def _zero_exps(self) -> Exponents:
        return (0,) * len(self.variables)

    # -- ring operations -----------------------------------------------------

    def _like(self, terms) -> "GradedSeries":
        return GradedSeries(self.variables, terms, self.truncation)

    def _check(self, other: "GradedSeries") -> None:
        if self.variables != other.variables or self.truncation != other.truncation:
            raise UsageError("graded series rings differ")

    def __add__(self, other: "GradedSeries") -> "GradedSeries":
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return self._like(terms)

    def __sub__(self, other: "GradedSeries") -> "GradedSeries":
        return self + other.scale(-1)

    def scale(self, c) -> "GradedSeries":
        c = Fraction(c)
        return self._like({e: c * v for e, v in self.terms.items()})

    def __mul__(self, other: "GradedSeries") -> "GradedSeries":
        self._check(other)
        terms: dict[Exponents, Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                if self._degree(e) > self.truncation:
                    continue
                terms[e] = terms.get(e, Fraction(0)) + ca * cb
        return self._like(terms)

    def power(self, k: int) -> "GradedSeries":
        if k < 0:
            raise UsageError("negative power")
        out = graded_constant(self.variables, 1, self.truncation)
        for _ in range(k):
            out = out * self
        return out

    def inverse(self) -> "GradedSeries":
        """Geometric-series inverse; constant term must be a unit."""
        c0 = self.terms.get(self._zero_exps(), Fraction(0))
        if c0 == 0:
            raise UsageError("graded series inverse needs a unit constant term")
        one = graded_constant(self.variables, 1, self.truncation)
        n = self * graded_constant(self.variables, 1 / c0, self.truncation)
        x = one - n                     # nilpotent part
        out, xp = one, one
        # degree of every term of x is >= 2, so x^(trunc/2+1) = 0
        for _ in range(self.truncation // 2 + 1):
            xp = xp * x
            if not xp.terms:
                break
            out = out + xp
        return out.scale(1 / c0)

    # -- inspection ------------------------------------------------------------

    def component(self, degree: int) -> "GradedSeries":
        return self._like({e: c for e, c in self.terms.items()
                           if self._degree(e) == degree})

    def coefficient(self, exps: Exponents) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def max_degree(self) -> int:
        return max((self._degree(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        keyed = sorted(self.terms.items(),
                       key=lambda ec: (self._degree(ec[0]), ec[0]))
        chunks = []
        for exps, coeff in keyed:
            factors = []
            for (name, _), e in zip(self.variables, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mono = "*".join(factors)
            mag = abs(coeff)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not chunks:
                chunks.append(body if coeff > 0 else f"-{body}")
            else:
                chunks.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(chunks)


def graded_constant(variables, value, truncation: int) -> GradedSeries:
    variables = tuple(variables)
    zero = (0,) * len(variables)
    return GradedSeries(variables, {zero: Fraction(value)}, truncation)


def graded_variable(variables, name: str, truncation: int) -> GradedSeries:
    variables = tuple(variables)
    idx = [i for i, (n, _) in enumerate(variables) if n == name]
    if not idx:
        raise UsageError(f"unknown variable {name!r}")
    exps = tuple(1 if i == idx[0] else 0 for i in range(len(variables)))
    return GradedSeries(variables, {exps: Fraction(1)}, truncation)


def chern_variables(count: int) -> tuple[tuple[str, int], ...]:
    """Variables c1..c_count with degree 2k (the usual form degrees)."""
    return tuple((f"c{k}", 2 * k) for k in range(1, count + 1))


# ---------------------------------------------------------------------------
# one-variable polynomial input ("u^2 - 3*u")
# ---------------------------------------------------------------------------

_TERM = re.compile(
    r"""^\s*
        (?P<coeff>\d+(?:/\d+)?)?          # optional rational coefficient
        \s*(?P<star>\*)?\s*
        (?P<var>[a-zA-Z_]\w*)?            # optional variable
        (?:\^(?P<pow>\d+))?               # optional power
        \s*$""",
    re.VERBOSE,
)


def parse_polynomial(text: str, variable_degree: int = 2,
                     truncation: int | None = None) -> GradedSeries:
    """Parse a one-variable polynomial with rational coefficients.

    Grammar: terms joined by + or -, each term ``coeff``, ``u^k``, or
    ``coeff*u^k``.  The variable name is taken from the input; mixed
    names are rejected.
    """
    text = text.strip()
    if not text:
        raise ConfigError("empty polynomial")
    # split into signed terms; +/- separates terms unless it follows * ^ /
    pieces: list[tuple[int, str]] = []
    sign, buf, prev = 1, [], ""
    for ch in text:
        if ch in "+-" and prev and prev not in "*^/":
            pieces.append((sign, "".join(buf)))
            sign, buf = (1 if ch == "+" else -1), []
        elif ch in "+-" and not prev and not buf and not pieces:
            sign = 1 if ch == "+" else -1
        else:
            buf.append(ch)
        if ch != " ":
            prev = ch
    pieces.append((sign, "".join(buf)))

    var_name = None
    parsed: list[tuple[int, Fraction, int]] = []
    for sgn, term in pieces:
        m = _TERM.match(term)
        if not m or (m.group("coeff") is None and m.group("var") is None):
            raise ConfigError(f"cannot parse polynomial term {term.strip()!r}")
        if m.group("star") and (m.group("coeff") is None or m.group("var") is None):
            raise ConfigError(f"cannot parse polynomial term {term.strip()!r}")
        coeff = Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1)
        name = m.group("var")
        power = int(m.group("pow")) if m.group("pow") else (1 if name else 0)
        if name is not None:
            if var_name is None:
                var_name = name
            elif name != var_name:
                raise ConfigError(
                    f"polynomial mixes variables {var_name!r} and {name!r}")
        parsed.append((sgn, coeff, power))

    var_name = var_name or "u"
    max_pow = max(p for _, _, p in parsed)
    trunc = truncation if truncation is not None else max_pow * variable_degree
    variables = ((var_name, variable_degree),)
    terms: dict[Exponents, Fraction] = {}
    for sgn, coeff, power in parsed:
        e = (power,)
        terms[e] = terms.get(e, Fraction(0)) + sgn * coeff
    return GradedSeries(variables, terms, trunc)


# ---------------------------------------------------------------------------
# residue quotient, symbolically
# ---------------------------------------------------------------------------

def residue_quotient_series(phi: GradedSeries) -> GradedSeries:
    """Q(f, e) with Q * (f - e) = phi(f) - phi(e), exactly.

    ``phi`` must be a one-variable polynomial; the result lives in the
    two-variable ring (f, e), both of the same degree as phi's variable,
    truncated high enough to keep the identity exact.
    """
    if len(phi.variables) != 1:
        raise UsageError("residue quotient needs a one-variable polynomial")
    (vname, vdeg), = phi.variables
    max_pow = max((e[0] for e in phi.terms), default=0)
    trunc = max(0, (max_pow - 1)) * vdeg * 2 + vdeg * 2
    variables = (("f", vdeg), ("e", vdeg))
    terms: dict[Exponents, Fraction] = {}
    for (k,), coeff in phi.terms.items():
        # u^k contributes sum_{i+j=k-1} f^i e^j
        for i in range(k):
            j = k - 1 - i
            e = (i, j)
            terms[e] = terms.get(e, Fraction(0)) + coeff
    return GradedSeries(variables, terms, trunc)
