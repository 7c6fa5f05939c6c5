"""Heun's general equation: parameters, coefficients and Frobenius series.

The equation in canonical form is::

    u'' + (gamma/z + delta/(z-1) + epsilon/(z-a)) u' + (alpha*beta*z - q)/(z(z-1)(z-a)) u = 0

with the Fuchsian constraint ``1 + alpha + beta = gamma + delta + epsilon``.

Local solutions are written ``|z - p|**rho * sum(c[n] * (z - p)**n)``. Using
``|z - p|`` instead of ``(z - p)`` keeps every value real on both sides of
the expansion point; the two differ by a constant phase only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from numpy.polynomial import Polynomial

from .errors import (
    DegenerateExponents,
    FuchsianViolation,
    InvalidTermCount,
    NonconvergentSeries,
    OutsideConvergenceDomain,
    PoleEvaluation,
    SingularityCollision,
)

FUCHS_TOL = 1e-12
SERIES_CAP = 1000
SERIES_RTOL = 1e-16
#: consecutive small terms required before a sum is declared converged
SMALL_RUN = 3


class Point(enum.Enum):
    ZERO = "0"
    ONE = "1"
    A = "a"
    INFINITY = "inf"


class Branch(enum.Enum):
    FIRST = "first"
    SECOND = "second"


FINITE_POINTS = (Point.ZERO, Point.ONE, Point.A)


class SingularData:
    """Location and exponent lookups shared by every parameter record.

    Frobenius recurrences need only ``a``, ``q``, ``ab`` (= alpha*beta) and
    the three finite exponent parameters, so anything providing those can be
    expanded.
    """

    def location(self, point: Point) -> float:
        if point is Point.ZERO:
            return 0.0
        if point is Point.ONE:
            return 1.0
        if point is Point.A:
            return self.a
        raise ValueError("the point at infinity has no finite location")

    def local_exponent(self, point: Point) -> float:
        """Exponent parameter attached to a finite point (gamma, delta or epsilon)."""
        return {Point.ZERO: self.gamma, Point.ONE: self.delta, Point.A: self.epsilon}[point]


@dataclass(frozen=True)
class HeunParams(SingularData):
    """The seven parameters of Heun's general equation.

    Construct through :func:`validate_params` when epsilon should be
    filled in from the Fuchsian condition.
    """

    a: float
    q: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float

    def __post_init__(self):
        for name in ("a", "q", "alpha", "beta", "gamma", "delta", "epsilon"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise FuchsianViolation(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.a == 0.0 or self.a == 1.0:
            raise SingularityCollision(f"a={self.a} merges with a fixed singularity")
        if abs(self.fuchs_residual) > FUCHS_TOL:
            raise FuchsianViolation(
                f"1 + alpha + beta - (gamma + delta + epsilon) = {self.fuchs_residual:.3e}"
            )

    @property
    def fuchs_residual(self) -> float:
        return 1.0 + self.alpha + self.beta - (self.gamma + self.delta + self.epsilon)

    @property
    def ab(self) -> float:
        return self.alpha * self.beta

    def replace(self, **changes) -> "HeunParams":
        fields = dict(
            a=self.a, q=self.q, alpha=self.alpha, beta=self.beta,
            gamma=self.gamma, delta=self.delta, epsilon=self.epsilon,
        )
        fields.update(changes)
        return HeunParams(**fields)


def validate_params(a, q, alpha, beta, gamma, delta, epsilon=None) -> HeunParams:
    """Build :class:`HeunParams`, resolving epsilon from the Fuchsian condition if omitted."""
    if epsilon is None:
        epsilon = 1.0 + alpha + beta - gamma - delta
    return HeunParams(a, q, alpha, beta, gamma, delta, epsilon)


def heun_coefficients(params: HeunParams, z: float) -> tuple[float, float]:
    """Return ``(f, g)``, the coefficients of ``u'`` and ``u`` at ``z``."""
    p = params
    if z == 0.0 or z == 1.0 or z == p.a:
        raise PoleEvaluation(f"z={z} is a singular point")
    f = p.gamma / z + p.delta / (z - 1.0) + p.epsilon / (z - p.a)
    g = (p.ab * z - p.q) / (z * (z - 1.0) * (z - p.a))
    return f, g


class Exponents(NamedTuple):
    first: float
    second: float

    @property
    def degenerate(self) -> bool:
        """True when the exponents differ by an integer (logarithmic case)."""
        diff = self.second - self.first
        return abs(diff - round(diff)) < 1e-12


def indicial_exponents(params: HeunParams, point: Point) -> Exponents:
    if point is Point.INFINITY:
        if not hasattr(params, "alpha"):
            raise ValueError("exponents at infinity need alpha and beta individually")
        return Exponents(params.alpha, params.beta)
    return Exponents(0.0, 1.0 - params.local_exponent(point))


def convergence_radius(params: HeunParams, point: Point) -> float:
    a = params.a
    if point is Point.ZERO:
        return min(1.0, abs(a))
    if point is Point.ONE:
        return min(1.0, abs(a - 1.0))
    if point is Point.A:
        return min(abs(a), abs(a - 1.0))
    raise ValueError("convergence radius is defined for finite points only")


@dataclass(frozen=True)
class LocalSeries:
    point: Point
    location: float
    exponent: float
    coeffs: tuple
    radius: float

    def __len__(self):
        return len(self.coeffs)


def _shifted_polynomials(params: HeunParams, p: float):
    """Coefficients of the equation multiplied through by z(z-1)(z-a), in powers of x = z - p."""
    a, ga, de, ep = params.a, params.gamma, params.delta, params.epsilon
    z = Polynomial([0.0, 1.0])
    p2 = z * (z - 1.0) * (z - a)
    p1 = ga * (z - 1.0) * (z - a) + de * z * (z - a) + ep * z * (z - 1.0)
    p0 = params.ab * z - params.q
    shift = Polynomial([p, 1.0])
    out = []
    for poly, size in ((p2, 4), (p1, 3), (p0, 2)):
        c = [0.0] * size
        shifted = poly(shift).coef.tolist()
        c[: len(shifted)] = shifted[:size]
        out.append(c)
    out[0][0] = 0.0  # p is a root of z(z-1)(z-a)
    return out


def frobenius_series(
    params: HeunParams, point: Point, branch: Branch = Branch.FIRST, n_terms: int = SERIES_CAP
) -> LocalSeries:
    """Frobenius solution at a finite singular point, normalized to ``c[0] = 1``.

    The three-term recurrence is generated by substituting the ansatz into the
    equation; nothing is specialised per point. Coefficient generation stops
    early if the values overflow.
    """
    if point not in FINITE_POINTS:
        raise ValueError("Frobenius series are built at finite singular points only")
    if n_terms < 1:
        raise InvalidTermCount(f"need at least one term, got {n_terms}")
    exps = indicial_exponents(params, point)
    if branch is Branch.SECOND and exps.degenerate:
        raise DegenerateExponents(
            f"integer exponent difference {exps.second - exps.first:g} at {point.value}"
        )
    rho = exps.first if branch is Branch.FIRST else exps.second
    loc = params.location(point)
    (_, a1, a2, a3), (b0, b1, b2), (c0, c1) = _shifted_polynomials(params, loc)

    coeffs = [1.0]
    prev2, prev1 = 0.0, 1.0
    for n in range(1, n_terms):
        r = n + rho
        den = r * (r - 1.0) * a1 + r * b0
        if abs(den) <= 1e-13 * (abs(r * (r - 1.0) * a1) + abs(r * b0) + 1.0):
            raise DegenerateExponents(f"recurrence denominator vanishes at n={n}")
        r1 = r - 1.0
        r2 = r - 2.0
        num = prev1 * (r1 * (r1 - 1.0) * a2 + r1 * b1 + c0)
        num += prev2 * (r2 * (r2 - 1.0) * a3 + r2 * b2 + c1)
        cn = float(-num / den)
        if not math.isfinite(cn):
            break
        coeffs.append(cn)
        prev2, prev1 = prev1, cn

    return LocalSeries(point, loc, rho, tuple(coeffs), convergence_radius(params, point))


def _series_values(series: LocalSeries, z: float, order: int):
    """Value and derivatives up to ``order`` of a local series at ``z``."""
    x = z - series.location
    if abs(x) >= series.radius:
        raise OutsideConvergenceDomain(
            f"|z - {series.location:g}| = {abs(x):g} is not below radius {series.radius:g}"
        )
    rho = series.exponent
    if x == 0.0:
        if rho == 0.0 and order == 0:
            return [series.coeffs[0]]
        raise PoleEvaluation("series evaluated at its own expansion point")

    sums = [0.0] * (order + 1)
    small = [0] * (order + 1)
    pw = 1.0
    done = False
    for n, c in enumerate(series.coeffs):
        r = n + rho
        fac = 1.0
        # each derivative lowers the power of x by one and multiplies by (r - k)
        for k in range(order + 1):
            term = c * fac * pw
            sums[k] += term
            if abs(term) <= SERIES_RTOL * abs(sums[k]):
                small[k] += 1
            else:
                small[k] = 0
            fac *= (r - k) / x
        if min(small) >= SMALL_RUN:
            done = True
            break
        pw *= x
    if not done:
        raise NonconvergentSeries(
            f"{len(series.coeffs)} terms did not converge at z={z:g}"
        )
    scale = abs(x) ** rho if rho != 0.0 else 1.0
    return [s * scale for s in sums]


def eval_series(series: LocalSeries, z: float) -> float:
    return _series_values(series, z, 0)[0]


def eval_series_derivative(series: LocalSeries, z: float) -> float:
    return _series_values(series, z, 1)[1]


def eval_series_all(series: LocalSeries, z: float) -> tuple[float, float, float]:
    """``(u, u', u'')`` at ``z``."""
    u, du, d2u = _series_values(series, z, 2)
    return u, du, d2u


def ode_residual(params: HeunParams, series: LocalSeries, z: float, relative: bool = False) -> float:
    """``u'' + f u' + g u`` from the termwise-differentiated series.

    With ``relative=True`` the residual is divided by the largest of the
    three summands.
    """
    f, g = heun_coefficients(params, z)
    u, du, d2u = eval_series_all(series, z)
    res = d2u + f * du + g * u
    if not relative:
        return res
    scale = max(abs(d2u), abs(f * du), abs(g * u))
    return abs(res) / scale if scale > 0.0 else abs(res)


def sample_points(series: LocalSeries, fractions: Sequence[float]) -> list[float]:
    """Points ``location + fraction * radius``; negative fractions sample the other side."""
    return [series.location + fr * series.radius for fr in fractions]
