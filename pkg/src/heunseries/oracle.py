"""Independent ground truth: ODE integration and tanh-sinh quadrature.

Nothing here touches the hypergeometric expansions. The integrator shares
only :func:`heun_coefficients` and a short Frobenius seed with the series
code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import (
    Branch,
    HeunParams,
    Point,
    convergence_radius,
    eval_series_all,
    frobenius_series,
    heun_coefficients,
)
from .errors import (
    InvalidParameters,
    NonintegrableEndpoint,
    PathThroughSingularity,
    ToleranceNotMet,
)

SEED_TERMS = 20
SEED_FRACTION = 0.02

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


@dataclass(frozen=True)
class IntegrationSpec:
    params: HeunParams
    seed_point: Point = Point.ZERO
    branch: Branch = Branch.FIRST
    seed_offset: float | None = None
    tolerance: float = 1e-12

    def offset(self) -> float:
        radius = convergence_radius(self.params, self.seed_point)
        off = SEED_FRACTION * radius if self.seed_offset is None else self.seed_offset
        if not 0.0 < off <= 0.1 * radius:
            raise InvalidParameters(f"seed offset {off} not in (0, {0.1 * radius}]")
        return off


def _heun_rhs(params: HeunParams):
    def rhs(z, y):
        f, g = heun_coefficients(params, z)
        return (y[1], -f * y[1] - g * y[0])
    return rhs


def dopri5(rhs, z0: float, y0: Sequence[float], targets: Sequence[float], tol: float,
           max_steps: int = 200_000) -> list[tuple[float, ...]]:
    """Integrate ``y' = rhs(z, y)`` from ``z0`` through monotone ``targets``.

    Embedded 5(4) pair with a PI step-size controller. Steps are clipped so
    that every target is hit exactly.
    """
    y = tuple(float(v) for v in y0)
    z = z0
    out = []
    if not targets:
        return out
    direction = 1.0 if targets[-1] >= z0 else -1.0
    span = abs(targets[-1] - z0)
    h = direction * min(1e-3 * max(span, 1e-3), span) if span > 0 else 0.0
    err_prev = 1.0
    steps = 0
    k1 = rhs(z, y)
    for target in targets:
        while direction * (target - z) > 0.0:
            if steps >= max_steps:
                raise ToleranceNotMet("step budget exhausted")
            steps += 1
            if direction * (z + h - target) > 0.0:
                h = target - z
            ks = [k1]
            for i in range(1, 7):
                yi = tuple(
                    y[j] + h * sum(_A[i][m] * ks[m][j] for m in range(i)) for j in range(len(y))
                )
                ks.append(rhs(z + _C[i] * h, yi))
            y_new = tuple(
                y[j] + h * sum(_B5[m] * ks[m][j] for m in range(7)) for j in range(len(y))
            )
            err = 0.0
            for j in range(len(y)):
                e = h * sum(_E[m] * ks[m][j] for m in range(7))
                scale = tol + tol * max(abs(y[j]), abs(y_new[j]))
                err = max(err, abs(e) / scale)
            if err <= 1.0:
                z = target if abs(target - (z + h)) <= 4e-16 * abs(target) else z + h
                y = y_new
                k1 = ks[6]  # FSAL
                factor = 0.9 * err ** -0.14 * err_prev ** 0.08 if err > 0.0 else 5.0
                factor = min(5.0, max(0.2, factor))
                err_prev = max(err, 1e-4)
            else:
                factor = max(0.2, 0.9 * err ** -0.2)
            h_new = h * factor
            if abs(h_new) < 1e-14 * max(1.0, abs(z)):
                raise ToleranceNotMet(f"step size underflow at z={z}")
            h = h_new
        out.append(y)
    return out


def _check_path(params: HeunParams, start: float, targets: Sequence[float], origin: float):
    lo = min([start, *targets])
    hi = max([start, *targets])
    for s in (0.0, 1.0, params.a):
        if s == origin:
            if any((t - origin) * (start - origin) <= 0.0 for t in targets):
                raise PathThroughSingularity(f"target on the far side of, or at, z={s}")
        elif lo <= s <= hi:
            raise PathThroughSingularity(f"singular point z={s} lies on the path")


def _integrate_one_side(spec: IntegrationSpec, targets: Sequence[float], side: float):
    params = spec.params
    origin = params.location(spec.seed_point)
    start = origin + side * spec.offset()
    _check_path(params, start, targets, origin)

    seed = frobenius_series(params, spec.seed_point, spec.branch, SEED_TERMS)
    u0, du0, _ = eval_series_all(seed, start)

    order = sorted(range(len(targets)), key=lambda i: side * (targets[i] - start))
    ordered = [targets[i] for i in order]
    # targets between the singular point and the seed need a backwards leg
    behind = [t for t in ordered if side * (t - start) < 0.0]
    ahead = [t for t in ordered if side * (t - start) >= 0.0]
    rhs = _heun_rhs(params)
    values = dopri5(rhs, start, (u0, du0), list(reversed(behind)), spec.tolerance)[::-1]
    values += dopri5(rhs, start, (u0, du0), ahead, spec.tolerance)
    result = [None] * len(targets)
    for i, v in zip(order, values):
        result[i] = (v[0], v[1])
    return result


def integrate_heun_many(spec: IntegrationSpec, targets: Sequence[float]) -> list[tuple[float, float]]:
    """``(u, u')`` at each target, integrating from a Frobenius seed near ``spec.seed_point``.

    Targets on either side of the seed point are integrated separately, each
    from its own seed at ``seed_offset`` from the point.
    """
    origin = spec.params.location(spec.seed_point)
    out: list = [None] * len(targets)
    for side in (1.0, -1.0):
        idx = [i for i, t in enumerate(targets) if side * (t - origin) > 0.0]
        if idx:
            vals = _integrate_one_side(spec, [targets[i] for i in idx], side)
            for i, v in zip(idx, vals):
                out[i] = v
    if any(v is None for v in out):
        raise PathThroughSingularity("target coincides with the seed point")
    return out


def integrate_heun(spec: IntegrationSpec, target: float) -> tuple[float, float]:
    return integrate_heun_many(spec, [target])[0]


@dataclass(frozen=True)
class AlgebraicIntegrand:
    """``t**p * prod((1 - scale*t)**power for scale, power in factors)``.

    The ``(1 - scale*t)`` factors are evaluated from the distance to the upper
    limit, so a singular factor that vanishes there keeps full precision.
    """

    p: float
    factors: tuple = ()

    def __call__(self, t: float, d_hi: float, hi: float) -> float:
        val = t**self.p
        for scale, power in self.factors:
            val *= ((1.0 - scale * hi) + scale * d_hi) ** power
        return val


def tanh_sinh(f: Callable[[float, float], float], lo: float, hi: float, tol: float,
              max_level: int = 12) -> float:
    """Adaptive tanh-sinh quadrature of ``f(t, hi - t)`` over ``[lo, hi]``.

    The step is halved until two successive estimates agree to
    ``tol * (1 + |I|)``.
    """
    half = 0.5 * (hi - lo)
    t_max = 6.5

    def node(u):
        w = 0.5 * math.pi * math.sinh(u)
        # (1 + tanh(w))/2 and (1 - tanh(w))/2 without cancellation
        if w >= 0.0:
            e = math.exp(-2.0 * w)
            right = e / (1.0 + e)
            left = 1.0 / (1.0 + e)
        else:
            e = math.exp(2.0 * w)
            left = e / (1.0 + e)
            right = 1.0 / (1.0 + e)
        weight = 0.5 * math.pi * math.cosh(u) * 4.0 * left * right
        return lo + 2.0 * half * left, 2.0 * half * right, weight

    def contribution(u):
        t, d_hi, w = node(u)
        if w == 0.0 or t <= lo or d_hi <= 0.0:
            return 0.0
        return half * w * f(t, d_hi)

    h = 1.0
    total = contribution(0.0)
    k = 1
    while k * h <= t_max:
        total += contribution(k * h) + contribution(-k * h)
        k += 1
    estimate = total * h
    for _ in range(max_level):
        h *= 0.5
        k = 1
        while k * h <= t_max:
            total += contribution(k * h) + contribution(-k * h)
            k += 2
        new = total * h
        if abs(new - estimate) <= tol * (1.0 + abs(new)):
            return new
        estimate = new
    raise ToleranceNotMet(f"tanh-sinh did not reach tolerance {tol}")


def adaptive_quadrature(integrand, upper: float, tolerance: float = 1e-12, lower: float = 0.0) -> float:
    """Integrate over ``[lower, upper]`` with tanh-sinh.

    ``integrand`` is either an :class:`AlgebraicIntegrand` or a plain callable
    of ``t``.
    """
    if isinstance(integrand, AlgebraicIntegrand):
        if lower == 0.0 and integrand.p <= -1.0:
            raise NonintegrableEndpoint(f"t**{integrand.p} is not integrable at 0")
        fn = lambda t, d_hi: integrand(t, d_hi, upper)  # noqa: E731
    else:
        fn = lambda t, d_hi: integrand(t)  # noqa: E731
    if upper == lower:
        return 0.0
    if upper < lower:
        raise ValueError("upper limit below lower limit")
    return tanh_sinh(fn, lower, upper, tolerance)
