"""Gauss 2F1, incomplete beta, Appell F1 and the antiderivative building blocks.

All evaluators sum their defining power series directly inside the unit
disk; there are no analytic-continuation formulas. Summation stops after
three consecutive terms fall below ``1e-16`` of the running sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SERIES_CAP, SERIES_RTOL, SMALL_RUN, HeunParams
from .errors import (
    InvalidParameters,
    NonconvergentSeries,
    OutsideConvergenceDomain,
)


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and abs(x - round(x)) < 1e-14


@dataclass(frozen=True)
class Gauss2F1Spec:
    """Parameters of 2F1 stored in sum-product form.

    Only ``A + B`` and ``A * B`` enter the term ratio, since
    ``(A + k)(B + k) = A*B + k*(A + B) + k**2``; the individual numerator
    parameters may be complex while the series stays real.
    """

    s: float
    p: float
    c: float

    @classmethod
    def from_abc(cls, a: float, b: float, c: float) -> "Gauss2F1Spec":
        return cls(a + b, a * b, c)


def gauss_2f1(spec: Gauss2F1Spec, z: float, n_max: int = SERIES_CAP) -> float:
    terms = gauss_2f1_terms(spec, z, n_max)
    return math.fsum(terms)


def gauss_2f1_terms(spec: Gauss2F1Spec, z: float, n_max: int = SERIES_CAP) -> list[float]:
    """The retained terms ``t_k = (A)_k (B)_k / ((C)_k k!) z**k`` of the 2F1 series."""
    s, p, c = spec.s, spec.p, spec.c
    if _is_nonpositive_integer(c):
        raise InvalidParameters(f"C={c} is a non-positive integer")
    if abs(z) >= 1.0:
        raise OutsideConvergenceDomain(f"|z|={abs(z)} >= 1")
    term = 1.0
    total = 1.0
    terms = [1.0]
    small = 0
    for k in range(n_max):
        term *= (p + k * s + k * k) / ((c + k) * (k + 1.0)) * z
        total += term
        terms.append(term)
        if abs(term) <= SERIES_RTOL * abs(total):
            small += 1
            if small >= SMALL_RUN:
                return terms
        else:
            small = 0
    raise NonconvergentSeries(f"2F1 series did not converge in {n_max} terms at z={z}")


def incomplete_beta(p: float, q: float, z: float) -> float:
    """``B_z(p, q) = integral_0^z t**(p-1) (1-t)**(q-1) dt`` via ``z**p/p 2F1(p, 1-q; p+1; z)``."""
    if p <= 0.0:
        raise InvalidParameters(f"p={p} must be positive")
    if not 0.0 < z < 1.0:
        raise OutsideConvergenceDomain(f"z={z} not in (0, 1)")
    return z**p / p * gauss_2f1(Gauss2F1Spec.from_abc(p, 1.0 - q, p + 1.0), z)


@dataclass(frozen=True)
class AppellF1Spec:
    a: float
    b1: float
    b2: float
    c: float


def _pochhammer_powers(b: float, x: float, k_max: int) -> np.ndarray:
    """Array of ``(b)_m x**m / m!`` for ``m < k_max``."""
    m = np.arange(k_max - 1, dtype=float)
    ratios = (b + m) / (m + 1.0) * x
    out = np.empty(k_max)
    out[0] = 1.0
    out[1:] = np.cumprod(ratios)
    return out


def _diagonal_sums(b1: float, b2: float, x: float, y: float, k_max: int) -> np.ndarray:
    """Anti-diagonal sums ``sum_{m+n=k} (b1)_m (b2)_n x**m y**n / (m! n!)``."""
    return np.convolve(_pochhammer_powers(b1, x, k_max), _pochhammer_powers(b2, y, k_max))[:k_max]


def _first_converged(terms: np.ndarray, partial: np.ndarray) -> np.ndarray:
    """Index (per column) where the three-small-terms rule first holds, or -1."""
    small = np.abs(terms) <= SERIES_RTOL * np.abs(partial)
    run = np.zeros(small.shape[1:], dtype=int)
    hit = np.full(small.shape[1:], -1)
    for k in range(small.shape[0]):
        run = np.where(small[k], run + 1, 0)
        newly = (run >= SMALL_RUN) & (hit < 0)
        hit[newly] = k
    return hit


def appell_f1(spec: AppellF1Spec, x: float, y: float) -> float:
    """Appell's F1 double series summed anti-diagonal by anti-diagonal."""
    if _is_nonpositive_integer(spec.c):
        raise InvalidParameters(f"c={spec.c} is a non-positive integer")
    if abs(x) >= 1.0 or abs(y) >= 1.0:
        raise OutsideConvergenceDomain(f"(x, y)=({x}, {y}) outside the unit bidisk")
    k_max = 64
    while True:
        diag = _diagonal_sums(spec.b1, spec.b2, x, y, k_max)
        k = np.arange(k_max - 1, dtype=float)
        outer = np.empty(k_max)
        outer[0] = 1.0
        outer[1:] = np.cumprod((spec.a + k) / (spec.c + k))
        terms = outer * diag
        partial = np.cumsum(terms)
        hit = _first_converged(terms[:, None], partial[:, None])[0]
        if hit >= 0:
            return math.fsum(terms[: hit + 1])
        if k_max >= SERIES_CAP:
            raise NonconvergentSeries(f"F1 did not converge in {k_max} anti-diagonals")
        k_max = min(2 * k_max, SERIES_CAP)


def shifted_power_sums(exponents: np.ndarray, weights_fn, z: float) -> np.ndarray:
    """``z**A * sum_k w_k / (A + k)`` for every ``A`` in ``exponents``.

    ``weights_fn(k_max)`` must return the first ``k_max`` weights. This is the
    common shape of ``B_z(A, q)`` and of ``z**A/A * F1(A; b1, b2; A+1; z, y)``.
    """
    exponents = np.asarray(exponents, dtype=float)
    k_max = 64
    while True:
        w = weights_fn(k_max)
        terms = w[:, None] / (exponents[None, :] + np.arange(k_max)[:, None])
        partial = np.cumsum(terms, axis=0)
        hit = _first_converged(terms, partial)
        if np.all(hit >= 0):
            mask = np.arange(k_max)[:, None] <= hit[None, :]
            return z**exponents * np.sum(np.where(mask, terms, 0.0), axis=0)
        if k_max >= SERIES_CAP:
            raise NonconvergentSeries(f"shifted power sums did not converge in {k_max} terms")
        k_max = min(2 * k_max, SERIES_CAP)


def incomplete_beta_many(ps, q: float, z: float) -> np.ndarray:
    """Vectorised :func:`incomplete_beta` over an array of first arguments."""
    ps = np.asarray(ps, dtype=float)
    if np.any(ps <= 0.0):
        raise InvalidParameters("every p must be positive")
    if not 0.0 < z < 1.0:
        raise OutsideConvergenceDomain(f"z={z} not in (0, 1)")
    return shifted_power_sums(ps, lambda k: _pochhammer_powers(1.0 - q, z, k), z)


def _check_antiderivative_domain(params: HeunParams, z: float):
    a = params.a
    if not (a > 1.0 or a < 0.0):
        raise InvalidParameters(f"a={a} must lie outside [0, 1]")
    if not 0.0 < z < min(1.0, abs(a)):
        raise OutsideConvergenceDomain(f"z={z} not in (0, {min(1.0, abs(a))})")


def antiderivative_term(n: int, params: HeunParams, z: float) -> float:
    """``integral_0^z t**(n-gamma) (1-t)**(-delta) (1-t/a)**(-epsilon) dt``.

    Equal to ``z**A/A * F1(A; delta, epsilon; A+1; z, z/a)`` with
    ``A = 1 + n - gamma``. The integrand is the real, positive rewriting of
    ``t**(n-gamma) (t-1)**(-delta) (t-a)**(-epsilon)``; the two differ by a
    constant factor.
    """
    big_a = 1.0 + n - params.gamma
    if big_a <= 0.0:
        raise InvalidParameters(f"1 + n - gamma = {big_a} must be positive")
    _check_antiderivative_domain(params, z)
    spec = AppellF1Spec(big_a, params.delta, params.epsilon, big_a + 1.0)
    return z**big_a / big_a * appell_f1(spec, z, z / params.a)


def antiderivative_terms(n_terms: int, params: HeunParams, z: float) -> np.ndarray:
    """:func:`antiderivative_term` for ``n = 0 .. n_terms-1`` in one vectorised pass."""
    exps = 1.0 + np.arange(n_terms) - params.gamma
    if exps[0] <= 0.0:
        raise InvalidParameters(f"1 - gamma = {exps[0]} must be positive")
    _check_antiderivative_domain(params, z)
    return shifted_power_sums(
        exps, lambda k: _diagonal_sums(params.delta, params.epsilon, z, z / params.a, k), z
    )


def eq33_reduction(n: int, gamma: float, delta: float, z: float) -> float:
    """``integral_0^z t**(n-gamma) (1-t**2)**(-delta) dt`` as a single 2F1 in ``z**2``.

    This is the ``a = -1``, ``epsilon = delta`` specialisation of
    :func:`antiderivative_term`.
    """
    big_a = 1.0 + n - gamma
    if big_a <= 0.0:
        raise InvalidParameters(f"1 + n - gamma = {big_a} must be positive")
    if not 0.0 < z < 1.0:
        raise OutsideConvergenceDomain(f"z={z} not in (0, 1)")
    spec = Gauss2F1Spec.from_abc(big_a / 2.0, delta, big_a / 2.0 + 1.0)
    return z**big_a / big_a * gauss_2f1(spec, z * z)
