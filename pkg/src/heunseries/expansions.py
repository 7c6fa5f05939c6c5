"""Hypergeometric-type expansions of Heun solutions with ``q = a*alpha*beta``.

Differentiating the ``|z|**(1-gamma)`` local solution at 0 gives
``z**-gamma (z-1)**-delta (z-a)**s`` times another Heun function whose
power series is known. Integrating term by term yields three expansions:

* ``APPELL`` (``s = -epsilon``): ``sum a_n I_n(z)`` with ``I_n`` an Appell F1
  antiderivative;
* ``BETA`` (``s = 1``): ``sum a_n [a B_z(1-gamma+n, 1-delta) - B_z(2-gamma+n, 1-delta)]``;
* ``TWO_F1`` (``s = 1``): the same series regrouped by powers of ``z`` into
  Gauss functions ``2F1(1-gamma+n, delta; 2-gamma+n; z)``.

Every expansion is normalised so its leading behaviour is a known multiple
of ``z**(1-gamma)``; see :attr:`ExpansionSeries.leading_coefficient`.
"""

from __future__ import annotations

import enum
import functools
import math
import random
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import SERIES_CAP, SERIES_RTOL, SMALL_RUN, HeunParams, validate_params
from .errors import (
    CaseConditionViolation,
    DegenerateExponents,
    InvalidParameters,
    InvalidTermCount,
    NotAdmissible,
    OutsideConvergenceDomain,
    TruncationWarning,
)
from .hypergeo import (
    Gauss2F1Spec,
    antiderivative_terms,
    gauss_2f1,
    gauss_2f1_terms,
    incomplete_beta_many,
)
from .identities import (
    CASE_TOL,
    Case,
    IdentityCase,
    closed_form_admissible,
    map_case,
    verify_identity,
)

TRUNCATION_RTOL = 1e-12


class Kind(enum.Enum):
    APPELL = "appell"
    BETA = "beta"
    TWO_F1 = "two_f1"
    CLOSED_FORM = "closed_form"


def _require_case3(params: HeunParams):
    if abs(params.q - params.a * params.ab) > CASE_TOL:
        raise CaseConditionViolation(f"q={params.q} differs from a*alpha*beta={params.a * params.ab}")


def case3_coefficients(params: HeunParams, s: float, n_terms: int) -> list[float]:
    """Power-series coefficients of the Heun function behind the ``q = a*alpha*beta`` expansions.

    The series belongs to ``H(a, q1; alpha1, beta1, 1-gamma, 1-delta; z)`` with
    ``epsilon1 = epsilon + 2s``, ``alpha1*beta1 = alpha*beta + (epsilon+s)(2-gamma-delta)``
    and ``q1 = a*alpha*beta + (epsilon+s)(1-gamma)``. ``s`` must be ``1`` or
    ``-epsilon``.
    """
    _require_case3(params)
    if n_terms < 1:
        raise InvalidTermCount(f"need at least one term, got {n_terms}")
    a, ab = params.a, params.ab
    ga, de, ep = params.gamma, params.delta, params.epsilon
    if abs(s - 1.0) > CASE_TOL and abs(s + ep) > CASE_TOL:
        raise InvalidParameters(f"s={s} must be 1 or -epsilon={-ep}")
    g1, d1, e1 = 1.0 - ga, 1.0 - de, ep + 2.0 * s
    ab1 = ab + (ep + s) * (2.0 - ga - de)
    q1 = a * ab + (ep + s) * (1.0 - ga)

    coeffs = [1.0]
    prev2, prev1 = 0.0, 1.0
    for n in range(1, n_terms):
        den = a * n * (n - 1.0 + g1)
        if den == 0.0 or abs(n - 1.0 + g1) < 1e-13:
            raise DegenerateExponents(f"1 - gamma = {g1} makes the recurrence singular at n={n}")
        m1, m2 = n - 1.0, n - 2.0
        num = prev1 * ((1.0 + a) * m1 * (m1 - 1.0) + (g1 * (1.0 + a) + a * d1 + e1) * m1 + q1)
        num -= prev2 * (m2 * (m2 - 1.0) + (g1 + d1 + e1) * m2 + ab1)
        cn = num / den
        if not math.isfinite(cn):
            break
        coeffs.append(cn)
        prev2, prev1 = prev1, cn
    return coeffs


@dataclass(frozen=True)
class ExpansionSeries:
    """A truncated expansion of the ``z**(1-gamma)`` solution at 0.

    Calling the object evaluates the partial sum. Summation stops early once
    three consecutive terms are below double precision relative to the
    running sum; a :class:`TruncationWarning` is issued if all ``N`` terms are
    used and the last one is still larger than ``1e-12`` of the sum.
    """

    kind: Kind
    params: HeunParams
    coeffs: tuple
    domain: tuple

    @property
    def leading_coefficient(self) -> float:
        """Coefficient of ``z**(1-gamma)`` in the small-``z`` behaviour."""
        base = 1.0 / (1.0 - self.params.gamma)
        return base if self.kind is Kind.APPELL else self.params.a * base

    def _check(self, z: float):
        lo, hi = self.domain
        if not lo < z < hi:
            raise OutsideConvergenceDomain(f"z={z} not in ({lo}, {hi})")

    def terms(self, z: float) -> np.ndarray:
        """All ``N`` individual terms of the expansion at ``z``."""
        self._check(z)
        p = self.params
        c = np.asarray(self.coeffs)
        n = len(c)
        if self.kind is Kind.APPELL:
            return c * antiderivative_terms(n, p, z)
        if self.kind is Kind.BETA:
            b = incomplete_beta_many(1.0 - p.gamma + np.arange(n + 1), 1.0 - p.delta, z)
            return c * (p.a * b[:-1] - b[1:])
        return np.array([self._two_f1_term(i, z) for i in range(n)])

    def _two_f1_weight(self, i: int) -> float:
        c = self.coeffs
        return self.params.a * c[0] if i == 0 else self.params.a * c[i] - c[i - 1]

    def _two_f1_term(self, i: int, z: float) -> float:
        big_a = 1.0 - self.params.gamma + i
        f = gauss_2f1(Gauss2F1Spec.from_abc(big_a, self.params.delta, big_a + 1.0), z)
        return self._two_f1_weight(i) * z**big_a / big_a * f

    def __call__(self, z: float) -> float:
        if self.kind is Kind.TWO_F1:
            self._check(z)
            values = []
            small = 0
            total = 0.0
            for i in range(len(self.coeffs)):
                t = self._two_f1_term(i, z)
                values.append(t)
                total += t
                small = small + 1 if abs(t) <= SERIES_RTOL * abs(total) else 0
                if small >= SMALL_RUN:
                    return math.fsum(values)
            values = np.array(values)
        else:
            values = self.terms(z)
        partial = np.cumsum(values)
        small = np.abs(values) <= SERIES_RTOL * np.abs(partial)
        run = 0
        for k, flag in enumerate(small):
            run = run + 1 if flag else 0
            if run >= SMALL_RUN:
                return math.fsum(values[: k + 1])
        total = math.fsum(values)
        if abs(values[-1]) > TRUNCATION_RTOL * abs(total):
            warnings.warn(
                f"{self.kind.value} expansion truncated at N={len(values)} with last term "
                f"{abs(values[-1] / total):.1e} of the sum at z={z}",
                TruncationWarning,
                stacklevel=2,
            )
        return total


def _expansion_domain(params: HeunParams) -> tuple:
    a = params.a
    if not (a > 1.0 or a < 0.0):
        raise InvalidParameters(f"a={a} must lie outside [0, 1]")
    return (0.0, min(1.0, abs(a)))


def _check_gamma(params: HeunParams):
    if not params.gamma < 1.0:
        raise InvalidParameters(f"gamma={params.gamma} must be below 1")


def expand_case3_appell(params: HeunParams, n_terms: int) -> ExpansionSeries:
    _require_case3(params)
    _check_gamma(params)
    coeffs = case3_coefficients(params, -params.epsilon, n_terms)
    return ExpansionSeries(Kind.APPELL, params, tuple(coeffs), _expansion_domain(params))


def expand_case3_beta(params: HeunParams, n_terms: int) -> ExpansionSeries:
    _require_case3(params)
    _check_gamma(params)
    coeffs = case3_coefficients(params, 1.0, n_terms)
    return ExpansionSeries(Kind.BETA, params, tuple(coeffs), _expansion_domain(params))


def expand_case3_2f1(params: HeunParams, n_terms: int) -> ExpansionSeries:
    _require_case3(params)
    _check_gamma(params)
    coeffs = case3_coefficients(params, 1.0, n_terms)
    return ExpansionSeries(Kind.TWO_F1, params, tuple(coeffs), _expansion_domain(params))


EXPANDERS = {
    Kind.APPELL: expand_case3_appell,
    Kind.BETA: expand_case3_beta,
    Kind.TWO_F1: expand_case3_2f1,
}


@functools.lru_cache(maxsize=256)
def _closed_form_setup(params: HeunParams):
    ok, diag = closed_form_admissible(params)
    if not ok:
        raise NotAdmissible("closed form not admissible: " + "; ".join(diag.reasons))
    case = IdentityCase.first(Case.Q_ZERO)
    report = verify_identity(params, case, n_orders=8, samples=[])
    primed = map_case(params, case)
    return report.fitted_constant, Gauss2F1Spec(primed.sum_ab, primed.prod_ab, params.gamma + 2.0)


def closed_form_case1(params: HeunParams, z: float) -> float:
    """``1 + C * integral_0^z t 2F1(alpha', beta'; gamma+2; t) dt``, integrated term by term.

    Valid when ``epsilon = -1``, ``q = 0`` and the ``s = 1`` image has
    ``q' = a*alpha'*beta'``. ``C`` is the identity constant, so the result is
    the first-branch solution at 0 normalised to ``u(0) = 1``.
    """
    const, spec = _closed_form_setup(params)
    lo, hi = _expansion_domain(params)
    if not lo < z < hi:
        raise OutsideConvergenceDomain(f"z={z} not in ({lo}, {hi})")
    terms = gauss_2f1_terms(spec, z)
    return 1.0 + const * z * z * math.fsum(t / (k + 2.0) for k, t in enumerate(terms))


def solve_closed_form_gamma(a: float, alpha: float, delta: float, lo: float = 0.05, hi: float = 3.0,
                            grid: int = 60) -> list[float]:
    """Values of gamma making ``(a, 0; alpha, beta, gamma, delta)`` closed-form admissible.

    ``epsilon = -1`` and beta follows from the Fuchsian condition. Roots of
    ``q' - a*alpha'*beta'`` (from the ``s = 1`` map) are bracketed on a grid
    and refined with Brent's method.
    """
    def residual(gamma):
        beta = gamma + delta - 2.0 - alpha
        p = HeunParams(a, 0.0, alpha, beta, gamma, delta, -1.0)
        primed = map_case(p, IdentityCase.first(Case.Q_ZERO))
        return primed.q - a * primed.prod_ab

    xs = np.linspace(lo, hi, grid)
    vals = [residual(x) for x in xs]
    roots = []
    for x0, x1, v0, v1 in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if v0 == 0.0:
            roots.append(float(x0))
        elif v0 * v1 < 0.0:
            roots.append(brentq(residual, x0, x1, xtol=1e-15, rtol=1e-15))
    return roots


def find_closed_form_params(count: int, seed: int = 0, a_range=(1.5, 3.0)) -> list[HeunParams]:
    """Draw admissible closed-form parameter sets with the constraint solver."""
    rng = random.Random(seed)
    found = []
    attempts = 0
    while len(found) < count:
        attempts += 1
        if attempts > 1000 * count:
            raise NotAdmissible("constraint solver found too few admissible sets")
        a = rng.uniform(*a_range)
        alpha = rng.uniform(-2.0, 2.0)
        delta = rng.uniform(-1.5, 1.5)
        for gamma in solve_closed_form_gamma(a, alpha, delta):
            if abs(gamma - round(gamma)) < 0.05:
                continue
            p = validate_params(a, 0.0, alpha, gamma + delta - 2.0 - alpha, gamma, delta, -1.0)
            if closed_form_admissible(p)[0]:
                found.append(p)
                break
    return found


class SingularExponents(NamedTuple):
    at_zero: float
    #: leading exponent at 1, ``min(0, nonconstant)``; 0 means the term stays bounded
    at_one: float
    #: exponent of the part that varies as z -> 1-, estimated from successive differences
    nonconstant_at_one: float


#: the near-1 probes need far more 2F1 terms than the default cap
PROBE_TERMS = 100_000


def building_block(params: HeunParams, n: int, z: float, n_max: int = SERIES_CAP) -> float:
    """``z**(1-gamma+n)/(1-gamma+n) 2F1(1-gamma+n, delta; 2-gamma+n; z)``."""
    big_a = 1.0 - params.gamma + n
    if big_a <= 0.0:
        raise InvalidParameters(f"1 - gamma + n = {big_a} must be positive")
    spec = Gauss2F1Spec.from_abc(big_a, params.delta, big_a + 1.0)
    return z**big_a / big_a * gauss_2f1(spec, z, n_max)


def term_singular_exponent(
    params: HeunParams,
    n: int,
    probes_zero: Sequence[float] = (1e-5, 1e-6),
    probes_one: Sequence[float] = (0.008, 0.004, 0.002, 0.001),
) -> SingularExponents:
    """Log-log slope estimates for the n-th hypergeometric building block.

    ``probes_zero`` are small ``z``; ``probes_one`` are four distances
    ``1 - z`` halving each time; these are summed with up to
    ``PROBE_TERMS`` series terms. Near 1 the block behaves like
    ``T1 + c (1-z)**e + d (1-z) + ...``. Successive differences remove
    ``T1``; combining neighbouring differences removes the linear part, and
    the ratio of what is left gives ``e`` without knowing ``T1``.
    """
    _require_case3(params)
    z0, z1 = probes_zero[-2], probes_zero[-1]
    g0, g1 = building_block(params, n, z0), building_block(params, n, z1)
    slope0 = math.log(abs(g1 / g0)) / math.log(z1 / z0)

    h = list(probes_one)[-4:]
    if len(h) < 4 or any(abs(h[i] / h[i + 1] - 2.0) > 1e-12 for i in range(3)):
        raise InvalidParameters("need four halving probes near z = 1")
    vals = [building_block(params, n, 1.0 - x, PROBE_TERMS) for x in h]
    d = [vals[i + 1] - vals[i] for i in range(3)]
    e0 = d[0] - 2.0 * d[1]
    e1 = d[1] - 2.0 * d[2]
    if e0 == 0.0 or e1 == 0.0:
        nonconst = math.inf
    else:
        nonconst = math.log(abs(e0 / e1)) / math.log(2.0)
    return SingularExponents(slope0, min(0.0, nonconst), nonconst)
