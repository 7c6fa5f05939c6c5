"""Derivative identities for the four special accessory-parameter cases.

When ``q`` is ``0``, ``alpha*beta`` or ``a*alpha*beta``, or when
``alpha*beta = 0``, the derivative of a Heun solution is (up to a power
prefactor) again a Heun solution. :func:`map_case` produces the target
parameters and :func:`verify_identity` checks the relation order by order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    FUCHS_TOL,
    Branch,
    HeunParams,
    LocalSeries,
    Point,
    SingularData,
    eval_series,
    eval_series_derivative,
    frobenius_series,
)
from .errors import CaseConditionViolation, InvalidParameters, PoleEvaluation

CASE_TOL = 1e-12
IDENTITY_TOL = 1e-10


class Case(enum.Enum):
    Q_ZERO = "q_zero"
    Q_ALPHABETA = "q_alphabeta"
    Q_A_ALPHABETA = "q_a_alphabeta"
    ALPHABETA_ZERO = "alphabeta_zero"


_CASE_POINT = {
    Case.Q_ZERO: Point.ZERO,
    Case.Q_ALPHABETA: Point.ONE,
    Case.Q_A_ALPHABETA: Point.A,
    Case.ALPHABETA_ZERO: Point.ZERO,
}


@dataclass(frozen=True)
class IdentityCase:
    """A case tag together with the prefactor exponent ``s``.

    ``s`` is ``1`` or minus the exponent parameter of the case's singular
    point (gamma, delta, epsilon); the alpha*beta = 0 case has no prefactor
    and uses ``s = 0``.
    """

    tag: Case
    s: float = 1.0

    @classmethod
    def first(cls, tag: Case) -> "IdentityCase":
        return cls(tag, 0.0 if tag is Case.ALPHABETA_ZERO else 1.0)

    @classmethod
    def second(cls, tag: Case, params: HeunParams) -> "IdentityCase":
        if tag is Case.ALPHABETA_ZERO:
            raise InvalidParameters("alpha*beta = 0 has a single branch")
        return cls(tag, -params.local_exponent(_CASE_POINT[tag]))


@dataclass(frozen=True)
class PrimedParams(SingularData):
    """Right-hand-side Heun parameters with (alpha', beta') kept as sum and product.

    The individual roots may be complex; every series built from these
    parameters needs only ``sum_ab`` and ``prod_ab``.
    """

    a: float
    q: float
    gamma: float
    delta: float
    epsilon: float
    sum_ab: float
    prod_ab: float
    prefactor_point: Point
    prefactor_exponent: float

    @property
    def ab(self) -> float:
        return self.prod_ab

    @property
    def fuchs_residual(self) -> float:
        return 1.0 + self.sum_ab - (self.gamma + self.delta + self.epsilon)


@dataclass
class VerificationReport:
    fitted_constant: float
    max_coeff_deviation: float
    max_point_deviation: float
    degenerate: bool
    passed: bool
    tolerance: float = IDENTITY_TOL
    samples: list = field(default_factory=list)


def case_condition(params: HeunParams, case: IdentityCase | Case) -> bool:
    tag = case.tag if isinstance(case, IdentityCase) else case
    p = params
    if tag is Case.Q_ZERO:
        return abs(p.q) <= CASE_TOL
    if tag is Case.Q_ALPHABETA:
        return abs(p.q - p.ab) <= CASE_TOL
    if tag is Case.Q_A_ALPHABETA:
        return abs(p.q - p.a * p.ab) <= CASE_TOL
    return abs(p.ab) <= CASE_TOL


def _branch_of(case: IdentityCase, params: HeunParams) -> Branch:
    if case.tag is Case.ALPHABETA_ZERO:
        if abs(case.s) > CASE_TOL:
            raise InvalidParameters(f"alpha*beta = 0 takes no prefactor, got s={case.s}")
        return Branch.FIRST
    if abs(case.s - 1.0) <= CASE_TOL:
        return Branch.FIRST
    if abs(case.s + params.local_exponent(_CASE_POINT[case.tag])) <= CASE_TOL:
        return Branch.SECOND
    raise InvalidParameters(f"s={case.s} is not an admissible branch exponent for {case.tag.value}")


def lhs_branch_for(case: IdentityCase, params: HeunParams) -> tuple[Point, Branch]:
    """Local solution whose derivative carries the case's prefactor."""
    return _CASE_POINT[case.tag], _branch_of(case, params)


def map_case(params: HeunParams, case: IdentityCase, check: bool = True) -> PrimedParams:
    """Parameters of the Heun function on the right-hand side of the identity.

    With ``check=False`` the map is applied even when the case condition fails,
    which is how negative controls are built.
    """
    if check and not case_condition(params, case):
        raise CaseConditionViolation(f"{case.tag.value} does not hold for {params}")
    _branch_of(case, params)
    a, q, ab = params.a, params.q, params.ab
    ga, de, ep = params.gamma, params.delta, params.epsilon
    s = case.s
    tag = case.tag
    # epsilon' comes from the exponents at z = a: differentiation lowers the
    # nonzero one by 1 unless the prefactor sits there
    if tag is Case.Q_ZERO:
        g1, d1, e1 = 2.0 * s + ga, de + 1.0, ep + 1.0
        prod = ab + (2.0 * ga + de + ep) + s * (de + ep + 2.0)
        q1 = ga * (1.0 + a) + s * (a * (de + 1.0) + (ep + 1.0))
    elif tag is Case.Q_ALPHABETA:
        g1, d1, e1 = ga + 1.0, 2.0 * s + de, ep + 1.0
        prod = ab + (ga + 2.0 * de + ep) + s * (ga + ep + 2.0)
        q1 = q + (ga + ep + a * de) + a * (ga + 1.0) * s
    elif tag is Case.Q_A_ALPHABETA:
        g1, d1, e1 = ga + 1.0, de + 1.0, 2.0 * s + ep
        prod = ab + (ga + de + 2.0 * ep) + s * (ga + de + 2.0)
        q1 = a * ab + a * (ga + de) + ep + s * (ga + 1.0)
    else:
        g1, d1, e1 = ga + 1.0, de + 1.0, ep + 1.0
        prod = 2.0 * (ga + de + ep)
        q1 = q + ga * (1.0 + a) + de * a + ep
    if tag is Case.ALPHABETA_ZERO:
        total = (ga + de + ep) + 2.0
    else:
        total = ga + de + ep + 2.0 * (s + 1.0) - 1.0
    return PrimedParams(a, q1, g1, d1, e1, total, prod, _CASE_POINT[tag], s)


def derived_coefficients(params: HeunParams, z: float) -> tuple[float, float]:
    """Coefficients ``(f1, g1)`` of the second-order equation obeyed by ``v = u'``.

    The extra pole at ``z = q/(alpha*beta)`` disappears exactly in the four
    special cases. With ``alpha*beta = 0`` the pole term is dropped.
    """
    p = params
    if z in (0.0, 1.0, p.a):
        raise PoleEvaluation(f"z={z} is a singular point")
    lin = p.ab * z - p.q
    if p.ab == 0.0:
        extra = 0.0
    elif lin == 0.0:
        raise PoleEvaluation(f"z={z} is the apparent singularity q/(alpha*beta)")
    else:
        extra = p.ab / lin
    zs = (z, z - 1.0, z - p.a)
    exps = (p.gamma, p.delta, p.epsilon)
    f = sum(e / d for e, d in zip(exps, zs))
    f1 = sum((e + 1.0) / d for e, d in zip(exps, zs)) - extra
    g1 = (
        -sum(e / (d * d) for e, d in zip(exps, zs))
        + lin / (zs[0] * zs[1] * zs[2])
        + f * (sum(1.0 / d for d in zs) - extra)
    )
    return f1, g1


def _shift_offset(rho: float, s: float) -> int:
    """Index shift between the derivative series and the prefactored right-hand side."""
    k = s - (rho - 1.0)
    kr = round(k)
    if abs(k - kr) > 1e-9 or kr < 0:
        raise InvalidParameters(f"prefactor exponent {s} incompatible with local exponent {rho}")
    return int(kr)


def verify_identity(
    params: HeunParams,
    case: IdentityCase,
    n_orders: int = 40,
    samples: Sequence[float] | None = None,
    tol: float = IDENTITY_TOL,
    check: bool = True,
) -> VerificationReport:
    """Compare ``d/dz`` of a local solution with the prefactored mapped solution.

    Both sides are expanded as generalised power series about the case's
    singular point. The multiplicative constant is the ratio of leading
    coefficients; the pass criterion is the largest relative coefficient
    deviation over ``n_orders`` orders, each order scaled by the largest
    coefficient within two orders of it. Orders of the derivative that precede
    the prefactor's leading power must vanish and are measured against the
    leading coefficient.
    """
    point, branch = lhs_branch_for(case, params)
    primed = map_case(params, case, check=check)
    lhs = frobenius_series(params, point, branch, n_orders + 3)
    rho = lhs.exponent
    k = _shift_offset(rho, case.s)
    dcoef = [(j + rho) * c for j, c in enumerate(lhs.coeffs)]
    if n_orders + k > len(dcoef):
        raise InvalidParameters("not enough finite coefficients for the requested order")

    scale = max(abs(c) for c in dcoef[: n_orders + k])
    if scale == 0.0:
        return VerificationReport(0.0, 0.0, 0.0, degenerate=True, passed=True, tolerance=tol)

    rhs = frobenius_series(primed, point, Branch.FIRST, n_orders)
    lead = dcoef[k]
    const = lead / rhs.coeffs[0]
    devs = []
    for j in range(k):
        devs.append(abs(dcoef[j]) / abs(lead) if lead != 0.0 else math.inf)
    last = n_orders + k
    for m, r in enumerate(rhs.coeffs):
        j = m + k
        lval, rval = dcoef[j], const * r
        # isolated near-zero coefficients are measured against their neighbours
        window = max(abs(c) for c in dcoef[max(k, j - 2): min(last, j + 3)])
        denom = max(abs(lval), abs(rval), window)
        devs.append(abs(lval - rval) / denom if denom > 0.0 else 0.0)
    max_coeff = max(devs)

    if samples is None:
        samples = [lhs.location + fr * lhs.radius for fr in (0.1, 0.2, 0.3)]
    if samples:
        lhs_full = frobenius_series(params, point, branch)
        rhs_full = frobenius_series(primed, point, Branch.FIRST)
    rows = []
    max_point = 0.0
    for z in samples:
        x = z - lhs.location
        left = eval_series_derivative(lhs_full, z)
        right = const * abs(x) ** rho * x ** (k - 1) * eval_series(rhs_full, z)
        dev = abs(left - right) / max(abs(left), abs(right), 1e-300)
        max_point = max(max_point, dev)
        rows.append((z, left, right, abs(left - right), dev))

    return VerificationReport(
        const, max_coeff, max_point, degenerate=False, passed=max_coeff <= tol,
        tolerance=tol, samples=rows,
    )


@dataclass
class ClosedFormDiagnostic:
    epsilon_ok: bool
    q_ok: bool
    hypergeometric_residual: float
    #: ``gamma + alpha - a(alpha*beta + gamma + delta)``, reported but never gating
    literal_constraint_residual: float
    reasons: list = field(default_factory=list)


def closed_form_admissible(params: HeunParams, tol: float = 1e-10) -> tuple[bool, ClosedFormDiagnostic]:
    """Whether the q = 0 identity collapses to a single Gauss 2F1.

    Requires ``epsilon = -1``, ``q = 0`` and ``q' = a alpha' beta'`` for the
    ``s = 1`` map; then the mapped equation has ``epsilon' = 0`` and its
    first-branch solution at 0 is ``2F1(alpha', beta'; gamma + 2; z)``.
    """
    p = params
    eps_ok = abs(p.epsilon + 1.0) <= CASE_TOL
    q_ok = abs(p.q) <= CASE_TOL
    primed = map_case(p, IdentityCase.first(Case.Q_ZERO), check=False)
    resid = primed.q - p.a * primed.prod_ab
    literal = p.gamma + p.alpha - p.a * (p.ab + p.gamma + p.delta)
    reasons = []
    if not eps_ok:
        reasons.append(f"epsilon={p.epsilon} != -1")
    if not q_ok:
        reasons.append(f"q={p.q} != 0")
    hyp_ok = abs(resid) <= tol * max(1.0, abs(primed.q))
    if not hyp_ok:
        reasons.append(f"q' - a*alpha'*beta' = {resid:.3e}")
    ok = eps_ok and q_ok and hyp_ok
    return ok, ClosedFormDiagnostic(eps_ok, q_ok, resid, literal, reasons)
