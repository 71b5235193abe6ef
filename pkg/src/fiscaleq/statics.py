"""Policy comparative statics: analytic Jacobian, finite-difference oracle,
and certification of the sign claims.

The analytic partials compose the chain-rule expressions exactly as derived
for the closed forms (see ``closed_form`` for notation). The finite-difference
Jacobian only ever calls ``solve_equilibrium`` so it stays independent of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .closed_form import (
    employment_coefficients,
    employment_denominator,
    profit_threshold_lambda,
    solve_equilibrium,
)
from .errors import InadmissibleParameters, PerturbationInadmissible
from .model import ValidatedScenario

OUTPUTS = ("L", "q", "p", "Pi")
POLICIES = ("g", "tau", "Lg")

JACOBIAN_RTOL = 1e-6
JACOBIAN_ATOL = 1e-9
ZERO_BAND = 1e-9
EPS = float(np.finfo(float).eps)
#: Rounding of one closed-form evaluation, in ulps of the output, assumed when
#: deciding whether a finite-difference partial is distinguishable from zero.
FD_NOISE_ULPS = 32


@dataclass(frozen=True)
class PolicyJacobian:
    """4x3 matrix of partials; rows follow ``OUTPUTS``, columns ``POLICIES``.

    ``one_sided`` maps a policy name to ``"forward"``/``"backward"`` when the
    finite-difference stencil had to leave the centered form.
    """

    values: np.ndarray
    method: str
    one_sided: dict = field(default_factory=dict)

    def __getitem__(self, key: tuple[str, str]) -> float:
        out, pol = key
        return float(self.values[OUTPUTS.index(out), POLICIES.index(pol)])

    @property
    def method_tag(self) -> str:
        if not self.one_sided:
            return self.method
        sides = ",".join(f"{k}:{v}" for k, v in sorted(self.one_sided.items()))
        return f"{self.method}[{sides}]"

    def as_dict(self) -> dict[str, float]:
        return {f"d{o}_d{p}": self[o, p] for o in OUTPUTS for p in POLICIES}


def _within(a: float, b: float, rtol: float = JACOBIAN_RTOL, atol: float = JACOBIAN_ATOL) -> bool:
    return abs(a - b) <= max(rtol * max(abs(a), abs(b)), atol)


def jacobian_discrepancy(a: PolicyJacobian, b: PolicyJacobian) -> tuple[float, bool]:
    """Largest relative discrepancy and whether every entry is within tolerance.

    The relative discrepancy of an entry is ``|a-b| / max(|a|, |b|)``; entries
    where both sides are below the absolute floor count as zero.
    """
    worst, ok = 0.0, True
    for x, y in zip(a.values.ravel(), b.values.ravel()):
        diff = abs(x - y)
        if diff <= JACOBIAN_ATOL:
            continue
        worst = max(worst, diff / max(abs(x), abs(y)))
        ok = ok and _within(x, y)
    return worst, ok


# ---------------------------------------------------------------------------
# Analytic route
# ---------------------------------------------------------------------------

def analytic_jacobian(s: ValidatedScenario) -> PolicyJacobian:
    eq = solve_equilibrium(s)
    N, m, a, t, w, g, Lg, F = s.N, s.m, s.alpha, s.tau, s.w, s.g, s.Lg, s.F
    L, q, p = eq.L, eq.q, eq.p
    Nm = N * m
    S = L + Lg
    A = S * q + g
    d = employment_denominator(s)
    c = Nm + a * (1 - t)
    mw = m * w
    K = mw + a * (1 - t) * w / N

    # Employment.
    L_g = Nm * Nm / d
    L_t = -Nm * Nm * (Lg + (Nm - a) * g + N * F) / d**2
    L_Lg = N * (1 - t) * m / d

    # Consumption; the tax partial goes through the log-derivative.
    q_g = (1 - t) / c * a * (-L - Lg + g * L_g) / S**2
    dlnq_t = (1 / (S - a * g) - 1 / S) * L_t - Nm / ((1 - t) * c)
    q_t = dlnq_t * q
    q_Lg = (1 - t) / c * a * g * (L_Lg + 1) / S**2

    # Price.
    p_g = a * K * (S - g * L_g) / (S - a * g) ** 2
    one_minus_Nmq = 1 - Nm * q
    numer_t = (N * (m * g + F) + Lg) * (N * F + Lg) / one_minus_Nmq**2 * q_t
    p_t = mw * a * numer_t / (S - a * A) ** 2
    p_Lg = K * (-a * g * (L_Lg + 1)) / (S - a * g) ** 2

    # Profit.
    Sq_g = (1 - t) * (Nm - a) / d
    Pi_g = (Sq_g + 1) * (p - mw) + A * p_g
    Sq_t = L_t * q + S * q_t
    Pi_t = Sq_t * (p - mw) + A * p_t
    diag = _profit_terms(s, L, q)
    Pi_Lg = a * mw * A * diag["D_via_E"] / (S - a * A) ** 2

    values = np.array([
        [L_g, L_t, L_Lg],
        [q_g, q_t, q_Lg],
        [p_g, p_t, p_Lg],
        [Pi_g, Pi_t, Pi_Lg],
    ])
    return PolicyJacobian(values, "analytic")


def _profit_terms(s: ValidatedScenario, L: float, q: float) -> dict[str, float]:
    """Intermediate terms of the profit response to public employment.

    Each term is computed by two routes so callers can cross-check them.
    """
    N, m, a, t, g, Lg = s.N, s.m, s.alpha, s.tau, s.g, s.Lg
    Nm = N * m
    S = L + Lg
    A = S * q + g
    d = employment_denominator(s)
    c = Nm + a * (1 - t)
    L_Lg = N * (1 - t) * m / d
    S_Lg = L_Lg + 1
    X = (1 - t) * S_Lg / c                      # d((L+Lg)q)/dLg
    D_direct = 2 * S * X - a * A * X - A * S_Lg
    E_direct = 2 * S - A * (a + c / (1 - t))
    F_direct = S - g * (2 * a + Nm / (1 - t))
    E_via_F = Nm * F_direct / c
    return {
        "X": X,
        "D_direct": D_direct,
        "D_via_E": E_via_F * X,
        "E_direct": E_direct,
        "E_via_F": E_via_F,
        "F_direct": F_direct,
    }


@dataclass(frozen=True)
class ProfitResponseDiagnostics:
    D: float
    E: float
    F_script: float
    Lambda: float
    F_via_lambda: float
    d_profit_d_Lg: float
    chain_consistent: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def profit_response_diagnostics(s: ValidatedScenario) -> ProfitResponseDiagnostics:
    """Evaluate D, E, F and the threshold, and check their signs agree.

    ``chain_consistent`` is True when sign(D) = sign(E) = sign(F) =
    sign(Lg - Lambda) and the two routes to each term agree. Inside the zero
    band around the threshold only the route agreement is required.
    """
    eq = solve_equilibrium(s)
    terms = _profit_terms(s, eq.L, eq.q)
    lam = profit_threshold_lambda(s, eq)
    F_lam = (s.Lg - lam) / (1 - s.N * s.m * eq.q)
    S = eq.L + s.Lg
    A = S * eq.q + s.g
    dPi = s.alpha * s.m * s.w * A * terms["D_via_E"] / (S - s.alpha * A) ** 2

    scale = max(1.0, S, abs(lam))
    at_threshold = _sign(terms["F_direct"], scale) == 0
    signs = {
        int(np.sign(v)) for v in (terms["D_via_E"], terms["D_direct"], terms["E_direct"],
                                  terms["E_via_F"], terms["F_direct"], F_lam, s.Lg - lam)
    }
    routes_agree = (
        _close(terms["D_direct"], terms["D_via_E"], scale)
        and _close(terms["E_direct"], terms["E_via_F"], scale)
        and _close(terms["F_direct"], F_lam, scale)
    )
    return ProfitResponseDiagnostics(
        D=terms["D_via_E"], E=terms["E_via_F"], F_script=terms["F_direct"],
        Lambda=lam, F_via_lambda=F_lam, d_profit_d_Lg=dPi,
        chain_consistent=routes_agree and (at_threshold or len(signs) == 1),
    )


def _close(x: float, y: float, scale: float) -> bool:
    return abs(x - y) <= 1e-10 * max(scale, abs(x), abs(y))


def _sign(x: float, scale: float = 1.0) -> int:
    if abs(x) <= ZERO_BAND * max(1.0, scale):
        return 0
    return 1 if x > 0 else -1


def locate_profit_threshold(s: ValidatedScenario, hi: float | None = None,
                            rtol: float = 1e-15) -> float:
    """Public employment at which ``Lg == Lambda`` holds at the equilibrium.

    Lambda moves with Lg through q, so this bisects on Lg for the root of
    ``Lg - Lambda(Lg)`` (equivalently of F). Returns ``nan`` when the root
    would be negative, i.e. the profit response is positive for every Lg >= 0.
    """
    def gap(x: float) -> float:
        sx = s.with_values(Lg=x)
        return x - profit_threshold_lambda(sx)

    if gap(0.0) >= 0:
        return math.nan
    lo = 0.0
    hi = hi if hi is not None else max(1.0, s.g * (2 * s.alpha + s.N * s.m / (1 - s.tau)))
    while gap(hi) < 0:
        lo, hi = hi, 2 * hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Finite-difference route
# ---------------------------------------------------------------------------

def _outputs(s: ValidatedScenario) -> np.ndarray:
    eq = solve_equilibrium(s)
    return np.array([eq.L, eq.q, eq.p, eq.Pi])


def _perturbed(s: ValidatedScenario, name: str, value: float) -> np.ndarray | None:
    try:
        return _outputs(s.with_values(**{name: value}))
    except InadmissibleParameters:
        return None


def _step_scale(s: ValidatedScenario, name: str) -> float:
    """Length over which outcomes change appreciably along ``name``.

    Outcomes see g and Lg only through S = L + Lg and S - alpha*g, so the
    natural lengths are ``S / (dS/dg)`` and ``S / (dS/dLg)``; S and its
    slopes come from the affine employment coefficients. A step tied to
    ``max(1, |x|)`` instead is too coarse when S is small and lost in
    rounding when S is large.
    """
    if name == "tau":
        return max(1.0, abs(s.tau))
    intercept, slope_g, slope_Lg = employment_coefficients(s)
    S = intercept + slope_g * s.g + slope_Lg * s.Lg + s.Lg
    if name == "g":
        return max(abs(s.g), S / slope_g)
    return S / (slope_Lg + 1.0)


def finite_difference_jacobian(s: ValidatedScenario, h: float = 1e-6) -> PolicyJacobian:
    """Central differences of ``solve_equilibrium``.

    The step is ``h*max(1,|tau|)`` for tau and ``h`` times the natural length
    (see ``_step_scale``) for g and Lg.

    Where a centered stencil would leave the admissible domain (g or Lg near
    zero, tau near 0 or 1) a second-order one-sided stencil is used and
    recorded in ``one_sided``. It is written in differences from the base
    point so that a flat output gives exactly zero.

    Raises:
        PerturbationInadmissible: if no admissible stencil exists.
    """
    cols, sides = [], {}
    for name in POLICIES:
        x = getattr(s, name)
        step = h * _step_scale(s, name)
        up, down = _perturbed(s, name, x + step), _perturbed(s, name, x - step)
        if up is not None and down is not None:
            cols.append((up - down) / (2 * step))
            continue
        f0 = _outputs(s)
        if up is not None:
            up2 = _perturbed(s, name, x + 2 * step)
            if up2 is not None:
                cols.append((4 * (up - f0) - (up2 - f0)) / (2 * step))
                sides[name] = "forward"
                continue
        if down is not None:
            down2 = _perturbed(s, name, x - 2 * step)
            if down2 is not None:
                cols.append(((down2 - f0) - 4 * (down - f0)) / (2 * step))
                sides[name] = "backward"
                continue
        raise PerturbationInadmissible(f"no admissible stencil for {name} at {x!r}")
    return PolicyJacobian(np.column_stack(cols), "finite_difference", sides)


def wage_derivative(s: ValidatedScenario, h: float = 1e-6) -> dict[str, float]:
    """Central-difference partials of the outputs with respect to the wage."""
    step = h * max(1.0, s.w)
    up = _outputs(s.with_values(w=s.w + step))
    down = _outputs(s.with_values(w=s.w - step))
    return dict(zip(OUTPUTS, ((up - down) / (2 * step)).tolist()))


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClaimResult:
    theorem: str
    claim: str
    predicted: str
    analytic: float
    fd: float
    applicable: bool
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class TheoremReport:
    claims: tuple[ClaimResult, ...]
    Lambda: float
    jacobian_max_discrepancy: float
    jacobians_agree: bool

    @property
    def failures(self) -> list[ClaimResult]:
        return [c for c in self.claims if c.applicable and not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def pattern(self) -> tuple[tuple[str, bool, bool], ...]:
        return tuple((c.claim, c.applicable, c.passed) for c in self.claims)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "Lambda": self.Lambda,
            "jacobian_max_discrepancy": self.jacobian_max_discrepancy,
            "jacobians_agree": self.jacobians_agree,
            "claims": [c.as_dict() for c in self.claims],
        }


_SIGN_TEXT = {1: "> 0", 0: "= 0", -1: "< 0"}


def certify_theorems(s: ValidatedScenario, h: float = 1e-6) -> TheoremReport:
    """Check every policy sign claim with both analytic and FD partials.

    A claim passes only if both routes show the predicted sign. A strict
    claim needs the raw sign; an equality claim needs ``|value|`` inside
    ``1e-9 * max(1, scale)``. The scale of an entry is the larger of the
    biggest analytic partial of the same output and the output's magnitude
    over the natural length of the policy, the size a partial of that output
    would have if it were not zero. The FD side of an equality claim also
    passes when it lies under its rounding floor
    ``FD_NOISE_ULPS * eps * |output| / step``.
    """
    an = analytic_jacobian(s)
    fd = finite_difference_jacobian(s, h)
    worst, agree = jacobian_discrepancy(an, fd)
    levels = _outputs(s)
    row_scale = {o: float(np.max(np.abs(an.values[i]))) for i, o in enumerate(OUTPUTS)}
    claims: list[ClaimResult] = []

    def sign_claim(theorem: str, out: str, pol: str, predicted: int, note: str = "") -> None:
        a, f = an[out, pol], fd[out, pol]
        scale = max(row_scale[out], abs(levels[OUTPUTS.index(out)]) / _step_scale(s, pol))
        if predicted == 0:
            # An FD value is only resolved down to its rounding floor.
            level = abs(levels[OUTPUTS.index(out)])
            floor = FD_NOISE_ULPS * EPS * level / (h * _step_scale(s, pol))
            ok = _sign(a, scale) == 0 and (_sign(f, scale) == 0 or abs(f) <= floor)
        else:
            ok = np.sign(a) == predicted and np.sign(f) == predicted
        ok = bool(ok)
        claims.append(ClaimResult(theorem, f"d{out}/d{pol}", _SIGN_TEXT[predicted],
                                  a, f, True, ok, note))

    sign_claim("T1", "L", "g", 1)
    sign_claim("T1", "L", "tau", -1)
    sign_claim("T1", "L", "Lg", 1)
    zero = s.g == 0
    # With no fixed input and no public employment, L is proportional to g:
    # q and p no longer respond to g, and p no longer responds to tau.
    flat = s.F == 0 and s.Lg == 0
    flat_note = "F = Lg = 0 equality branch" if flat else ""
    sign_claim("T2", "q", "g", 0 if flat else -1, flat_note)
    sign_claim("T2", "q", "tau", -1)
    sign_claim("T2", "q", "Lg", 0 if zero else 1, "g = 0 equality branch" if zero else "")
    sign_claim("T3", "p", "g", 0 if flat else 1, flat_note)
    sign_claim("T3", "p", "tau", 0 if flat else -1, flat_note)
    sign_claim("T3", "p", "Lg", 0 if zero else -1, "g = 0 equality branch" if zero else "")
    sign_claim("T4", "Pi", "g", 1)
    sign_claim("T4", "Pi", "tau", -1)

    lam = profit_threshold_lambda(s)
    predicted = _sign(s.Lg - lam, max(1.0, abs(lam), s.Lg))
    sign_claim("T5", "Pi", "Lg", predicted, f"Lg - Lambda = {s.Lg - lam:.6g}")

    applicable = s.alpha > 1 - s.tau
    a_diff = an["Pi", "g"] - an["Pi", "Lg"]
    f_diff = fd["Pi", "g"] - fd["Pi", "Lg"]
    claims.append(ClaimResult(
        "T6", "dPi/dg - dPi/dLg", "> 0", a_diff, f_diff, applicable,
        a_diff > 0 and f_diff > 0,
        "" if applicable else "hypothesis not met (alpha <= 1 - tau)",
    ))
    return TheoremReport(tuple(claims), lam, worst, agree)
