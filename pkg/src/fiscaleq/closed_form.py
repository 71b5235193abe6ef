"""Symmetric-equilibrium closed forms and the feasibility propositions.

Notation used throughout: ``S = L + Lg`` is total employment (private plus
public), ``A = S*q + g`` is effective demand per variety, and
``d = alpha + (N*m - alpha)*tau`` is the common denominator of the
employment solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateDenominator, InternalInconsistency
from .model import ValidatedScenario, utility_of_bundle

PRICE_AGREEMENT_RTOL = 1e-10
IDENTITY_RTOL = 1e-10


@dataclass(frozen=True)
class EquilibriumFlags:
    price_positive: bool
    markup_positive: bool
    profit_nonneg: bool
    nonneg_profit_condition_holds: bool


@dataclass(frozen=True)
class SymmetricEquilibrium:
    """Equilibrium outcome; ``p`` is the first price form, ``p_check`` the second."""

    p: float
    q: float
    L: float
    Pi: float
    markup: float
    welfare: float
    flags: EquilibriumFlags
    p_check: float

    def as_dict(self) -> dict:
        return {
            "p": self.p, "q": self.q, "L": self.L, "Pi": self.Pi,
            "markup": self.markup, "welfare": self.welfare,
            "flags": {
                "price_positive": self.flags.price_positive,
                "markup_positive": self.flags.markup_positive,
                "profit_nonneg": self.flags.profit_nonneg,
                "nonneg_profit_condition_holds": self.flags.nonneg_profit_condition_holds,
            },
        }


def employment_denominator(s: ValidatedScenario) -> float:
    return s.alpha + (s.N * s.m - s.alpha) * s.tau


def private_employment(s: ValidatedScenario) -> float:
    """Private employment L after eliminating q from the employment identity."""
    N, m, a, t = s.N, s.m, s.alpha, s.tau
    num = N * ((1 - t) * (m * s.Lg + a * s.F) + (m * s.g + s.F) * m * N)
    return num / employment_denominator(s)


def employment_coefficients(s: ValidatedScenario) -> tuple[float, float, float]:
    """``(intercept, slope_g, slope_Lg)`` of L, which is affine in g and in Lg."""
    N, m, a, t = s.N, s.m, s.alpha, s.tau
    d = employment_denominator(s)
    intercept = N * ((1 - t) * a * s.F + s.F * m * N) / d
    return intercept, N * N * m * m / d, N * (1 - t) * m / d


def consumption(s: ValidatedScenario, L: float) -> float:
    """Per-capita consumption of each variety given private employment L."""
    S = L + s.Lg
    if not S > 0:
        raise DegenerateDenominator(f"L + Lg = {S!r} is not positive")
    c = s.N * s.m + s.alpha * (1 - s.tau)
    # Written so that g = 0 gives (1-tau)/c without rounding in S/S.
    return (1 - s.tau) / c * (1 - s.alpha * s.g / S)


def price_form_a(s: ValidatedScenario, L: float, q: float = math.nan) -> float:
    """Price from the firm condition with the after-tax income left explicit.

    ``q`` is unused but accepted so both forms share a signature.
    """
    S = L + s.Lg
    den = S - s.alpha * s.g
    if not den > 0:
        raise DegenerateDenominator(f"L + Lg - alpha*g = {den!r} <= 0")
    return S / den * (s.m * s.w + s.alpha * s.after_tax_income / s.N)


def price_form_b(s: ValidatedScenario, L: float, q: float) -> float:
    """Price after substituting the budget identity ``y - t = N p q``."""
    S = L + s.Lg
    den = S - s.alpha * (S * q + s.g)
    if not den > 0:
        raise DegenerateDenominator(f"L + Lg - alpha*((L+Lg)q+g) = {den!r} <= 0")
    return s.m * s.w * S / den


def profit(s: ValidatedScenario, L: float, q: float, p: float) -> float:
    return ((L + s.Lg) * q + s.g) * (p - s.m * s.w) - s.F * s.w


def nonneg_profit_bound(s: ValidatedScenario, L: float, q: float) -> float:
    """Largest fixed input F for which non-negative profit is guaranteed."""
    S = L + s.Lg
    return s.alpha * (S * q + s.g) * L / (S * s.N)


def solve_equilibrium(s: ValidatedScenario) -> SymmetricEquilibrium:
    """Evaluate the symmetric equilibrium of an admissible scenario.

    Raises:
        InternalInconsistency: if the two price forms disagree beyond 1e-10
            relative, which would indicate a transcription bug.
    """
    L = private_employment(s)
    q = consumption(s, L)
    p = price_form_a(s, L, q)
    p_b = price_form_b(s, L, q)
    if abs(p - p_b) > PRICE_AGREEMENT_RTOL * max(abs(p), abs(p_b)):
        raise InternalInconsistency(f"price forms disagree: {p!r} vs {p_b!r}")
    Pi = profit(s, L, q, p)
    markup = p - s.m * s.w
    bound = nonneg_profit_bound(s, L, q)
    flags = EquilibriumFlags(
        price_positive=p > 0,
        markup_positive=markup > 0,
        profit_nonneg=Pi >= 0,
        nonneg_profit_condition_holds=s.F <= bound,
    )
    return SymmetricEquilibrium(
        p=p, q=q, L=L, Pi=Pi, markup=markup,
        welfare=utility_of_bundle(q, s.utility, s.N),
        flags=flags, p_check=p_b,
    )


@dataclass(frozen=True)
class PropositionReport:
    effective_margin: float          # L + Lg - alpha*((L+Lg)q + g)
    margin_positive: bool
    markup: float
    markup_positive: bool
    profit_bound: float
    condition_holds: bool
    profit_nonneg: bool
    implication_holds: bool          # condition => Pi >= 0
    employment_residual: float       # relative residual of the employment identity
    employment_identity_holds: bool
    all_hold: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def employment_residual(s: ValidatedScenario, L: float, q: float) -> float:
    """Relative residual of ``L = N[m(L+Lg)q + m g + F]``."""
    rhs = s.N * (s.m * (L + s.Lg) * q + s.m * s.g + s.F)
    return (L - rhs) / max(abs(L), abs(rhs))


def check_propositions(s: ValidatedScenario, eq: SymmetricEquilibrium) -> PropositionReport:
    S = eq.L + s.Lg
    margin = S - s.alpha * (S * eq.q + s.g)
    bound = nonneg_profit_bound(s, eq.L, eq.q)
    cond = s.F <= bound
    nonneg = eq.Pi >= 0
    resid = employment_residual(s, eq.L, eq.q)
    holds = abs(resid) <= IDENTITY_RTOL
    return PropositionReport(
        effective_margin=margin, margin_positive=margin > 0,
        markup=eq.markup, markup_positive=eq.markup > 0,
        profit_bound=bound, condition_holds=cond, profit_nonneg=nonneg,
        implication_holds=(not cond) or nonneg,
        employment_residual=resid, employment_identity_holds=holds,
        all_hold=margin > 0 and eq.markup > 0 and ((not cond) or nonneg) and holds,
    )


def profit_threshold_lambda(s: ValidatedScenario, eq: SymmetricEquilibrium | None = None) -> float:
    """Public-employment level at which the profit response to Lg changes sign.

    Evaluated with the equilibrium q at the scenario's own (g, tau, Lg).
    """
    if eq is None:
        eq = solve_equilibrium(s)
    Nm = s.N * s.m
    return (1 - Nm * eq.q) * (Nm / (1 - s.tau) + 2 * s.alpha) * s.g - s.N * (s.m * s.g + s.F)
