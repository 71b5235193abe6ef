"""Discrete-firm fixed-point oracle.

The continuum of firms is replaced by ``n`` firms of measure ``N/n`` each;
integrals become weighted sums. Consumer demand, firm best responses and the
employment identity are solved jointly by damped best-response iteration,
starting from arbitrary (possibly asymmetric) prices. Nothing here uses the
symmetric closed forms, so agreement with ``closed_form`` is a real check.

Firms are atomistic: a firm choosing its price takes the aggregate sums over
all varieties (its own included) as given.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, NonInteriorDemand, RootNotBracketed
from .model import UtilitySpec, ValidatedScenario

log = logging.getLogger(__name__)

BRACKET_LOW = 1.0 + 1e-12
BRACKET_HIGH = 1e6
SOC_STEP = 1e-6


@dataclass(frozen=True)
class SolverSettings:
    """Iteration controls.

    ``strict_interior`` makes any iterate with non-interior demand fatal.
    Otherwise such an iterate's demand is discarded: employment is not
    updated from it, prices still move by best response, and convergence is
    only declared on an iterate whose demand is interior.
    """

    tol: float = 1e-12
    damping: float = 0.5
    max_iter: int = 100_000
    strict_interior: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if not self.max_iter > 0:
            raise ValueError("max_iter must be positive")


@dataclass
class DiscreteEconomy:
    n: int
    weight: float
    prices: np.ndarray
    quantities: np.ndarray
    L: float
    scenario: ValidatedScenario
    g: np.ndarray
    iterations: int = 0
    rejected_iterates: int = 0
    soc_violations: list[int] = field(default_factory=list)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, self.weight)

    @property
    def profits(self) -> np.ndarray:
        s = self.scenario
        return ((self.L + s.Lg) * self.quantities + self.g) * (self.prices - s.m * s.w) - s.F * s.w

    def employment_residual(self) -> float:
        """Relative residual of the discretised employment identity."""
        s = self.scenario
        rhs = np.sum(self.weights * (s.m * (self.L + s.Lg) * self.quantities + s.m * self.g + s.F))
        return float((self.L - rhs) / max(abs(self.L), abs(rhs)))

    def budget_residual(self) -> float:
        s = self.scenario
        spent = float(np.sum(self.weights * self.prices * self.quantities))
        return (spent - s.after_tax_income) / s.after_tax_income


def demand_given_prices(prices, after_tax_income: float, spec: UtilitySpec, weights) -> np.ndarray:
    """CARA demand for every variety at the given prices.

    ``q(j) = [I + (1/alpha) sum_i w_i ln(p_i/p_j) p_i] / sum_i w_i p_i``

    Raises:
        NonInteriorDemand: if some q(j) <= 0. The raw vector is attached;
            nothing is clamped.
    """
    p = np.asarray(prices, dtype=float)
    wts = np.broadcast_to(np.asarray(weights, dtype=float), p.shape)
    if np.any(p <= 0):
        raise ValueError("prices must be positive")
    if not after_tax_income > 0:
        raise ValueError("after-tax income must be positive")
    P = float(np.sum(wts * p))
    # log_ratio[j, i] = ln(p_i / p_j); exact zeros when prices coincide.
    log_ratio = np.log(p[None, :] / p[:, None])
    q = (after_tax_income + log_ratio @ (wts * p) / spec.alpha) / P
    bad = np.flatnonzero(q <= 0)
    if bad.size:
        raise NonInteriorDemand(bad, q, p)
    return q


def _foc_gap(x, P, C, mw, rhs):
    """Left minus right side of the firm condition at own price ``x``.

    ``sum_j w_j ln(x/p_j) p_j`` is expanded as ``P ln x - C`` with
    ``C = sum_j w_j p_j ln p_j``; the left side is increasing in ``x``.
    """
    return P * np.log(x) - C + (x - mw) / x * P - rhs


def best_response_prices(prices, L_current: float, s: ValidatedScenario, weights,
                         g=None) -> np.ndarray:
    """Best-response price of every firm at once, by vectorised bisection.

    Raises:
        RootNotBracketed: if some firm has no root in
            ``[mw(1+1e-12), 1e6*mw]``.
    """
    p = np.asarray(prices, dtype=float)
    wts = np.broadcast_to(np.asarray(weights, dtype=float), p.shape)
    g = np.full(p.shape, s.g) if g is None else np.asarray(g, dtype=float)
    mw = s.m * s.w
    P = float(np.sum(wts * p))
    C = float(np.sum(wts * p * np.log(p)))
    S = L_current + s.Lg
    purchase = np.zeros_like(g) if S <= 0 else g / S
    if S <= 0 and np.any(g > 0):
        raise RootNotBracketed("no employment to spread the government purchase over")
    rhs = s.alpha * s.after_tax_income + s.alpha * purchase * P

    lo = np.full(p.shape, mw * BRACKET_LOW)
    hi = np.full(p.shape, mw * BRACKET_HIGH)
    if np.any(_foc_gap(lo, P, C, mw, rhs) > 0) or np.any(_foc_gap(hi, P, C, mw, rhs) < 0):
        raise RootNotBracketed(f"best response outside [{lo[0]!r}, {hi[0]!r}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        done = (mid == lo) | (mid == hi)
        if np.all(done):
            break
        below = _foc_gap(mid, P, C, mw, rhs) < 0
        lo = np.where(below & ~done, mid, lo)
        hi = np.where(~below & ~done, mid, hi)
    return 0.5 * (lo + hi)


def best_response_price(i: int, prices, L_current: float, s: ValidatedScenario,
                        weights=None, g=None) -> float:
    """Best-response price of firm ``i`` given everyone's current prices."""
    p = np.asarray(prices, dtype=float)
    if weights is None:
        weights = s.N / p.size
    return float(best_response_prices(p, L_current, s, weights, g)[i])


def _employment_update(q, s: ValidatedScenario, weights, g) -> float | None:
    """Employment solving the discretised identity given demand, or None."""
    denom = 1.0 - float(np.sum(weights * s.m * q))
    if not denom > 0:
        return None
    L = float(np.sum(weights * (s.m * s.Lg * q + s.m * g + s.F))) / denom
    return L if L > 0 else None


def _soc_violations(e: DiscreteEconomy) -> list[int]:
    """Firms whose price is beaten by a nearby price at fixed aggregates."""
    s = e.scenario
    wts = e.weights
    P = float(np.sum(wts * e.prices))
    C = float(np.sum(wts * e.prices * np.log(e.prices)))
    I = s.after_tax_income
    mw = s.m * s.w
    S = e.L + s.Lg

    def own_profit(x):
        q = (I + (C - P * np.log(x)) / s.alpha) / P
        return (S * q + e.g) * (x - mw) - s.F * s.w

    base = own_profit(e.prices)
    slack = 1e-12 * (np.abs(base) + s.F * s.w + 1.0)
    worse = np.zeros(e.n, dtype=bool)
    for factor in (1 - SOC_STEP, 1 + SOC_STEP):
        worse |= own_profit(e.prices * factor) > base + slack
    return np.flatnonzero(worse).tolist()


def solve_fixed_point(init_prices, s: ValidatedScenario, settings: SolverSettings | None = None,
                      g=None) -> DiscreteEconomy:
    """Joint fixed point of demand, employment and best-response pricing.

    Each iteration: (a) demand at current prices, (b) employment from the
    employment identity, (c) simultaneous damped best responses
    ``p <- (1-d) p + d BR(p)``. ``g`` may be a per-firm vector (diagnostic);
    by default every firm receives the scenario's g.

    Raises:
        NoConvergence: after ``settings.max_iter`` iterations.
        NonInteriorDemand: with ``strict_interior``, at the first non-interior
            iterate; otherwise only if the final state were non-interior.
    """
    settings = settings or SolverSettings()
    p = np.array(init_prices, dtype=float)
    n = p.size
    if n < 2:
        raise ValueError("need at least two firms")
    if np.any(p <= 0):
        raise ValueError("initial prices must be positive")
    weight = s.N / n
    wts = np.full(n, weight)
    g = np.full(n, s.g) if g is None else np.asarray(g, dtype=float)
    I = s.after_tax_income

    # Employment seed for iterates before any interior demand is seen: the
    # labor needed for government purchases and fixed inputs alone.
    L = float(np.sum(wts * (s.m * g + s.F)))
    q = None
    rejected = 0
    for it in range(1, settings.max_iter + 1):
        try:
            q = demand_given_prices(p, I, s.utility, wts)
        except NonInteriorDemand:
            if settings.strict_interior:
                raise
            q = None
            rejected += 1
            L_new = None
        else:
            L_new = _employment_update(q, s, wts, g)
            if L_new is None:
                rejected += 1
        L_prev = L
        if L_new is not None:
            L = L_new
        br = best_response_prices(p, L, s, wts, g)
        p_new = (1 - settings.damping) * p + settings.damping * br
        dp = float(np.max(np.abs(p_new - p) / p))
        dL = abs(L - L_prev) / L
        p = p_new
        if L_new is not None and dp < settings.tol and dL < settings.tol:
            # Re-evaluate demand and employment at the final prices.
            q = demand_given_prices(p, I, s.utility, wts)
            L_final = _employment_update(q, s, wts, g)
            if L_final is not None:
                L = L_final
            e = DiscreteEconomy(n=n, weight=weight, prices=p, quantities=q, L=L,
                                scenario=s, g=g, iterations=it, rejected_iterates=rejected)
            e.soc_violations = _soc_violations(e)
            if e.soc_violations:
                log.warning("second-order condition fails for firms %s", e.soc_violations[:8])
            return e
    state = DiscreteEconomy(n=n, weight=weight, prices=p,
                            quantities=q if q is not None else np.full(n, np.nan),
                            L=L, scenario=s, g=g, iterations=settings.max_iter,
                            rejected_iterates=rejected)
    raise NoConvergence(f"no convergence after {settings.max_iter} iterations", state)


def symmetry_gap(e: DiscreteEconomy) -> float:
    """Relative price spread ``(max p - min p) / min p``."""
    return float((np.max(e.prices) - np.min(e.prices)) / np.min(e.prices))


def random_initial_prices(n: int, s: ValidatedScenario, rng: np.random.Generator,
                          low: float = 0.5, high: float = 2.0) -> np.ndarray:
    """Uniform draws on ``[low, high]`` in units of marginal cost ``m*w``."""
    return rng.uniform(low, high, size=n) * s.m * s.w


def oracle_deltas(e: DiscreteEconomy, eq) -> dict[str, float]:
    """Worst relative deviation of the discrete economy from a symmetric equilibrium.

    ``eq`` is any object with ``p, q, L, Pi``. Profit is a difference of a
    gross margin and the fixed cost, so its error is measured relative to
    ``max(|Pi|, F*w)`` rather than ``|Pi|`` alone.
    """
    s = e.scenario
    pi_scale = max(abs(eq.Pi), s.F * s.w)
    return {
        "p": float(np.max(np.abs(e.prices - eq.p)) / abs(eq.p)),
        "q": float(np.max(np.abs(e.quantities - eq.q)) / abs(eq.q)),
        "L": abs(e.L - eq.L) / abs(eq.L),
        "Pi": float(np.max(np.abs(e.profits - eq.Pi)) / pi_scale),
    }
