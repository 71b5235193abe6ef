"""Exception hierarchy for the fiscal equilibrium engine."""

from __future__ import annotations


class FiscalEqError(Exception):
    """Base class for every error raised by this package."""


class InadmissibleParameters(FiscalEqError, ValueError):
    """Raised by ``validate`` with the full list of violated constraints."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InternalInconsistency(FiscalEqError, RuntimeError):
    """Two algebraic routes to the same quantity disagreed (an implementation bug)."""


class DegenerateDenominator(FiscalEqError, ArithmeticError):
    pass


class PerturbationInadmissible(FiscalEqError, ValueError):
    """No admissible finite-difference stencil exists around the scenario."""


class NonInteriorDemand(FiscalEqError, ArithmeticError):
    """CARA demand produced q(j) <= 0 for at least one variety.

    ``varieties`` lists the offending indices; ``quantities`` holds the raw
    (unclamped) demand vector and ``prices`` the price iterate that produced it.
    """

    def __init__(self, varieties, quantities, prices=None):
        self.varieties = [int(v) for v in varieties]
        self.quantities = quantities
        self.prices = prices
        super().__init__(f"non-interior demand at varieties {self.varieties[:8]}"
                         + (" ..." if len(self.varieties) > 8 else ""))


class RootNotBracketed(FiscalEqError, ArithmeticError):
    pass


class NoConvergence(FiscalEqError, RuntimeError):
    def __init__(self, message: str, state=None):
        self.state = state
        super().__init__(message)


class EmptyGrid(FiscalEqError, ValueError):
    pass


class TargetBelowBaseline(FiscalEqError, ValueError):
    pass


class InadmissibleDose(FiscalEqError, ValueError):
    pass
