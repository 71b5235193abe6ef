"""Monopolistic-competition general equilibrium with three fiscal levers.

Closed-form symmetric equilibria, policy comparative statics with a
finite-difference cross-check, and a discrete-firm fixed-point oracle.
"""

__version__ = "0.1.0"

from .closed_form import SymmetricEquilibrium, check_propositions, solve_equilibrium  # noqa: E402
from .errors import FiscalEqError, InadmissibleParameters  # noqa: E402
from .model import SCENARIO_A, SCENARIO_B, ScenarioConfig, validate  # noqa: E402

__all__ = [
    "__version__", "SymmetricEquilibrium", "check_propositions", "solve_equilibrium",
    "FiscalEqError", "InadmissibleParameters", "SCENARIO_A", "SCENARIO_B", "ScenarioConfig",
    "validate",
]
