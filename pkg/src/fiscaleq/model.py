"""Domain types and admissibility checks.

Units: ``w`` is currency per worker, ``g`` goods per variety, ``Lg`` persons,
``m`` and ``F`` workers per unit of output and per firm, ``alpha`` is the
absolute risk aversion per unit of goods. Everything is a plain float.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import InadmissibleParameters

#: Flat key order used by config files, CSV manifests and the CLI.
FLAT_KEYS = ("N", "m", "F", "alpha", "kappa", "k", "w", "g", "tau", "Lg")


@dataclass(frozen=True)
class UtilitySpec:
    """CARA partial utility ``u(q) = k - kappa * exp(-alpha * q)``."""

    alpha: float
    kappa: float = 1.0
    k: float = 0.0


@dataclass(frozen=True)
class Technology:
    """Labor requirement ``l = F + m * q`` per firm."""

    m: float
    F: float


@dataclass(frozen=True)
class MarketStructure:
    N: float
    w: float


@dataclass(frozen=True)
class Policy:
    """Fiscal levers: purchase per variety, income-tax rate, public employment."""

    g: float
    tau: float
    Lg: float


@dataclass(frozen=True)
class ScenarioConfig:
    utility: UtilitySpec
    tech: Technology
    market: MarketStructure
    policy: Policy

    @classmethod
    def from_flat(cls, d: dict) -> "ScenarioConfig":
        return cls(
            utility=UtilitySpec(alpha=float(d["alpha"]), kappa=float(d.get("kappa", 1.0)),
                                k=float(d.get("k", 0.0))),
            tech=Technology(m=float(d["m"]), F=float(d["F"])),
            market=MarketStructure(N=float(d["N"]), w=float(d["w"])),
            policy=Policy(g=float(d["g"]), tau=float(d["tau"]), Lg=float(d["Lg"])),
        )

    def to_flat(self) -> dict:
        flat = {}
        for part in (self.utility, self.tech, self.market, self.policy):
            flat.update(asdict(part))
        return {key: flat[key] for key in FLAT_KEYS}

    def with_values(self, **changes: float) -> "ScenarioConfig":
        """Copy with some flat parameters replaced, e.g. ``cfg.with_values(g=0.0)``."""
        unknown = set(changes) - set(FLAT_KEYS)
        if unknown:
            raise KeyError(f"unknown parameter(s): {sorted(unknown)}")
        flat = self.to_flat()
        flat.update(changes)
        return ScenarioConfig.from_flat(flat)


@dataclass(frozen=True)
class ValidatedScenario:
    """An admissible scenario with flat attribute access.

    Only ``validate`` should construct these; downstream code assumes every
    invariant holds.
    """

    N: float
    m: float
    F: float
    alpha: float
    kappa: float
    k: float
    w: float
    g: float
    tau: float
    Lg: float

    @property
    def config(self) -> ScenarioConfig:
        return ScenarioConfig.from_flat(self.to_flat())

    @property
    def after_tax_income(self) -> float:
        return (1.0 - self.tau) * self.w

    @property
    def utility(self) -> UtilitySpec:
        return UtilitySpec(self.alpha, self.kappa, self.k)

    def to_flat(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_values(self, **changes: float) -> "ValidatedScenario":
        """Re-validated copy with some parameters replaced."""
        return validate(self.config.with_values(**changes))


def violations(config: ScenarioConfig) -> list[str]:
    """Every violated constraint of ``config``; empty means admissible."""
    flat = config.to_flat()
    out = [f"{key} is not finite" for key in FLAT_KEYS if not math.isfinite(flat[key])]
    if out:
        return out
    N, m, F, alpha = flat["N"], flat["m"], flat["F"], flat["alpha"]
    if not alpha > 0:
        out.append("alpha > 0 violated")
    if not flat["kappa"] > 0:
        out.append("kappa > 0 violated")
    if not m > 0:
        out.append("m > 0 violated")
    if not F >= 0:
        out.append("F >= 0 violated")
    if not N > 0:
        out.append("N > 0 violated")
    if not flat["w"] > 0:
        out.append("w > 0 violated")
    if not flat["g"] >= 0:
        out.append("g >= 0 violated")
    if not 0 < flat["tau"] < 1:
        out.append("tau in (0,1) violated")
    if not flat["Lg"] >= 0:
        out.append("Lg >= 0 violated")
    if not N * m > alpha:
        out.append("Nm > alpha violated")
    # With no fixed input, no purchase and no public jobs the economy has zero
    # employment and the consumption formula is 0/0.
    if F == 0 and flat["g"] == 0 and flat["Lg"] == 0:
        out.append("F + g + Lg > 0 violated")
    return out


def validate(config: ScenarioConfig | ValidatedScenario) -> ValidatedScenario:
    """Strict admissibility check; never clamps.

    Raises:
        InadmissibleParameters: listing every violated constraint.
    """
    if isinstance(config, ValidatedScenario):
        config = config.config
    problems = violations(config)
    if problems:
        raise InadmissibleParameters(problems)
    return ValidatedScenario(**config.to_flat())


def utility_of_bundle(q: float, spec: UtilitySpec, N: float) -> float:
    """Total utility of consuming ``q`` of each of ``N`` varieties."""
    return N * (spec.k - spec.kappa * math.exp(-spec.alpha * q))


#: Canonical scenario used by docs, CLI defaults and many tests.
SCENARIO_B = ScenarioConfig.from_flat(
    dict(N=10.0, m=1.0, F=0.1, alpha=0.5, kappa=1.0, k=0.0, w=1.0, g=1.0, tau=0.2, Lg=0.0)
)
SCENARIO_A = SCENARIO_B.with_values(F=1.0, g=0.0)


__all__ = [
    "FLAT_KEYS", "UtilitySpec", "Technology", "MarketStructure", "Policy", "ScenarioConfig",
    "ValidatedScenario", "violations", "validate", "utility_of_bundle", "SCENARIO_A",
    "SCENARIO_B",
]
