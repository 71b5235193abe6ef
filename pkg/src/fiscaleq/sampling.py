"""Seeded random admissible scenarios for sweeps and certification runs."""

from __future__ import annotations

import numpy as np

from .model import ScenarioConfig, ValidatedScenario, validate

#: Share of draws that set g = 0 exactly so the equality branches get exercised.
ZERO_PURCHASE_SHARE = 0.1


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def draw_scenario(rng: np.random.Generator) -> ValidatedScenario:
    """One admissible scenario.

    N, m and w are log-uniform on [2,100], [0.1,5], [0.1,10]. alpha is
    log-uniform on [0.01, 0.95] * N*m, which keeps a margin from the
    admissibility bound. F, tau, g and Lg are uniform on [0,2], [0.05,0.95],
    [0,5] and [0,20]; a tenth of the draws have g = 0.
    """
    N = _log_uniform(rng, 2.0, 100.0)
    m = _log_uniform(rng, 0.1, 5.0)
    alpha = N * m * _log_uniform(rng, 0.01, 0.95)
    F = float(rng.uniform(0.0, 2.0))
    tau = float(rng.uniform(0.05, 0.95))
    g = float(rng.uniform(0.0, 5.0))
    if rng.uniform() < ZERO_PURCHASE_SHARE:
        g = 0.0
    Lg = float(rng.uniform(0.0, 20.0))
    w = _log_uniform(rng, 0.1, 10.0)
    return validate(ScenarioConfig.from_flat(
        dict(N=N, m=m, F=F, alpha=alpha, kappa=1.0, k=0.0, w=w, g=g, tau=tau, Lg=Lg)))


def sample_scenarios(k: int, seed: int) -> list[ValidatedScenario]:
    rng = np.random.default_rng(seed)
    return [draw_scenario(rng) for _ in range(k)]
