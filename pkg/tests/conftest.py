"""Shared market builders for the test suite."""

from __future__ import annotations

import numpy as np

from rhoarb.market import ScenarioMarket, validate_market


def binomial_market() -> ScenarioMarket:
    """One risky asset, R in {1, 0} equal odds, r = 0."""
    return ScenarioMarket(probs=(0.5, 0.5), riskless_rate=0.0,
                          returns=[[1.0, 0.0]])


def duo_market() -> ScenarioMarket:
    """One risky asset, R in {2, -1} equal odds, r = 0."""
    return ScenarioMarket(probs=(0.5, 0.5), riskless_rate=0.0,
                          returns=[[2.0, -1.0]])


def make_random_market(rng: np.random.Generator, n_max: int = 10,
                       d_max: int = 3, r: float = 0.0) -> ScenarioMarket:
    """Valid random market: returns U[-1, 1], probabilities bounded away
    from zero, redrawn until the validation report is empty."""
    while True:
        d = int(rng.integers(1, d_max + 1))
        n = int(rng.integers(d + 1, n_max + 1))
        probs = rng.uniform(0.05, 1.0, n)
        probs = probs / probs.sum()
        returns = rng.uniform(-1.0, 1.0, (d, n))
        market = ScenarioMarket(probs=probs, riskless_rate=r, returns=returns)
        if not validate_market(market):
            return market


def make_priced_market(rng: np.random.Generator, n_max: int = 8,
                       d_max: int = 3) -> ScenarioMarket:
    """Arbitrage-free by construction: draws a strictly positive density Z
    and shifts raw returns so that E[Z (R_i - r)] = 0 holds exactly."""
    r = 0.0
    while True:
        d = int(rng.integers(1, d_max + 1))
        n = int(rng.integers(d + 2, n_max + 1))
        probs = rng.uniform(0.1, 1.0, n)
        probs = probs / probs.sum()
        z = rng.uniform(0.2, 2.0, n)
        z = z / (probs @ z)
        raw = rng.uniform(-1.0, 1.0, (d, n))
        returns = raw - ((probs * z) @ raw.T)[:, None] + r
        market = ScenarioMarket(probs=probs, riskless_rate=r, returns=returns)
        if not validate_market(market):
            return market


def make_dominating_market(rng: np.random.Generator, n_max: int = 8) -> ScenarioMarket:
    """First-kind arbitrage by construction: the single asset's return
    matches r on some scenarios and strictly exceeds it on the rest, so M
    is nonempty (densities supported on the matching scenarios) but never
    strictly positive."""
    while True:
        n = int(rng.integers(3, n_max + 1))
        probs = rng.uniform(0.1, 1.0, n)
        probs = probs / probs.sum()
        dominating = rng.uniform(0.2, 1.0, n)
        n_zero = int(rng.integers(1, n - 1))
        dominating[rng.permutation(n)[:n_zero]] = 0.0
        market = ScenarioMarket(probs=probs, riskless_rate=0.0,
                                returns=dominating[None, :])
        report = validate_market(market)
        if not report:
            return market
