"""Finite scenario markets, portfolios, and excess returns.

A market is a one-period model on N scenarios with strictly positive
probabilities, one riskless asset earning r > -1, and d risky assets whose
returns are tabulated per scenario.  A portfolio is the vector of fractions
of wealth in the risky assets; the riskless fraction is implied and never
stored.  The excess return of pi is X_pi = pi . (R - r 1), scenario by
scenario.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

Vector = NDArray[np.float64]
Portfolio = Vector    # shape (d,): risky fractions of wealth
ScenarioRV = Vector   # shape (N,): one payoff per scenario

PROB_SUM_TOL = 1e-12
RANK_TOL = 1e-10
DEGENERACY_TOL = 1e-12


class DegenerateMarketError(ValueError):
    """Raised when mu = r 1 so no portfolio has nonzero expected excess."""


def _frozen_array(a, dtype=np.float64) -> Vector:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScenarioMarket:
    """Immutable one-period market on finitely many scenarios.

    Attributes
    ----------
    probs : shape (N,) scenario probabilities.
    riskless_rate : return r of the riskless asset.
    returns : shape (d, N), row i holds asset i's return per scenario.
    asset_names, scenario_names : optional labels, stored as tuples.
    """

    probs: Vector
    riskless_rate: float
    returns: Vector
    asset_names: tuple[str, ...] | None = None
    scenario_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        probs = _frozen_array(self.probs)
        returns = _frozen_array(self.returns)
        if probs.ndim != 1:
            raise ValueError("probs must be 1-D")
        if returns.ndim != 2:
            raise ValueError("returns must be 2-D (assets x scenarios)")
        if returns.shape[1] != probs.size:
            raise ValueError("returns must have one column per scenario")
        if probs.size == 0 or returns.shape[0] == 0:
            raise ValueError("market needs at least one scenario and one asset")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "riskless_rate", float(self.riskless_rate))
        for field in ("asset_names", "scenario_names"):
            names = getattr(self, field)
            if names is not None:
                names = tuple(str(s) for s in names)
                expect = returns.shape[0] if field == "asset_names" else probs.size
                if len(names) != expect:
                    raise ValueError(f"{field} must have length {expect}")
                object.__setattr__(self, field, names)

    @property
    def n_scenarios(self) -> int:
        return self.probs.size

    @property
    def n_assets(self) -> int:
        return self.returns.shape[0]

    @property
    def mean_returns(self) -> Vector:
        """mu, the probability-weighted mean return of each asset."""
        return self.returns @ self.probs

    @property
    def excess_matrix(self) -> Vector:
        """R - r 1, shape (d, N)."""
        return self.returns - self.riskless_rate


def _rank_pivoted(mat: Vector, tol: float) -> int:
    """Row rank by Gaussian elimination with partial pivoting."""
    a = np.array(mat, dtype=np.float64)
    m, n = a.shape
    rank = 0
    row = 0
    for col in range(n):
        if row >= m:
            break
        piv = row + int(np.argmax(np.abs(a[row:, col])))
        if abs(a[piv, col]) <= tol:
            continue
        a[[row, piv]] = a[[piv, row]]
        a[row + 1:] -= np.outer(a[row + 1:, col] / a[row, col], a[row])
        rank += 1
        row += 1
    return rank


def validate_market(market: ScenarioMarket) -> list[str]:
    """Return a list of violation entries, empty when the market is usable.

    Each entry is "CODE: detail" with CODE one of PROB_POSITIVE, PROB_SUM,
    RISKLESS_RATE, NONREDUNDANT, NONDEGENERATE.  Nonredundancy asks the d+1
    rows {(1+r) 1, (1+R_i)} to be linearly independent; nondegeneracy asks
    mu != r 1.
    """
    report: list[str] = []
    p = market.probs
    if np.any(p <= 0.0):
        bad = int(np.argmin(p))
        report.append(f"PROB_POSITIVE: scenario {bad} has probability {p[bad]!r}")
    total = float(p.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        report.append(f"PROB_SUM: probabilities sum to {total!r}")
    if not market.riskless_rate > -1.0:
        report.append(f"RISKLESS_RATE: r = {market.riskless_rate!r} is not > -1")
    gross = np.vstack([np.full(market.n_scenarios, 1.0 + market.riskless_rate),
                       1.0 + market.returns])
    if _rank_pivoted(gross, RANK_TOL) < market.n_assets + 1:
        report.append("NONREDUNDANT: some asset is a combination of the others "
                      "and the riskless asset")
    if np.abs(market.mean_returns - market.riskless_rate).max() <= DEGENERACY_TOL:
        report.append("NONDEGENERATE: every asset has mean return equal to r")
    return report


def excess_return(market: ScenarioMarket, pi: Portfolio) -> ScenarioRV:
    """X_pi = pi . (R - r 1), one value per scenario."""
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (market.n_assets,):
        raise ValueError(f"portfolio must have shape ({market.n_assets},)")
    return pi @ market.excess_matrix


def expected_excess(market: ScenarioMarket, pi: Portfolio) -> float:
    """E[X_pi] = pi . (mu - r 1)."""
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (market.n_assets,):
        raise ValueError(f"portfolio must have shape ({market.n_assets},)")
    return float(pi @ (market.mean_returns - market.riskless_rate))


def canonical_portfolio(market: ScenarioMarket, nu: float) -> Portfolio:
    """The multiple of mu - r 1 with expected excess exactly nu.

    This is the least-norm element of the slice Pi_nu; it exists whenever
    the market is nondegenerate.
    """
    a = market.mean_returns - market.riskless_rate
    if np.abs(a).max() <= DEGENERACY_TOL:
        raise DegenerateMarketError("mu = r 1: expected-excess slices are empty")
    return nu * a / float(a @ a)
