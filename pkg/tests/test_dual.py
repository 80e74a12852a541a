"""Tests for the martingale-density programs and the dual classification."""

import math

import numpy as np
import pytest

import oracles
from conftest import (binomial_market, duo_market, make_dominating_market,
                      make_priced_market, make_random_market)
from rhoarb.dual import (build_polytope, classical_no_arbitrage, classify_dual,
                         cross_validate, es_min_supnorm, es_strict_check,
                         gentropic_check, spectral_check)
from rhoarb.frontier import classify_primal, compute_rho1
from rhoarb.market import ScenarioMarket, excess_return
from rhoarb.measures import RiskSpec, evaluate

DUO_ENTROPY = 0.0566330122651324  # E[Z log Z] at Z = (2/3, 4/3), equal odds


def unpriceable_market() -> ScenarioMarket:
    # Both returns strictly exceed r, so no nonnegative density prices the
    # asset and M is empty.
    return ScenarioMarket(probs=(0.5, 0.5), riskless_rate=0.0,
                          returns=[[1.0, 0.5]])


# -- polytope and witnesses ----------------------------------------------------


def test_polytope_row_count_and_rhs():
    rng = np.random.default_rng(101)
    for _ in range(5):
        market = make_random_market(rng, n_max=7, d_max=3)
        poly = build_polytope(market)
        assert poly.A.shape == (market.n_assets + 1, market.n_scenarios)
        assert poly.b[0] == 1.0
        assert np.all(poly.b[1:] == 0.0)


def test_witness_scalars_match_the_vector():
    rng = np.random.default_rng(103)
    for _ in range(10):
        market = make_random_market(rng, n_max=8, d_max=3)
        res = classical_no_arbitrage(market)
        if res.witness is None:
            continue
        w = res.witness
        assert w.residual < 1e-8
        assert w.min_entry == float(w.z.min())
        assert w.sup_norm == float(np.abs(w.z).max())
        sup = es_min_supnorm(market)
        assert sup.witness.residual < 1e-8
        assert abs(sup.witness.sup_norm - sup.t) < 1e-8


# -- classical first-kind test -----------------------------------------------


def test_classical_binomial_delta_zero():
    res = classical_no_arbitrage(binomial_market())
    assert res.status == "OPTIMAL"
    assert abs(res.delta) < 1e-9
    assert np.allclose(res.witness.z, [0.0, 2.0], atol=1e-9)


def test_classical_duo_delta_two_thirds():
    res = classical_no_arbitrage(duo_market())
    assert abs(res.delta - 2.0 / 3.0) < 1e-9
    assert np.allclose(res.witness.z, [2.0 / 3.0, 4.0 / 3.0], atol=1e-9)


def test_classical_dominating_market_flags_first_kind():
    rng = np.random.default_rng(107)
    for _ in range(5):
        market = make_dominating_market(rng)
        res = classical_no_arbitrage(market)
        assert res.status == "OPTIMAL"
        assert abs(res.delta) < 1e-9
        verdict = classify_primal(compute_rho1(market, RiskSpec.wc()))
        assert verdict.verdict != "NO_ARBITRAGE"


# -- minimal sup-norm ---------------------------------------------------------


def test_supnorm_binomial():
    res = es_min_supnorm(binomial_market())
    assert abs(res.t - 2.0) < 1e-9
    assert np.allclose(res.witness.z, [0.0, 2.0], atol=1e-9)


def test_supnorm_duo():
    res = es_min_supnorm(duo_market())
    assert abs(res.t - 4.0 / 3.0) < 1e-9


def test_supnorm_empty_set_is_infinite():
    res = es_min_supnorm(unpriceable_market())
    assert res.status == "INFEASIBLE"
    assert res.t == math.inf
    assert res.witness is None
    for alpha in (0.1, 0.5, 0.9):
        verdict = classify_dual(unpriceable_market(), RiskSpec.es(alpha))
        assert verdict.verdict == "STRONG_RHO_ARBITRAGE"
        assert "M_EMPTY" in verdict.annotations


# -- strict ES box ------------------------------------------------------------


def test_strict_es_binomial_always_zero():
    for alpha in (0.1, 0.4, 0.5, 0.8):
        res = es_strict_check(binomial_market(), alpha)
        assert abs(res.delta) < 1e-9


def test_strict_es_duo_margins():
    res = es_strict_check(duo_market(), 0.25)
    assert abs(res.delta - 2.0 / 3.0) < 1e-9
    assert np.allclose(res.witness.z, [2.0 / 3.0, 4.0 / 3.0], atol=1e-8)
    res = es_strict_check(duo_market(), 0.75)
    assert abs(res.delta) < 1e-9


def test_strict_es_rejects_bad_alpha():
    with pytest.raises(ValueError):
        es_strict_check(duo_market(), 1.0)


# -- g-entropic penalties ------------------------------------------------------


def test_gentropic_duo_entropy_value_and_threshold():
    res = gentropic_check(duo_market(), "entropy", beta=-math.log(0.9))
    assert abs(res.v_star - DUO_ENTROPY) < 1e-8
    assert res.strong_ok and res.strict_ok
    assert abs(res.witness.penalty - DUO_ENTROPY) < 1e-6
    # Budget below the minimal entropy: strong arbitrage.
    res = gentropic_check(duo_market(), "entropy", beta=-math.log(0.96))
    assert not res.strong_ok


def test_gentropic_binomial_entropy_divergent():
    res = gentropic_check(binomial_market(), "entropy", beta=1.0)
    assert abs(res.v_star - math.log(2.0)) < 1e-9
    assert "DIVERGENT" in res.annotations
    assert not res.strict_ok  # P empty: never arbitrage-free
    for alpha in (0.2, 0.5, 0.9):
        verdict = classify_dual(binomial_market(), RiskSpec.evar(alpha))
        assert verdict.verdict != "NO_ARBITRAGE"


def test_gentropic_duo_power_value_and_threshold():
    res = gentropic_check(duo_market(), ("power", 2.0), beta=1.0)
    assert abs(res.v_star - 5.0 / 9.0) < 1e-6
    # TNORM p = 2 budget is 1/(2 alpha^2); the no-arbitrage region ends at
    # alpha = 3/sqrt(10).
    a_star = 3.0 / math.sqrt(10.0)
    assert classify_dual(duo_market(), RiskSpec.tnorm(2.0, 0.9)).verdict == "NO_ARBITRAGE"
    assert classify_dual(
        duo_market(), RiskSpec.tnorm(2.0, 0.96)).verdict == "STRONG_RHO_ARBITRAGE"
    assert 0.9 < a_star < 0.96


def test_gentropic_empty_set_is_infinite():
    res = gentropic_check(unpriceable_market(), "entropy", beta=5.0)
    assert res.v_star == math.inf
    assert not res.strong_ok
    assert "M_EMPTY" in res.annotations


def test_gentropic_power_matches_grid_oracle():
    rng = np.random.default_rng(109)
    q = 2.0
    gfun = lambda z: z ** q / q
    done = 0
    while done < 6:
        market = make_random_market(rng, n_max=4, d_max=2)
        cl = classical_no_arbitrage(market)
        if cl.status != "OPTIMAL":
            continue
        res = gentropic_check(market, ("power", q), beta=1e9)
        ref, _ = oracles.penalty_grid_min(market.probs, market.excess_matrix, gfun)
        assert abs(res.v_star - ref) < 1e-5, (res.v_star, ref)
        done += 1


# -- spectral mixtures ----------------------------------------------------------


def test_spectral_point_mass_reduces_to_es():
    for alpha in (0.25, 0.5, 0.75):
        for market in (binomial_market(), duo_market()):
            mix = classify_dual(market, RiskSpec.spectral([(alpha, 1.0)]))
            es = classify_dual(market, RiskSpec.es(alpha))
            assert mix.verdict == es.verdict


def test_spectral_binomial_never_arbitrage_free():
    spectra = ([(0.25, 0.5), (0.5, 0.5)], [(0.3, 1.0)],
               [(0.2, 0.25), (0.4, 0.25), (0.9, 0.5)])
    for spectrum in spectra:
        verdict = classify_dual(binomial_market(), RiskSpec.spectral(spectrum))
        assert verdict.verdict != "NO_ARBITRAGE"
    # Caps >= 2 admit the unique density, so the strong form holds exactly.
    res = spectral_check(binomial_market(), ((0.25, 0.5), (0.5, 0.5)))
    assert res.strong_feasible and not res.strict_ok


def test_spectral_duo_matches_grid_oracle():
    atoms = ((0.25, 0.5), (0.8, 0.5))
    res = spectral_check(duo_market(), atoms)
    target = np.array([2.0 / 3.0, 4.0 / 3.0])
    # The grid oracle's residual scales with its mesh width, so feasible
    # cases land near 1e-5 while infeasible ones stay at order 0.1.
    mismatch = oracles.spectral_mixture_feasible(
        np.array([0.5, 0.5]), target, atoms)
    assert res.strong_feasible
    assert mismatch < 1e-3
    assert res.strict_ok
    assert res.delta_prime > 1e-9
    mismatch = oracles.spectral_mixture_feasible(
        np.array([0.5, 0.5]), target, atoms, delta=res.delta)
    assert mismatch < 1e-3
    assert np.allclose(res.witness_strict.z, target, atol=1e-8)


def test_spectral_witness_is_in_m():
    rng = np.random.default_rng(113)
    for _ in range(5):
        market = make_random_market(rng, n_max=6, d_max=2)
        res = spectral_check(market, ((0.3, 0.4), (0.7, 0.6)))
        if res.witness_strong is not None:
            assert res.witness_strong.residual < 1e-8
        if res.witness_strict is not None:
            assert res.witness_strict.residual < 1e-8
            assert res.witness_strict.min_entry > 0.0


# -- dual classification ---------------------------------------------------------


def test_classify_dual_binomial_es_goldens():
    v = classify_dual(binomial_market(), RiskSpec.es(0.4))
    assert v.verdict == "RHO_ARBITRAGE"
    assert abs(v.certificate["t_star"] - 2.0) < 1e-9
    v = classify_dual(binomial_market(), RiskSpec.es(0.6))
    assert v.verdict == "STRONG_RHO_ARBITRAGE"


def test_classify_dual_duo_no_arbitrage_with_witness():
    v = classify_dual(duo_market(), RiskSpec.es(0.25))
    assert v.verdict == "NO_ARBITRAGE"
    assert np.allclose(v.certificate["witness"]["z"], [2.0 / 3.0, 4.0 / 3.0],
                       atol=1e-8)


def test_classify_dual_var_unsupported():
    from rhoarb.measures import UnsupportedDualError
    with pytest.raises(UnsupportedDualError):
        classify_dual(duo_market(), RiskSpec.var(0.3))


def test_classify_dual_es_monotone_in_alpha():
    rank = {"NO_ARBITRAGE": 0, "RHO_ARBITRAGE": 1, "STRONG_RHO_ARBITRAGE": 2}
    rng = np.random.default_rng(127)
    alphas = np.linspace(0.05, 0.95, 10)
    for _ in range(10):
        market = make_random_market(rng, n_max=8, d_max=3)
        ranks = [rank[classify_dual(market, RiskSpec.es(a)).verdict]
                 for a in alphas]
        for lo, hi in zip(ranks, ranks[1:]):
            assert hi >= lo


def test_es_equivalence_strict_vs_classical_and_supnorm():
    # delta*(alpha) > 0 iff classical delta > 0 and t* < 1/alpha; draws that
    # sit within 1e-6 of either threshold are skipped as boundary noise.
    rng = np.random.default_rng(131)
    checked = 0
    while checked < 40:
        market = make_random_market(rng, n_max=9, d_max=3)
        alpha = float(rng.uniform(0.05, 0.95))
        cl = classical_no_arbitrage(market)
        sup = es_min_supnorm(market)
        if cl.status != "OPTIMAL":
            continue
        if abs(sup.t - 1.0 / alpha) < 1e-6 or (0.0 < cl.delta < 1e-6):
            continue
        strict = es_strict_check(market, alpha)
        expected = cl.delta > 1e-9 and sup.t < 1.0 / alpha
        assert (strict.delta > 1e-9) == expected
        checked += 1


def test_dual_strong_has_primal_certificate():
    rng = np.random.default_rng(137)
    found = 0
    for _ in range(120):
        market = make_random_market(rng, n_max=7, d_max=3)
        alpha = float(rng.uniform(0.4, 0.95))
        spec = RiskSpec.es(alpha)
        if classify_dual(market, spec).verdict != "STRONG_RHO_ARBITRAGE":
            continue
        res = compute_rho1(market, spec)
        if abs(res.rho1) <= 1e-7:
            continue  # boundary band
        assert res.rho1 < 0.0
        x = excess_return(market, res.argmin)
        assert evaluate(spec, x, market.probs) < 0.0
        found += 1
    assert found >= 5


# -- cross-validation --------------------------------------------------------------


def test_cross_validate_binomial_grid():
    switch = []
    for alpha in np.arange(0.1, 0.95, 0.1):
        cv = cross_validate(binomial_market(), RiskSpec.es(float(alpha)))
        assert cv.status in ("AGREE", "BOUNDARY_AGREE")
        switch.append(cv.primal.verdict)
    assert switch[:4] == ["RHO_ARBITRAGE"] * 4          # alpha 0.1 .. 0.4
    assert switch[5:] == ["STRONG_RHO_ARBITRAGE"] * 4   # alpha 0.6 .. 0.9


def test_cross_validate_priced_market_agrees_no():
    rng = np.random.default_rng(139)
    for _ in range(5):
        market = make_priced_market(rng)
        cv = cross_validate(market, RiskSpec.wc())
        assert cv.status == "AGREE"
        assert cv.primal.verdict == "NO_ARBITRAGE"
        assert cv.dual.verdict == "NO_ARBITRAGE"


def test_cross_validate_report_round_trip():
    cv = cross_validate(duo_market(), RiskSpec.es(0.25))
    data = cv.to_dict()
    assert data["status"] == cv.status
    assert data["primal"]["verdict"] == "NO_ARBITRAGE"
    assert data["dual"]["verdict"] == "NO_ARBITRAGE"
    assert data["rho1"] == pytest.approx(2.0, abs=1e-9)
