"""Primal route: minimal risk on expected-excess slices and what it implies.

rho_nu is the infimum of rho(X_pi) over the slice Pi_nu = {pi : E[X_pi] = nu}.
Positive homogeneity collapses the whole frontier to the two numbers
rho_0 = 0 (expectation-bounded measures attain it at pi = 0) and rho_1:
rho_nu = nu rho_1 for nu > 0.  The sign of rho_1 decides everything:

    rho_1 > 0    no rho-arbitrage, the efficient frontier exists
    rho_1 = 0    rho-arbitrage (boundary)
    rho_1 < 0    strong rho-arbitrage, scaling blows past every risk budget

ES and SPECTRAL minimize through the shortfall reformulation as one LP;
WC is an LP directly; EVAR and TNORM run a Kelley cutting-plane loop with
tight dual-density cuts.  VaR is not positively-homogeneous-convex and has
no global minimizer route here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, lp_solve
from .market import (ScenarioMarket, canonical_portfolio, excess_return)
from .measures import RiskSpec, evaluate
from .solvers import KelleyResult, kelley_minimize, minimize_1d_convex

Vector = NDArray[np.float64]

BOX_DEFAULT = 1e6
BOX_GROWTH = 100.0
CLASSIFY_TOL = 1e-7
STRICT_NEG_TOL = 1e-9


class UnsupportedGlobalMinError(ValueError):
    """UNSUPPORTED_GLOBAL_MIN: no slice-minimization route for this measure."""


@dataclass(frozen=True, eq=False)
class FrontierResult:
    """Minimal risk at unit expected excess and how it was obtained.

    rho1 may be -inf (box kept binding after enlargement / unbounded LP).
    attained is False exactly when the infimum is not achieved by any
    portfolio (then argmin is the best iterate seen, for diagnostics).
    rho0 is always 0.0 for the supported measures: pi = 0 attains it.
    route is DIRECT (d = 1 canonical slice), LP, or KELLEY.
    """

    rho1: float
    attained: bool
    argmin: Vector | None
    spec: RiskSpec
    route: str
    status: str
    rho0: float = 0.0
    gap: float = 0.0
    annotations: tuple[str, ...] = ()

    @property
    def efficient_frontier_exists(self) -> bool:
        return math.isfinite(self.rho1) and self.rho1 > 0.0


@dataclass(frozen=True, eq=False)
class ArbitrageVerdict:
    """Classification outcome with its certificate.

    verdict is NO_ARBITRAGE, RHO_ARBITRAGE, or STRONG_RHO_ARBITRAGE; route
    records which theory produced it (PRIMAL, DUAL, ELLIPTICAL).  The
    certificate carries a portfolio (primal strong case), a dual witness
    summary, or closed-form scalars; annotations flag BOUNDARY and other
    caveats.
    """

    verdict: str
    route: str
    certificate: dict = field(default_factory=dict)
    rho1: float | None = None
    annotations: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "route": self.route,
               "annotations": list(self.annotations)}
        if self.rho1 is not None:
            out["rho1"] = self.rho1
        if self.certificate:
            out["certificate"] = self.certificate
        return out


def build_ru_lp(market: ScenarioMarket, alpha, nu: float, *,
                box: float = BOX_DEFAULT) -> LinearProgram:
    """Shortfall LP for ES (scalar alpha) or a spectral mixture.

    Variables (pi, s_j, u_j.) per atom j of the mixture ((alpha, 1),) for
    plain ES: minimize sum_j w_j (s_j + E[u_j] / alpha_j) subject to
    u_j,omega >= -X_pi(omega) - s_j, u_j >= 0, and E[X_pi] = nu.  At the
    optimum this equals the spectral risk of X_pi because each inner block
    is the shortfall representation of ES^{alpha_j}.
    """
    if np.isscalar(alpha):
        atoms = ((float(alpha), 1.0),)
    else:
        atoms = tuple((float(a), float(w)) for a, w in alpha)
    d, N = market.n_assets, market.n_scenarios
    J = len(atoms)
    E = market.excess_matrix
    p = market.probs
    nvar = d + J + J * N

    c = np.zeros(nvar)
    for j, (a, w) in enumerate(atoms):
        c[d + j] = w
        c[d + J + j * N: d + J + (j + 1) * N] = (w / a) * p

    A_eq = np.zeros((1, nvar))
    A_eq[0, :d] = market.mean_returns - market.riskless_rate
    b_eq = np.asarray([nu])

    # Rows -X_pi - s_j - u_j,omega <= 0 for every atom j and scenario omega.
    A_le = np.zeros((J * N, nvar))
    b_le = np.zeros(J * N)
    for j in range(J):
        rows = slice(j * N, (j + 1) * N)
        A_le[rows, :d] = -E.T
        A_le[rows, d + j] = -1.0
        A_le[rows.start + np.arange(N), d + J + j * N + np.arange(N)] = -1.0

    lower = np.concatenate([np.full(d, -box), np.full(J, -np.inf), np.zeros(J * N)])
    upper = np.concatenate([np.full(d, box), np.full(J, np.inf), np.full(J * N, np.inf)])
    return LinearProgram(c=c, A_eq=A_eq, b_eq=b_eq, A_le=A_le, b_le=b_le,
                         lower=lower, upper=upper)


def _build_wc_lp(market: ScenarioMarket, nu: float, box: float) -> LinearProgram:
    """min t over pi in Pi_nu with t >= -X_pi(omega) everywhere."""
    d, N = market.n_assets, market.n_scenarios
    c = np.zeros(d + 1)
    c[d] = 1.0
    A_eq = np.zeros((1, d + 1))
    A_eq[0, :d] = market.mean_returns - market.riskless_rate
    A_le = np.zeros((N, d + 1))
    A_le[:, :d] = -market.excess_matrix.T
    A_le[:, d] = -1.0
    lower = np.concatenate([np.full(d, -box), [-np.inf]])
    upper = np.concatenate([np.full(d, box), [np.inf]])
    return LinearProgram(c=c, A_eq=A_eq, b_eq=[nu], A_le=A_le, b_le=np.zeros(N),
                         lower=lower, upper=upper)


def _evar_cut_oracle(market: ScenarioMarket, alpha: float):
    """Tight-cut oracle for EVaR: the maximizing Gibbs density at each pi.

    EVaR(X) = max{E[-Z X] : E[Z log Z] <= -log alpha, Z in D}; the
    maximizer is the Gibbs density at the z solving z A'(z) - A(z) = beta
    (strictly increasing in z), or the min-atom density when beta exceeds
    log(1 / P[X = min]).  The returned value is pi . c by construction.
    """
    E = market.excess_matrix
    p = market.probs
    beta = -math.log(alpha)

    def gibbs(x: Vector, z: float) -> Vector:
        w = np.exp(-z * (x - x.min()))
        s = float(p @ w)
        return w / s

    def entropy_gap(x: Vector, z: float) -> float:
        zd = gibbs(x, z)
        ent = float(p @ np.where(zd > 0, zd * np.log(np.maximum(zd, 1e-300)), 0.0))
        return ent

    def oracle(pi: Vector) -> tuple[float, Vector]:
        x = pi @ E
        spread = float(x.max() - x.min())
        if spread <= 1e-14:
            zd = np.ones_like(x)
        else:
            pmin = float(p[x <= x.min() + 1e-14 * max(1.0, spread)].sum())
            if beta >= -math.log(pmin) - 1e-12:
                zd = (x <= x.min() + 1e-14 * max(1.0, spread)) / pmin
            else:
                lo, hi = 0.0, 1.0
                while entropy_gap(x, hi) < beta:
                    hi *= 4.0
                    if hi > 1e12:
                        break
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    if entropy_gap(x, mid) < beta:
                        lo = mid
                    else:
                        hi = mid
                zd = gibbs(x, 0.5 * (lo + hi))
        cut = -E @ (p * zd)
        return float(pi @ cut), cut

    return oracle


def _tnorm_cut_oracle(market: ScenarioMarket, p_exp: float, alpha: float):
    """Tight-cut oracle for TNORM: the norm-attaining density at each pi.

    With q conjugate to p, the maximizer of E[-Z X] over {||Z||_q <= 1/alpha,
    Z in D} is Z* proportional to ((s* - x)+)^(p-1) at the optimal shift s*;
    E[Z*] = 1 after normalization and ||Z*||_q = 1/alpha at the optimum.  A
    bisected mix toward Z = 1 repairs any numerical norm overshoot.
    """
    E = market.excess_matrix
    p = market.probs
    q = p_exp / (p_exp - 1.0)
    bound = 1.0 / alpha

    def qnorm(z: Vector) -> float:
        zmax = float(np.abs(z).max())
        if zmax == 0.0:
            return 0.0
        return zmax * float(p @ (np.abs(z) / zmax) ** q) ** (1.0 / q)

    def oracle(pi: Vector) -> tuple[float, Vector]:
        x = pi @ E
        span = float(x.max() - x.min())
        if span <= 1e-14:
            zd = np.ones_like(x)
        else:
            def h(s: float) -> float:
                y = np.maximum(s - x, 0.0)
                ymax = float(y.max())
                if ymax == 0.0:
                    return -s
                return ymax * float(p @ (y / ymax) ** p_exp) ** (1.0 / p_exp) / alpha - s

            lo = float(x.min()) - 1.0
            hi = float(x.max()) + max(span, 1.0) / alpha
            s_star, _ = minimize_1d_convex(h, (lo, hi), tol=1e-11)
            y = np.maximum(s_star - x, 0.0)
            den = float(p @ y ** (p_exp - 1.0))
            if den <= 1e-300:
                # s* collapsed onto min x (happens iff pmin^(1/p) >= alpha);
                # the attaining density then sits on the min atoms, where it
                # meets the q-norm bound, not on the unit density.
                mask = x <= x.min() + 1e-14 * max(1.0, span)
                zd = mask / float(p[mask].sum())
            else:
                zd = y ** (p_exp - 1.0) / den
            if qnorm(zd) > bound:
                t_lo, t_hi = 0.0, 1.0  # theta = 1 keeps zd, 0 is the unit density
                for _ in range(80):
                    t = 0.5 * (t_lo + t_hi)
                    if qnorm(t * zd + (1.0 - t)) > bound:
                        t_hi = t
                    else:
                        t_lo = t
                zd = t_lo * zd + (1.0 - t_lo)
        cut = -E @ (p * zd)
        return float(pi @ cut), cut

    return oracle


def _kelley_route(market: ScenarioMarket, spec: RiskSpec, nu: float,
                  box: float, tol: float) -> KelleyResult:
    if spec.kind == "EVAR":
        oracle = _evar_cut_oracle(market, spec.alpha)
    else:
        oracle = _tnorm_cut_oracle(market, spec.p, spec.alpha)
    a = market.mean_returns - market.riskless_rate
    use_box = max(box, 2.0 * nu / float(np.abs(a).max()))
    return kelley_minimize(oracle, a, level=nu, box=use_box, tol=tol)


def compute_rho1(market: ScenarioMarket, spec: RiskSpec, *, box: float = BOX_DEFAULT,
                 tol: float = 1e-9) -> FrontierResult:
    """Minimal risk over the unit expected-excess slice Pi_1.

    d = 1 takes the direct route (the slice is the canonical singleton);
    ES/SPECTRAL/WC solve one LP; EVAR/TNORM run cutting planes.  A binding
    box is enlarged once geometrically before rho_1 = -inf is declared.
    VAR raises UnsupportedGlobalMinError, GENTROPIC has no primal route.
    """
    return _compute_rho_nu(market, spec, 1.0, box=box, tol=tol)


def _compute_rho_nu(market: ScenarioMarket, spec: RiskSpec, nu: float, *,
                    box: float, tol: float) -> FrontierResult:
    if spec.kind == "VAR":
        raise UnsupportedGlobalMinError(
            "UNSUPPORTED_GLOBAL_MIN: VaR slice minima are not computed")
    if spec.kind == "GENTROPIC":
        raise UnsupportedGlobalMinError(
            "UNSUPPORTED_GLOBAL_MIN: GENTROPIC is dual-side only; "
            "use EVAR/TNORM for the primal route")

    if market.n_assets == 1:
        pi = canonical_portfolio(market, nu)
        val = evaluate(spec, excess_return(market, pi), market.probs)
        return FrontierResult(rho1=val / nu, attained=True, argmin=pi, spec=spec,
                              route="DIRECT", status="OPTIMAL")

    if spec.kind in ("ES", "SPECTRAL", "WC"):
        for attempt_box in (box, box * BOX_GROWTH):
            if spec.kind == "WC":
                lp = _build_wc_lp(market, nu, attempt_box)
            else:
                atoms = spec.spectrum if spec.kind == "SPECTRAL" else spec.alpha
                lp = build_ru_lp(market, atoms, nu, box=attempt_box)
            sol = lp_solve(lp)
            if sol.status == UNBOUNDED:
                return FrontierResult(rho1=-math.inf, attained=False, argmin=None,
                                      spec=spec, route="LP", status=UNBOUNDED)
            if sol.status == INFEASIBLE:
                raise RuntimeError("slice LP infeasible on a nondegenerate market")
            pi = sol.x[:market.n_assets]
            if np.abs(pi).max() < attempt_box * (1.0 - 1e-9):
                return FrontierResult(rho1=sol.value / nu, attained=True, argmin=pi,
                                      spec=spec, route="LP", status=OPTIMAL)
        return FrontierResult(rho1=-math.inf, attained=False, argmin=pi, spec=spec,
                              route="LP", status="BOX_ACTIVE",
                              annotations=("BOX_ACTIVE",))

    # EVAR / TNORM: cutting planes, one box enlargement before giving up.
    res = _kelley_route(market, spec, nu, box, tol)
    if res.status == "BOX_ACTIVE":
        res = _kelley_route(market, spec, nu, box * BOX_GROWTH, tol)
        if res.status == "BOX_ACTIVE":
            return FrontierResult(rho1=-math.inf, attained=False, argmin=res.pi,
                                  spec=spec, route="KELLEY", status="BOX_ACTIVE",
                                  gap=res.gap, annotations=("BOX_ACTIVE",))
    annotations = () if res.status == "OK" else (res.status,)
    return FrontierResult(rho1=res.value / nu, attained=res.status == "OK",
                          argmin=res.pi, spec=spec, route="KELLEY", status=OPTIMAL,
                          gap=res.gap, annotations=annotations)


def classify_primal(result: FrontierResult, tol: float = CLASSIFY_TOL) -> ArbitrageVerdict:
    """Trichotomy from the sign of rho_1.

    Strong iff rho_1 < 0.  At rho_1 = 0 (within tol) there is rho-arbitrage
    when the slice minimum is attained; an unattained zero infimum leaves no
    optimal portfolio to scale, so no rho-arbitrage (boundary annotated
    either way).  The unreachable branch rho_0 != 0 (empty zero-slice
    optimizer set) would force rho-arbitrage outright.
    """
    rho1 = result.rho1
    annotations = list(result.annotations)
    certificate: dict = {}
    if result.argmin is not None:
        certificate["portfolio"] = np.asarray(result.argmin).tolist()
        certificate["rho"] = rho1
        certificate["expected_excess"] = 1.0

    if rho1 == -math.inf or rho1 < -tol:
        verdict = "STRONG_RHO_ARBITRAGE"
    elif rho1 <= tol:
        annotations.append("BOUNDARY")
        if result.rho0 != 0.0:
            verdict = "RHO_ARBITRAGE"  # empty zero-slice case, unreachable here
        elif result.attained:
            verdict = "RHO_ARBITRAGE"
        else:
            verdict = "NO_ARBITRAGE"
            annotations.append("INFIMUM_NOT_ATTAINED")
    else:
        verdict = "NO_ARBITRAGE"

    return ArbitrageVerdict(verdict=verdict, route="PRIMAL", certificate=certificate,
                            rho1=rho1, annotations=tuple(annotations))


def frontier_points(result: FrontierResult, levels) -> list[tuple[float, float]]:
    """Points (nu, rho_nu) of the lower frontier boundary at the given levels.

    rho_0 = 0 at nu = 0 and rho_nu = nu rho_1 for nu > 0.  Negative levels
    are rejected; an infinite rho_1 leaves the frontier undefined beyond 0.
    """
    pts: list[tuple[float, float]] = []
    for nu in levels:
        nu = float(nu)
        if nu < 0.0:
            raise ValueError("frontier levels must be >= 0")
        if nu == 0.0:
            pts.append((0.0, result.rho0))
            continue
        if not math.isfinite(result.rho1):
            raise ValueError("rho_1 = -inf: the frontier is undefined beyond nu = 0")
        pts.append((nu, nu * result.rho1))
    return pts
