"""Dual route: martingale-density tests for risk arbitrage.

The martingale polytope of a market is

    M = { Z >= 0 : E[Z] = 1, E[Z (R_i - r)] = 0 for every asset i },

its strictly positive part P = M with Z > 0.  Classical no-arbitrage is
"P nonempty", certified by the max-min-entry LP.  Each positively
homogeneous measure turns absence of rho-arbitrage into a geometric
statement about M:

    WC        strong-form: M nonempty;     strict: max-min-entry delta* > 0
    ES        strong-form: min sup-norm t* over M is <= 1/alpha;
              strict: some Z in M with delta <= Z <= 1/alpha - delta, delta > 0
    SPECTRAL  strong-form: a mixture Z = sum_j w_j zeta_j in M with each
              zeta_j in the level-alpha_j box; strict: same with margins
    GENTROPIC strong-form: v* = min_{Z in M} E[g(Z)] <= beta;
              strict: classical delta* > 0 and v* < beta

The entropy penalty minimizes through an unconstrained cumulant dual (no
gap on finite scenario spaces, attained or not); other penalties run
away-step Frank-Wolfe over M with LP vertex oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .frontier import ArbitrageVerdict, CLASSIFY_TOL, compute_rho1, classify_primal
from .lp import INFEASIBLE, OPTIMAL, LinearProgram, lp_solve
from .market import ScenarioMarket
from .measures import DualSetDescriptor, RiskSpec, dual_descriptor
from .solvers import newton_cumulant_min

Vector = NDArray[np.float64]

ZERO_TOL = 1e-9          # LP vertex quantities at or below this count as zero
RESIDUAL_TOL = 1e-8
FW_TOL = 1e-8
STRICT_SCAN_DEPTH = 40
STRICT_DELTA_FLOOR = 1e-7  # box shrinks below this sit inside LP feasibility noise


@dataclass(frozen=True, eq=False)
class MartingalePolytope:
    """Equality system A z = b cutting M out of the nonnegative orthant.

    Row 0 is E[Z] = 1; row i prices asset i: sum_omega p_omega z_omega
    (R_i,omega - r) = 0.
    """

    A: Vector
    b: Vector

    @classmethod
    def of(cls, market: ScenarioMarket) -> "MartingalePolytope":
        p = market.probs
        A = np.vstack([p[None, :], market.excess_matrix * p[None, :]])
        b = np.zeros(A.shape[0])
        b[0] = 1.0
        A.setflags(write=False)
        b.setflags(write=False)
        return cls(A=A, b=b)

    def residual(self, z: Vector) -> float:
        return float(np.abs(self.A @ z - self.b).max())


build_polytope = MartingalePolytope.of


@dataclass(frozen=True, eq=False)
class DualWitness:
    """A density certificate: the vector plus the numbers proofs cite."""

    z: Vector
    min_entry: float
    sup_norm: float
    residual: float
    penalty: float | None = None

    @classmethod
    def of(cls, poly: MartingalePolytope, z: Vector,
           penalty: float | None = None) -> "DualWitness":
        z = np.asarray(z, dtype=np.float64)
        return cls(z=z, min_entry=float(z.min()), sup_norm=float(np.abs(z).max()),
                   residual=poly.residual(z), penalty=penalty)

    def to_dict(self) -> dict:
        out = {"z": self.z.tolist(), "min_entry": self.min_entry,
               "sup_norm": self.sup_norm, "residual": self.residual}
        if self.penalty is not None:
            out["penalty"] = self.penalty
        return out


@dataclass(frozen=True, eq=False)
class ClassicalResult:
    status: str                      # OPTIMAL or INFEASIBLE (M empty)
    delta: float                     # max over M of the minimal entry; 0.0 if empty
    witness: DualWitness | None


def classical_no_arbitrage(market: ScenarioMarket) -> ClassicalResult:
    """Max-min-entry LP over M; delta > 0 iff P is nonempty (FTAP form)."""
    poly = MartingalePolytope.of(market)
    N = market.n_scenarios
    rows = poly.A.shape[0]
    c = np.zeros(N + 1)
    c[N] = -1.0
    A_eq = np.hstack([poly.A, np.zeros((rows, 1))])
    A_le = np.hstack([-np.eye(N), np.ones((N, 1))])  # delta - z_omega <= 0
    sol = lp_solve(LinearProgram(c=c, A_eq=A_eq, b_eq=poly.b,
                                 A_le=A_le, b_le=np.zeros(N)))
    if sol.status == INFEASIBLE:
        return ClassicalResult(status=INFEASIBLE, delta=0.0, witness=None)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"classical LP returned {sol.status}")
    z = sol.x[:N]
    return ClassicalResult(status=OPTIMAL, delta=float(sol.x[N]),
                           witness=DualWitness.of(poly, z))


@dataclass(frozen=True, eq=False)
class SupnormResult:
    status: str                      # OPTIMAL or INFEASIBLE
    t: float                         # min over M of ||Z||_inf; +inf if M empty
    witness: DualWitness | None


def es_min_supnorm(market: ScenarioMarket) -> SupnormResult:
    """t* = min ||Z||_inf over M; no strong ES-arbitrage iff t* <= 1/alpha."""
    poly = MartingalePolytope.of(market)
    N = market.n_scenarios
    rows = poly.A.shape[0]
    c = np.zeros(N + 1)
    c[N] = 1.0
    A_eq = np.hstack([poly.A, np.zeros((rows, 1))])
    A_le = np.hstack([np.eye(N), -np.ones((N, 1))])   # z_omega - t <= 0
    sol = lp_solve(LinearProgram(c=c, A_eq=A_eq, b_eq=poly.b,
                                 A_le=A_le, b_le=np.zeros(N)))
    if sol.status == INFEASIBLE:
        return SupnormResult(status=INFEASIBLE, t=math.inf, witness=None)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"sup-norm LP returned {sol.status}")
    z = sol.x[:N]
    return SupnormResult(status=OPTIMAL, t=float(sol.value),
                         witness=DualWitness.of(poly, z))


@dataclass(frozen=True, eq=False)
class StrictBoxResult:
    status: str
    delta: float                     # best two-sided margin; 0.0 when infeasible
    witness: DualWitness | None


def es_strict_check(market: ScenarioMarket, alpha: float) -> StrictBoxResult:
    """Max delta with delta <= Z <= 1/alpha - delta over Z in M.

    delta* > 0 iff some strictly positive density prices the market with
    sup-norm strictly below 1/alpha, i.e. no ES-arbitrage at level alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    poly = MartingalePolytope.of(market)
    N = market.n_scenarios
    rows = poly.A.shape[0]
    c = np.zeros(N + 1)
    c[N] = -1.0
    A_eq = np.hstack([poly.A, np.zeros((rows, 1))])
    A_le = np.vstack([
        np.hstack([-np.eye(N), np.ones((N, 1))]),    # delta - z <= 0
        np.hstack([np.eye(N), np.ones((N, 1))]),     # z + delta <= 1/alpha
    ])
    b_le = np.concatenate([np.zeros(N), np.full(N, 1.0 / alpha)])
    sol = lp_solve(LinearProgram(c=c, A_eq=A_eq, b_eq=poly.b, A_le=A_le, b_le=b_le))
    if sol.status == INFEASIBLE:
        return StrictBoxResult(status=INFEASIBLE, delta=0.0, witness=None)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"strict ES LP returned {sol.status}")
    z = sol.x[:N]
    return StrictBoxResult(status=OPTIMAL, delta=float(sol.x[N]),
                           witness=DualWitness.of(poly, z))


# -- spectral mixtures ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Spectral dual outcome: strong-form feasibility and the strict margins."""

    strong_feasible: bool
    strict_ok: bool
    delta: float                     # outer box shrink at which strict succeeded
    delta_prime: float               # inner positivity margin achieved
    witness_strong: DualWitness | None
    witness_strict: DualWitness | None


def _spectral_lp(market: ScenarioMarket, spectrum, delta: float | None):
    """Feasibility/margin LP for mixtures Z = sum_j w_j zeta_j in M.

    delta None: strong form, boxes 0 <= zeta_j <= 1/alpha_j, minimize 0.
    delta set: strict form, maximize delta' with delta' <= zeta_j,omega and
    zeta_j,omega <= 1/(alpha_j (1 + delta)); atoms whose shrunken box cap
    falls to 1 or below are pinned to the constant density 1.
    """
    poly = MartingalePolytope.of(market)
    p = market.probs
    N = market.n_scenarios
    atoms = list(spectrum)
    J = len(atoms)
    if delta is None:
        pinned = [a >= 1.0 for a, _ in atoms]
        caps = [1.0 / a for a, _ in atoms]
    else:
        pinned = [a * (1.0 + delta) >= 1.0 for a, _ in atoms]
        caps = [1.0 / (a * (1.0 + delta)) for a, _ in atoms]
    free = [j for j in range(J) if not pinned[j]]
    w_pinned = sum(w for j, (a, w) in enumerate(atoms) if pinned[j])

    nz = len(free) * N
    nvar = nz + (0 if delta is None else 1)
    # Mean-one rows per free atom, then the mixture's martingale rows.
    A_eq = np.zeros((len(free) + poly.A.shape[0] - 1, nvar))
    b_eq = np.zeros(A_eq.shape[0])
    for k, j in enumerate(free):
        A_eq[k, k * N:(k + 1) * N] = p
        b_eq[k] = 1.0
    mart = poly.A[1:]                # asset rows only; E[Z] = 1 is automatic
    for k, j in enumerate(free):
        w = atoms[j][1]
        A_eq[len(free):, k * N:(k + 1) * N] = w * mart
    b_eq[len(free):] = -w_pinned * (mart @ np.ones(N))

    lower = np.zeros(nvar)
    upper = np.empty(nvar)
    for k, j in enumerate(free):
        upper[k * N:(k + 1) * N] = caps[j]
    c = np.zeros(nvar)
    A_le = None
    b_le = None
    if delta is not None:
        upper[nz] = np.inf            # delta' <= every zeta entry bounds it anyway
        c[nz] = -1.0
        A_le = np.zeros((nz, nvar))
        A_le[:, :nz] = -np.eye(nz)
        A_le[:, nz] = 1.0            # delta' - zeta <= 0
        b_le = np.zeros(nz)
    sol = lp_solve(LinearProgram(c=c, A_eq=A_eq, b_eq=b_eq, A_le=A_le, b_le=b_le,
                                 lower=lower, upper=upper))
    if sol.status != OPTIMAL:
        return None, 0.0
    zeta = np.ones((J, N))
    for k, j in enumerate(free):
        zeta[j] = sol.x[k * N:(k + 1) * N]
    z_mix = np.einsum("j,jn->n", np.array([w for _, w in atoms]), zeta)
    dprime = float(sol.x[nz]) if delta is not None else 0.0
    return DualWitness.of(poly, z_mix), dprime


def spectral_check(market: ScenarioMarket, spectrum) -> SpectralResult:
    """Strong and strict mixture tests for a spectral measure.

    Strict scans box shrinks delta = delta_max / 2^k, k = 0..40, accepting
    the first delta whose positivity margin delta' exceeds 1e-9; delta'(delta)
    only grows as delta shrinks, so failure at every scanned level means the
    strict form is empty up to that resolution.  The scan stops above a
    delta floor: shrinks smaller than the LP's feasibility tolerance make
    an exactly-boundary program look feasible, and a margin that tiny is a
    boundary case, not evidence of strict interiority.
    """
    atoms = tuple(spectrum)
    witness_strong, _ = _spectral_lp(market, atoms, None)
    strong = witness_strong is not None

    non_unit = [a for a, _ in atoms if a < 1.0]
    if not strong or not non_unit:
        return SpectralResult(strong_feasible=strong, strict_ok=False, delta=0.0,
                              delta_prime=0.0, witness_strong=witness_strong,
                              witness_strict=None)
    delta = min(1.0, min(1.0 / a - 1.0 for a in non_unit))
    for _ in range(STRICT_SCAN_DEPTH + 1):
        if delta < STRICT_DELTA_FLOOR:
            break
        witness, dprime = _spectral_lp(market, atoms, delta)
        if witness is not None and dprime > ZERO_TOL:
            return SpectralResult(strong_feasible=True, strict_ok=True, delta=delta,
                                  delta_prime=dprime, witness_strong=witness_strong,
                                  witness_strict=witness)
        delta *= 0.5
    return SpectralResult(strong_feasible=True, strict_ok=False, delta=0.0,
                          delta_prime=0.0, witness_strong=witness_strong,
                          witness_strict=None)


# -- g-entropic penalties ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class GEntropicResult:
    """Penalty-minimization outcome over M.

    v_star is an attained upper bound on min E[g(Z)] (exact to the solver
    tolerance); strong_ok means no strong arbitrage (v* <= beta), strict_ok
    means no arbitrage at all (classical delta* > 0 and v* < beta).
    """

    v_star: float
    beta: float
    delta_classical: float
    strong_ok: bool
    strict_ok: bool
    witness: DualWitness | None
    route: str
    gap: float = 0.0
    annotations: tuple[str, ...] = ()


def _normalize_penalty(g) -> tuple[str, Callable | None, Callable | None, float | None]:
    if isinstance(g, str):
        if g.upper() == "ENTROPY":
            return "ENTROPY", None, None, None
        raise ValueError(f"unknown penalty name {g!r}")
    if isinstance(g, tuple) and len(g) == 2 and isinstance(g[0], str):
        if g[0].upper() != "POWER":
            raise ValueError(f"unknown penalty family {g[0]!r}")
        q = float(g[1])
        if not q > 1.0:
            raise ValueError("power penalty needs q > 1")
        return ("POWER", lambda z: np.abs(z) ** q / q,
                lambda z: np.abs(z) ** (q - 1.0), q)
    if isinstance(g, tuple) and len(g) == 2 and callable(g[0]):
        return "CUSTOM", g[0], g[1], None
    if callable(g):
        return "CUSTOM", g, None, None
    raise TypeError("g must be 'entropy', ('power', q), or a callable (with "
                    "optional derivative)")


def _numeric_prime(gfun: Callable) -> Callable:
    def prime(z: Vector) -> Vector:
        z = np.asarray(z, dtype=np.float64)
        h = 1e-6
        lo = np.maximum(z - h, 0.0)
        hi = z + h
        return (gfun(hi) - gfun(lo)) / (hi - lo)
    return prime


def _frank_wolfe_min(poly: MartingalePolytope, probs: Vector, gfun: Callable,
                     gprime: Callable, tol: float = FW_TOL,
                     max_iter: int = 2000) -> tuple[Vector, float, float, int]:
    """Away-step Frank-Wolfe for min E[g(Z)] over the polytope.

    LP vertex oracles keep iterates inside M exactly; away steps restore
    the linear rate that plain FW loses at boundary optima.  Returns
    (z, value, fw_gap, iterations); value - fw_gap lower-bounds the minimum.
    """
    N = probs.size

    def fval(z: Vector) -> float:
        return float(probs @ gfun(np.maximum(z, 0.0)))

    def grad(z: Vector) -> Vector:
        return probs * gprime(np.maximum(z, 0.0))

    start = lp_solve(LinearProgram(c=np.zeros(N), A_eq=poly.A, b_eq=poly.b))
    if start.status != OPTIMAL:
        raise RuntimeError("Frank-Wolfe called on an empty polytope")
    z = start.x.copy()
    def key(v: Vector) -> bytes:
        return np.round(v, 12).tobytes()
    vertices: dict[bytes, Vector] = {key(z): z.copy()}
    weights: dict[bytes, float] = {key(z): 1.0}
    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        gz = grad(z)
        lmo = lp_solve(LinearProgram(c=gz, A_eq=poly.A, b_eq=poly.b))
        if lmo.status != OPTIMAL:
            raise RuntimeError("LMO solve failed inside Frank-Wolfe")
        s = lmo.x
        gap = float(gz @ (z - s))
        if gap <= tol:
            break
        away_key = max(weights, key=lambda k: float(gz @ vertices[k]))
        v_away = vertices[away_key]
        w_away = weights[away_key]
        use_away = (float(gz @ (v_away - z)) > gap) and (1.0 - w_away > 1e-12)
        if use_away:
            d = z - v_away
            gamma_max = w_away / (1.0 - w_away)
        else:
            d = s - z
            gamma_max = 1.0
        slope_end = float(grad(z + gamma_max * d) @ d)
        if slope_end <= 0.0:
            gamma = gamma_max
        else:
            lo_g, hi_g = 0.0, gamma_max
            for _ in range(80):
                mid = 0.5 * (lo_g + hi_g)
                if float(grad(z + mid * d) @ d) <= 0.0:
                    lo_g = mid
                else:
                    hi_g = mid
            gamma = lo_g
        if gamma <= 0.0:
            break
        z = z + gamma * d
        if use_away:
            factor = 1.0 + gamma
            weights = {k: w * factor for k, w in weights.items()}
            weights[away_key] -= gamma
        else:
            factor = 1.0 - gamma
            weights = {k: w * factor for k, w in weights.items()}
            sk = key(s)
            vertices.setdefault(sk, s.copy())
            weights[sk] = weights.get(sk, 0.0) + gamma
        weights = {k: w for k, w in weights.items() if w > 1e-15}
        vertices = {k: vertices[k] for k in weights}
    return z, fval(z), max(gap, 0.0), it


def gentropic_check(market: ScenarioMarket, g, beta: float,
                    tol: float = FW_TOL) -> GEntropicResult:
    """Penalty test: v* = min E[g(Z)] over M against the budget beta.

    No strong arbitrage iff v* <= beta; no arbitrage iff additionally the
    classical margin is positive and v* < beta strictly (mixing the
    positive classical witness into a near-minimizer keeps the penalty
    below beta while making the density strictly positive).
    """
    beta = float(beta)
    name, gfun, gprime, _q = _normalize_penalty(g)
    poly = MartingalePolytope.of(market)
    cl = classical_no_arbitrage(market)
    if cl.status == INFEASIBLE:
        return GEntropicResult(v_star=math.inf, beta=beta, delta_classical=0.0,
                               strong_ok=False, strict_ok=False, witness=None,
                               route="M_EMPTY", annotations=("M_EMPTY",))

    annotations: list[str] = []
    if name == "ENTROPY":
        res = newton_cumulant_min(market.probs, market.excess_matrix.T)
        v_star = res.value
        gap = res.gradient_norm
        witness = DualWitness.of(poly, res.z, penalty=v_star)
        route = "NEWTON"
        if res.status == "DIVERGENT":
            annotations.append("DIVERGENT")
    else:
        if gprime is None:
            gprime = _numeric_prime(gfun)
        z, v_star, gap, _ = _frank_wolfe_min(poly, market.probs, gfun, gprime, tol=tol)
        witness = DualWitness.of(poly, z, penalty=v_star)
        route = "FRANK_WOLFE"
        if gap > tol:
            annotations.append("GAP_NOT_CLOSED")

    strong_ok = v_star <= beta + ZERO_TOL
    strict_ok = (cl.delta > ZERO_TOL) and (v_star < beta - ZERO_TOL)
    if strict_ok and witness is not None and witness.min_entry <= 0.0:
        # Mix the positive classical witness in to exhibit a strictly
        # positive density whose penalty still sits below beta.
        z_pos = cl.witness.z
        pen_pos = float(market.probs @ _apply_penalty(name, gfun, z_pos))
        room = beta - v_star
        eta = min(0.5, room / (2.0 * max(pen_pos - v_star, 1e-12))) if pen_pos > v_star else 0.5
        z_mix = (1.0 - eta) * witness.z + eta * z_pos
        pen_mix = float(market.probs @ _apply_penalty(name, gfun, z_mix))
        witness = DualWitness.of(poly, z_mix, penalty=pen_mix)
    return GEntropicResult(v_star=v_star, beta=beta, delta_classical=cl.delta,
                           strong_ok=strong_ok, strict_ok=strict_ok, witness=witness,
                           route=route, gap=gap, annotations=tuple(annotations))


def _apply_penalty(name: str, gfun: Callable | None, z: Vector) -> Vector:
    if name == "ENTROPY":
        out = np.zeros_like(z)
        pos = z > 0.0
        out[pos] = z[pos] * np.log(z[pos])
        return out
    return gfun(np.maximum(z, 0.0))


# -- classification ----------------------------------------------------------


def classify_dual(market: ScenarioMarket, spec: RiskSpec,
                  tol: float = CLASSIFY_TOL) -> ArbitrageVerdict:
    """Trichotomy by the dual criteria for the measure's dual-set shape.

    Raises UnsupportedDualError (via the descriptor) for VaR.  Certificates
    carry the decisive scalars and a density witness where one exists;
    BOUNDARY is annotated when the deciding comparison sits within tol of
    its threshold.
    """
    desc = dual_descriptor(spec)
    if desc.kind == "WC":
        return _classify_wc(market, tol)
    if desc.kind == "ES":
        return _classify_es(market, spec.alpha, tol)
    if desc.kind == "SPECTRAL":
        return _classify_spectral(market, desc.atoms, tol)
    return _classify_gentropic(market, desc, tol)


def _classify_wc(market: ScenarioMarket, tol: float) -> ArbitrageVerdict:
    cl = classical_no_arbitrage(market)
    cert: dict = {"delta_classical": cl.delta}
    if cl.status == INFEASIBLE:
        return ArbitrageVerdict(verdict="STRONG_RHO_ARBITRAGE", route="DUAL",
                                certificate=cert, annotations=("M_EMPTY",))
    cert["witness"] = cl.witness.to_dict()
    if cl.delta > ZERO_TOL:
        ann = ("BOUNDARY",) if cl.delta <= tol else ()
        return ArbitrageVerdict(verdict="NO_ARBITRAGE", route="DUAL",
                                certificate=cert, annotations=ann)
    return ArbitrageVerdict(verdict="RHO_ARBITRAGE", route="DUAL", certificate=cert)


def _classify_es(market: ScenarioMarket, alpha: float, tol: float) -> ArbitrageVerdict:
    sup = es_min_supnorm(market)
    bound = 1.0 / alpha
    cert: dict = {"t_star": sup.t, "box_upper": bound}
    if sup.status == INFEASIBLE:
        return ArbitrageVerdict(verdict="STRONG_RHO_ARBITRAGE", route="DUAL",
                                certificate=cert, annotations=("M_EMPTY",))
    cert["witness"] = sup.witness.to_dict()
    boundary = abs(sup.t - bound) <= tol
    if sup.t > bound + ZERO_TOL:
        ann = ("BOUNDARY",) if boundary else ()
        return ArbitrageVerdict(verdict="STRONG_RHO_ARBITRAGE", route="DUAL",
                                certificate=cert, annotations=ann)
    strict = es_strict_check(market, alpha)
    cert["delta_star"] = strict.delta
    if strict.status == OPTIMAL and strict.delta > ZERO_TOL:
        cert["witness"] = strict.witness.to_dict()
        return ArbitrageVerdict(verdict="NO_ARBITRAGE", route="DUAL",
                                certificate=cert,
                                annotations=("BOUNDARY",) if boundary else ())
    return ArbitrageVerdict(verdict="RHO_ARBITRAGE", route="DUAL", certificate=cert,
                            annotations=("BOUNDARY",) if boundary else ())


def _classify_spectral(market: ScenarioMarket, atoms, tol: float) -> ArbitrageVerdict:
    res = spectral_check(market, atoms)
    cert: dict = {"delta": res.delta, "delta_prime": res.delta_prime,
                  "strong_feasible": res.strong_feasible}
    if not res.strong_feasible:
        return ArbitrageVerdict(verdict="STRONG_RHO_ARBITRAGE", route="DUAL",
                                certificate=cert)
    cert["witness"] = res.witness_strong.to_dict()
    if res.strict_ok:
        cert["witness"] = res.witness_strict.to_dict()
        ann = ("BOUNDARY",) if res.delta_prime <= tol else ()
        return ArbitrageVerdict(verdict="NO_ARBITRAGE", route="DUAL",
                                certificate=cert, annotations=ann)
    return ArbitrageVerdict(verdict="RHO_ARBITRAGE", route="DUAL", certificate=cert)


def _classify_gentropic(market: ScenarioMarket, desc: DualSetDescriptor,
                        tol: float) -> ArbitrageVerdict:
    if desc.penalty_name == "ENTROPY":
        g = "entropy"
    elif desc.penalty_name == "POWER":
        g = ("power", desc.q)
    else:
        g = (desc.penalty, desc.penalty_prime) if desc.penalty_prime else desc.penalty
    res = gentropic_check(market, g, desc.beta)
    cert: dict = {"v_star": res.v_star, "beta": res.beta,
                  "delta_classical": res.delta_classical}
    if res.witness is not None:
        cert["witness"] = res.witness.to_dict()
    ann = list(res.annotations)
    if math.isfinite(res.v_star) and abs(res.v_star - res.beta) <= tol:
        ann.append("BOUNDARY")
    if not res.strong_ok:
        return ArbitrageVerdict(verdict="STRONG_RHO_ARBITRAGE", route="DUAL",
                                certificate=cert, annotations=tuple(ann))
    if res.strict_ok:
        return ArbitrageVerdict(verdict="NO_ARBITRAGE", route="DUAL",
                                certificate=cert, annotations=tuple(ann))
    return ArbitrageVerdict(verdict="RHO_ARBITRAGE", route="DUAL",
                            certificate=cert, annotations=tuple(ann))


# -- two-route agreement -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class CrossValidation:
    """Primal and dual verdicts side by side.

    status is AGREE, BOUNDARY_AGREE (verdicts at or straddling a knife
    edge within the band), or DISAGREE (a genuine contradiction; both
    certificates attached for inspection).
    """

    status: str
    primal: ArbitrageVerdict
    dual: ArbitrageVerdict
    rho1: float
    primal_margin: float
    dual_margin: float
    band: float

    def to_dict(self) -> dict:
        return {"status": self.status, "rho1": self.rho1,
                "primal_margin": self.primal_margin,
                "dual_margin": self.dual_margin, "band": self.band,
                "primal": self.primal.to_dict(), "dual": self.dual.to_dict()}


def _dual_margin(verdict: ArbitrageVerdict) -> float:
    """Distance of the deciding dual comparisons from their thresholds.

    Confident zeros (a vertex-exact delta* = 0) are not near-threshold
    evidence, so they do not shrink the margin.
    """
    cert = verdict.certificate
    candidates: list[float] = []
    if "t_star" in cert and math.isfinite(cert["t_star"]):
        candidates.append(abs(cert["t_star"] - cert["box_upper"]))
    if "v_star" in cert and math.isfinite(cert["v_star"]):
        candidates.append(abs(cert["v_star"] - cert["beta"]))
    for key in ("delta_star", "delta_classical", "delta_prime"):
        if key in cert and cert[key] > ZERO_TOL:
            candidates.append(cert[key])
    return min(candidates) if candidates else math.inf


def cross_validate(market: ScenarioMarket, spec: RiskSpec,
                   tol: float = CLASSIFY_TOL) -> CrossValidation:
    """Run both routes and compare verdicts within the boundary band."""
    primal_res = compute_rho1(market, spec)
    pv = classify_primal(primal_res, tol)
    dv = classify_dual(market, spec, tol)
    p_margin = abs(primal_res.rho1)
    d_margin = _dual_margin(dv)
    if pv.verdict == dv.verdict:
        status = "BOUNDARY_AGREE" if (p_margin <= tol and d_margin <= tol) else "AGREE"
    elif p_margin <= tol or d_margin <= tol:
        status = "BOUNDARY_AGREE"
    else:
        status = "DISAGREE"
    return CrossValidation(status=status, primal=pv, dual=dv, rho1=primal_res.rho1,
                           primal_margin=p_margin, dual_margin=d_margin, band=tol)
