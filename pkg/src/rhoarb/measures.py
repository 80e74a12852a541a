"""Risk measures on scenario payoffs and their dual-set descriptors.

Conventions: x is the payoff vector (gains positive), probs the scenario
probabilities.  Losses are -x, so every measure here satisfies cash
additivity rho(x + c) = rho(x) - c and positive homogeneity.  Supported
kinds:

    WC        worst case, max(-x)
    VAR       value at risk at level alpha (evaluation only, no dual)
    ES        expected shortfall at level alpha
    SPECTRAL  finite mixture sum_j w_j ES^{alpha_j}, levels in (0, 1]
    EVAR      entropic value at risk at level alpha
    TNORM     truncated-norm measure min_s ||(s - x)+||_p / alpha - s
    GENTROPIC g-entropic family, dual-side only (penalty E[g(Z)] <= beta)

A level-1 spectral atom is ES^1 = E[-x].  The GENTROPIC kind never gets a
primal evaluator here; EVAR and TNORM are its two closed-form instances and
are evaluated directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .solvers import BracketError, minimize_1d_convex

Vector = NDArray[np.float64]

KINDS = ("WC", "VAR", "ES", "SPECTRAL", "EVAR", "TNORM", "GENTROPIC")
G_KINDS = ("ENTROPY", "POWER", "CUSTOM")
WEIGHT_SUM_TOL = 1e-12


class UnsupportedDualError(ValueError):
    """UNSUPPORTED_DUAL: the measure has no usable dual representation."""


class UnsupportedPrimalError(ValueError):
    """The measure has no direct evaluator (dual-side only)."""


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


@dataclass(frozen=True, eq=False)
class RiskSpec:
    """Frozen description of one risk measure.

    Use the classmethod constructors; the JSON mapping mirrors them:
    {"kind": "ES", "alpha": 0.05}, {"kind": "SPECTRAL", "atoms": [[a, w], ...]},
    {"kind": "TNORM", "p": 2, "alpha": 0.1}, {"kind": "EVAR", "alpha": 0.1},
    {"kind": "GENTROPIC", "g_kind": "ENTROPY"|"POWER", "beta": b, "q": q},
    {"kind": "WC"}, {"kind": "VAR", "alpha": 0.05}.
    """

    kind: str
    alpha: float | None = None
    spectrum: tuple[tuple[float, float], ...] | None = None
    p: float | None = None
    g_kind: str | None = None
    beta: float | None = None
    q: float | None = None
    g: Callable[[Vector], Vector] | None = None
    g_prime: Callable[[Vector], Vector] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind in ("VAR", "ES", "EVAR", "TNORM"):
            object.__setattr__(self, "alpha", _check_alpha(self.alpha))
        if self.kind == "TNORM":
            p = float(self.p)
            if not (p > 1.0 and math.isfinite(p)):
                raise ValueError("TNORM needs finite p > 1")
            object.__setattr__(self, "p", p)
        if self.kind == "SPECTRAL":
            atoms = tuple(sorted((float(a), float(w)) for a, w in self.spectrum))
            if not atoms:
                raise ValueError("SPECTRAL needs at least one atom")
            for a, w in atoms:
                if not 0.0 < a <= 1.0:
                    raise ValueError(f"spectral level {a!r} outside (0, 1]")
                if w <= 0.0:
                    raise ValueError(f"spectral weight {w!r} must be positive")
            if abs(sum(w for _, w in atoms) - 1.0) > WEIGHT_SUM_TOL:
                raise ValueError("spectral weights must sum to 1")
            object.__setattr__(self, "spectrum", atoms)
        if self.kind == "GENTROPIC":
            if self.g_kind not in G_KINDS:
                raise ValueError(f"g_kind must be one of {G_KINDS}")
            beta = float(self.beta)
            if self.g_kind == "ENTROPY":
                g1 = 0.0
            elif self.g_kind == "POWER":
                q = float(self.q)
                if not q > 1.0:
                    raise ValueError("POWER needs q > 1")
                object.__setattr__(self, "q", q)
                g1 = 1.0 / q
            else:
                if self.g is None:
                    raise ValueError("CUSTOM needs a callable g")
                g1 = float(self.g(np.asarray([1.0]))[0])
            if not beta > g1:
                raise ValueError(f"beta must exceed g(1) = {g1!r}")
            object.__setattr__(self, "beta", beta)

    # -- constructors -----------------------------------------------------

    @classmethod
    def wc(cls) -> "RiskSpec":
        return cls(kind="WC")

    @classmethod
    def var(cls, alpha: float) -> "RiskSpec":
        return cls(kind="VAR", alpha=alpha)

    @classmethod
    def es(cls, alpha: float) -> "RiskSpec":
        return cls(kind="ES", alpha=alpha)

    @classmethod
    def spectral(cls, atoms) -> "RiskSpec":
        return cls(kind="SPECTRAL", spectrum=tuple((a, w) for a, w in atoms))

    @classmethod
    def evar(cls, alpha: float) -> "RiskSpec":
        return cls(kind="EVAR", alpha=alpha)

    @classmethod
    def tnorm(cls, p: float, alpha: float) -> "RiskSpec":
        return cls(kind="TNORM", p=p, alpha=alpha)

    @classmethod
    def entropic(cls, beta: float) -> "RiskSpec":
        return cls(kind="GENTROPIC", g_kind="ENTROPY", beta=beta)

    @classmethod
    def power(cls, q: float, beta: float) -> "RiskSpec":
        return cls(kind="GENTROPIC", g_kind="POWER", q=q, beta=beta)

    @classmethod
    def custom(cls, g, beta: float, g_prime=None) -> "RiskSpec":
        return cls(kind="GENTROPIC", g_kind="CUSTOM", g=g, g_prime=g_prime, beta=beta)

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        if self.kind == "WC":
            return {"kind": "WC"}
        if self.kind in ("VAR", "ES", "EVAR"):
            return {"kind": self.kind, "alpha": self.alpha}
        if self.kind == "TNORM":
            return {"kind": "TNORM", "p": self.p, "alpha": self.alpha}
        if self.kind == "SPECTRAL":
            return {"kind": "SPECTRAL", "atoms": [[a, w] for a, w in self.spectrum]}
        if self.g_kind == "CUSTOM":
            raise ValueError("CUSTOM penalties are not serializable")
        out = {"kind": "GENTROPIC", "g_kind": self.g_kind, "beta": self.beta}
        if self.g_kind == "POWER":
            out["q"] = self.q
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "RiskSpec":
        kind = data.get("kind")
        if kind == "WC":
            return cls.wc()
        if kind == "VAR":
            return cls.var(data["alpha"])
        if kind == "ES":
            return cls.es(data["alpha"])
        if kind == "EVAR":
            return cls.evar(data["alpha"])
        if kind == "TNORM":
            return cls.tnorm(data["p"], data["alpha"])
        if kind == "SPECTRAL":
            return cls.spectral(data["atoms"])
        if kind == "GENTROPIC":
            if data.get("g_kind") == "ENTROPY":
                return cls.entropic(data["beta"])
            if data.get("g_kind") == "POWER":
                return cls.power(data["q"], data["beta"])
            raise ValueError("only ENTROPY/POWER g-entropic specs load from JSON")
        raise ValueError(f"unknown risk kind {kind!r}")

    def describe(self) -> str:
        d = {k: v for k, v in self.to_json_dict().items() if k != "kind"}
        inner = ", ".join(f"{k}={v}" for k, v in d.items())
        return f"{self.kind}({inner})" if inner else self.kind


# -- evaluators -----------------------------------------------------------


def _validated(x, probs) -> tuple[Vector, Vector]:
    x = np.asarray(x, dtype=np.float64).ravel()
    p = np.asarray(probs, dtype=np.float64).ravel()
    if x.size != p.size or x.size == 0:
        raise ValueError("x and probs must be nonempty with equal length")
    return x, p


def eval_wc(x) -> float:
    """Worst case: the largest loss max(-x)."""
    x = np.asarray(x, dtype=np.float64)
    return float(-x.min())


def eval_var(x, probs, alpha: float) -> float:
    """VaR at level alpha: inf{ m : P[-x > m] <= alpha }.

    Exact on finite supports: candidates are the observed losses, scanned
    in increasing order until the strict upper tail drops to alpha.
    """
    alpha = _check_alpha(alpha)
    x, p = _validated(x, probs)
    losses = -x
    order = np.argsort(losses)
    lo_sorted = losses[order]
    tail = 1.0 - np.cumsum(p[order])  # P[loss > lo_sorted[k]]
    for k in range(lo_sorted.size):
        if tail[k] <= alpha + 1e-15:
            return float(lo_sorted[k])
    return float(lo_sorted[-1])


def eval_es(x, probs, alpha: float) -> float:
    """Expected shortfall: the mean of the worst alpha-slice of the loss.

    Sort losses in decreasing order, take full scenarios until their
    probability passes alpha, and weight the boundary scenario by the
    leftover alpha - covered.
    """
    x, p = _validated(x, probs)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    losses = -x
    order = np.argsort(-losses, kind="stable")
    lo_sorted = losses[order]
    p_sorted = p[order]
    cum = np.cumsum(p_sorted)
    k = int(np.searchsorted(cum, alpha, side="left"))
    if k >= lo_sorted.size:  # cumsum roundoff at alpha ~ 1
        k = lo_sorted.size - 1
    covered = float(cum[k - 1]) if k > 0 else 0.0
    acc = float(lo_sorted[:k] @ p_sorted[:k]) + (alpha - covered) * float(lo_sorted[k])
    return acc / alpha


def eval_spectral(x, probs, spectrum) -> float:
    """Mixture sum_j w_j ES^{alpha_j}; a level-1 atom contributes E[-x]."""
    x, p = _validated(x, probs)
    total = 0.0
    for a, w in spectrum:
        if a >= 1.0:
            total += w * float(p @ (-x))
        else:
            total += w * eval_es(x, p, a)
    return total


def eval_evar(x, probs, alpha: float) -> float:
    """Entropic VaR: inf_{z>0} (log E[exp(-z x)] - log alpha) / z.

    The objective is unimodal in z; the search runs over log z on
    [1e-8, 1e8] with geometric expansion.  When the infimum is only
    approached as z -> inf (alpha <= P[x = min x]) it equals the worst
    case -min x, which is returned exactly.
    """
    alpha = _check_alpha(alpha)
    x, p = _validated(x, probs)
    m = float(x.min())
    shifted = x - m
    log_alpha = math.log(alpha)

    def f(u: float) -> float:
        z = math.exp(min(u, 690.0))
        s = float(p @ np.exp(-z * shifted))
        return -m + (math.log(s) - log_alpha) / z

    try:
        _, val = minimize_1d_convex(f, (math.log(1e-8), math.log(1e8)), tol=1e-9)
    except BracketError:
        return -m  # decreasing all the way: the infimum is the worst case
    return min(val, f(690.0))  # never exceed the z -> inf limit


def eval_tnorm(x, probs, p_exp: float, alpha: float) -> float:
    """Truncated-norm measure: min_s ||(s - x)+||_p / alpha - s."""
    alpha = _check_alpha(alpha)
    p_exp = float(p_exp)
    if not (p_exp > 1.0 and math.isfinite(p_exp)):
        raise ValueError("p must be finite and > 1")
    x, p = _validated(x, probs)
    xmin, xmax = float(x.min()), float(x.max())
    span = xmax - xmin

    def h(s: float) -> float:
        y = np.maximum(s - x, 0.0)
        ymax = float(y.max())
        if ymax == 0.0:
            return -s
        norm = ymax * float(p @ (y / ymax) ** p_exp) ** (1.0 / p_exp)
        return norm / alpha - s

    lo = xmin - 1.0
    hi = xmax + max(span, 1.0) / alpha
    _, val = minimize_1d_convex(h, (lo, hi), tol=1e-9)
    return val


def evaluate(spec: RiskSpec, x, probs) -> float:
    """Dispatch to the evaluator for spec; GENTROPIC has none."""
    if spec.kind == "WC":
        return eval_wc(x)
    if spec.kind == "VAR":
        return eval_var(x, probs, spec.alpha)
    if spec.kind == "ES":
        return eval_es(x, probs, spec.alpha)
    if spec.kind == "SPECTRAL":
        return eval_spectral(x, probs, spec.spectrum)
    if spec.kind == "EVAR":
        return eval_evar(x, probs, spec.alpha)
    if spec.kind == "TNORM":
        return eval_tnorm(x, probs, spec.p, spec.alpha)
    raise UnsupportedPrimalError(
        "GENTROPIC measures are dual-side only; use EVAR/TNORM for evaluation")


# -- dual descriptors -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class DualSetDescriptor:
    """Shape of the dual density set {Z >= 0, E[Z] = 1, <constraint>}.

    Exactly one of the constraint families is populated:
    box_upper         ES box 0 <= Z <= box_upper;
    atoms             spectral mixture Z = sum_j w_j zeta_j, each zeta_j in
                      a level-alpha_j ES box;
    penalty/beta      g-entropic E[g(Z)] <= beta (penalty_name ENTROPY,
                      POWER with exponent q, or CUSTOM).
    WC has no extra constraint (any density qualifies).
    """

    kind: str
    box_upper: float | None = None
    atoms: tuple[tuple[float, float], ...] | None = None
    penalty_name: str | None = None
    penalty: Callable[[Vector], Vector] | None = None
    penalty_prime: Callable[[Vector], Vector] | None = None
    beta: float | None = None
    q: float | None = None

    def contains_unit(self) -> bool:
        """Z = 1 must always be admissible; used as a sanity invariant."""
        if self.box_upper is not None and self.box_upper < 1.0:
            return False
        if self.atoms is not None and any(1.0 / a < 1.0 for a, _ in self.atoms):
            return False
        if self.penalty is not None:
            return float(self.penalty(np.asarray([1.0]))[0]) <= self.beta
        return True


def _entropy_g(z: Vector) -> Vector:
    out = np.zeros_like(z)
    pos = z > 0.0
    out[pos] = z[pos] * np.log(z[pos])
    return out


def _entropy_g_prime(z: Vector) -> Vector:
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(z, 1e-300)) + 1.0


def dual_descriptor(spec: RiskSpec) -> DualSetDescriptor:
    """Map a RiskSpec to its dual-set shape; VAR raises UnsupportedDualError."""
    if spec.kind == "VAR":
        raise UnsupportedDualError("UNSUPPORTED_DUAL: VaR admits no dual density set")
    if spec.kind == "WC":
        return DualSetDescriptor(kind="WC")
    if spec.kind == "ES":
        return DualSetDescriptor(kind="ES", box_upper=1.0 / spec.alpha)
    if spec.kind == "SPECTRAL":
        return DualSetDescriptor(kind="SPECTRAL", atoms=spec.spectrum)
    if spec.kind == "EVAR":
        return DualSetDescriptor(kind="GENTROPIC", penalty_name="ENTROPY",
                                 penalty=_entropy_g, penalty_prime=_entropy_g_prime,
                                 beta=-math.log(spec.alpha))
    if spec.kind == "TNORM":
        q = spec.p / (spec.p - 1.0)
        beta = (1.0 / spec.alpha) ** q / q
        return DualSetDescriptor(kind="GENTROPIC", penalty_name="POWER",
                                 penalty=lambda z, _q=q: np.abs(z) ** _q / _q,
                                 penalty_prime=lambda z, _q=q: np.abs(z) ** (_q - 1.0),
                                 beta=beta, q=q)
    # GENTROPIC
    if spec.g_kind == "ENTROPY":
        return DualSetDescriptor(kind="GENTROPIC", penalty_name="ENTROPY",
                                 penalty=_entropy_g, penalty_prime=_entropy_g_prime,
                                 beta=spec.beta)
    if spec.g_kind == "POWER":
        q = spec.q
        return DualSetDescriptor(kind="GENTROPIC", penalty_name="POWER",
                                 penalty=lambda z, _q=q: np.abs(z) ** _q / _q,
                                 penalty_prime=lambda z, _q=q: np.abs(z) ** (_q - 1.0),
                                 beta=spec.beta, q=q)
    return DualSetDescriptor(kind="GENTROPIC", penalty_name="CUSTOM",
                             penalty=spec.g, penalty_prime=spec.g_prime,
                             beta=spec.beta)
