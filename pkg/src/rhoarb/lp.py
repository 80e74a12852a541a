"""Dense linear programming via the two-phase primal simplex method.

Programs are stated as

    minimize    c . v
    subject to  A_eq v  = b_eq
                A_le v <= b_le
                lower <= v <= upper   (coordinatewise, +-inf allowed)

Internally every variable is rewritten as a shifted nonnegative one (free
variables split into a difference of two), finite upper bounds become extra
rows, slacks turn inequalities into equalities, and Phase I artificials are
priced out before the real cost row runs.  Bland's rule (smallest eligible
index enters, smallest basic index breaks ratio ties) guarantees termination
under degeneracy; every run of the solver on the same input takes the same
pivot path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

Vector = NDArray[np.float64]

OPTIMAL = "OPTIMAL"
UNBOUNDED = "UNBOUNDED"
INFEASIBLE = "INFEASIBLE"

PIVOT_TOL = 1e-10   # entries at or below this cannot serve as pivots
COST_TOL = 1e-9     # reduced cost must beat this to enter
FEAS_TOL = 1e-8     # Phase I residual above this means infeasible
MAX_PIVOTS = 50_000


def _as_matrix(a, ncols: int, name: str) -> Vector:
    if a is None:
        return np.zeros((0, ncols))
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != ncols:
        raise ValueError(f"{name} must be 2-D with {ncols} columns")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Immutable problem statement; bounds default to v >= 0."""

    c: Vector
    A_eq: Vector | None = None
    b_eq: Vector | None = None
    A_le: Vector | None = None
    b_le: Vector | None = None
    lower: Vector | None = None
    upper: Vector | None = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=np.float64)
        if c.ndim != 1:
            raise ValueError("c must be 1-D")
        if not np.all(np.isfinite(c)):
            raise ValueError("c must be finite")
        n = c.size
        A_eq = _as_matrix(self.A_eq, n, "A_eq")
        A_le = _as_matrix(self.A_le, n, "A_le")
        b_eq = np.zeros(0) if self.b_eq is None else np.asarray(self.b_eq, dtype=np.float64).ravel()
        b_le = np.zeros(0) if self.b_le is None else np.asarray(self.b_le, dtype=np.float64).ravel()
        if b_eq.size != A_eq.shape[0] or b_le.size != A_le.shape[0]:
            raise ValueError("right-hand side length does not match its matrix")
        if not (np.all(np.isfinite(b_eq)) and np.all(np.isfinite(b_le))):
            raise ValueError("right-hand sides must be finite")
        lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=np.float64).ravel()
        upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=np.float64).ravel()
        if lower.size != n or upper.size != n:
            raise ValueError("bounds must have one entry per variable")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("bounds may be +-inf but not nan")
        for name, val in (("c", c), ("A_eq", A_eq), ("b_eq", b_eq), ("A_le", A_le),
                          ("b_le", b_le), ("lower", lower), ("upper", upper)):
            object.__setattr__(self, name, val)

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True, eq=False)
class LPSolution:
    """Solver outcome.

    Attributes
    ----------
    status : one of OPTIMAL, UNBOUNDED, INFEASIBLE.
    value : objective at the optimum; -inf if UNBOUNDED, nan if INFEASIBLE.
    x : optimal point in the original variables, or None.
    iterations : total simplex pivots across both phases.
    residual : max constraint/bound violation at x (0.0 when x is None).
    """

    status: str
    value: float
    x: Vector | None
    iterations: int
    residual: float


def _pivot(T: Vector, basis: np.ndarray, row: int, col: int) -> None:
    T[row] = T[row] / T[row, col]
    coef = T[:, col].copy()
    coef[row] = 0.0
    T -= np.outer(coef, T[row])
    basis[row] = col


def _simplex(T: Vector, basis: np.ndarray, cost: Vector, allowed: np.ndarray,
             iters: int) -> tuple[str, int]:
    """Run primal simplex on tableau T (rows m, last column = rhs)."""
    ncols = T.shape[1] - 1
    while True:
        if iters > MAX_PIVOTS:
            raise RuntimeError("simplex pivot limit exceeded")
        red = cost - cost[basis] @ T[:, :ncols]
        candidates = np.flatnonzero(allowed & (red < -COST_TOL))
        if candidates.size == 0:
            return OPTIMAL, iters
        col = int(candidates[0])  # Bland: smallest index enters
        y = T[:, col]
        rows = np.flatnonzero(y > PIVOT_TOL)
        if rows.size == 0:
            return UNBOUNDED, iters
        ratios = T[rows, -1] / y[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12]
        row = int(tied[np.argmin(basis[tied])])  # Bland: smallest basic leaves
        _pivot(T, basis, row, col)
        iters += 1


def lp_solve(lp: LinearProgram) -> LPSolution:
    """Solve lp deterministically; see module docstring for the method."""
    n = lp.n_vars
    lower, upper = lp.lower, lp.upper
    if np.any(lower > upper):
        return LPSolution(INFEASIBLE, np.nan, None, 0, 0.0)

    # Rewrite each variable over nonnegative standard columns: v = v0 + S x.
    col_var: list[int] = []
    col_sign: list[float] = []
    v0 = np.zeros(n)
    extra_rows: list[tuple[int, float]] = []  # (std col, cap) for finite ranges
    for j in range(n):
        lo, hi = lower[j], upper[j]
        if lo == -np.inf and hi == np.inf:
            col_var += [j, j]
            col_sign += [1.0, -1.0]
        elif lo > -np.inf:
            v0[j] = lo
            col_var.append(j)
            col_sign.append(1.0)
            if hi < np.inf:
                extra_rows.append((len(col_var) - 1, hi - lo))
        else:  # upper bound only
            v0[j] = hi
            col_var.append(j)
            col_sign.append(-1.0)
    ns = len(col_var)
    S = np.zeros((n, ns))
    S[col_var, np.arange(ns)] = col_sign

    A_eq = lp.A_eq @ S
    b_eq = lp.b_eq - lp.A_eq @ v0
    A_le = lp.A_le @ S
    b_le = lp.b_le - lp.A_le @ v0
    if extra_rows:
        caps = np.zeros((len(extra_rows), ns))
        for i, (k, _) in enumerate(extra_rows):
            caps[i, k] = 1.0
        A_le = np.vstack([A_le, caps])
        b_le = np.concatenate([b_le, [cap for _, cap in extra_rows]])
    c_std = lp.c @ S

    me, mi = A_eq.shape[0], A_le.shape[0]
    m = me + mi
    nslack = mi
    body = np.zeros((m, ns + nslack))
    body[:me, :ns] = A_eq
    body[me:, :ns] = A_le
    body[me:, ns:] = np.eye(mi)
    rhs = np.concatenate([b_eq, b_le])

    neg = rhs < 0
    body[neg] *= -1.0
    rhs = np.abs(rhs)

    # Initial basis: unflipped slacks where possible, artificials elsewhere.
    need_art = list(range(me)) + [me + i for i in range(mi) if neg[me + i]]
    nart = len(need_art)
    T = np.zeros((m, ns + nslack + nart + 1))
    T[:, :ns + nslack] = body
    T[:, -1] = rhs
    basis = np.empty(m, dtype=np.int64)
    for i in range(mi):
        basis[me + i] = ns + i
    for k, r in enumerate(need_art):
        T[r, ns + nslack + k] = 1.0
        basis[r] = ns + nslack + k

    ntot = ns + nslack + nart
    allowed = np.ones(ntot, dtype=bool)
    iters = 0

    if nart:
        cost1 = np.zeros(ntot)
        cost1[ns + nslack:] = 1.0
        status, iters = _simplex(T, basis, cost1, allowed, iters)
        if status != OPTIMAL:
            raise RuntimeError("phase 1 cannot be unbounded")
        if float(cost1[basis] @ T[:, -1]) > FEAS_TOL * max(1.0, np.abs(rhs).max()):
            return LPSolution(INFEASIBLE, np.nan, None, iters, 0.0)
        # Drive artificials out of the basis; drop rows that are redundant.
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] >= ns + nslack:
                cols = np.flatnonzero(np.abs(T[r, :ns + nslack]) > PIVOT_TOL)
                if cols.size:
                    _pivot(T, basis, r, int(cols[0]))
                    iters += 1
                else:
                    keep[r] = False
        if not np.all(keep):
            T = T[keep]
            basis = basis[keep]
        allowed[ns + nslack:] = False

    cost2 = np.zeros(ntot)
    cost2[:ns] = c_std
    status, iters = _simplex(T, basis, cost2, allowed, iters)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, -np.inf, None, iters, 0.0)

    x_std = np.zeros(ns)
    for r, b in enumerate(basis):
        if b < ns:
            x_std[b] = T[r, -1]
    v = v0 + S @ x_std
    value = float(lp.c @ v)

    res = 0.0
    if lp.A_eq.shape[0]:
        res = max(res, float(np.abs(lp.A_eq @ v - lp.b_eq).max()))
    if lp.A_le.shape[0]:
        res = max(res, float(np.maximum(lp.A_le @ v - lp.b_le, 0.0).max()))
    res = max(res, float(np.maximum(lower - v, 0.0).max(initial=0.0)))
    res = max(res, float(np.maximum(v - upper, 0.0).max(initial=0.0)))
    if res > 1e-6:
        raise RuntimeError(f"simplex returned an infeasible point (residual {res:.3e})")
    return LPSolution(OPTIMAL, value, v, iters, res)
