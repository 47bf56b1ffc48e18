"""Restricted-game payoff management and meta-strategy solvers.

The payoff matrix M holds the row player's expected utility for each pair of
population members; the column player's utility is -M. Solvers return a pair
of mixed strategies over rows and columns.

The zero-sum Nash solver is a dense tableau simplex with Bland's rule: small
meta-games reward exactness and zero dependencies over sparse sophistication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import expected_value, play_episode


class SolverError(Exception):
    pass


# ---------------------------------------------------------------------------
# Meta-game payoff matrix with lazy completion


class MetaGame:
    def __init__(self, payoff=None, filled=None):
        if payoff is None:
            self.payoff = np.zeros((0, 0))
            self.filled = np.zeros((0, 0), dtype=bool)
        else:
            self.payoff = np.array(payoff, dtype=float)
            self.filled = (np.ones(self.payoff.shape, dtype=bool)
                           if filled is None else np.array(filled, dtype=bool))

    @property
    def row_count(self) -> int:
        return self.payoff.shape[0]

    @property
    def col_count(self) -> int:
        return self.payoff.shape[1]

    def grown_to(self, rows: int, cols: int) -> "MetaGame":
        """A copy enlarged to (rows, cols); new entries are unfilled."""
        if rows < self.row_count or cols < self.col_count:
            raise SolverError("meta-game cannot shrink")
        payoff = np.zeros((rows, cols))
        filled = np.zeros((rows, cols), dtype=bool)
        payoff[:self.row_count, :self.col_count] = self.payoff
        filled[:self.row_count, :self.col_count] = self.filled
        return MetaGame(payoff, filled)


def _monte_carlo_entry(game, row_policy, col_policy, episodes: int,
                       rng: np.random.Generator) -> float:
    total = 0.0
    for _ in range(episodes):
        total += play_episode(game, (row_policy, col_policy), rng)[0]
    return total / episodes


def extend_payoff(meta: MetaGame, game, pops, eval_mode="exact",
                  node_budget=None) -> MetaGame:
    """Fill every empty entry of the meta-game for the given populations.

    ``eval_mode`` is "exact" or ("monte_carlo", episodes, seed). Entries are
    evaluated independently (per-entry seeds), so any fill order produces the
    same matrix; existing entries are never recomputed.
    """
    rows, cols = len(pops[0]), len(pops[1])
    out = meta.grown_to(rows, cols)
    kwargs = {} if node_budget is None else {"node_budget": node_budget}
    for r in range(rows):
        for c in range(cols):
            if out.filled[r, c]:
                continue
            if eval_mode == "exact":
                value = expected_value(game, (pops[0][r], pops[1][c]),
                                       **kwargs)[0]
            else:
                mode, episodes, seed = eval_mode
                if mode != "monte_carlo":
                    raise SolverError(f"unknown eval mode {mode!r}")
                rng = np.random.default_rng([seed, r, c])
                value = _monte_carlo_entry(game, pops[0][r], pops[1][c],
                                           episodes, rng)
            out.payoff[r, c] = value
            out.filled[r, c] = True
    return out


# ---------------------------------------------------------------------------
# Zero-sum Nash via the simplex method

_ENTER_EPS = 1e-9  # reduced-cost threshold (matrix is scaled to O(1))
_PIVOT_EPS = 1e-9  # smaller pivots amplify roundoff catastrophically
_NE_TOL = 1e-8


def _simplex_packing(A: np.ndarray, b: np.ndarray):
    """max 1'y s.t. Ay <= b, y >= 0 (A > 0, b > 0) by dense tableau simplex
    with Bland's rule. Returns (y, duals) or None if it stalls."""
    rows, cols = A.shape
    T = np.zeros((rows + 1, cols + rows + 1))
    T[:rows, :cols] = A
    T[:rows, cols:cols + rows] = np.eye(rows)
    T[:rows, -1] = b
    T[rows, :cols] = -1.0
    basis = list(range(cols, cols + rows))

    for _ in range(200 * (rows + cols)):
        objective = T[rows, :-1]
        entering = -1
        for j in range(cols + rows):  # Bland: lowest improving index
            if objective[j] < -_ENTER_EPS:
                entering = j
                break
        if entering < 0:
            y = np.zeros(cols)
            for i, var in enumerate(basis):
                if var < cols:
                    y[var] = T[i, -1]
            return y, T[rows, cols:cols + rows].copy()
        leaving, best_ratio = -1, np.inf
        for i in range(rows):
            coef = T[i, entering]
            if coef > _PIVOT_EPS:
                ratio = T[i, -1] / coef
                if (ratio < best_ratio - 1e-12
                        or (ratio < best_ratio + 1e-12
                            and (leaving < 0 or basis[i] < basis[leaving]))):
                    best_ratio = min(best_ratio, ratio)
                    leaving = i
        if leaving < 0:
            return None  # no usable pivot: numerically stalled
        pivot = T[leaving, entering]
        T[leaving] /= pivot
        for i in range(rows + 1):
            if i != leaving and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[leaving]
        basis[leaving] = entering
    return None


def _certify(M, sigma_row, sigma_col, value) -> bool:
    scale = max(1.0, float(np.abs(M).max()))
    return ((M @ sigma_col).max() <= value + _NE_TOL * scale
            and (sigma_row @ M).min() >= value - _NE_TOL * scale)


def _equalizing_strategy(A: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Least-squares q with A q = v 1 and sum q = 1; None if infeasible."""
    m, n = A.shape
    lhs = np.zeros((m + 1, n + 1))
    lhs[:m, :n] = A
    lhs[:m, n] = -1.0
    lhs[m, :n] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    q, v = sol[:n], float(sol[n])
    if q.min() < -1e-7:
        return None
    q = np.maximum(q, 0.0)
    return q / q.sum(), v


def _polish_on_support(M, sigma_row, sigma_col):
    """Re-solve the equalizing equations on the simplex-found support;
    recovers machine accuracy lost to degenerate pivoting."""
    rows = np.where(sigma_row > 1e-9)[0]
    cols = np.where(sigma_col > 1e-9)[0]
    sub = M[np.ix_(rows, cols)]
    col_solution = _equalizing_strategy(sub)
    row_solution = _equalizing_strategy(-sub.T)
    if col_solution is None or row_solution is None:
        return None
    q_sub, value = col_solution
    p_sub, _ = row_solution
    sigma_row = np.zeros(M.shape[0])
    sigma_row[rows] = p_sub
    sigma_col = np.zeros(M.shape[1])
    sigma_col[cols] = q_sub
    value = float(sigma_row @ M @ sigma_col)
    if not _certify(M, sigma_row, sigma_col, value):
        return None
    return sigma_row, sigma_col, value


def _nash_from_packing(M, offset, y, duals):
    total = y.sum()
    dual_total = duals.sum()
    if total <= 0 or dual_total <= 0:
        return None
    sigma_col = np.maximum(y, 0.0)
    sigma_col /= sigma_col.sum()
    sigma_row = np.maximum(duals, 0.0)
    sigma_row /= sigma_row.sum()
    value = 1.0 / total - offset
    if _certify(M, sigma_row, sigma_col, value):
        return sigma_row, sigma_col, float(value)
    return _polish_on_support(M, sigma_row, sigma_col)


def _dedup_indices(vectors: np.ndarray, tol: float) -> list[int]:
    """First-occurrence indices of rows distinct beyond `tol` (max norm)."""
    kept: list[int] = []
    for i in range(vectors.shape[0]):
        if all(np.abs(vectors[i] - vectors[j]).max() > tol for j in kept):
            kept.append(i)
    return kept


def solve_nash_lp(M) -> tuple[np.ndarray, np.ndarray, float]:
    """Exact Nash equilibrium of the zero-sum matrix game M.

    Returns (sigma_row, sigma_col, game value for the row player). The
    matrix is offset to be strictly positive, the column player's packing LP
    ``max 1'y  s.t.  M'y <= 1, y >= 0`` is solved by a dense simplex with
    Bland's rule, and the row strategy is read off the optimal duals. The
    result is certified against the no-profitable-deviation conditions.

    Population matrices are often massively degenerate (near-identical
    strategies); duplicates are collapsed onto their first occurrence before
    solving, which changes neither the value nor the deviation bounds, and a
    deterministic right-hand-side perturbation handles remaining ties.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise SolverError("payoff matrix must be 2D and non-empty")
    if not np.all(np.isfinite(M)):
        raise SolverError("payoff matrix entries must be finite")
    rows, cols = M.shape
    scale = float(np.abs(M).max())
    Mw = M / scale if scale > 0 else M

    row_keep = _dedup_indices(Mw, 1e-9)
    col_keep = _dedup_indices(Mw.T, 1e-9)
    Mr = Mw[np.ix_(row_keep, col_keep)]
    offset = 1.0 - Mr.min()
    A = Mr + offset

    for perturbation in (0.0, 1e-7, 1e-5):
        b = 1.0 + perturbation * np.arange(1, len(row_keep) + 1)
        solved = _simplex_packing(A, b)
        if solved is None:
            continue
        result = _nash_from_packing(Mr, offset, *solved)
        if result is None:
            continue
        sub_row, sub_col, value = result
        sigma_row = np.zeros(rows)
        sigma_row[row_keep] = sub_row
        sigma_col = np.zeros(cols)
        sigma_col[col_keep] = sub_col
        return sigma_row, sigma_col, value * (scale if scale > 0 else 1.0)
    raise SolverError("simplex failed to certify a Nash equilibrium")


# ---------------------------------------------------------------------------
# Projected replicator dynamics


def _project_floored_simplex(v: np.ndarray, floor: float) -> np.ndarray:
    """Euclidean projection onto {x : sum x = 1, x >= floor}."""
    n = len(v)
    target = 1.0 - n * floor
    if target < -1e-12:
        raise SolverError("floor too large for the simplex dimension")
    u = v - floor
    srt = np.sort(u)[::-1]
    css = np.cumsum(srt) - target
    idx = np.arange(1, n + 1)
    rho = np.max(np.where(srt - css / idx > 0, idx, 0))
    tau = css[rho - 1] / rho
    return np.maximum(u - tau, 0.0) + floor


def solve_prd(M, gamma: float, dt: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Discretized replicator dynamics with an exploration floor.

    Both strategies start uniform; each Euler step is followed by projection
    onto the simplex with every coordinate >= gamma.
    """
    M = np.asarray(M, dtype=float)
    rows, cols = M.shape
    if not (0 <= gamma < 1.0 / max(rows, cols)):
        raise SolverError("gamma must lie in [0, 1/num_actions)")
    if dt <= 0 or steps < 1:
        raise SolverError("dt must be positive and steps >= 1")
    x = np.full(rows, 1.0 / rows)
    y = np.full(cols, 1.0 / cols)
    for _ in range(steps):
        row_payoffs = M @ y
        col_payoffs = -M.T @ x
        value = x @ row_payoffs
        x_next = x + dt * x * (row_payoffs - value)
        y_next = y + dt * y * (col_payoffs + value)
        x = _project_floored_simplex(x_next, gamma)
        y = _project_floored_simplex(y_next, gamma)
    return x, y


# ---------------------------------------------------------------------------
# Fictitious play


def solve_fp(M, iters: int) -> tuple[np.ndarray, np.ndarray]:
    """Alternating best-response counting; returns empirical mixtures.

    The row player opens against a uniform assumption; thereafter each side
    best-responds to the opponent's empirical play so far.
    """
    M = np.asarray(M, dtype=float)
    if iters < 1:
        raise SolverError("iters must be >= 1")
    rows, cols = M.shape
    row_counts = np.zeros(rows)
    col_counts = np.zeros(cols)
    for t in range(iters):
        if t == 0:
            col_freq = np.full(cols, 1.0 / cols)
        else:
            col_freq = col_counts / col_counts.sum()
        row_counts[int(np.argmax(M @ col_freq))] += 1.0
        row_freq = row_counts / row_counts.sum()
        col_counts[int(np.argmin(row_freq @ M))] += 1.0
    return row_counts / row_counts.sum(), col_counts / col_counts.sum()


# ---------------------------------------------------------------------------
# Meta-strategy solver kinds and dispatch


@dataclass(frozen=True)
class Nash:
    pass


@dataclass(frozen=True)
class Uniform:
    pass


@dataclass(frozen=True)
class Prd:
    gamma: float = 1e-3
    dt: float = 1e-3
    steps: int = 100_000


@dataclass(frozen=True)
class FictitiousPlay:
    iters: int = 30_000


def solve(M, kind) -> tuple[np.ndarray, np.ndarray]:
    """Compute a meta-strategy pair from the payoff matrix."""
    M = np.asarray(M, dtype=float)
    if isinstance(kind, Uniform):
        rows, cols = M.shape
        return np.full(rows, 1.0 / rows), np.full(cols, 1.0 / cols)
    if isinstance(kind, Nash):
        sigma_row, sigma_col, _ = solve_nash_lp(M)
        return sigma_row, sigma_col
    if isinstance(kind, Prd):
        return solve_prd(M, kind.gamma, kind.dt, kind.steps)
    if isinstance(kind, FictitiousPlay):
        return solve_fp(M, kind.iters)
    raise SolverError(f"unknown meta-strategy solver {kind!r}")
