"""Meta-game payoff management and meta-strategy solvers.

The Nash LP is cross-checked against a support-enumeration oracle that
solves the equalizing equations for every support pair and verifies the
equilibrium conditions; it shares nothing with the simplex implementation.
"""

import itertools

import numpy as np
import pytest

from gamepop.games import expected_value, make_game
from gamepop.meta_solvers import (FictitiousPlay, MetaGame, Nash, Prd,
                                  SolverError, Uniform, extend_payoff, solve,
                                  solve_fp, solve_nash_lp, solve_prd)
from gamepop.policies import TabularPolicy

RPS = np.array([[0, -1, 1], [1, 0, -1], [-1, 1, 0]], dtype=float)
PENNIES = np.array([[1, -1], [-1, 1]], dtype=float)


# ---------------------------------------------------------------------------
# Support enumeration oracle (tests only)


def _solve_support(M, rows, cols):
    """Equalizing strategies on the given supports, or None."""
    sub = M[np.ix_(rows, cols)]
    n = len(cols)
    lhs = np.zeros((len(rows) + 1, n + 1))
    lhs[:len(rows), :n] = sub
    lhs[:len(rows), n] = -1.0
    lhs[len(rows), :n] = 1.0
    rhs = np.zeros(len(rows) + 1)
    rhs[-1] = 1.0
    try:
        sol, residual, rank, _ = np.linalg.lstsq(lhs, rhs, rcond=None)
    except np.linalg.LinAlgError:
        return None
    if np.abs(lhs @ sol - rhs).max() > 1e-9:
        return None
    q, v = sol[:n], sol[n]
    lhs2 = np.zeros((n + 1, len(rows) + 1))
    lhs2[:n, :len(rows)] = sub.T
    lhs2[:n, len(rows)] = -1.0
    lhs2[n, :len(rows)] = 1.0
    rhs2 = np.zeros(n + 1)
    rhs2[-1] = 1.0
    sol2, *_ = np.linalg.lstsq(lhs2, rhs2, rcond=None)
    if np.abs(lhs2 @ sol2 - rhs2).max() > 1e-9:
        return None
    p = sol2[:len(rows)]
    if q.min() < -1e-9 or p.min() < -1e-9:
        return None
    sigma_row = np.zeros(M.shape[0])
    sigma_row[list(rows)] = np.maximum(p, 0)
    sigma_row /= sigma_row.sum()
    sigma_col = np.zeros(M.shape[1])
    sigma_col[list(cols)] = np.maximum(q, 0)
    sigma_col /= sigma_col.sum()
    value = float(sigma_row @ M @ sigma_col)
    if (M @ sigma_col).max() > value + 1e-9:
        return None
    if (sigma_row @ M).min() < value - 1e-9:
        return None
    return sigma_row, sigma_col, value


def nash_by_support_enumeration(M):
    """Zero-sum NE over all support pairs; None iff something is wrong."""
    M = np.asarray(M, dtype=float)
    r_indices = range(M.shape[0])
    c_indices = range(M.shape[1])
    for r_size in range(1, M.shape[0] + 1):
        for c_size in range(1, M.shape[1] + 1):
            for rows in itertools.combinations(r_indices, r_size):
                for cols in itertools.combinations(c_indices, c_size):
                    result = _solve_support(M, rows, cols)
                    if result is not None:
                        return result
    return None


# ---------------------------------------------------------------------------
# solve_nash_lp


class TestNashLp:
    def test_rps_uniform(self):
        sr, sc, v = solve_nash_lp(RPS)
        assert np.allclose(sr, 1 / 3, atol=1e-9)
        assert np.allclose(sc, 1 / 3, atol=1e-9)
        assert v == pytest.approx(0.0, abs=1e-9)

    def test_matching_pennies(self):
        sr, sc, v = solve_nash_lp(PENNIES)
        assert np.allclose(sr, 0.5, atol=1e-9)
        assert np.allclose(sc, 0.5, atol=1e-9)
        assert v == pytest.approx(0.0, abs=1e-9)

    def test_degenerate_shapes(self):
        sr, sc, v = solve_nash_lp([[2.5]])
        assert v == pytest.approx(2.5)
        _, sc, v = solve_nash_lp([[0.2, -0.5, 0.8]])
        assert v == pytest.approx(-0.5)
        assert sc[1] == pytest.approx(1.0)

    def test_matches_support_enumeration_on_random_3x3(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            M = rng.integers(-5, 6, (3, 3)).astype(float)
            sr, sc, v = solve_nash_lp(M)
            oracle = nash_by_support_enumeration(M)
            assert oracle is not None
            assert v == pytest.approx(oracle[2], abs=1e-8)
            assert (M @ sc).max() <= v + 1e-8
            assert (sr @ M).min() >= v - 1e-8

    def test_ne_conditions_on_random_matrices(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            r, c = rng.integers(2, 9, 2)
            M = rng.integers(-5, 6, (r, c)).astype(float)
            sr, sc, v = solve_nash_lp(M)
            assert abs(sr @ M @ sc - v) < 1e-8
            assert (M @ sc).max() <= v + 1e-8
            assert (sr @ M).min() >= v - 1e-8

    def test_zero_sum_duality(self):
        rng = np.random.default_rng(19)
        for _ in range(25):
            M = rng.normal(size=(4, 6))
            _, _, v = solve_nash_lp(M)
            _, _, v_T = solve_nash_lp(-M.T)  # column player's own LP
            assert v_T == pytest.approx(-v, abs=1e-8)

    def test_scaling_leaves_support_and_scales_value(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            M = rng.integers(-5, 6, (4, 4)).astype(float)
            sr, sc, v = solve_nash_lp(M)
            sr2, sc2, v2 = solve_nash_lp(2.5 * M)
            assert v2 == pytest.approx(2.5 * v, abs=1e-8)
            assert np.array_equal(sr > 1e-6, sr2 > 1e-6)
            assert np.array_equal(sc > 1e-6, sc2 > 1e-6)

    def test_rejects_bad_matrices(self):
        with pytest.raises(SolverError):
            solve_nash_lp(np.array([[np.nan, 1.0]]))
        with pytest.raises(SolverError):
            solve_nash_lp(np.zeros((0, 3)))


# ---------------------------------------------------------------------------
# PRD


class TestPrd:
    def test_rps_fixed_point(self):
        x, y = solve_prd(RPS, gamma=0.0, dt=1e-2, steps=500)
        assert np.allclose(x, 1 / 3, atol=1e-12)
        assert np.allclose(y, 1 / 3, atol=1e-12)

    def test_pennies_stays_centered(self):
        x, y = solve_prd(PENNIES, gamma=0.0, dt=1e-3, steps=50_000)
        assert np.abs(x - 0.5).max() < 0.05
        assert np.abs(y - 0.5).max() < 0.05

    def test_floor_binds_under_dominance(self):
        M = np.array([[1.0, 1.0], [0.0, 0.0]])
        x, _ = solve_prd(M, gamma=0.1, dt=1e-2, steps=5000)
        assert np.allclose(x, [0.9, 0.1], atol=1e-9)

    def test_output_satisfies_floor_and_simplex(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            M = rng.normal(size=(4, 3))
            x, y = solve_prd(M, gamma=0.05, dt=1e-2, steps=200)
            for v in (x, y):
                assert v.min() >= 0.05 - 1e-12
                assert v.sum() == pytest.approx(1.0, abs=1e-9)

    def test_invalid_config(self):
        with pytest.raises(SolverError):
            solve_prd(RPS, gamma=0.5, dt=1e-3, steps=10)
        with pytest.raises(SolverError):
            solve_prd(RPS, gamma=0.0, dt=0.0, steps=10)


# ---------------------------------------------------------------------------
# Fictitious play


class TestFictitiousPlay:
    def test_rps_converges_to_thirds(self):
        x, y = solve_fp(RPS, 30_000)
        assert np.abs(x - 1 / 3).max() < 0.02
        assert np.abs(y - 1 / 3).max() < 0.02

    def test_trivial_game(self):
        x, y = solve_fp([[0.5]], 5)
        assert x[0] == 1.0 and y[0] == 1.0

    def test_dominant_row(self):
        x, _ = solve_fp(np.array([[2.0, 2.0], [0.0, 0.0]]), 100)
        assert np.allclose(x, [1.0, 0.0])

    def test_exploitability_decreases_with_iters(self):
        rng = np.random.default_rng(41)
        M = rng.integers(-5, 6, (4, 4)).astype(float)
        _, _, v = solve_nash_lp(M)

        def regret(iters):
            x, y = solve_fp(M, iters)
            return ((M @ y).max() - x @ M @ y) + (x @ M @ y - (x @ M).min())

        assert regret(30_000) < regret(300)


def test_solve_dispatch():
    assert np.allclose(solve(np.zeros((4, 4)), Uniform())[0], 0.25)
    sr, _ = solve(RPS, Nash())
    assert np.allclose(sr, 1 / 3, atol=1e-9)
    sr, _ = solve(RPS, Prd(gamma=0.0, dt=1e-2, steps=200))
    assert np.allclose(sr, 1 / 3, atol=1e-9)
    sr, _ = solve(RPS, FictitiousPlay(iters=5000))
    assert np.abs(sr - 1 / 3).max() < 0.05


# ---------------------------------------------------------------------------
# extend_payoff


def rps_pure(action):
    dist = np.zeros(3)
    dist[action] = 1.0
    return TabularPolicy({"p0": dist, "p1": dist})


class TestExtendPayoff:
    game = make_game("matrix_game",
                     {"rows": [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]})

    def test_single_entry(self):
        meta = extend_payoff(MetaGame(), self.game,
                             ([rps_pure(0)], [rps_pure(0)]))
        assert meta.payoff.tolist() == [[0.0]]

    def test_two_by_two(self):
        pops = ([rps_pure(0), rps_pure(1)], [rps_pure(0), rps_pure(1)])
        meta = extend_payoff(MetaGame(), self.game, pops)
        assert meta.payoff.tolist() == [[0.0, -1.0], [1.0, 0.0]]

    def test_existing_entries_not_recomputed(self):
        pops = ([rps_pure(0)], [rps_pure(0)])
        meta = extend_payoff(MetaGame(), self.game, pops)
        meta.payoff[0, 0] = 123.0  # sentinel: must survive extension
        pops = ([rps_pure(0), rps_pure(1)], [rps_pure(0), rps_pure(1)])
        grown = extend_payoff(meta, self.game, pops)
        assert grown.payoff[0, 0] == 123.0
        assert grown.payoff[1, 0] == 1.0

    def test_fill_order_independent_exact(self):
        pops = ([rps_pure(0), rps_pure(2)], [rps_pure(1), rps_pure(2)])
        a = extend_payoff(MetaGame(), self.game, pops)
        partial = extend_payoff(MetaGame(), self.game,
                                ([rps_pure(0)], [rps_pure(1)]))
        b = extend_payoff(partial, self.game, pops)
        assert np.array_equal(a.payoff, b.payoff)

    def test_monte_carlo_concentrates(self):
        game = make_game("kuhn_poker")
        uniform = TabularPolicy()
        exact = expected_value(game, (uniform, uniform))[0]
        meta = extend_payoff(MetaGame(), game, ([uniform], [uniform]),
                             ("monte_carlo", 100_000, 12345))
        assert meta.payoff[0, 0] == pytest.approx(exact, abs=0.02)

    def test_monte_carlo_deterministic_per_entry_seed(self):
        game = make_game("kuhn_poker")
        uniform = TabularPolicy()
        a = extend_payoff(MetaGame(), game, ([uniform], [uniform]),
                          ("monte_carlo", 500, 7))
        b = extend_payoff(MetaGame(), game, ([uniform], [uniform]),
                          ("monte_carlo", 500, 7))
        assert a.payoff[0, 0] == b.payoff[0, 0]

    def test_cannot_shrink(self):
        meta = extend_payoff(MetaGame(), self.game,
                             ([rps_pure(0)], [rps_pure(0)]))
        with pytest.raises(SolverError):
            meta.grown_to(0, 0)
