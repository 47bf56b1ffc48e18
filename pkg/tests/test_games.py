"""Game construction, rules, and invariant checks."""

import numpy as np
import pytest

from gamepop.games import (CHANCE, GameError, KuhnPoker, make_game,
                           play_episode)
from gamepop.games.ntmg import (S_MATRIX, NtmgConfig, ntmg_payoff,
                                ntmg_weights)
from gamepop.policies import TabularPolicy

ALL_GAMES = [
    ("kuhn_poker", {}),
    ("leduc_poker", {}),
    ("liars_dice", {"faces": 3}),
    ("liars_dice_ir", {"faces": 3, "recall": 2}),
    ("goofspiel", {"num_cards": 4}),
    ("matrix_game", {"rows": [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]}),
]


def make(name):
    return make_game(name, dict(ALL_GAMES[[n for n, _ in ALL_GAMES].index(name)][1]))


def test_make_game_unknown_name():
    with pytest.raises(GameError):
        make_game("chess")


def test_make_game_bad_params():
    with pytest.raises(GameError):
        make_game("goofspiel", {"num_cards": 1})
    with pytest.raises(GameError):
        make_game("liars_dice", {"faces": 1})
    with pytest.raises(GameError):
        make_game("kuhn_poker", {"bogus": 3})
    with pytest.raises(GameError):
        make_game("matrix_game", {})
    with pytest.raises(GameError):
        # legality depends on the last bid, so it must stay in memory
        make_game("liars_dice_ir", {"faces": 2, "recall": 0})


def test_liars_dice_ir_legal_actions_are_a_function_of_the_key():
    game = make_game("liars_dice_ir", {"faces": 3, "recall": 1})
    legal_by_key = {}

    def walk(state):
        if state.is_terminal:
            return
        if state.current_player == CHANCE:
            for a, _ in state.chance_outcomes():
                walk(state.child(a))
            return
        player = state.current_player
        key = (player, state.infoset_key(player))
        legal = tuple(state.legal_actions())
        assert legal_by_key.setdefault(key, legal) == legal
        for a in state.legal_actions():
            walk(state.child(a))

    walk(game.initial_state())


def test_goofspiel_round_count():
    game = make_game("goofspiel", {"num_cards": 5})
    state = game.initial_state()
    rounds = 0
    while not state.is_terminal:
        state = state.child(state.legal_actions()[0])
        rounds += 1
    assert rounds == 2 * 5  # two bids per auction round


def test_goofspiel_tie_splits_prize():
    game = make_game("goofspiel", {"num_cards": 2})
    state = game.initial_state()
    # Both play card 2 first, then forced card 1: both prizes split -> draw.
    for action in (1, 1, 0, 0):
        state = state.child(action)
    assert state.returns() == (0.0, 0.0)


def test_liars_dice_ir_key_truncation():
    game = make_game("liars_dice_ir", {"faces": 6, "recall": 2})
    state = game.initial_state().child(0).child(1)  # deal dice
    for bid in (0, 2, 5):
        state = state.child(bid)
    key = state.infoset_key(1)
    assert key == "1:2,5"  # only the last two public bids survive


def test_liars_dice_challenge_resolution():
    game = make_game("liars_dice", {"faces": 2})
    # dice: p0 shows face 0, p1 shows face 1; p0 bids (1, face 0): truthful.
    state = game.initial_state().child(0).child(1).child(0)
    challenged = state.child(game.challenge_action)
    assert challenged.returns() == (1.0, -1.0)
    # p0 bids (2, face 0): only one die shows face 0, so the bid is a lie.
    state = game.initial_state().child(0).child(1).child(2)
    challenged = state.child(game.challenge_action)
    assert challenged.returns() == (-1.0, 1.0)


def test_kuhn_payouts():
    game = KuhnPoker()
    state = game.initial_state().child(2).child(0)  # K vs J
    showdown = state.child(0).child(0)  # check, check
    assert showdown.returns() == (1.0, -1.0)
    fold = state.child(1).child(0)  # bet, fold
    assert fold.returns() == (1.0, -1.0)
    call = state.child(1).child(1)  # bet, call
    assert call.returns() == (2.0, -2.0)


@pytest.mark.parametrize("name,params", ALL_GAMES)
def test_zero_sum_conservation(name, params):
    game = make_game(name, params)
    uniform = TabularPolicy()
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        v0, v1 = play_episode(game, (uniform, uniform), rng)
        assert abs(v0 + v1) < 1e-10


@pytest.mark.parametrize("name,params", ALL_GAMES)
def test_chance_probabilities_sum_to_one(name, params):
    game = make_game(name, params)
    rng = np.random.default_rng(1)
    state = game.initial_state()
    while not state.is_terminal:
        if state.current_player == CHANCE:
            probs = [p for _, p in state.chance_outcomes()]
            assert all(p >= 0 for p in probs)
            assert abs(sum(probs) - 1.0) < 1e-12
        legal = (state.legal_actions() if state.current_player != CHANCE
                 else [a for a, _ in state.chance_outcomes()])
        state = state.child(legal[rng.integers(len(legal))])


@pytest.mark.parametrize("name,params", ALL_GAMES)
def test_playthroughs_respect_max_length(name, params):
    game = make_game(name, params)
    rng = np.random.default_rng(2)
    for _ in range(200):
        state = game.initial_state()
        moves = 0
        while not state.is_terminal:
            if state.current_player == CHANCE:
                actions = [a for a, _ in state.chance_outcomes()]
            else:
                actions = state.legal_actions()
                assert actions, "non-terminal state with no legal actions"
            state = state.child(actions[rng.integers(len(actions))])
            moves += 1
        assert moves <= game.max_game_length


@pytest.mark.parametrize("name,params",
                         [g for g in ALL_GAMES if g[0] != "liars_dice_ir"])
def test_perfect_recall_keys_follow_observations(name, params):
    """Histories with equal own observation sequences share an infoset key."""
    game = make_game(name, params)
    rng = np.random.default_rng(3)
    key_by_obs = {}
    for _ in range(500):
        state = game.initial_state()
        while not state.is_terminal:
            player = state.current_player
            if player == CHANCE:
                actions = [a for a, _ in state.chance_outcomes()]
            else:
                actions = state.legal_actions()
                obs = (player, game.observation_sequence(state, player))
                key = state.infoset_key(player)
                assert key_by_obs.setdefault(obs, key) == key
            state = state.child(actions[rng.integers(len(actions))])


def test_imperfect_recall_flag():
    assert make_game("liars_dice", {"faces": 2}).perfect_recall
    assert not make_game("liars_dice_ir", {"faces": 2, "recall": 1}).perfect_recall


class TestNtmg:
    cfg = NtmgConfig()

    def test_matrix_is_skew_symmetric(self):
        assert np.array_equal(S_MATRIX, -S_MATRIX.T)

    def test_weights_one_hot_at_center(self):
        small = NtmgConfig(gaussian_sigma=0.1)
        w = ntmg_weights(small.centers()[0], small)
        assert w[0] > 0.999

    def test_weights_uniform_at_origin(self):
        w = ntmg_weights([0.0, 0.0], self.cfg)
        assert np.allclose(w, 1.0 / 7.0, atol=1e-12)
        assert abs(w.sum() - 1.0) < 1e-12

    def test_weights_golden_at_center_three(self):
        # Direct evaluation of the closed form, independent of the package.
        cfg = NtmgConfig(center_radius=5.0, gaussian_sigma=1.0)
        centers = 5.0 * np.stack([np.cos(2 * np.pi * np.arange(7) / 7),
                                  np.sin(2 * np.pi * np.arange(7) / 7)], 1)
        x = centers[3]
        raw = np.exp(-((centers - x) ** 2).sum(1) / 2.0)
        expected = raw / raw.sum()
        assert np.allclose(ntmg_weights(x, cfg), expected, atol=1e-14)

    def test_payoff_antisymmetry(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            a = rng.uniform(-10, 10, 2)
            b = rng.uniform(-10, 10, 2)
            assert abs(ntmg_payoff(a, b, self.cfg)
                       + ntmg_payoff(b, a, self.cfg)) < 1e-12

    def test_payoff_diagonal_zero(self):
        assert ntmg_payoff([1.2, -0.7], [1.2, -0.7], self.cfg) == \
            pytest.approx(0.0, abs=1e-12)
        assert ntmg_payoff([0, 0], [0, 0], self.cfg) == \
            pytest.approx(0.0, abs=1e-12)

    def test_payoff_near_centers_matches_cycle_matrix(self):
        small = NtmgConfig(gaussian_sigma=0.1)
        mu = small.centers()
        assert ntmg_payoff(mu[0], mu[1], small) == pytest.approx(
            S_MATRIX[0, 1], abs=1e-6)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            NtmgConfig(num_humps=6)
        with pytest.raises(ValueError):
            NtmgConfig(gaussian_sigma=0.0)
        with pytest.raises(ValueError):
            ntmg_weights([np.inf, 0.0], self.cfg)
