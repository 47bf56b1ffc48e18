"""Core abstractions for two-player zero-sum extensive-form games.

Games are trees of immutable states. A state is owned by player 0, player 1,
chance, or is terminal. Information sets are identified by opaque string keys
that must be a function of the owning player's own action/observation
sequence (perfect recall); games that deliberately break this set
``perfect_recall = False``.
"""

from __future__ import annotations

import numpy as np

CHANCE = -1
TERMINAL = -2


class GameError(Exception):
    """Invalid game construction or parameters."""


class State:
    """One node of the game tree.

    Subclasses implement the queries below. States are value-like: ``child``
    returns a fresh state and never mutates the receiver.
    """

    history: tuple  # ((player-or-CHANCE, action), ...)

    @property
    def current_player(self) -> int:
        raise NotImplementedError

    @property
    def is_terminal(self) -> bool:
        return self.current_player == TERMINAL

    def legal_actions(self) -> list[int]:
        raise NotImplementedError

    def chance_outcomes(self) -> list[tuple[int, float]]:
        raise NotImplementedError

    def child(self, action: int) -> "State":
        raise NotImplementedError

    def returns(self) -> tuple[float, float]:
        raise NotImplementedError

    def infoset_key(self, player: int) -> str:
        raise NotImplementedError


class Game:
    """A two-player zero-sum game exposing tree traversal queries."""

    name: str = "game"
    num_players: int = 2
    max_game_length: int = 0
    perfect_recall: bool = True

    def initial_state(self) -> State:
        raise NotImplementedError

    def num_distinct_actions(self) -> int:
        """Size of the global action-id space (upper bound over all states)."""
        raise NotImplementedError

    # Feature encoding for parametric (action-value network) policies.
    # Encoders are fixed per game; a change in layout changes encoding_dim,
    # which invalidates any checkpoint trained against the old layout.

    def encoding_dim(self) -> int:
        raise NotImplementedError

    def encode_infoset(self, state: State, player: int) -> np.ndarray:
        raise NotImplementedError

    def observation_sequence(self, state: State, player: int) -> tuple:
        """The player's own action/observation sequence at this state.

        Used by tests to check that infoset keys never leak hidden
        information: histories with equal observation sequences must map to
        equal infoset keys.
        """
        raise NotImplementedError


def play_episode(game: Game, policies, rng: np.random.Generator,
                 action_probs=None) -> tuple[float, float]:
    """Sample one playthrough; ``policies[i]`` picks actions for player i.

    ``action_probs(policy, game, state, player)`` defaults to each policy's
    evaluation-time distribution.
    """
    state = game.initial_state()
    while not state.is_terminal:
        if state.current_player == CHANCE:
            outcomes = state.chance_outcomes()
            probs = np.array([p for _, p in outcomes])
            idx = rng.choice(len(outcomes), p=probs / probs.sum())
            state = state.child(outcomes[idx][0])
        else:
            player = state.current_player
            policy = policies[player]
            if action_probs is None:
                probs = policy.action_probs(game, state, player)
            else:
                probs = action_probs(policy, game, state, player)
            legal = state.legal_actions()
            idx = rng.choice(len(legal), p=np.asarray(probs) / np.sum(probs))
            state = state.child(legal[idx])
    return state.returns()
