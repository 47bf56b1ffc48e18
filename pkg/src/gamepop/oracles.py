"""Best-response oracles: exact, tabular Q-learning, DQN-lite, and gradient
ascent for the continuous mixture game, plus the hull-divergence intrinsic
reward used by the diversity-seeking variant.

All oracles are deterministic given (seed, config). The exact oracle ignores
any initialization by construction; initialization only matters to the
approximate oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nets
from .games import best_response
from .games.base import CHANCE, Game
from .games.ntmg import (S_MATRIX, NtmgConfig, ntmg_densities,
                         ntmg_densities_jacobian, ntmg_payoff,
                         ntmg_payoff_grad)
from .policies import (InfosetView, ParametricPolicy, PolicyMixture,
                       TabularPolicy, floored, kl_divergence)


@dataclass
class Step:
    """One learner transition of a trajectory."""
    view: InfosetView
    action: int  # global action id
    reward: float
    next_key: str | None
    terminal: bool


@dataclass(frozen=True)
class DqnConfig:
    replay_capacity: int = 10_000
    batch_size: int = 512
    lr: float = 5e-3
    gamma_discount: float = 1.0
    epsilon: float = 0.05
    target_update_every: int = 5
    episodes: int = 20_000
    optimizer: str = "adam"
    grad_clip: float | None = None
    soft_update_tau: float | None = None
    # Prioritized-replay parameters kept for config fidelity; replay here is
    # uniform, so both are unused.
    per_alpha: float = 0.6
    is_beta: float = 0.4

    def __post_init__(self):
        if not (self.replay_capacity >= self.batch_size >= 1):
            raise ValueError("need replay_capacity >= batch_size >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not 0.0 <= self.gamma_discount <= 1.0:
            raise ValueError("gamma_discount must lie in [0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be sgd or adam")


def _sample_member(mixture: PolicyMixture, rng: np.random.Generator):
    idx = rng.choice(len(mixture.members), p=mixture.weights)
    return mixture.members[idx]


def _sample_action(probs, legal, rng):
    probs = np.asarray(probs, dtype=float)
    return legal[rng.choice(len(legal), p=probs / probs.sum())]


def run_learner_episode(game: Game, player: int, select, opponent,
                        rng: np.random.Generator) -> tuple[list[Step], float]:
    """Play one episode; `select(view) -> global action id` drives the
    learner, the opponent plays its evaluation-time distribution. Returns the
    learner's transitions and terminal reward."""
    state = game.initial_state()
    pending: tuple[InfosetView, int] | None = None
    steps: list[Step] = []
    while not state.is_terminal:
        current = state.current_player
        if current == CHANCE:
            outcomes = state.chance_outcomes()
            probs = np.array([p for _, p in outcomes])
            state = state.child(_sample_action(probs, [a for a, _ in outcomes],
                                               rng))
            continue
        legal = state.legal_actions()
        if current == player:
            view = InfosetView(state.infoset_key(player), tuple(legal),
                               game.encode_infoset(state, player))
            action = select(view)
            assert action in legal, "oracle selected an illegal action"
            if pending is not None:
                steps.append(Step(pending[0], pending[1], 0.0, view.key, False))
            pending = (view, action)
            state = state.child(action)
        else:
            probs = opponent.action_probs(game, state, current)
            state = state.child(_sample_action(probs, legal, rng))
    reward = state.returns()[player]
    if pending is not None:
        steps.append(Step(pending[0], pending[1], reward, None, True))
    return steps, reward


def exact_oracle(game: Game, opponent_mixture, player: int,
                 node_budget=None) -> TabularPolicy:
    """Exact best response; initialization-independent by construction."""
    kwargs = {} if node_budget is None else {"node_budget": node_budget}
    policy, _ = best_response(game, opponent_mixture, player, **kwargs)
    return policy


def q_learning_oracle(game: Game, init: TabularPolicy | None,
                      opponent_mixture: PolicyMixture, player: int,
                      episodes: int, lr: float = 0.1, epsilon: float = 0.1,
                      gamma_discount: float = 1.0,
                      seed: int = 0) -> TabularPolicy:
    """One-step tabular Q-learning over infoset keys.

    Each episode samples a single opponent from the mixture. A given init
    policy seeds first-touch Q-values with its action probabilities;
    otherwise they start at zero. The returned policy is greedy in the
    learned table.
    """
    rng = np.random.default_rng(seed)
    q_table: dict[str, np.ndarray] = {}

    def q_for(view: InfosetView) -> np.ndarray:
        q = q_table.get(view.key)
        if q is None:
            n = len(view.legal_actions)
            if init is not None:
                q = init.dist_for_key(view.key, n).astype(float).copy()
            else:
                q = np.zeros(n)
            q_table[view.key] = q
        return q

    def select(view: InfosetView) -> int:
        q = q_for(view)
        if rng.random() < epsilon:
            return view.legal_actions[rng.integers(len(view.legal_actions))]
        return view.legal_actions[int(np.argmax(q))]

    for _ in range(episodes):
        opponent = _sample_member(opponent_mixture, rng)
        steps, _ = run_learner_episode(game, player, select, opponent, rng)
        for step in steps:
            q = q_for(step.view)
            idx = step.view.legal_actions.index(step.action)
            if step.terminal:
                bootstrap = 0.0
            else:
                bootstrap = float(q_table[step.next_key].max())
            q[idx] += lr * (step.reward + gamma_discount * bootstrap - q[idx])

    table = {}
    for key, q in q_table.items():
        dist = np.zeros(len(q))
        dist[int(np.argmax(q))] = 1.0
        table[key] = dist
    return TabularPolicy(table)


@dataclass
class PsdBonus:
    """Hull-divergence intrinsic reward configuration for one training run."""
    hull_samples: list
    lam: float
    gamma_discount: float


def psd_intrinsic_reward(steps: list[Step], new_policy, hull_samples,
                         lam: float, gamma_discount: float) -> np.ndarray:
    """Per-step rewards with the hull-divergence bonus added.

    The trajectory bonus is lam times the smallest mean per-step KL from the
    new policy to any hull sample; it is discounted back from the final step
    and added to the extrinsic rewards.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if not hull_samples:
        raise ValueError("hull_samples must be non-empty")
    rewards = np.array([s.reward for s in steps], dtype=float)
    if lam == 0.0 or not steps:
        return rewards
    divergences = []
    for sample in hull_samples:
        total = 0.0
        for step in steps:
            p = floored(new_policy.dist_at(step.view))
            q = sample.dist_at(step.view)
            total += kl_divergence(p, q)
        divergences.append(total / len(steps))
    bonus = lam * min(divergences)
    horizon = len(steps)
    for t in range(horizon):
        rewards[t] += bonus * gamma_discount ** (horizon - 1 - t)
    return rewards


def dqn_oracle(game: Game, init: ParametricPolicy,
               opponent_mixture: PolicyMixture, player: int, cfg: DqnConfig,
               seed: int = 0,
               psd: PsdBonus | None = None) -> tuple[ParametricPolicy, list]:
    """DQN with uniform replay and a target network.

    Behavior is epsilon-greedy over legal-masked action values; the squared
    temporal-difference loss is minimized with the configured optimizer; the
    target network is hard-copied every `target_update_every` learner steps
    unless a soft-update ratio is set. Returns the trained policy and the
    per-episode trailing-window mean-reward curve.
    """
    if init.signature.input_dim != game.encoding_dim():
        raise ValueError("init signature does not match the game encoder")
    if init.signature.output_dim != game.num_distinct_actions():
        raise ValueError("init signature does not match the action space")
    if cfg.episodes == 0:
        return init, []
    rng = np.random.default_rng(seed)
    sig = init.signature
    theta = init.theta.copy()
    target_theta = theta.copy()
    optimizer = nets.make_optimizer(cfg.optimizer, cfg.lr)

    dim = game.encoding_dim()
    n_actions = game.num_distinct_actions()
    replay_x = np.zeros((cfg.replay_capacity, dim))
    replay_next = np.zeros((cfg.replay_capacity, dim))
    replay_action = np.zeros(cfg.replay_capacity, dtype=int)
    replay_reward = np.zeros(cfg.replay_capacity)
    replay_done = np.zeros(cfg.replay_capacity)
    replay_next_mask = np.zeros((cfg.replay_capacity, n_actions), dtype=bool)
    size, cursor, learner_steps = 0, 0, 0
    next_views: dict[str, InfosetView] = {}

    def select(view: InfosetView) -> int:
        next_views[view.key] = view
        if rng.random() < cfg.epsilon:
            return view.legal_actions[rng.integers(len(view.legal_actions))]
        q = nets.forward(sig, theta, view.features)
        legal_q = np.array([q[a] for a in view.legal_actions])
        return view.legal_actions[int(np.argmax(legal_q))]

    def learn_step():
        nonlocal theta, target_theta, learner_steps
        batch = rng.integers(size, size=cfg.batch_size)
        X = replay_x[batch]
        q_all = nets.forward(sig, theta, X)
        q_taken = q_all[np.arange(len(batch)), replay_action[batch]]
        q_next = nets.forward(sig, target_theta, replay_next[batch])
        q_next = np.where(replay_next_mask[batch], q_next, -np.inf)
        best_next = np.where(replay_next_mask[batch].any(axis=1),
                             q_next.max(axis=1), 0.0)
        targets = (replay_reward[batch]
                   + cfg.gamma_discount * (1.0 - replay_done[batch]) * best_next)
        td = q_taken - targets
        loss = float(np.mean(td * td))
        if not np.isfinite(loss):
            raise FloatingPointError("TD loss diverged; lower the lr")
        grad_out = np.zeros_like(q_all)
        grad_out[np.arange(len(batch)), replay_action[batch]] = (
            2.0 * td / len(batch))
        grad = nets.forward_backward(sig, theta, X, grad_out)
        if cfg.grad_clip is not None:
            grad = nets.clip_grad_norm(grad, cfg.grad_clip)
        theta = optimizer.step(theta, grad)
        learner_steps += 1
        if cfg.soft_update_tau is not None:
            tau = cfg.soft_update_tau
            target_theta = (1.0 - tau) * target_theta + tau * theta
        elif learner_steps % cfg.target_update_every == 0:
            target_theta = theta.copy()

    curve = []
    window: list[float] = []
    for episode in range(cfg.episodes):
        opponent = _sample_member(opponent_mixture, rng)
        steps, reward = run_learner_episode(game, player, select, opponent, rng)
        rewards = np.array([s.reward for s in steps])
        if psd is not None:
            rewards = psd_intrinsic_reward(
                steps, ParametricPolicy(sig, theta), psd.hull_samples,
                psd.lam, psd.gamma_discount)
        for step, r in zip(steps, rewards):
            replay_x[cursor] = step.view.features
            replay_action[cursor] = step.action
            replay_reward[cursor] = r
            replay_done[cursor] = 1.0 if step.terminal else 0.0
            mask = np.zeros(n_actions, dtype=bool)
            if not step.terminal:
                next_view = next_views[step.next_key]
                replay_next[cursor] = next_view.features
                mask[list(next_view.legal_actions)] = True
            else:
                replay_next[cursor] = 0.0
            replay_next_mask[cursor] = mask
            cursor = (cursor + 1) % cfg.replay_capacity
            size = min(size + 1, cfg.replay_capacity)
            if size >= cfg.batch_size:
                learn_step()
        window.append(reward)
        if len(window) > 100:
            window.pop(0)
        curve.append((episode + 1, float(np.mean(window))))
    return ParametricPolicy(sig, theta), curve


def ntmg_oracle(init, opponent_mixture, steps: int, lr: float,
                cfg: NtmgConfig):
    """Gradient ascent on the mixture-averaged plane payoff.

    Against a fixed mixture the payoff reduces to
    ``dens(x) @ (S dbar + 1/2) + const`` with dbar the weight-averaged
    opponent density vector, so each step costs one Jacobian regardless of
    mixture size. Returns the trained point policy and the full per-step
    trajectory (including the start point) for plotting.
    """
    from .policies import PointPolicy

    if steps < 1 or lr <= 0:
        raise ValueError("steps >= 1 and lr > 0 required")
    x = np.array(init.x, dtype=float)
    trajectory = [x.copy()]
    dbar = np.zeros(cfg.num_humps)
    for policy, w in opponent_mixture:
        if w != 0.0:
            dbar += w * ntmg_densities(policy.x, cfg)
    coeff = S_MATRIX @ dbar + 0.5
    for _ in range(steps):
        grad = ntmg_densities_jacobian(x, cfg).T @ coeff
        x = np.clip(x + lr * grad, -cfg.plane_bound, cfg.plane_bound)
        trajectory.append(x.copy())
    return PointPolicy(x, cfg.plane_bound), trajectory


def ntmg_mixture_payoff(x, opponent_mixture, cfg: NtmgConfig) -> float:
    total = 0.0
    for policy, w in opponent_mixture:
        if w != 0.0:
            total += w * ntmg_payoff(x, policy.x, cfg)
    return total


def gradient_check(cfg: NtmgConfig, num_points: int = 100, seed: int = 0,
                   span: float = 6.0, fd_step: float = 1e-6,
                   scale_floor: float = 1e-3) -> float:
    """Worst composite error between the analytic payoff gradient and central
    finite differences over random point pairs.

    The error is ||g - fd|| / max(||g||, ||fd||, scale_floor): relative where
    the gradient is meaningful, absolute (against the payoff scale) in flat
    basins where finite differences are dominated by roundoff.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_points):
        x = rng.uniform(-span, span, 2)
        y = rng.uniform(-span, span, 2)
        g = ntmg_payoff_grad(x, y, cfg)
        fd = np.zeros(2)
        for d in range(2):
            e = np.zeros(2)
            e[d] = fd_step
            fd[d] = (ntmg_payoff(x + e, y, cfg)
                     - ntmg_payoff(x - e, y, cfg)) / (2 * fd_step)
        denom = max(float(np.linalg.norm(g)), float(np.linalg.norm(fd)),
                    scale_floor)
        worst = max(worst, float(np.linalg.norm(g - fd)) / denom)
    return worst
