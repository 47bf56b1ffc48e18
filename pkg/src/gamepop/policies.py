"""Policy representations, parameter fusion, ensembles, and diagnostics.

Three policy families share two read surfaces:

* ``action_probs(game, state, player)`` is the evaluation-time distribution
  used by exact traversal and meta-game payoffs. Parametric policies act
  greedily here (masked argmax over action values, lowest id on ties).
* ``dist_at(view)`` is the smooth reading used for ensembles, divergence
  diagnostics, and distillation targets. Parametric policies return the
  softmax of their legal action values at temperature 1.

Fusion averages flat parameter vectors with meta-strategy weights; the
tabular analog averages per-infoset action distributions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import nets
from .games.base import CHANCE, Game, State
from .nets import ArchSignature

KL_FLOOR = 1e-9


class PolicyError(Exception):
    """Malformed policy construction or incompatible fusion inputs."""


@dataclass(frozen=True)
class InfosetView:
    """A sampled decision point: enough context to query any policy."""
    key: str
    legal_actions: tuple[int, ...]
    features: np.ndarray | None = None


def _uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


class TabularPolicy:
    """Map from infoset key to an action distribution; unseen keys are
    uniform over the legal actions."""

    def __init__(self, table: dict[str, np.ndarray] | None = None):
        self.table = {}
        for key, dist in (table or {}).items():
            dist = np.asarray(dist, dtype=float)
            if dist.ndim != 1 or np.any(dist < -1e-12):
                raise PolicyError(f"invalid distribution at {key!r}")
            if abs(dist.sum() - 1.0) > 1e-9:
                raise PolicyError(f"distribution at {key!r} does not sum to 1")
            self.table[key] = dist

    def action_probs(self, game: Game, state: State, player: int) -> np.ndarray:
        return self.dist_for_key(state.infoset_key(player),
                                 len(state.legal_actions()))

    def dist_for_key(self, key: str, num_legal: int) -> np.ndarray:
        dist = self.table.get(key)
        if dist is None:
            return _uniform(num_legal)
        if len(dist) != num_legal:
            raise PolicyError(
                f"stored distribution at {key!r} has length {len(dist)}, "
                f"state has {num_legal} legal actions")
        return dist

    def dist_at(self, view: InfosetView) -> np.ndarray:
        return self.dist_for_key(view.key, len(view.legal_actions))


class ParametricPolicy:
    """Action-value network over infoset features, stored as a flat theta."""

    def __init__(self, signature: ArchSignature, theta: np.ndarray):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (nets.theta_size(signature),):
            raise PolicyError(
                f"theta has {theta.size} entries, signature needs "
                f"{nets.theta_size(signature)}")
        if not np.all(np.isfinite(theta)):
            raise PolicyError("theta entries must be finite")
        self.signature = signature
        self.theta = theta

    def q_values(self, features: np.ndarray) -> np.ndarray:
        return nets.forward(self.signature, self.theta, features)

    def greedy_action_index(self, features: np.ndarray, legal_actions) -> int:
        q = self.q_values(features)
        legal_q = np.array([q[a] for a in legal_actions])
        return int(np.argmax(legal_q))  # argmax takes the lowest id on ties

    def action_probs(self, game: Game, state: State, player: int) -> np.ndarray:
        legal = state.legal_actions()
        probs = np.zeros(len(legal))
        features = game.encode_infoset(state, player)
        probs[self.greedy_action_index(features, legal)] = 1.0
        return probs

    def dist_at(self, view: InfosetView) -> np.ndarray:
        q = self.q_values(view.features)
        legal_q = np.array([q[a] for a in view.legal_actions])
        legal_q -= legal_q.max()
        e = np.exp(legal_q)
        return e / e.sum()


class PointPolicy:
    """A point in the plane for the continuous mixture game."""

    def __init__(self, x, plane_bound: float | None = None):
        x = np.asarray(x, dtype=float)
        if x.shape != (2,) or not np.all(np.isfinite(x)):
            raise PolicyError("point policy needs a finite 2D coordinate")
        if plane_bound is not None and np.any(np.abs(x) > plane_bound + 1e-12):
            raise PolicyError("point outside the plane bound")
        self.x = x


class PolicyMixture:
    """A probability mixture over population members."""

    def __init__(self, members, weights):
        members = list(members)
        weights = np.asarray(weights, dtype=float)
        if not members:
            raise PolicyError("mixture needs at least one member")
        if weights.shape != (len(members),):
            raise PolicyError("weights length must match members")
        if np.any(weights < -1e-9) or abs(weights.sum() - 1.0) > 1e-9:
            raise PolicyError("weights must form a probability simplex")
        self.members = members
        self.weights = weights


def _check_simplex(weights: np.ndarray, n: int, tol: float = 1e-6):
    if weights.shape != (n,):
        raise PolicyError(f"expected {n} weights, got {weights.shape}")
    if np.any(weights < -tol) or abs(weights.sum() - 1.0) > tol:
        raise PolicyError("fusion weights must form a probability simplex")


def fuse_parameters(policies, weights) -> ParametricPolicy:
    """Weighted average of parameter vectors: theta = sum_i w_i theta_i.

    Summation is fixed left-to-right in population order; zero-weight terms
    are skipped so degenerate one-hot weights copy a member bit-exactly.
    """
    policies = list(policies)
    if not policies:
        raise PolicyError("cannot fuse an empty population")
    weights = np.asarray(weights, dtype=float)
    _check_simplex(weights, len(policies))
    signature = policies[0].signature
    for p in policies[1:]:
        if p.signature != signature:
            raise PolicyError("cannot fuse policies with different signatures")
    theta = np.zeros_like(policies[0].theta)
    for w, p in zip(weights, policies):
        if w != 0.0:
            theta = theta + w * p.theta
    return ParametricPolicy(signature, theta)


def fuse_points(points, weights, plane_bound: float | None = None) -> PointPolicy:
    """Weighted average of plane coordinates."""
    points = list(points)
    if not points:
        raise PolicyError("cannot fuse an empty population")
    weights = np.asarray(weights, dtype=float)
    _check_simplex(weights, len(points))
    x = np.zeros(2)
    for w, p in zip(weights, points):
        if w != 0.0:
            x = x + w * p.x
    return PointPolicy(x, plane_bound)


def fuse_tabular(policies, weights) -> TabularPolicy:
    """Per-infoset weighted average over the union of stored keys.

    Members without a key contribute their uniform default there.
    """
    policies = list(policies)
    if not policies:
        raise PolicyError("cannot fuse an empty population")
    weights = np.asarray(weights, dtype=float)
    _check_simplex(weights, len(policies))
    lengths: dict[str, int] = {}
    for p in policies:
        for key, dist in p.table.items():
            if lengths.setdefault(key, len(dist)) != len(dist):
                raise PolicyError(f"members disagree on legal count at {key!r}")
    table = {}
    for key, n in lengths.items():
        dist = np.zeros(n)
        for w, p in zip(weights, policies):
            if w != 0.0:
                dist = dist + w * p.dist_for_key(key, n)
        table[key] = dist / dist.sum()
    return TabularPolicy(table)


def scratch_init(kind: str, signature: ArchSignature, seed: int) -> ParametricPolicy:
    """Fresh parameters: `normal` N(0, 0.01), `orthogonal` weight matrices
    with orthonormal rows or columns (gain 1, zero biases), or `kaiming`
    N(0, 2/fan_in) with zero biases. Deterministic given seed."""
    rng = np.random.default_rng(seed)
    theta = np.zeros(nets.theta_size(signature))
    if kind == "normal":
        theta = rng.normal(0.0, 0.1, size=theta.size)
    elif kind == "kaiming":
        offset = 0
        for r, c in nets.layer_shapes(signature):
            theta[offset:offset + r * c] = rng.normal(
                0.0, np.sqrt(2.0 / c), size=r * c)
            offset += r * c + r
    elif kind == "orthogonal":
        offset = 0
        for r, c in nets.layer_shapes(signature):
            a = rng.normal(size=(max(r, c), min(r, c)))
            q, rd = np.linalg.qr(a)
            q = q * np.sign(np.diag(rd))  # fix signs for a unique factor
            w = q.T if r <= c else q
            theta[offset:offset + r * c] = w.ravel()
            offset += r * c + r
    else:
        raise PolicyError(f"unknown scratch init kind {kind!r}")
    return ParametricPolicy(signature, theta)


def ensemble_distribution(mixture: PolicyMixture, view: InfosetView) -> np.ndarray:
    """Mixture-weighted average of member action distributions at a state."""
    dist = np.zeros(len(view.legal_actions))
    for w, member in zip(mixture.weights, mixture.members):
        if w != 0.0:
            dist = dist + w * member.dist_at(view)
    return dist / dist.sum()


def floored(dist: np.ndarray, floor: float = KL_FLOOR) -> np.ndarray:
    d = np.maximum(np.asarray(dist, dtype=float), floor)
    return d / d.sum()


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) with q floored so greedy q stays finite."""
    q = floored(q)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def sample_infoset_views(mixture: PolicyMixture, game: Game, player: int,
                         num_states: int, seed: int,
                         max_episodes: int | None = None) -> list[InfosetView]:
    """Distinct infosets of `player` visited by the mixture ensemble playing
    against a uniform opponent, in first-visit order.

    Stops early once rollouts keep revisiting known infosets, so small games
    return their full reachable set quickly.
    """
    rng = np.random.default_rng(seed)
    views: list[InfosetView] = []
    seen: set[str] = set()
    episodes = 0
    since_new = 0
    patience = max(20, num_states // 2)
    cap = max_episodes if max_episodes is not None else max(50, 10 * num_states)
    while len(views) < num_states and episodes < cap and since_new <= patience:
        episodes += 1
        found_new = False
        state = game.initial_state()
        while not state.is_terminal:
            current = state.current_player
            legal = state.legal_actions()
            if current == CHANCE:
                outcomes = state.chance_outcomes()
                probs = np.array([p for _, p in outcomes])
                idx = rng.choice(len(outcomes), p=probs / probs.sum())
                state = state.child(outcomes[idx][0])
                continue
            if current == player:
                key = state.infoset_key(player)
                view = InfosetView(key, tuple(legal),
                                   game.encode_infoset(state, player))
                if key not in seen:
                    seen.add(key)
                    views.append(view)
                    found_new = True
                    if len(views) >= num_states:
                        break
                probs = ensemble_distribution(mixture, view)
            else:
                probs = _uniform(len(legal))
            idx = rng.choice(len(legal), p=probs / probs.sum())
            state = state.child(legal[idx])
        since_new = 0 if found_new else since_new + 1
    return views


def kl_to_ensemble(candidate, mixture: PolicyMixture, game: Game,
                   num_states: int = 512, seed: int = 0,
                   player: int = 0) -> float:
    """Mean KL(ensemble || candidate) over sampled infosets.

    The ensemble direction is used so any state mass the mixture cares about
    must be covered by the candidate; the candidate distribution is floored
    at 1e-9 and renormalized to keep the divergence finite against greedy
    candidates.
    """
    if num_states < 1:
        raise ValueError("num_states must be >= 1")
    views = sample_infoset_views(mixture, game, player, num_states, seed)
    if not views:
        return 0.0
    total = 0.0
    for view in views:
        p = ensemble_distribution(mixture, view)
        q = candidate.dist_at(view)
        total += kl_divergence(p, q)
    return total / len(views)


def distill(mixture: PolicyMixture, student_signature: ArchSignature,
            game: Game, epochs: int, samples_per_epoch: int, lr: float,
            seed: int, player: int = 0) -> ParametricPolicy:
    """Train a student network on ensemble action distributions.

    Each epoch samples infosets like kl_to_ensemble and takes one gradient
    step on the mean cross-entropy between the ensemble target and the
    student's legal-action softmax.
    """
    if epochs < 0 or samples_per_epoch < 1 or lr <= 0:
        raise ValueError("epochs >= 0, samples_per_epoch >= 1, lr > 0 required")
    student = scratch_init("normal", student_signature, seed)
    if epochs == 0:
        return student
    theta = student.theta.copy()
    optimizer = nets.Sgd(lr)
    for epoch in range(epochs):
        views = sample_infoset_views(mixture, game, player, samples_per_epoch,
                                     seed + 1 + epoch)
        if not views:
            continue
        X = np.stack([v.features for v in views])
        Q = nets.forward(student_signature, theta, X)
        grad_out = np.zeros_like(Q)
        loss = 0.0
        for i, view in enumerate(views):
            legal = list(view.legal_actions)
            target = ensemble_distribution(mixture, view)
            logits = Q[i, legal] - Q[i, legal].max()
            soft = np.exp(logits)
            soft /= soft.sum()
            loss -= float(target @ np.log(np.maximum(soft, 1e-300)))
            grad_out[i, legal] = (soft - target) / len(views)
        if not np.isfinite(loss):
            raise PolicyError("distillation loss diverged; lower the lr")
        grad = nets.forward_backward(student_signature, theta, X, grad_out)
        theta = optimizer.step(theta, grad)
    return ParametricPolicy(student_signature, theta)


# Checkpoint format: JSON object with exactly the fields input_dim,
# hidden_layers, output_dim, activation, theta. Floats are written with
# repr precision so a round-trip is bit-exact.

def checkpoint_dumps(policy) -> str:
    if isinstance(policy, ParametricPolicy):
        sig = policy.signature
        payload = {
            "input_dim": sig.input_dim,
            "hidden_layers": list(sig.hidden_layers),
            "output_dim": sig.output_dim,
            "activation": sig.activation,
            "theta": [float(t) for t in policy.theta],
        }
    elif isinstance(policy, TabularPolicy):
        payload = {"table": {k: [float(p) for p in v]
                             for k, v in sorted(policy.table.items())}}
    elif isinstance(policy, PointPolicy):
        payload = {"x": [float(policy.x[0]), float(policy.x[1])]}
    else:
        raise PolicyError(f"cannot checkpoint {type(policy).__name__}")
    return json.dumps(payload, separators=(",", ":"))


def checkpoint_loads(text: str):
    payload = json.loads(text)
    if "theta" in payload:
        sig = ArchSignature(payload["input_dim"],
                            tuple(payload["hidden_layers"]),
                            payload["output_dim"], payload["activation"])
        return ParametricPolicy(sig, np.array(payload["theta"], dtype=float))
    if "table" in payload:
        return TabularPolicy({k: np.array(v, dtype=float)
                              for k, v in payload["table"].items()})
    if "x" in payload:
        return PointPolicy(payload["x"])
    raise PolicyError("unrecognized checkpoint payload")
