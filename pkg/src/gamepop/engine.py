"""Population training loop for two-player zero-sum games.

Each iteration initializes one new policy per player (scratch, inheritance,
meta-strategy-weighted parameter fusion, or distillation), trains it as a
best response against the opponent's current meta-strategy mixture, extends
the restricted-game payoff matrix, and re-solves the meta-strategy.

Fusion uses the meta-strategy computed at the end of the previous iteration.
Before the fusion start iteration `c`, a historical policy is sampled from
the meta-strategy instead.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import meta_solvers, policies as pol
from .games import (TraversalBudgetError, expected_value, exploitability,
                    make_game, play_episode)
from .games.ntmg import NtmgConfig, ntmg_payoff
from .meta_solvers import MetaGame, extend_payoff
from .nets import ArchSignature
from .oracles import (DqnConfig, PsdBonus, dqn_oracle, exact_oracle,
                      ntmg_oracle, q_learning_oracle)
from .policies import (ParametricPolicy, PointPolicy, PolicyMixture,
                       TabularPolicy, checkpoint_dumps, fuse_parameters,
                       fuse_points, fuse_tabular, kl_to_ensemble,
                       scratch_init)

MC_VALUE_EPISODES = 10_000


class EngineError(Exception):
    pass


# ---------------------------------------------------------------------------
# Run description


@dataclass(frozen=True)
class Scratch:
    kind: str = "normal"


@dataclass(frozen=True)
class InheritLatest:
    pass


@dataclass(frozen=True)
class InheritBest:
    """Deterministic arm: copy the policy with the largest meta-strategy
    mass (lowest index on ties)."""


@dataclass(frozen=True)
class SampleFromNE:
    pass


@dataclass(frozen=True)
class NashFusion:
    c: int = 2
    top_k: int | None = None  # None fuses the whole population
    weights: str = "nash"  # or "uniform" over the selected set

    def __post_init__(self):
        if self.c < 0:
            raise EngineError("fusion start iteration c must be >= 0")
        if self.top_k is not None and self.top_k < 1:
            raise EngineError("top_k must be >= 1")
        if self.weights not in ("nash", "uniform"):
            raise EngineError("fusion weights must be nash or uniform")


@dataclass(frozen=True)
class Distill:
    epochs: int = 200
    samples: int = 64
    lr: float = 0.05


@dataclass(frozen=True)
class ExactOracle:
    node_budget: int | None = None


@dataclass(frozen=True)
class QLearningOracle:
    episodes: int = 5_000
    lr: float = 0.1
    epsilon: float = 0.1
    gamma_discount: float = 1.0


@dataclass(frozen=True)
class DqnOracle:
    hidden_layers: tuple[int, ...] = (64, 64)
    cfg: DqnConfig = field(default_factory=DqnConfig)


@dataclass(frozen=True)
class GradientOracle:
    steps: int = 150
    lr: float = 1.0


@dataclass(frozen=True)
class PsdSpec:
    enabled: bool = False
    lam: float = 1.0
    hull_samples: int = 4

    def __post_init__(self):
        if self.lam < 0:
            raise EngineError("psd lambda must be >= 0")
        if self.enabled and self.hull_samples < 1:
            raise EngineError("psd hull_samples must be >= 1")


@dataclass(frozen=True)
class EvalSpec:
    exact_exploitability_every: int = 1  # 0 disables
    approx_oracle: object | None = None
    approx_every: int = 0  # 0 means final iteration only (when enabled)


@dataclass(frozen=True)
class DiagnosticsSpec:
    kl_compare: bool = False
    kl_states: int = 128


@dataclass(frozen=True)
class PsroConfig:
    game: dict
    oracle: object
    mss: object
    init: tuple  # per-player InitMethod
    iterations: int
    psd: PsdSpec = PsdSpec()
    eval: EvalSpec = EvalSpec()
    payoff_mode: str = "exact"
    payoff_episodes: int = 10_000
    seeds: tuple[int, ...] = (0,)
    output_dir: str | None = None
    diagnostics: DiagnosticsSpec = DiagnosticsSpec()
    node_budget: int | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise EngineError("iterations must be >= 1")
        if self.payoff_mode not in ("exact", "monte_carlo"):
            raise EngineError("payoff mode must be exact or monte_carlo")


@dataclass
class IterationRecord:
    iteration: int
    sigma_row: list
    sigma_col: list
    exploitability: float | None
    approx_exploitability: float | None
    pop_size_p1: int
    pop_size_p2: int
    t_meta: float
    t_br: float
    t_fusion: float
    t_payoff: float
    kl_compare: list = field(default_factory=list)


@dataclass
class RunHistory:
    records: list
    populations: tuple
    meta: MetaGame
    sigmas: tuple


def _derive_seed(*parts) -> list[int]:
    return [int(p) & 0x7FFFFFFF for p in parts]


def _mix_seed(*parts) -> int:
    h = 0
    for p in parts:
        h = (h * 1_000_003 + int(p)) % (2 ** 31)
    return h


# ---------------------------------------------------------------------------
# Representation toolkits (one per oracle family)


class TabularOps:
    kind = "tabular"

    def scratch(self, seed, init_kind="normal"):
        return TabularPolicy({})  # uniform everywhere

    def copy(self, policy):
        return TabularPolicy(dict(policy.table))

    def fuse(self, members, weights):
        return fuse_tabular(members, weights)


class ParametricOps:
    kind = "parametric"

    def __init__(self, game, hidden_layers):
        self.game = game
        self.signature = ArchSignature(game.encoding_dim(),
                                       tuple(hidden_layers),
                                       game.num_distinct_actions())

    def scratch(self, seed, init_kind="normal"):
        return scratch_init(init_kind, self.signature,
                            np.random.default_rng(seed).integers(2 ** 31))

    def copy(self, policy):
        return ParametricPolicy(policy.signature, policy.theta.copy())

    def fuse(self, members, weights):
        return fuse_parameters(members, weights)


class PointOps:
    kind = "point"

    def __init__(self, cfg: NtmgConfig):
        self.cfg = cfg

    def scratch(self, seed, init_kind="normal"):
        rng = np.random.default_rng(seed)
        span = self.cfg.center_radius
        return PointPolicy(rng.uniform(-span, span, 2), self.cfg.plane_bound)

    def copy(self, policy):
        return PointPolicy(policy.x.copy(), self.cfg.plane_bound)

    def fuse(self, members, weights):
        return fuse_points(members, weights, self.cfg.plane_bound)


# ---------------------------------------------------------------------------
# Initialization menu


def top_k_filter(sigma, k: int) -> np.ndarray:
    """Keep the k largest entries (lowest index on ties), renormalized."""
    sigma = np.asarray(sigma, dtype=float)
    if not 1 <= k <= len(sigma):
        raise EngineError(f"top_k={k} out of range for {len(sigma)} policies")
    order = np.argsort(-sigma, kind="stable")
    keep = order[:k]
    out = np.zeros_like(sigma)
    out[keep] = sigma[keep]
    total = out.sum()
    if total <= 0.0:
        out[keep] = 1.0 / k
    else:
        out /= total
    return out


def init_new_policy(pop, sigma, t: int, method, seed, ops, game=None,
                    distill_player: int = 0):
    """Build the next policy to train, per the configured initialization."""
    if not pop:
        raise EngineError("population is empty")
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (len(pop),):
        raise EngineError("sigma length must match the population")
    if isinstance(method, Scratch):
        return ops.scratch(seed, method.kind)
    if isinstance(method, InheritLatest):
        return ops.copy(pop[-1])
    if isinstance(method, InheritBest):
        return ops.copy(pop[int(np.argmax(sigma))])
    if isinstance(method, SampleFromNE):
        idx = np.random.default_rng(seed).choice(len(pop), p=sigma)
        return ops.copy(pop[idx])
    if isinstance(method, NashFusion):
        if t < method.c:
            idx = np.random.default_rng(seed).choice(len(pop), p=sigma)
            return ops.copy(pop[idx])
        if method.top_k is None:
            selected = np.arange(len(pop))
            weights = sigma
        else:
            k = min(method.top_k, len(pop))
            selected = np.argsort(-sigma, kind="stable")[:k]
            weights = top_k_filter(sigma, k)
        if method.weights == "uniform":
            weights = np.zeros(len(pop))
            weights[selected] = 1.0 / len(selected)
        return ops.fuse(pop, weights)
    if isinstance(method, Distill):
        if ops.kind != "parametric":
            raise EngineError("distillation requires a parametric oracle")
        return pol.distill(PolicyMixture(pop, sigma), ops.signature, game,
                           method.epochs, method.samples, method.lr,
                           int(np.random.default_rng(seed).integers(2 ** 31)),
                           player=distill_player)
    raise EngineError(f"unknown init method {method!r}")


# ---------------------------------------------------------------------------
# Oracle dispatch


def _train_oracle(spec, game, ops, init, opponent_mixture, player, seed,
                  psd_bonus=None, node_budget=None):
    """Returns (policy, learning_curve_or_None, trajectory_or_None)."""
    if isinstance(spec, ExactOracle):
        budget = spec.node_budget if spec.node_budget is not None else node_budget
        return exact_oracle(game, opponent_mixture, player,
                            node_budget=budget), None, None
    if isinstance(spec, QLearningOracle):
        policy = q_learning_oracle(
            game, init if isinstance(init, TabularPolicy) else None,
            opponent_mixture, player, spec.episodes, spec.lr, spec.epsilon,
            spec.gamma_discount,
            seed=int(np.random.default_rng(seed).integers(2 ** 31)))
        return policy, None, None
    if isinstance(spec, DqnOracle):
        policy, curve = dqn_oracle(
            game, init, opponent_mixture, player, spec.cfg,
            seed=int(np.random.default_rng(seed).integers(2 ** 31)),
            psd=psd_bonus)
        return policy, curve, None
    if isinstance(spec, GradientOracle):
        pairs = list(zip(opponent_mixture.members, opponent_mixture.weights))
        policy, traj = ntmg_oracle(init, pairs, spec.steps, spec.lr, ops.cfg)
        return policy, None, traj
    raise EngineError(f"unknown oracle spec {spec!r}")


# ---------------------------------------------------------------------------
# NTMG evaluation helpers

_NTMG_BR_STEPS = 120
_NTMG_BR_LR = 1.0


def ntmg_profile_value(pop_row, sigma_row, pop_col, sigma_col,
                       cfg: NtmgConfig) -> float:
    value = 0.0
    for wr, pr in zip(sigma_row, pop_row):
        for wc, pc in zip(sigma_col, pop_col):
            if wr * wc != 0.0:
                value += wr * wc * ntmg_payoff(pr.x, pc.x, cfg)
    return value


def ntmg_best_response_value(opponent_pairs, cfg: NtmgConfig) -> float:
    """Approximate best payoff against a point mixture via multi-start
    gradient ascent (hump centers, origin, opponent points)."""
    starts = [c for c in cfg.centers()]
    starts.append(np.zeros(2))
    starts.extend(p.x for p, w in opponent_pairs if w > 0)
    best = -np.inf
    for start in starts:
        policy, _ = ntmg_oracle(PointPolicy(np.clip(start, -cfg.plane_bound,
                                                    cfg.plane_bound)),
                                opponent_pairs, _NTMG_BR_STEPS, _NTMG_BR_LR,
                                cfg)
        value = sum(w * ntmg_payoff(policy.x, p.x, cfg)
                    for p, w in opponent_pairs)
        best = max(best, value)
    return best


def ntmg_exploitability(pops, sigmas, cfg: NtmgConfig) -> float:
    value_row = ntmg_profile_value(pops[0], sigmas[0], pops[1], sigmas[1], cfg)
    gains = 0.0
    for player in (0, 1):
        opp = 1 - player
        pairs = [(p, w) for p, w in zip(pops[opp], sigmas[opp])]
        br = ntmg_best_response_value(pairs, cfg)
        current = value_row if player == 0 else -value_row
        gains += br - current
    return gains


# ---------------------------------------------------------------------------
# Approximate exploitability (trained best responses)


def _mixture_value(game, mixture_row, mixture_col, player, node_budget,
                   seed) -> float:
    try:
        return expected_value(game, (mixture_row, mixture_col))[player]
    except TraversalBudgetError:
        rng = np.random.default_rng(_derive_seed(seed, player, 77))
        total = 0.0
        for _ in range(MC_VALUE_EPISODES):
            r0 = _sample_from(mixture_row, rng)
            r1 = _sample_from(mixture_col, rng)
            total += play_episode(game, (r0, r1), rng)[player]
        return total / MC_VALUE_EPISODES


def _sample_from(policy_or_mixture, rng):
    members = getattr(policy_or_mixture, "members", None)
    if members is None:
        return policy_or_mixture
    return members[rng.choice(len(members), p=policy_or_mixture.weights)]


def _fit_init_to_oracle(init, game, oracle_spec, seed):
    """A DQN trainer needs network parameters; non-parametric mixture
    members fall back to a seeded scratch network."""
    if not isinstance(oracle_spec, DqnOracle) or hasattr(init, "theta"):
        return init
    signature = ArchSignature(game.encoding_dim(), oracle_spec.hidden_layers,
                              game.num_distinct_actions())
    return scratch_init("normal", signature,
                        int(np.random.default_rng(seed).integers(2 ** 31)))


def approximate_exploitability(game, profile, oracle_spec, seed,
                               ops=None, node_budget=None) -> float:
    """Exploitability with trained best responses in place of exact ones.

    Each player's response is initialized from a meta-strategy-sampled
    member of their own mixture and trained against the opponent mixture; a
    noisy lower bound on the exact quantity.
    """
    total = 0.0
    for player in (0, 1):
        own = profile[player]
        opp = profile[1 - player]
        rng = np.random.default_rng(_derive_seed(seed, player, 11))
        init = _fit_init_to_oracle(_sample_from(own, rng), game, oracle_spec,
                                   _derive_seed(seed, player, 13))
        trained, _, _ = _train_oracle(oracle_spec, game, ops, init, opp,
                                      player, _derive_seed(seed, player, 12),
                                      node_budget=node_budget)
        pair = (trained, opp) if player == 0 else (opp, trained)
        v_trained = _mixture_value(game, pair[0], pair[1], player,
                                   node_budget, seed)
        base = (own, opp) if player == 0 else (opp, own)
        v_current = _mixture_value(game, base[0], base[1], player,
                                   node_budget, seed)
        total += v_trained - v_current
    return total


# ---------------------------------------------------------------------------
# Output writers


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


RESULTS_COLUMNS = ["iteration", "exploitability", "approx_exploitability",
                   "pop_size_p1", "pop_size_p2"]
TIMINGS_COLUMNS = ["iteration", "t_meta", "t_br", "t_fusion", "t_payoff"]
RESULTS_VERSION = "gamepop-results-v1"


class _RunWriter:
    """Incremental per-run output; partial results stay on disk if the run
    aborts. Timing columns live in a separate file so results.csv is
    byte-reproducible for a given config and seed."""

    def __init__(self, out_dir):
        self.dir = out_dir
        if out_dir is None:
            return
        os.makedirs(out_dir, exist_ok=True)
        os.makedirs(os.path.join(out_dir, "checkpoints"), exist_ok=True)
        self.results_path = os.path.join(out_dir, "results.csv")
        with open(self.results_path, "w", newline="") as fh:
            fh.write(f"# {RESULTS_VERSION}\n")
            csv.writer(fh).writerow(RESULTS_COLUMNS)
        with open(os.path.join(out_dir, "timings.csv"), "w", newline="") as fh:
            csv.writer(fh).writerow(TIMINGS_COLUMNS)

    def record(self, rec: IterationRecord):
        if self.dir is None:
            return
        with open(self.results_path, "a", newline="") as fh:
            csv.writer(fh).writerow([
                rec.iteration, _fmt(rec.exploitability),
                _fmt(rec.approx_exploitability), rec.pop_size_p1,
                rec.pop_size_p2])
        with open(os.path.join(self.dir, "timings.csv"), "a", newline="") as fh:
            csv.writer(fh).writerow([rec.iteration, _fmt(rec.t_meta),
                                     _fmt(rec.t_br), _fmt(rec.t_fusion),
                                     _fmt(rec.t_payoff)])

    def payoff_matrix(self, t: int, meta: MetaGame):
        if self.dir is None:
            return
        path = os.path.join(self.dir, f"payoff_matrix_{t}.txt")
        with open(path, "w") as fh:
            fh.write(f"rows {meta.row_count} cols {meta.col_count}\n")
            fh.write("row_ids " + " ".join(f"p0_{i}" for i in
                                           range(meta.row_count)) + "\n")
            fh.write("col_ids " + " ".join(f"p1_{j}" for j in
                                           range(meta.col_count)) + "\n")
            for i in range(meta.row_count):
                fh.write(" ".join(repr(float(v)) for v in meta.payoff[i])
                         + "\n")

    def checkpoint(self, t: int, player: int, policy):
        if self.dir is None:
            return
        path = os.path.join(self.dir, "checkpoints",
                            f"iter_{t:04d}_p{player}.json")
        with open(path, "w") as fh:
            fh.write(checkpoint_dumps(policy))

    def curve(self, t: int, player: int, curve):
        if self.dir is None or curve is None:
            return
        os.makedirs(os.path.join(self.dir, "curves"), exist_ok=True)
        path = os.path.join(self.dir, "curves", f"iter_{t:04d}_p{player}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["episode", "mean_reward_window"])
            for episode, mean in curve:
                w.writerow([episode, _fmt(float(mean))])

    def trajectory(self, t: int, player: int, traj):
        if self.dir is None or traj is None:
            return
        path = os.path.join(self.dir, "trajectories.csv")
        new = not os.path.exists(path)
        with open(path, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(["iteration", "player", "step", "x", "y"])
            for step, point in enumerate(traj):
                w.writerow([t, player, step, _fmt(float(point[0])),
                            _fmt(float(point[1]))])

    def kl_compare(self, rows):
        if self.dir is None or not rows:
            return
        path = os.path.join(self.dir, "kl_compare.csv")
        new = not os.path.exists(path)
        with open(path, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(["iteration", "player", "kl_fusion", "kl_inherit",
                            "kl_scratch"])
            for row in rows:
                w.writerow([row[0], row[1], _fmt(row[2]), _fmt(row[3]),
                            _fmt(row[4])])


# ---------------------------------------------------------------------------
# The loop


def _build_arena(config: PsroConfig):
    """Returns (game_or_none, ops, is_ntmg)."""
    name = config.game.get("name")
    params = config.game.get("params", {}) or {}
    if name == "ntmg":
        cfg = NtmgConfig(**params)
        if not isinstance(config.oracle, GradientOracle):
            raise EngineError("the mixture game needs the gradient oracle")
        return None, PointOps(cfg), True
    game = make_game(name, params)
    if isinstance(config.oracle, DqnOracle):
        return game, ParametricOps(game, config.oracle.hidden_layers), False
    if isinstance(config.oracle, (ExactOracle, QLearningOracle)):
        return game, TabularOps(), False
    raise EngineError("oracle spec does not fit the configured game")


def _fill_payoffs(meta, game, pops, config, seed, is_ntmg, ops):
    if is_ntmg:
        rows, cols = len(pops[0]), len(pops[1])
        out = meta.grown_to(rows, cols)
        for r in range(rows):
            for c in range(cols):
                if not out.filled[r, c]:
                    out.payoff[r, c] = ntmg_payoff(pops[0][r].x,
                                                   pops[1][c].x, ops.cfg)
                    out.filled[r, c] = True
        return out
    if config.payoff_mode == "exact":
        return extend_payoff(meta, game, pops, "exact",
                             node_budget=config.node_budget)
    return extend_payoff(meta, game, pops,
                         ("monte_carlo", config.payoff_episodes, seed))


def run_psro(config: PsroConfig, seed: int,
             out_dir: str | None = None) -> RunHistory:
    """Run the population loop for one seed. Writes incremental outputs when
    `out_dir` is given and returns the full history."""
    game, ops, is_ntmg = _build_arena(config)
    writer = _RunWriter(out_dir)
    pops = ([ops.scratch(_derive_seed(seed, 0, 0, 6), "normal")],
            [ops.scratch(_derive_seed(seed, 0, 1, 6), "normal")])
    meta = _fill_payoffs(MetaGame(), game, pops, config, _mix_seed(seed, 2),
                         is_ntmg, ops)
    sigmas = (np.ones(1), np.ones(1))
    records = []
    # Outputs are written as each iteration completes, so a failing component
    # aborts the run with the partial history already on disk.
    for t in range(1, config.iterations + 1):
        rec = _run_iteration(config, seed, t, game, ops, is_ntmg, pops,
                             meta, sigmas, writer)
        meta, sigmas = rec.pop("meta"), rec.pop("sigmas")
        record = rec.pop("record")
        records.append(record)
        writer.record(record)
        writer.payoff_matrix(t, meta)
    return RunHistory(records, pops, meta, sigmas)


def _run_iteration(config, seed, t, game, ops, is_ntmg, pops, meta, sigmas,
                   writer):
    t_fusion = 0.0
    t_br = 0.0
    kl_rows = []
    new_policies = []
    for player in (0, 1):
        sigma_own = sigmas[player]
        sigma_opp = sigmas[1 - player]
        opponent = PolicyMixture(pops[1 - player], sigma_opp)

        start = time.perf_counter()
        init = init_new_policy(pops[player], sigma_own, t,
                               config.init[player],
                               _derive_seed(seed, t, player, 0), ops,
                               game=game, distill_player=player)
        t_fusion += time.perf_counter() - start

        if config.diagnostics.kl_compare and ops.kind == "parametric":
            kl_rows.append(_kl_compare_row(config, seed, t, player, game,
                                           ops, pops[player], sigma_own))

        psd_bonus = None
        if config.psd.enabled and not is_ntmg:
            rng = np.random.default_rng(_derive_seed(seed, t, player, 4))
            hull = [pops[player][i] for i in
                    rng.integers(len(pops[player]),
                                 size=config.psd.hull_samples)]
            gamma = (config.oracle.cfg.gamma_discount
                     if isinstance(config.oracle, DqnOracle) else 1.0)
            psd_bonus = PsdBonus(hull, config.psd.lam, gamma)

        start = time.perf_counter()
        trained, curve, traj = _train_oracle(
            config.oracle, game, ops, init, opponent, player,
            _derive_seed(seed, t, player, 1), psd_bonus=psd_bonus,
            node_budget=config.node_budget)
        t_br += time.perf_counter() - start
        writer.curve(t, player, curve)
        writer.trajectory(t, player, traj)
        writer.checkpoint(t, player, trained)
        new_policies.append(trained)

    for player in (0, 1):
        pops[player].append(new_policies[player])

    start = time.perf_counter()
    meta = _fill_payoffs(meta, game, pops, config, _mix_seed(seed, 2),
                         is_ntmg, ops)
    t_payoff = time.perf_counter() - start

    start = time.perf_counter()
    sigma_row, sigma_col = meta_solvers.solve(meta.payoff, config.mss)
    t_meta = time.perf_counter() - start
    sigmas = (sigma_row, sigma_col)

    exact = None
    every = config.eval.exact_exploitability_every
    if every and (t % every == 0 or t == config.iterations):
        if is_ntmg:
            exact = ntmg_exploitability(pops, sigmas, ops.cfg)
        else:
            kwargs = ({} if config.node_budget is None
                      else {"node_budget": config.node_budget})
            exact = exploitability(
                game, (PolicyMixture(pops[0], sigma_row),
                       PolicyMixture(pops[1], sigma_col)), **kwargs)

    approx = None
    spec = config.eval.approx_oracle
    if spec is not None and not is_ntmg:
        cadence = config.eval.approx_every
        due = (t % cadence == 0) if cadence else (t == config.iterations)
        if due:
            approx = approximate_exploitability(
                game, (PolicyMixture(pops[0], sigma_row),
                       PolicyMixture(pops[1], sigma_col)),
                spec, _mix_seed(seed, t, 3), ops=ops,
                node_budget=config.node_budget)

    writer.kl_compare(kl_rows)
    record = IterationRecord(
        iteration=t, sigma_row=[float(x) for x in sigma_row],
        sigma_col=[float(x) for x in sigma_col],
        exploitability=None if exact is None else float(exact),
        approx_exploitability=None if approx is None else float(approx),
        pop_size_p1=len(pops[0]),
        pop_size_p2=len(pops[1]), t_meta=t_meta, t_br=t_br,
        t_fusion=t_fusion, t_payoff=t_payoff, kl_compare=kl_rows)
    return {"meta": meta, "sigmas": sigmas, "record": record}


def _kl_compare_row(config, seed, t, player, game, ops, pop, sigma):
    """Divergence-to-ensemble of the three initialization candidates at the
    moment of initialization."""
    mixture = PolicyMixture(pop, sigma)
    fused = ops.fuse(pop, sigma)
    inherit = pop[-1]
    scratch = ops.scratch(_derive_seed(seed, t, player, 5), "normal")
    states = config.diagnostics.kl_states
    kl_seed = _mix_seed(seed, t, player, 7)
    values = [kl_to_ensemble(candidate, mixture, game, states, kl_seed,
                             player=player)
              for candidate in (fused, inherit, scratch)]
    return (t, player, values[0], values[1], values[2])
