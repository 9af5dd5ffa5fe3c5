"""Training loops: protocol learners, baselines and the two-stage pipeline.

All learners share one episode-replay loop: collect a fixed number of
episodes per train step, sample a batch uniformly from the buffer, apply
the summed TD update to every sampled episode, and periodically copy the
live tables over the frozen targets.  On top of that sit the random-map
protocol learner, the channel-free baseline, the fully observable
pre-trainer whose Q-vectors seed the clustering stage, frozen-strategy
fine-tuning with an optional embedding-shuffle phase, and the free-channel
pre-trainer that can be distilled into a message strategy.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from ..channel import ChannelMode, CheatChannelEnv, InfoMap, cheat_wrap, map_shuffle
from ..core import NO_ACTION, make_rng
from .rollout import PolicyBundle, Rollout, evaluate, global_key
from .tables import (MessageStrategy, QHeads, TdLog, TrainEpisode,
                     select_action, select_message, sync_targets,
                     vdn_td_update)


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float = 0.2
    gamma: float = 0.99
    epsilon: float = 0.1
    epsilon_final: float | None = None   # linear decay target, None = constant
    target_update_rate: int = 10
    episodes: int = 20000
    episodes_per_step: int = 10
    batch_size: int = 32
    buffer_capacity: int = 10000
    eval_every: int = 100
    eval_episodes: int = 200
    eval_exhaustive_bound: int = 512
    default_q: float = 0.0
    compact_keys: bool = False
    full_obs_episodes: int = 4000
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    keep_td_logs: bool = False
    keep_best: bool = False   # return the tables from the best eval point

    def __post_init__(self):
        if self.episodes_per_step < 1 or self.batch_size < 1:
            raise ValueError("episodes_per_step and batch_size must be positive")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.epsilon_final is not None and not 0 <= self.epsilon_final <= 1:
            raise ValueError("epsilon_final must lie in [0, 1]")

    def epsilon_at(self, step: int, n_steps: int) -> float:
        if self.epsilon_final is None or n_steps <= 1:
            return self.epsilon
        frac = (step - 1) / (n_steps - 1)
        return self.epsilon + frac * (self.epsilon_final - self.epsilon)


@dataclass
class CurvePoint:
    train_step: int
    mean_return: float
    mean_ep_len: float
    epsilon: float
    seed: int


@dataclass
class TrainResult:
    bundle: PolicyBundle
    curve: list[CurvePoint]
    final_return: float
    final_ep_len: float
    seed: int
    wall_time: float
    td_logs: list[TdLog] = field(default_factory=list)


# ---------------------------------------------------------------------------
# shared replay loop


def _snapshot_tables(heads):
    return (dict(heads.q_action), dict(heads.q_message),
            dict(heads.target_action), dict(heads.target_message))


def _train_loop(env, bundle: PolicyBundle, config: LearnerConfig,
                seed: int) -> TrainResult:
    start_time = time.perf_counter()
    rng = make_rng(seed, 0xA11CE)
    rollout = Rollout(env, bundle)
    buffer: deque[TrainEpisode] = deque(maxlen=config.buffer_capacity)
    curve: list[CurvePoint] = []
    td_logs: list[TdLog] = []
    best: tuple[CurvePoint, tuple] | None = None
    n_steps = max(1, config.episodes // config.episodes_per_step)

    for step in range(1, n_steps + 1):
        eps = config.epsilon_at(step, n_steps)
        for _ in range(config.episodes_per_step):
            ep_seed = int(rng.integers(0, 2 ** 62))
            _, train_ep = rollout.run(("seed", ep_seed), epsilon=eps,
                                      rng=rng, record=True)
            buffer.append(train_ep)
        if len(buffer) >= config.batch_size:
            picks = rng.integers(0, len(buffer), size=config.batch_size)
            for i in picks:
                logs = vdn_td_update(buffer[int(i)], bundle.heads,
                                     config.alpha, config.gamma)
                if config.keep_td_logs:
                    td_logs.extend(logs)
        if step % config.target_update_rate == 0:
            sync_targets(bundle.heads)
        if step % config.eval_every == 0 or step == n_steps:
            mean_ret, mean_len = evaluate(
                env, rollout, episodes=config.eval_episodes,
                exhaustive_bound=config.eval_exhaustive_bound)
            curve.append(CurvePoint(step, mean_ret, mean_len, eps, seed))
            if config.keep_best and (best is None
                                     or mean_ret > best[0].mean_return):
                best = (curve[-1], _snapshot_tables(bundle.heads))

    final_ret, final_len = curve[-1].mean_return, curve[-1].mean_ep_len
    if best is not None and best[0].mean_return > final_ret:
        point, tables = best
        final_ret, final_len = point.mean_return, point.mean_ep_len
        (bundle.heads.q_action, bundle.heads.q_message,
         bundle.heads.target_action, bundle.heads.target_message) = tables
    return TrainResult(bundle=bundle, curve=curve, final_return=final_ret,
                       final_ep_len=final_len, seed=seed,
                       wall_time=time.perf_counter() - start_time,
                       td_logs=td_logs)


def train_icp_rm(env, imap: InfoMap, config: LearnerConfig, seed: int) -> TrainResult:
    """Random-map protocol learner: dual heads over the reduced action space."""
    bundle = PolicyBundle(mode=ChannelMode.ONE_TO_ONE,
                          heads=QHeads(default=config.default_q), imap=imap,
                          compact_keys=config.compact_keys)
    return _train_loop(env, bundle, config, seed)


def train_baseline(env, config: LearnerConfig, seed: int) -> TrainResult:
    """Channel-free learner over the raw action space (scouting included)."""
    bundle = PolicyBundle(mode=ChannelMode.NONE,
                          heads=QHeads(default=config.default_q),
                          compact_keys=config.compact_keys)
    return _train_loop(env, bundle, config, seed)


def fine_tune(env, imap: InfoMap, strategy: MessageStrategy, mode: ChannelMode,
              config: LearnerConfig, seed: int) -> TrainResult:
    """Train the action head while the message strategy stays frozen."""
    mode = ChannelMode(mode)
    if mode not in (ChannelMode.ONE_TO_ONE, ChannelMode.HAT):
        raise ValueError("fine-tuning works over the one-to-one or hat channel")
    if not strategy.frozen:
        raise ValueError("the strategy must be frozen during fine-tuning")
    if strategy.k != imap.k:
        raise ValueError(
            f"strategy over {strategy.k} messages does not fit a map of size {imap.k}")
    bundle = PolicyBundle(mode=mode, heads=QHeads(default=config.default_q),
                          imap=imap, strategy=strategy,
                          compact_keys=config.compact_keys)
    return _train_loop(env, bundle, config, seed)


# ---------------------------------------------------------------------------
# fully observable pre-training


@dataclass
class FullObsResult:
    table: dict
    key_context: dict
    n_actions: int
    seed: int


def train_full_obs(env, config: LearnerConfig, seed: int) -> FullObsResult:
    """Single-head epsilon-greedy Q-learning on fully observable state keys.

    Hidden information is folded into the key, so this is plain online
    Q-learning; turn-based games bootstrap from the next actor's key and
    simultaneous ones from each agent's own next key.  Alongside the table
    it records which hidden-info context each visited key belongs to, which
    is what the clustering stage consumes.
    """
    rng = make_rng(seed, 0xF0B5)
    table: dict = {}
    key_context: dict = {}
    heads = QHeads(default=config.default_q, q_action=table)
    n_actions = env.action_space.n_actions

    for episode_i in range(config.full_obs_episodes):
        env.reset(int(rng.integers(0, 2 ** 62)))
        prev: list[tuple[int, bytes, int]] = []
        prev_reward = 0.0
        while not env.done:
            infos = []
            for agent in env.acting_agents():
                key = global_key(env, agent)
                if key not in key_context:
                    viewer = (agent + 1) % env.n_agents
                    key_context[key] = (agent, env.hidden_context(viewer, agent))
                legal = tuple(sorted(env.legal_actions(agent)))
                infos.append((agent, key, legal))
            if prev:
                _full_obs_update(table, heads, prev, prev_reward, infos,
                                 config, done=False)
            joint = [NO_ACTION] * env.n_agents
            chosen = []
            for agent, key, legal in infos:
                action = select_action(heads, key, legal, config.epsilon, rng)
                joint[agent] = action
                chosen.append((agent, key, action))
            transition = env.step(joint)
            prev, prev_reward = chosen, transition.reward
            if transition.done:
                _full_obs_update(table, heads, prev, prev_reward, [],
                                 config, done=True)
    return FullObsResult(table=table, key_context=key_context,
                         n_actions=n_actions, seed=seed)


def _full_obs_update(table, heads: QHeads, chosen, reward, next_infos,
                     config: LearnerConfig, done: bool) -> None:
    next_by_agent = {agent: (key, legal) for agent, key, legal in next_infos}
    for agent, key, action in chosen:
        if done:
            boot = 0.0
        elif agent in next_by_agent:
            nkey, nlegal = next_by_agent[agent]
            boot = max(heads.action_value(nkey, a) for a in nlegal)
        else:
            # turn games: bootstrap from whoever acts next
            nkey, nlegal = next(iter(next_by_agent.values()))
            boot = max(heads.action_value(nkey, a) for a in nlegal)
        old = table.get((key, action), config.default_q)
        table[(key, action)] = old + config.alpha * (
            reward + config.gamma * boot - old)


# ---------------------------------------------------------------------------
# free-channel pre-training and distillation


@dataclass
class DirectResult:
    bundle: PolicyBundle
    strategy: MessageStrategy
    train: TrainResult
    wrapped_env: CheatChannelEnv


def pretrain_direct(env, config: LearnerConfig, seed: int,
                    message_size: int | None = None,
                    restrict_to_regular: bool = False) -> DirectResult:
    """Train dual heads over a free broadcast channel, then distill.

    Sending costs nothing and consumes no scouting action.  The message
    head is distilled into a strategy by averaging its rows over the keys
    seen at each hidden-info context and taking the greedy message.
    """
    wrapped = cheat_wrap(env, message_size, restrict_to_regular)
    bundle = PolicyBundle(mode=ChannelMode.DIRECT_CHEAT,
                          heads=QHeads(default=config.default_q),
                          compact_keys=config.compact_keys,
                          message_size=wrapped.message_size)
    result = _train_loop(wrapped, bundle, config, seed)
    strategy = _distill_strategy(wrapped, bundle, config, seed)
    return DirectResult(bundle=bundle, strategy=strategy, train=result,
                        wrapped_env=wrapped)


def _distill_strategy(wrapped, bundle: PolicyBundle, config: LearnerConfig,
                      seed: int, episodes: int = 200) -> MessageStrategy:
    k = wrapped.message_size
    sums: dict = {}
    counts: dict = {}
    rollout = Rollout(wrapped, bundle)
    rng = make_rng(seed, 0xD157)
    for _ in range(episodes):
        wrapped.reset(int(rng.integers(0, 2 ** 62)))
        while not wrapped.done:
            # greedy self-play, broadcasting as in training so keys line up
            joint = [NO_ACTION] * wrapped.n_agents
            broadcasts: dict = {}
            for agent in wrapped.acting_agents():
                ctx = wrapped.hidden_context(agent, wrapped.default_informee(agent))
                key = rollout.key_for(agent)
                row = [bundle.heads.message_value(key, m) for m in range(k)]
                acc = sums.setdefault(ctx, [0.0] * k)
                for m in range(k):
                    acc[m] += row[m]
                counts[ctx] = counts.get(ctx, 0) + 1
                legal = tuple(sorted(wrapped.legal_actions(agent)))
                joint[agent] = select_action(bundle.heads, key, legal, 0.0)
                broadcasts[agent] = select_message(bundle.heads, key, range(k), 0.0)
            wrapped.step(joint, broadcasts)
    table = {}
    for ctx in wrapped.context_domain():
        if ctx in sums:
            mean = [s / counts[ctx] for s in sums[ctx]]
            table[ctx] = max(range(k), key=lambda m: (mean[m], -m))
        else:
            table[ctx] = 0
    return MessageStrategy(table=table, k=k, frozen=True)


# ---------------------------------------------------------------------------
# embedding-shuffle phase


@dataclass
class ShuffleStudy:
    original_return: float
    candidate_returns: dict[int, float]
    best_seed: int
    best_return: float
    best_bundle: PolicyBundle
    checksum_before: str
    checksum_after: str


def shuffle_embedding_study(env, base: TrainResult, config: LearnerConfig,
                            seed: int, shuffle_seeds=(1, 2, 3, 4, 5, 6)) -> ShuffleStudy:
    """Re-embed the frozen strategy through shuffled maps and keep the best.

    Each candidate map gets its own short action-head fine-tune; the
    strategy itself is never touched, which the checksums witness.
    """
    bundle = base.bundle
    if bundle.strategy is None or bundle.imap is None:
        raise ValueError("the shuffle study needs a strategy-carrying bundle")
    checksum_before = bundle.strategy.checksum()
    candidate_returns: dict[int, float] = {}
    best_seed, best_return, best_bundle = None, None, None
    for s in shuffle_seeds:
        imap_s = map_shuffle(bundle.imap, s)
        result = fine_tune(env, imap_s, bundle.strategy, bundle.mode,
                           config, seed)
        candidate_returns[s] = result.final_return
        if best_return is None or result.final_return > best_return:
            best_seed, best_return = s, result.final_return
            best_bundle = result.bundle
    checksum_after = bundle.strategy.checksum()
    return ShuffleStudy(original_return=base.final_return,
                        candidate_returns=candidate_returns,
                        best_seed=best_seed, best_return=best_return,
                        best_bundle=best_bundle,
                        checksum_before=checksum_before,
                        checksum_after=checksum_after)
