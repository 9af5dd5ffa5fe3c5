"""Episode execution for every channel mode, with optional training records.

The same machinery runs greedy evaluation, epsilon-greedy collection and
scripted play.  Under a communication protocol the learner picks from the
reduced action space (regular actions plus one send slot); choosing the
send slot draws a message from the message head or from a frozen strategy
and dispatches it through the embedding onto a concrete scouting action.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channel import (Channel, ChannelMode, CheatChannelEnv, InfoMap,
                       hat_encode, map_encode, receiver_order)
from ..core import (Episode, NO_ACTION, UnsupportedModeError, canonical,
                    mix_seeds, obs_key)
from .tables import (Choice, MessageStrategy, NextInfo, QHeads, StepRecord,
                     TrainEpisode, select_action, select_message)


@dataclass
class PolicyBundle:
    """Everything needed to act: tables, channel mode, embedding, strategy."""

    kind: str = "qheads"
    mode: ChannelMode = ChannelMode.NONE
    heads: QHeads | None = None
    imap: InfoMap | None = None
    strategy: MessageStrategy | None = None
    compact_keys: bool = False
    message_size: int | None = None
    config_echo: dict = field(default_factory=dict)
    env_echo: dict = field(default_factory=dict)


def learner_key(env, agent: int, inbox_messages: tuple, compact: bool) -> bytes:
    if compact:
        return canonical(("compact", env.compact_payload(agent),
                          "inbox", tuple(sorted(inbox_messages))))
    return obs_key(env.observe(agent), inbox_messages)


def global_key(env, agent: int) -> bytes:
    """Fully observable state key used by the pre-training stage."""
    return canonical(("global", agent, env.global_payload(agent)))


@dataclass
class _ActingInfo:
    agent: int
    key: bytes
    legal: tuple[int, ...]            # learner-space legal set
    legal_raw: frozenset
    send_message: int | None = None   # strategy-determined message
    send_raw: int | None = None       # scouting action the send slot maps to
    hat_locals: dict | None = None
    legal_messages: tuple[int, ...] = ()


class Rollout:
    """Plays one bundle against one environment instance."""

    def __init__(self, env, bundle: PolicyBundle):
        self.env = env
        self.bundle = bundle
        self.mode = ChannelMode(bundle.mode)
        base_env = env.env if isinstance(env, CheatChannelEnv) else env
        self.action_space = base_env.action_space
        self.n_agents = base_env.n_agents
        if self.mode is ChannelMode.DIRECT_CHEAT:
            if not isinstance(env, CheatChannelEnv):
                raise ValueError("direct-cheat play needs a cheat-wrapped environment")
            self.channel = None
        elif self.mode in (ChannelMode.ONE_TO_ONE, ChannelMode.HAT):
            if bundle.imap is None:
                raise ValueError(f"mode {self.mode.value} needs an info map")
            self.channel = Channel(self.mode, self.n_agents,
                                   self.action_space, bundle.imap)
        else:
            self.channel = Channel(ChannelMode.NONE, self.n_agents)

    # --- state inspection ---------------------------------------------------

    def _inbox(self, agent: int) -> tuple:
        if self.mode is ChannelMode.DIRECT_CHEAT:
            return self.env.inbox_messages(agent)
        return self.channel.inbox_messages(agent)

    def key_for(self, agent: int) -> bytes:
        return learner_key(self.env, agent, self._inbox(agent),
                           self.bundle.compact_keys)

    def _acting_info(self, agent: int) -> _ActingInfo:
        env, bundle, aspace = self.env, self.bundle, self.action_space
        key = self.key_for(agent)
        legal_raw = env.legal_actions(agent)
        if self.mode in (ChannelMode.NONE, ChannelMode.DIRECT_CHEAT):
            return _ActingInfo(agent=agent, key=key,
                               legal=tuple(sorted(legal_raw)), legal_raw=legal_raw)

        info = _ActingInfo(agent=agent, key=key, legal=(), legal_raw=legal_raw)
        send_ok = False
        if bundle.strategy is not None:
            if self.mode is ChannelMode.HAT:
                locals_ = {r: bundle.strategy(env.hidden_context(agent, r))
                           for r in receiver_order(self.n_agents, agent)}
                public = hat_encode([locals_[r] for r in sorted(locals_)],
                                    bundle.imap.k)
                info.hat_locals = locals_
                info.send_message = public
            else:
                informee = env.default_informee(agent)
                info.send_message = bundle.strategy(
                    env.hidden_context(agent, informee))
            info.send_raw = aspace.scouting_action(
                map_encode(bundle.imap, info.send_message))
            send_ok = info.send_raw in legal_raw
        else:
            info.legal_messages = tuple(
                m for m in range(bundle.imap.k)
                if aspace.scouting_action(map_encode(bundle.imap, m)) in legal_raw)
            send_ok = bool(info.legal_messages)

        legal = {a for a in legal_raw if a < aspace.n_regular}
        if send_ok:
            legal.add(aspace.send_info)
        info.legal = tuple(sorted(legal))
        return info

    # --- selection and dispatch ------------------------------------------------

    def _select(self, info: _ActingInfo, epsilon: float, rng) -> tuple[Choice, int, dict | None]:
        """Returns (recorded choice, raw env action, hat locals if sending)."""
        bundle, aspace = self.bundle, self.action_space
        action = select_action(bundle.heads, info.key, info.legal, epsilon, rng)
        if self.mode is ChannelMode.DIRECT_CHEAT:
            # the broadcast slot is free, so every acting agent sends
            message = select_message(bundle.heads, info.key,
                                     range(self.env.message_size), epsilon, rng)
            return Choice(info.agent, info.key, action, message), action, None
        if self.mode is ChannelMode.NONE:
            return Choice(info.agent, info.key, action, None), action, None
        if action != aspace.send_info:
            return Choice(info.agent, info.key, action, None), action, None
        if bundle.strategy is not None:
            return (Choice(info.agent, info.key, action, None),
                    info.send_raw, info.hat_locals)
        message = select_message(bundle.heads, info.key, info.legal_messages,
                                 epsilon, rng)
        raw = aspace.scouting_action(map_encode(bundle.imap, message))
        return Choice(info.agent, info.key, action, message), raw, None

    # --- episode loop ---------------------------------------------------------------

    def run(self, start, epsilon: float = 0.0,
            rng: np.random.Generator | None = None,
            record: bool = False) -> tuple[Episode, TrainEpisode | None]:
        kind, value = start
        if kind == "seed":
            self.env.reset(value)
        elif kind == "token":
            self.env.reset_to(value)
        else:
            raise ValueError(f"unknown start kind {kind!r}")
        if self.channel is not None:
            self.channel.reset()

        episode = Episode(seed=value, gamma=self.env.gamma)
        train = TrainEpisode(seed=value) if record else None
        pending: tuple | None = None

        while not self.env.done:
            infos = [self._acting_info(a) for a in self.env.acting_agents()]
            if pending is not None:
                nexts = tuple(NextInfo(i.agent, i.key, i.legal) for i in infos)
                train.steps.append(StepRecord(pending[0], pending[1], nexts, False))
                pending = None

            joint = [NO_ACTION] * self.n_agents
            broadcasts: dict[int, int] = {}
            hat_locals: dict[int, dict] = {}
            choices = []
            for info in infos:
                choice, raw, locals_ = self._select(info, epsilon, rng)
                joint[info.agent] = raw
                choices.append(choice)
                if locals_ is not None and self.action_space.is_scouting(raw):
                    hat_locals[info.agent] = locals_
                if self.mode is ChannelMode.DIRECT_CHEAT:
                    broadcasts[info.agent] = choice.message

            if self.mode is ChannelMode.DIRECT_CHEAT:
                transition = self.env.step(joint, broadcasts)
            else:
                transition = self.env.step(joint)
                self.channel.observe_step(transition.joint_action,
                                          hat_locals=hat_locals or None)
            episode.transitions.append(transition)
            if record:
                step_choices = tuple(choices)
                if transition.done:
                    train.steps.append(
                        StepRecord(step_choices, transition.reward, (), True))
                else:
                    pending = (step_choices, transition.reward)
        return episode, train


# ---------------------------------------------------------------------------
# evaluation


EVAL_SEED_BASE = 0x5EED

def evaluate(env, player, *, episodes: int = 200,
             exhaustive_bound: int = 512) -> tuple[float, float]:
    """Mean greedy return and episode length.

    When the environment can enumerate all of its reset randomness within
    the bound the mean is exact; otherwise a fixed set of derived seeds is
    sampled so repeated evaluations are comparable.
    """
    try:
        starts = [("token", t) for t in env.initial_conditions(exhaustive_bound)]
    except (ValueError, UnsupportedModeError):
        starts = [("seed", mix_seeds(EVAL_SEED_BASE, i)) for i in range(episodes)]
    total_return = 0.0
    total_length = 0
    for start in starts:
        ep, _ = player.run(start)
        total_return += ep.return_
        total_length += ep.length
    return total_return / len(starts), total_length / len(starts)
