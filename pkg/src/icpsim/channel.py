"""Implicit and direct communication channels over scouting actions.

Messages are integers 0..K-1 where K is the number of scouting actions.
A seeded random permutation embeds messages into scouting actions, so a
receiver can invert any observed scouting action back to the message.  The
hat code packs one local message per receiver into a single broadcast by
summing modulo K; each receiver subtracts everyone else's locals (which it
can recompute from public information) to recover its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .core import AgentId, ActionSpace, Environment, Transition, make_rng, mix_seeds

Message = int


class ChannelMode(str, Enum):
    NONE = "none"
    ONE_TO_ONE = "one_to_one"
    HAT = "hat"
    DIRECT_CHEAT = "direct_cheat"


# ---------------------------------------------------------------------------
# message <-> scouting-action embedding


@dataclass(frozen=True)
class InfoMap:
    """Bijection between messages 0..K-1 and scouting-action indices."""

    perm: tuple[int, ...]
    seed: int

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError("perm is not a permutation of 0..K-1")

    @property
    def k(self) -> int:
        return len(self.perm)

    @property
    def inverse(self) -> tuple[int, ...]:
        inv = [0] * self.k
        for m, a in enumerate(self.perm):
            inv[a] = m
        return tuple(inv)


def map_new(k: int, seed: int) -> InfoMap:
    """Uniformly random message embedding, deterministic per seed."""
    if k < 1:
        raise ValueError("need k >= 1")
    perm = tuple(int(x) for x in make_rng(seed).permutation(k))
    return InfoMap(perm=perm, seed=seed)


def map_encode(imap: InfoMap, message: Message, context=None) -> int:
    """Scouting-action index carrying `message`.

    `context` is accepted for strategies that condition the embedding on
    common knowledge; the default random embedding ignores it.
    """
    if not 0 <= message < imap.k:
        raise ValueError(f"message {message} outside 0..{imap.k - 1}")
    return imap.perm[message]

def map_decode(imap: InfoMap, action_index: int, context=None) -> Message:
    if not 0 <= action_index < imap.k:
        raise ValueError(f"scouting index {action_index} outside 0..{imap.k - 1}")
    return imap.inverse[action_index]


def map_shuffle(imap: InfoMap, seed: int) -> InfoMap:
    """Fresh embedding over the same K; the original is left unmodified."""
    return map_new(imap.k, mix_seeds(imap.seed, seed))


def map_to_line(imap: InfoMap) -> str:
    """One-line text form: `K; p0,p1,...,p(K-1); seed`."""
    return f"{imap.k}; {','.join(str(p) for p in imap.perm)}; {imap.seed}"


def map_from_line(line: str) -> InfoMap:
    try:
        k_s, perm_s, seed_s = [p.strip() for p in line.split(";")]
        perm = tuple(int(x) for x in perm_s.split(","))
        imap = InfoMap(perm=perm, seed=int(seed_s))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"malformed info-map line: {line!r}") from exc
    if imap.k != int(k_s):
        raise ValueError(f"info-map line K={k_s} does not match {imap.k} entries")
    return imap


# ---------------------------------------------------------------------------
# hat code: one broadcast, one private message per receiver


def hat_encode(locals_: list[Message], k: int) -> Message:
    """Public message: sum of the per-receiver locals modulo k."""
    if not locals_:
        raise ValueError("hat encoding needs at least one local message")
    for m in locals_:
        if not 0 <= m < k:
            raise ValueError(f"local message {m} outside 0..{k - 1}")
    return sum(locals_) % k


def hat_decode(public: Message, others_locals: list[Message], k: int) -> Message:
    """A receiver's own local: public minus everyone else's locals, mod k."""
    if not 0 <= public < k:
        raise ValueError(f"public message {public} outside 0..{k - 1}")
    for m in others_locals:
        if not 0 <= m < k:
            raise ValueError(f"local message {m} outside 0..{k - 1}")
    return (public - sum(others_locals)) % k


@dataclass(frozen=True)
class HatCodec:
    """Hat code bound to a fixed receiver order.

    The receiver order is part of the convention: every agent must agree on
    it for the subtraction to line up.  The convention used everywhere in
    this package is ascending agent id with the sender excluded.
    """

    k: int
    receiver_order: tuple[AgentId, ...]

    def encode(self, locals_by_receiver: dict[AgentId, Message]) -> Message:
        if set(locals_by_receiver) != set(self.receiver_order):
            raise ValueError("locals do not cover the receiver order exactly")
        return hat_encode([locals_by_receiver[r] for r in self.receiver_order], self.k)

    def decode(self, public: Message, receiver: AgentId,
               others_locals: dict[AgentId, Message]) -> Message:
        if receiver not in self.receiver_order:
            raise ValueError(f"agent {receiver} is not a receiver")
        expected = [r for r in self.receiver_order if r != receiver]
        if set(others_locals) != set(expected):
            raise ValueError("others_locals must cover every receiver but the decoder")
        return hat_decode(public, [others_locals[r] for r in expected], self.k)


def receiver_order(n_agents: int, sender: AgentId) -> tuple[AgentId, ...]:
    return tuple(a for a in range(n_agents) if a != sender)


# ---------------------------------------------------------------------------
# inboxes


@dataclass
class InboxEntry:
    message: Message
    age: int = 0


@dataclass
class Inbox:
    """Latest decoded message per sender, with a staleness counter."""

    entries: dict[AgentId, InboxEntry] = field(default_factory=dict)

    def tick(self) -> None:
        for entry in self.entries.values():
            entry.age += 1

    def post(self, sender: AgentId, message: Message) -> None:
        self.entries[sender] = InboxEntry(message=message, age=0)

    def messages(self) -> tuple[tuple[AgentId, Message], ...]:
        return tuple(sorted((s, e.message) for s, e in self.entries.items()))


class Channel:
    """Per-episode inbox bookkeeping for one channel mode.

    After every environment step, `observe_step` decodes whatever the
    executed joint action broadcast and updates each agent's inbox.  In hat
    mode the caller must supply the per-sender local messages computed from
    the pre-step state, since that is the snapshot all observers shared
    when the sender acted.
    """

    def __init__(self, mode: ChannelMode, n_agents: int,
                 action_space: ActionSpace | None = None,
                 imap: InfoMap | None = None):
        self.mode = ChannelMode(mode)
        self.n_agents = n_agents
        self.action_space = action_space
        self.imap = imap
        if self.mode in (ChannelMode.ONE_TO_ONE, ChannelMode.HAT):
            if imap is None or action_space is None:
                raise ValueError(f"mode {self.mode.value} needs an action space and an info map")
            if imap.k != action_space.k:
                raise ValueError(
                    f"info map over {imap.k} messages cannot embed into "
                    f"{action_space.k} scouting actions")
        self.inboxes = [Inbox() for _ in range(n_agents)]

    def reset(self) -> None:
        self.inboxes = [Inbox() for _ in range(self.n_agents)]

    def inbox_messages(self, agent: AgentId) -> tuple[tuple[AgentId, Message], ...]:
        return self.inboxes[agent].messages()

    def observe_step(self, joint_action, *,
                     hat_locals: dict[AgentId, dict[AgentId, Message]] | None = None,
                     broadcasts: dict[AgentId, Message] | None = None) -> None:
        for inbox in self.inboxes:
            inbox.tick()
        if self.mode is ChannelMode.NONE:
            return
        if self.mode is ChannelMode.DIRECT_CHEAT:
            for sender, message in sorted((broadcasts or {}).items()):
                for agent in range(self.n_agents):
                    if agent != sender:
                        self.inboxes[agent].post(sender, message)
            return
        for sender, action in enumerate(joint_action):
            if action < 0 or not self.action_space.is_scouting(action):
                continue
            public = map_decode(self.imap, self.action_space.scouting_index(action))
            if self.mode is ChannelMode.ONE_TO_ONE:
                for agent in range(self.n_agents):
                    if agent != sender:
                        self.inboxes[agent].post(sender, public)
            else:  # hat
                if hat_locals is None or sender not in hat_locals:
                    raise ValueError("hat mode needs pre-step locals for every sender")
                locals_ = hat_locals[sender]
                codec = HatCodec(k=self.imap.k,
                                 receiver_order=receiver_order(self.n_agents, sender))
                for agent in codec.receiver_order:
                    others = {r: locals_[r] for r in codec.receiver_order if r != agent}
                    self.inboxes[agent].post(
                        sender, codec.decode(public, agent, others))


# ---------------------------------------------------------------------------
# free direct channel (upper-bound baseline, and phase 1 of map transfer)


class CheatChannelEnv:
    """Wrap an environment with a free broadcast slot per agent.

    Dynamics and rewards of the wrapped environment are untouched; a step
    takes (joint_action, broadcasts) and broadcast messages appear in every
    other agent's inbox on the next step.  With `restrict_to_regular` the
    scouting actions are masked out of the legal sets (used when pre-training
    a message strategy that will later replace them), which still leaves the
    dynamics themselves untouched.
    """

    def __init__(self, env: Environment, message_size: int | None = None,
                 restrict_to_regular: bool = False):
        self.env = env
        self.message_size = env.action_space.k if message_size is None else message_size
        if self.message_size < 1:
            raise ValueError("message_size must be positive")
        self.restrict_to_regular = restrict_to_regular
        self.channel = Channel(ChannelMode.DIRECT_CHEAT, env.n_agents)

    def __getattr__(self, name):
        return getattr(self.env, name)

    def reset(self, seed: int):
        obs = self.env.reset(seed)
        self.channel.reset()
        return obs

    def reset_to(self, token):
        obs = self.env.reset_to(token)
        self.channel.reset()
        return obs

    def legal_actions(self, agent: AgentId) -> frozenset[int]:
        legal = self.env.legal_actions(agent)
        if self.restrict_to_regular:
            regular = frozenset(a for a in legal if a < self.env.action_space.n_regular)
            if regular:
                return regular
        return legal

    def inbox_messages(self, agent: AgentId):
        return self.channel.inbox_messages(agent)

    def step(self, joint_action, broadcasts: dict[AgentId, Message] | None = None) -> Transition:
        broadcasts = broadcasts or {}
        for sender, message in broadcasts.items():
            if not 0 <= message < self.message_size:
                raise ValueError(
                    f"broadcast {message} from agent {sender} outside 0..{self.message_size - 1}")
        transition = self.env.step(joint_action)
        self.channel.observe_step(transition.joint_action, broadcasts=broadcasts)
        return transition


def cheat_wrap(env: Environment, message_size: int | None = None,
               restrict_to_regular: bool = False) -> CheatChannelEnv:
    return CheatChannelEnv(env, message_size, restrict_to_regular)
