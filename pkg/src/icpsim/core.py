"""Core abstractions for cooperative multi-agent games with scouting actions.

The decision problems handled here are decentralized and partially
observable: every agent sees its own observation stream, the team shares a
single scalar reward, and some actions ("scouting" actions) have no or
uniform environment effects while being observable by everyone.  This
module defines the action-partition record, observation and trajectory
types, the environment contract, the canonical state-key serialization
used by the tabular learners, and the plain-text episode replay format.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

AgentId = int

# joint-action slot for agents that do not act this step (turn-based games)
NO_ACTION = -1


class ConfigError(ValueError):
    """Invalid environment or learner configuration."""


class IllegalActionError(RuntimeError):
    """An agent submitted an action that is not legal in the current state."""

    def __init__(self, agent: AgentId, action: int, reason: str = ""):
        self.agent = agent
        self.action = action
        msg = f"illegal action {action} for agent {agent}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class EpisodeFinishedError(RuntimeError):
    """step() was called on a finished episode."""


class UnsupportedModeError(RuntimeError):
    """The environment does not support the requested channel feature."""


def make_rng(*entropy: int) -> np.random.Generator:
    """Counter-based generator keyed on one or more integer seeds."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def mix_seeds(a: int, b: int) -> int:
    """Stable 63-bit combination of two seeds."""
    return (a * 0x9E3779B97F4A7C15 + b * 0xBF58476D1CE4E5B9 + 0x94D049BB133111EB) % (1 << 63)


# ---------------------------------------------------------------------------
# action partition


@dataclass(frozen=True)
class ActionSpace:
    """Partition of a dense integer action space into regular and scouting ids.

    Regular action ids occupy 0..n_regular-1 and scouting ids follow as
    n_regular..n_regular+n_scouting-1.  The protocol-reduced space U' seen
    by communicating learners is the regular ids plus one synthetic
    send-info id appended after them; scouting ids are never selected
    directly in that mode, only produced by dispatching a message.
    """

    n_regular: int
    n_scouting: int

    def __post_init__(self):
        if self.n_regular < 1:
            raise ConfigError("need at least one regular action")
        if self.n_scouting < 1:
            raise ConfigError("need at least one scouting action")

    @property
    def regular(self) -> tuple[int, ...]:
        return tuple(range(self.n_regular))

    @property
    def scouting(self) -> tuple[int, ...]:
        return tuple(range(self.n_regular, self.n_regular + self.n_scouting))

    @property
    def send_info(self) -> int:
        # id in the reduced space U', not a raw environment action
        return self.n_regular

    @property
    def k(self) -> int:
        return self.n_scouting

    @property
    def n_actions(self) -> int:
        return self.n_regular + self.n_scouting

    def is_scouting(self, action: int) -> bool:
        return self.n_regular <= action < self.n_actions

    def scouting_index(self, action: int) -> int:
        if not self.is_scouting(action):
            raise ValueError(f"action {action} is not a scouting action")
        return action - self.n_regular

    def scouting_action(self, index: int) -> int:
        if not 0 <= index < self.n_scouting:
            raise ValueError(f"scouting index {index} out of range")
        return self.n_regular + index

    def reduced_legal(self, legal_raw: frozenset[int]) -> frozenset[int]:
        """Project a raw legal set onto U': regular ids plus send_info.

        send_info is legal exactly when at least one scouting action is.
        """
        out = {a for a in legal_raw if a < self.n_regular}
        if any(self.is_scouting(a) for a in legal_raw):
            out.add(self.send_info)
        return frozenset(out)


# ---------------------------------------------------------------------------
# observations, transitions, episodes


@dataclass(frozen=True)
class Observation:
    agent: AgentId
    step: int
    payload: dict


@dataclass(frozen=True)
class Transition:
    joint_action: tuple[int, ...]
    reward: float
    observations_next: tuple[Observation, ...]
    done: bool


@dataclass
class Episode:
    """One rollout: seed token, transitions, discounted return and length."""

    seed: object
    transitions: list[Transition] = field(default_factory=list)
    gamma: float = 1.0

    @property
    def length(self) -> int:
        return len(self.transitions)

    @property
    def return_(self) -> float:
        total = 0.0
        g = 1.0
        for tr in self.transitions:
            total += g * tr.reward
            g *= self.gamma
        return total


# ---------------------------------------------------------------------------
# canonical serialization of observations for tabular lookups

_FLOAT_FMT = "{!r}".format


def canonical(value) -> bytes:
    """Order-stable byte encoding of nested plain data.

    Dict items are sorted by encoded key, sets by encoded element, so the
    bytes do not depend on insertion order or interpreter hash seeds.
    """
    out: list[str] = []
    _encode(value, out)
    return "".join(out).encode()


def _encode(value, out: list[str]) -> None:
    if value is None:
        out.append("n;")
    elif value is True:
        out.append("b1;")
    elif value is False:
        out.append("b0;")
    elif isinstance(value, int):
        out.append(f"i{value};")
    elif isinstance(value, float):
        out.append(f"f{_FLOAT_FMT(value)};")
    elif isinstance(value, str):
        out.append(f"s{len(value)}:{value};")
    elif isinstance(value, bytes):
        out.append(f"y{len(value)}:{value.hex()};")
    elif isinstance(value, (tuple, list)):
        out.append("t(")
        for item in value:
            _encode(item, out)
        out.append(")")
    elif isinstance(value, (set, frozenset)):
        parts = sorted(canonical(item) for item in value)
        out.append("z(")
        out.append("".join(p.decode() for p in parts))
        out.append(")")
    elif isinstance(value, dict):
        items = sorted((canonical(k), v) for k, v in value.items())
        out.append("d(")
        for key_bytes, v in items:
            out.append(key_bytes.decode())
            _encode(v, out)
        out.append(")")
    else:
        raise TypeError(f"cannot canonicalize {type(value).__name__}")


ObservationKey = bytes


def obs_key(observation: Observation, inbox_messages: tuple = ()) -> ObservationKey:
    """Tabular state key: the observation plus the decoded inbox.

    `inbox_messages` is a tuple of (sender, message) pairs.  The pair
    (current observation, decoded inbox) stands in for the full
    action-observation history at the scales handled here.
    """
    return canonical(
        ("obs", observation.agent, observation.step, observation.payload,
         "inbox", tuple(sorted(inbox_messages)))
    )


# ---------------------------------------------------------------------------
# environment contract


class Environment(ABC):
    """Shared-reward multi-agent environment with a scouting action subset.

    Subclasses own a seeded counter-based RNG created at reset; a trajectory
    is fully determined by (params, seed, joint actions).  Illegal actions
    raise IllegalActionError naming the offending agent and leave the state
    untouched.
    """

    name: str = "env"
    n_agents: int
    gamma: float
    horizon: int
    action_space: ActionSpace
    simultaneous: bool = False

    _done: bool
    _step_count: int

    @abstractmethod
    def reset(self, seed: int) -> tuple[Observation, ...]:
        ...

    @abstractmethod
    def step(self, joint_action) -> Transition:
        ...

    @abstractmethod
    def observe(self, agent: AgentId) -> Observation:
        ...

    @abstractmethod
    def legal_actions(self, agent: AgentId) -> frozenset[int]:
        ...

    @property
    def done(self) -> bool:
        return self._done

    @property
    def step_count(self) -> int:
        return self._step_count

    def acting_agents(self) -> tuple[AgentId, ...]:
        """Agents that must submit a real action this step."""
        raise NotImplementedError

    # --- hooks used by the communication layer and the learners ---------

    def hidden_context(self, viewer: AgentId, target: AgentId):
        """Viewer's summary of the hidden information about `target`.

        Every agent other than the target sees the same value, which is
        what makes shared information strategies decodable.
        """
        raise UnsupportedModeError(f"{self.name} exposes no hidden-info view")

    def context_domain(self) -> tuple:
        """All values hidden_context can take, in canonical order."""
        raise UnsupportedModeError(f"{self.name} exposes no hidden-info view")

    def global_payload(self, agent: AgentId) -> dict:
        """Fully observable view (all hidden info included) for pre-training."""
        raise UnsupportedModeError(f"{self.name} exposes no global view")

    def compact_payload(self, agent: AgentId) -> dict:
        """Reduced learner view; defaults to the full observation payload."""
        return self.observe(agent).payload

    def default_informee(self, sender: AgentId) -> AgentId:
        """Convention target for single-recipient message strategies."""
        return (sender + 1) % self.n_agents

    # --- exhaustive-evaluation support -----------------------------------

    def initial_conditions(self, bound: int = 100_000) -> list:
        """All reset tokens, for exact expectations; error if too many."""
        raise UnsupportedModeError(f"{self.name} cannot enumerate resets")

    def reset_to(self, token) -> tuple[Observation, ...]:
        raise UnsupportedModeError(f"{self.name} cannot reset to a token")

    # --- shared helpers ---------------------------------------------------

    def _require_running(self) -> None:
        if self._done:
            raise EpisodeFinishedError("episode already finished")

    def _check_joint(self, joint_action) -> tuple[int, ...]:
        joint = tuple(int(a) for a in joint_action)
        if len(joint) != self.n_agents:
            raise ValueError(
                f"joint action needs {self.n_agents} entries, got {len(joint)}")
        acting = set(self.acting_agents())
        for agent, action in enumerate(joint):
            if agent in acting:
                if action not in self.legal_actions(agent):
                    raise IllegalActionError(agent, action)
            elif action != NO_ACTION:
                raise IllegalActionError(
                    agent, action, "agent is not acting this step")
        return joint


# ---------------------------------------------------------------------------
# episode replay files


def format_replay(episode: Episode, env_name: str, params: dict) -> str:
    """Render an episode as the plain-text replay format.

    Header names the environment and its parameters; each following line is
    `step, comma-joined joint action, reward, done`.
    """
    kv = " ".join(f"{k}={params[k]}" for k in sorted(params))
    lines = [f"# env={env_name} seed={episode.seed} {kv}".rstrip()]
    for t, tr in enumerate(episode.transitions):
        acts = ",".join(str(a) for a in tr.joint_action)
        lines.append(f"{t}, {acts}, {tr.reward!r}, {int(tr.done)}")
    return "\n".join(lines) + "\n"


def parse_replay(text: str) -> tuple[dict, list[tuple[int, tuple[int, ...], float, bool]]]:
    """Parse a replay file into (header fields, step records)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("replay file missing header line")
    header: dict[str, str] = {}
    for tok in lines[0][1:].split():
        if "=" in tok:
            key, val = tok.split("=", 1)
            header[key] = val
    records = []
    for ln in lines[1:]:
        step_s, acts_s, reward_s, done_s = [p.strip() for p in _split_replay_line(ln)]
        joint = tuple(int(a) for a in acts_s.split(","))
        records.append((int(step_s), joint, float(reward_s), bool(int(done_s))))
    return header, records


def _split_replay_line(ln: str) -> list[str]:
    # step, a0,a1,...,aN, reward, done  -> split on ", " boundaries
    parts = ln.split(", ")
    if len(parts) != 4:
        raise ValueError(f"malformed replay line: {ln!r}")
    return parts
