"""Tabular dual-head Q values and the value-decomposition update.

One action head scores the protocol-reduced action space and one message
head scores messages; both are shared across agents by putting the agent
index inside the state key.  The team TD error sums the acting agents'
chosen entries against the shared reward plus the summed target-head
greedy values at the next step, and the full error is applied to every
chosen action entry and, for senders, to the chosen message entry as well
(message credit flows through the shared error, not through a gradient
chain).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..core import canonical

Key = bytes


@dataclass
class QHeads:
    """Live and frozen-target tables for the action and message heads."""

    default: float = 0.0
    q_action: dict = field(default_factory=dict)
    q_message: dict = field(default_factory=dict)
    target_action: dict = field(default_factory=dict)
    target_message: dict = field(default_factory=dict)

    def action_value(self, key: Key, action: int, target: bool = False) -> float:
        table = self.target_action if target else self.q_action
        return table.get((key, action), self.default)

    def message_value(self, key: Key, message: int, target: bool = False) -> float:
        table = self.target_message if target else self.q_message
        return table.get((key, message), self.default)

    def best_action_value(self, key: Key, legal, target: bool = False) -> float:
        if not legal:
            raise ValueError("cannot take a max over an empty legal set")
        return max(self.action_value(key, a, target) for a in legal)

    def greedy_action(self, key: Key, legal) -> int:
        best, best_v = None, None
        for action in sorted(legal):
            v = self.action_value(key, action)
            if best_v is None or v > best_v:
                best, best_v = action, v
        return best

    def greedy_message(self, key: Key, messages) -> int:
        best, best_v = None, None
        for message in sorted(messages):
            v = self.message_value(key, message)
            if best_v is None or v > best_v:
                best, best_v = message, v
        return best

    def bump_action(self, key: Key, action: int, amount: float) -> None:
        k = (key, action)
        self.q_action[k] = self.q_action.get(k, self.default) + amount

    def bump_message(self, key: Key, message: int, amount: float) -> None:
        k = (key, message)
        self.q_message[k] = self.q_message.get(k, self.default) + amount


def sync_targets(heads: QHeads) -> None:
    """Copy the live tables over the frozen target tables."""
    heads.target_action = dict(heads.q_action)
    heads.target_message = dict(heads.q_message)


def select_action(heads: QHeads, key: Key, legal, epsilon: float,
                  rng: np.random.Generator | None = None) -> int:
    """Epsilon-greedy over the action head; greedy ties go to the lowest id.

    With epsilon == 0 no randomness is consumed, so greedy play is a pure
    function of the tables.
    """
    options = sorted(legal)
    if not options:
        raise ValueError("empty legal set")
    if epsilon > 0 and rng.random() < epsilon:
        return options[int(rng.integers(0, len(options)))]
    return heads.greedy_action(key, options)


def select_message(heads: QHeads, key: Key, messages, epsilon: float,
                   rng: np.random.Generator | None = None) -> int:
    """Epsilon-greedy over the message head, restricted to `messages`."""
    options = sorted(messages)
    if not options:
        raise ValueError("no message can be sent")
    if epsilon > 0 and rng.random() < epsilon:
        return options[int(rng.integers(0, len(options)))]
    return heads.greedy_message(key, options)


# ---------------------------------------------------------------------------
# recorded episodes and the team TD update


@dataclass(frozen=True)
class Choice:
    agent: int
    key: Key
    action: int
    message: int | None = None


@dataclass(frozen=True)
class NextInfo:
    agent: int
    key: Key
    legal: tuple[int, ...]


@dataclass(frozen=True)
class StepRecord:
    choices: tuple[Choice, ...]
    reward: float
    next_info: tuple[NextInfo, ...]
    done: bool


@dataclass
class TrainEpisode:
    seed: object
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def undiscounted_return(self) -> float:
        return sum(s.reward for s in self.steps)


@dataclass(frozen=True)
class TdLog:
    """Per-step audit record of one update pass."""

    reward: float
    chosen_values: tuple[float, ...]
    bootstrap_values: tuple[float, ...]
    q_tot: float
    delta: float


def vdn_td_update(episode: TrainEpisode, heads: QHeads, alpha: float,
                  gamma: float) -> list[TdLog]:
    """Apply the summed TD error to every chosen entry of the episode.

    For each step, delta = reward + gamma * sum(target greedy values at the
    next step's keys) - sum(chosen action-entry values); terminal steps
    bootstrap zero.  Each acting agent's chosen action entry moves by
    alpha * delta, and so does the chosen message entry of every agent that
    sent one.
    """
    if not episode.steps:
        raise ValueError("cannot update from an empty episode")
    logs: list[TdLog] = []
    for step in episode.steps:
        if not step.choices:
            raise ValueError("a recorded step has no acting agents")
        if step.done != (not step.next_info):
            raise ValueError("next-step info must be present exactly when not done")
        chosen = tuple(heads.action_value(c.key, c.action) for c in step.choices)
        if step.done:
            boots: tuple[float, ...] = ()
        else:
            boots = tuple(heads.best_action_value(n.key, n.legal, target=True)
                          for n in step.next_info)
        q_tot = sum(chosen)
        delta = step.reward + gamma * sum(boots) - q_tot
        for choice in step.choices:
            heads.bump_action(choice.key, choice.action, alpha * delta)
            if choice.message is not None:
                heads.bump_message(choice.key, choice.message, alpha * delta)
        logs.append(TdLog(reward=step.reward, chosen_values=chosen,
                          bootstrap_values=boots, q_tot=q_tot, delta=delta))
    return logs


# ---------------------------------------------------------------------------
# frozen message strategies


@dataclass
class MessageStrategy:
    """Fixed mapping from hidden-info contexts to messages."""

    table: dict
    k: int
    frozen: bool = True

    def __call__(self, context) -> int:
        try:
            return self.table[context]
        except KeyError:
            raise KeyError(f"no message assigned to context {context!r}") from None

    def checksum(self) -> str:
        items = tuple(sorted((canonical(c), m) for c, m in self.table.items()))
        return hashlib.sha256(canonical(items)).hexdigest()
