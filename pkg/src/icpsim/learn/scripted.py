"""Hand-written digit-guessing convention built on an injective hint map.

Each agent hints its successor exactly once, picking the segment whose
(segment, lit) outcome identifies the successor's digit, then decodes the
single fact it has received and guesses.  With N agents the episode runs
2N turns and earns 10N - 0.1N when the map is injective over the alphabet.
"""

from __future__ import annotations

from ..core import NO_ACTION, ConfigError, Episode
from ..envs.guessing import GuessingEnv, segment_state


class ScriptedGuessingConvention:
    """Deterministic player; decisions depend only on the local observation."""

    def __init__(self, env: GuessingEnv, hint_map: dict[int, int]):
        if env.config.hint_limit < env.n_agents:
            raise ConfigError("convention needs one hint per agent")
        missing = set(env.config.digit_alphabet) - set(hint_map)
        if missing:
            raise ConfigError(f"hint map misses digits {sorted(missing)}")
        self.env = env
        self.hint_map = dict(hint_map)
        self.inverse: dict[tuple[int, bool], int] = {}
        for digit in env.config.digit_alphabet:
            fact = (hint_map[digit], segment_state(digit, hint_map[digit]))
            if fact in self.inverse:
                raise ConfigError("hint map is not injective on the alphabet")
            self.inverse[fact] = digit

    def decide(self, agent: int) -> int:
        obs = self.env.observe(agent)
        p = obs.payload
        n = self.env.n_agents
        nxt = (agent + 1) % n
        while p["done"][nxt] and nxt != agent:
            nxt = (nxt + 1) % n
        if (nxt != agent and not p["revealed"][nxt]
                and p["hints_used"] < self.env.config.hint_limit):
            digit = dict(p["others"])[nxt]
            return self.env.hint_action(agent, nxt, self.hint_map[digit])
        own = p["revealed"][agent]
        if own:
            return self.env.guess_action(self.inverse[own[0]])
        raise RuntimeError("convention stuck: no budget to hint, no fact to decode")

    def run(self, start, epsilon: float = 0.0, rng=None,
            record: bool = False):
        kind, value = start
        if kind == "seed":
            self.env.reset(value)
        elif kind == "token":
            self.env.reset_to(value)
        else:
            raise ValueError(f"unknown start kind {kind!r}")
        episode = Episode(seed=value, gamma=self.env.config.gamma)
        while not self.env.done:
            joint = [NO_ACTION] * self.env.n_agents
            for agent in self.env.acting_agents():
                joint[agent] = self.decide(agent)
            episode.transitions.append(self.env.step(joint))
        return episode, None
