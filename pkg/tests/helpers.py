"""Shared fixtures-in-spirit: tiny env builders and random-play drivers."""

import numpy as np

from icpsim.core import ActionSpace, Environment, NO_ACTION, Observation, Transition
from icpsim.envs.guessing import GuessConfig, GuessingEnv
from icpsim.envs.hanabi_lite import HanabiLiteConfig, HanabiLiteEnv
from icpsim.envs.revealing import RevealConfig, RevealingEnv


def restricted_guessing() -> GuessingEnv:
    # N=2, digits {0..3}, hint budget 6: the small learning benchmark
    return GuessingEnv(GuessConfig(n_agents=2, hint_limit=6,
                                   digit_alphabet=(0, 1, 2, 3)))


def small_revealing(n_agents: int = 3, horizon: int = 20) -> RevealingEnv:
    return RevealingEnv(RevealConfig(n_agents=n_agents, grid=3, horizon=horizon))


def default_hanabi() -> HanabiLiteEnv:
    return HanabiLiteEnv(HanabiLiteConfig())


class ToyMDP(Environment):
    """Single-agent 2-state deterministic walk with a time-indexed key.

    Staying pays (1 in state 0, 2 in state 1), switching pays nothing, and
    the step index sits inside the global payload so finite-horizon Q
    values are exact and checkable by backward induction.  The lone
    scouting action is never legal; the class exists to exercise the
    fully observable trainer, not the channel.
    """

    name = "toy"
    n_agents = 1
    gamma = 1.0
    simultaneous = True

    STAY_REWARD = {0: 1.0, 1: 2.0}

    def __init__(self, horizon: int = 4):
        self.horizon = horizon
        self.action_space = ActionSpace(n_regular=2, n_scouting=1)
        self.reset(0)

    def reset(self, seed: int):
        self.state = 0
        self._step_count = 0
        self._done = False
        return (self.observe(0),)

    def observe(self, agent):
        return Observation(agent=agent, step=self._step_count,
                           payload={"s": self.state})

    def legal_actions(self, agent):
        return frozenset({0, 1})

    def acting_agents(self):
        return (0,)

    def hidden_context(self, viewer, target):
        return 0

    def context_domain(self):
        return (0,)

    def global_payload(self, agent):
        return {"s": self.state, "t": self._step_count}

    def step(self, joint_action):
        action = joint_action[0]
        if action == 0:
            reward = self.STAY_REWARD[self.state]
        else:
            reward = 0.0
            self.state = 1 - self.state
        self._step_count += 1
        self._done = self._step_count >= self.horizon
        return Transition(joint_action=tuple(joint_action), reward=reward,
                          observations_next=(self.observe(0),),
                          done=self._done)


def random_episode(env, rng: np.random.Generator):
    """Step with uniformly random legal actions until done.

    Returns the list of transitions so rule suites can audit rewards.
    """
    transitions = []
    while not env.done:
        joint = [NO_ACTION] * env.n_agents
        for agent in env.acting_agents():
            legal = sorted(env.legal_actions(agent))
            joint[agent] = legal[int(rng.integers(len(legal)))]
        transitions.append(env.step(joint))
    return transitions
