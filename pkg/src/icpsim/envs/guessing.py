"""Turn-based digit guessing with seven-segment hints.

Each agent is assigned a digit it cannot see while everyone else can.
On its turn an agent either guesses its own digit (+10 team reward if
correct, one guess each) or spends -0.1 and one unit of a global hint
budget to reveal whether a chosen segment of a seven-segment rendering of
another agent's digit is lit.  Hints are the scouting actions: revealing a
segment barely changes the game, but the choice of segment is visible to
all and can carry a message.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core import (AgentId, ActionSpace, ConfigError, Environment,
                    IllegalActionError, NO_ACTION, Observation, Transition,
                    UnsupportedModeError, make_rng)

N_SEGMENTS = 7

# lit segments per digit, segments a..g numbered 0..6
SEGMENT_TABLE: tuple[tuple[int, ...], ...] = (
    (1, 1, 1, 1, 1, 1, 0),  # 0
    (0, 1, 1, 0, 0, 0, 0),  # 1
    (1, 1, 0, 1, 1, 0, 1),  # 2
    (1, 1, 1, 1, 0, 0, 1),  # 3
    (0, 1, 1, 0, 0, 1, 1),  # 4
    (1, 0, 1, 1, 0, 1, 1),  # 5
    (1, 0, 1, 1, 1, 1, 1),  # 6
    (1, 1, 1, 0, 0, 0, 0),  # 7
    (1, 1, 1, 1, 1, 1, 1),  # 8
    (1, 1, 1, 1, 0, 1, 1),  # 9
)


def segment_state(digit: int, segment: int, table=SEGMENT_TABLE) -> bool:
    """Whether `segment` is lit in the rendering of `digit`."""
    if not 0 <= digit <= 9:
        raise ValueError(f"digit {digit} outside 0..9")
    if not 0 <= segment < N_SEGMENTS:
        raise ValueError(f"segment {segment} outside 0..{N_SEGMENTS - 1}")
    return bool(table[digit][segment])


GUESS_REWARD = 10.0
HINT_REWARD = -0.1


@dataclass(frozen=True)
class GuessConfig:
    n_agents: int = 2
    hint_limit: int = 11
    digit_alphabet: tuple[int, ...] = tuple(range(10))
    distinct_digits: bool = False
    gamma: float = 1.0
    horizon: int | None = None

    def __post_init__(self):
        if self.n_agents < 2:
            raise ConfigError("need at least two agents")
        if self.hint_limit < 0:
            raise ConfigError("hint limit cannot be negative")
        alphabet = tuple(sorted(set(self.digit_alphabet)))
        if alphabet != self.digit_alphabet:
            object.__setattr__(self, "digit_alphabet", alphabet)
        if not alphabet or any(not 0 <= d <= 9 for d in alphabet):
            raise ConfigError("digit alphabet must be a nonempty subset of 0..9")
        if self.distinct_digits and len(alphabet) < self.n_agents:
            raise ConfigError("alphabet too small for distinct digits")
        if self.horizon is None:
            object.__setattr__(self, "horizon", self.hint_limit + self.n_agents)
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")


@dataclass
class GuessState:
    digits: tuple[int, ...]
    revealed: list[set[tuple[int, bool]]]   # per target: (segment, lit) facts
    hints_used: int = 0
    done_flags: list[bool] = field(default_factory=list)
    turn: AgentId = 0


class GuessingEnv(Environment):
    name = "guessing"
    simultaneous = False

    def __init__(self, config: GuessConfig):
        self.config = config
        self.n_agents = config.n_agents
        self.gamma = config.gamma
        self.horizon = config.horizon
        self.action_space = ActionSpace(
            n_regular=len(config.digit_alphabet),
            n_scouting=N_SEGMENTS * (config.n_agents - 1))
        self.state: GuessState | None = None
        self._done = True
        self._step_count = 0

    # --- action encoding --------------------------------------------------

    def guess_action(self, digit: int) -> int:
        return self.config.digit_alphabet.index(digit)

    def guess_of(self, action: int) -> int:
        return self.config.digit_alphabet[action]

    def hint_action(self, actor: AgentId, target: AgentId, segment: int) -> int:
        offset = (target - actor) % self.n_agents
        if offset == 0:
            raise ValueError("cannot hint yourself")
        return self.action_space.n_regular + (offset - 1) * N_SEGMENTS + segment

    def hint_of(self, actor: AgentId, action: int) -> tuple[AgentId, int]:
        """(target, segment) encoded by a hint action taken by `actor`."""
        idx = self.action_space.scouting_index(action)
        offset, segment = divmod(idx, N_SEGMENTS)
        return (actor + offset + 1) % self.n_agents, segment

    # --- environment contract ---------------------------------------------

    def reset(self, seed: int) -> tuple[Observation, ...]:
        rng = make_rng(seed)
        alphabet = self.config.digit_alphabet
        if self.config.distinct_digits:
            picks = rng.choice(len(alphabet), size=self.n_agents, replace=False)
        else:
            picks = rng.integers(0, len(alphabet), size=self.n_agents)
        return self._start(tuple(alphabet[int(i)] for i in picks))

    def reset_to(self, token) -> tuple[Observation, ...]:
        digits = tuple(int(d) for d in token)
        if len(digits) != self.n_agents or any(d not in self.config.digit_alphabet for d in digits):
            raise ValueError(f"bad digit assignment {token}")
        return self._start(digits)

    def initial_conditions(self, bound: int = 100_000) -> list:
        alphabet = self.config.digit_alphabet
        total = len(alphabet) ** self.n_agents
        if total > bound:
            raise ValueError(f"{total} digit assignments exceed bound {bound}")
        tokens: list[tuple[int, ...]] = [()]
        for _ in range(self.n_agents):
            tokens = [t + (d,) for t in tokens for d in alphabet]
        if self.config.distinct_digits:
            tokens = [t for t in tokens if len(set(t)) == self.n_agents]
        return tokens

    def _start(self, digits: tuple[int, ...]) -> tuple[Observation, ...]:
        self.state = GuessState(
            digits=digits,
            revealed=[set() for _ in range(self.n_agents)],
            hints_used=0,
            done_flags=[False] * self.n_agents,
            turn=0)
        self._done = False
        self._step_count = 0
        return tuple(self.observe(a) for a in range(self.n_agents))

    def acting_agents(self) -> tuple[AgentId, ...]:
        return (self.state.turn,)

    def legal_actions(self, agent: AgentId) -> frozenset[int]:
        self._require_running()
        st = self.state
        if agent != st.turn:
            raise IllegalActionError(agent, NO_ACTION, "not this agent's turn")
        legal = set(range(self.action_space.n_regular))
        if st.hints_used < self.config.hint_limit:
            legal.update(self.action_space.scouting)
        return frozenset(legal)

    def step(self, joint_action) -> Transition:
        self._require_running()
        joint = self._check_joint(joint_action)
        st = self.state
        actor = st.turn
        action = joint[actor]
        reward = 0.0
        if self.action_space.is_scouting(action):
            target, segment = self.hint_of(actor, action)
            st.revealed[target].add(
                (segment, segment_state(st.digits[target], segment)))
            st.hints_used += 1
            reward = HINT_REWARD
        else:
            guess = self.guess_of(action)
            if guess == st.digits[actor]:
                reward = GUESS_REWARD
            st.done_flags[actor] = True
        self._step_count += 1
        self._advance_turn(actor)
        if self._step_count >= self.horizon:
            self._done = True
        obs = tuple(self.observe(a) for a in range(self.n_agents))
        return Transition(joint_action=joint, reward=reward,
                          observations_next=obs, done=self._done)

    def _advance_turn(self, actor: AgentId) -> None:
        st = self.state
        if all(st.done_flags):
            self._done = True
            return
        nxt = (actor + 1) % self.n_agents
        while st.done_flags[nxt]:
            nxt = (nxt + 1) % self.n_agents
        st.turn = nxt

    def observe(self, agent: AgentId) -> Observation:
        st = self.state
        payload = {
            "others": tuple((a, st.digits[a])
                            for a in range(self.n_agents) if a != agent),
            "revealed": tuple(tuple(sorted(facts)) for facts in st.revealed),
            "hints_used": st.hints_used,
            "done": tuple(st.done_flags),
            "turn": st.turn,
        }
        return Observation(agent=agent, step=self._step_count, payload=payload)

    # --- learner hooks ------------------------------------------------------

    def hidden_context(self, viewer: AgentId, target: AgentId) -> int:
        if viewer == target:
            raise UnsupportedModeError("an agent cannot view its own digit")
        return self.state.digits[target]

    def default_informee(self, sender: AgentId) -> AgentId:
        nxt = (sender + 1) % self.n_agents
        while self.state.done_flags[nxt] and nxt != sender:
            nxt = (nxt + 1) % self.n_agents
        return (sender + 1) % self.n_agents if nxt == sender else nxt

    def context_domain(self) -> tuple:
        return self.config.digit_alphabet

    def compact_payload(self, agent: AgentId) -> dict:
        """Egocentric decision view: drops budget, turn and done bookkeeping."""
        st = self.state
        return {
            "others": tuple((a, st.digits[a])
                            for a in range(self.n_agents) if a != agent),
            "own": tuple(sorted(st.revealed[agent])),
            "fresh": tuple(not st.revealed[a]
                           for a in range(self.n_agents) if a != agent),
        }

    def global_payload(self, agent: AgentId) -> dict:
        st = self.state
        return {
            "digits": st.digits,
            "revealed": tuple(tuple(sorted(facts)) for facts in st.revealed),
            "hints_used": st.hints_used,
            "done": tuple(st.done_flags),
            "turn": st.turn,
        }

    def params_dict(self) -> dict:
        return {
            "n_agents": self.n_agents,
            "hint_limit": self.config.hint_limit,
            "digit_alphabet": "".join(str(d) for d in self.config.digit_alphabet),
            "distinct_digits": int(self.config.distinct_digits),
            "horizon": self.horizon,
        }
