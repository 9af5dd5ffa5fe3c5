"""Simultaneous-move goal seeking on a torus with revealable cells.

Agents move on an H x H wrapping grid toward goal cells they cannot see
(everyone else sees them).  Instead of moving, an agent may reveal a cell
adjacent to itself: the cell is publicly marked and every agent learns
whether its own goal sits there.  Reveals are the scouting actions; which
neighbour gets revealed is the message-bearing choice.  Reaching a goal
pays the team +1 and the goal is reassigned at toroidal Manhattan distance
at least two, wiping that agent's accumulated knowledge.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ..core import (AgentId, ActionSpace, ConfigError, Environment,
                    Observation, Transition, UnsupportedModeError,
                    canonical, make_rng)

Cell = tuple[int, int]

# direction order shared by moves, reveals and direction classes
DIRECTIONS: tuple[tuple[str, int, int], ...] = (
    ("up", 0, 1), ("down", 0, -1), ("left", -1, 0), ("right", 1, 0))
UP, DOWN, LEFT, RIGHT = range(4)
N_DIRECTIONS = 4
GOAL_REWARD = 1.0
MIN_GOAL_DISTANCE = 2


def torus_adjacent(cell: Cell, direction: int, h: int) -> Cell:
    """Neighbouring cell with wrap-around, e.g. left of (0, y) is (h-1, y)."""
    _, dx, dy = DIRECTIONS[direction]
    return ((cell[0] + dx) % h, (cell[1] + dy) % h)


def torus_distance(a: Cell, b: Cell, h: int) -> int:
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return min(dx, h - dx) + min(dy, h - dy)


def signed_offset(src: Cell, dst: Cell, h: int) -> tuple[int, int]:
    """Minimal wrapped displacement from src to dst, positive on exact ties."""
    out = []
    for i in range(2):
        raw = (dst[i] - src[i]) % h
        out.append(raw - h if raw > h // 2 else raw)
    return out[0], out[1]


def direction_class(src: Cell, dst: Cell, h: int) -> int:
    """Dominant-axis 4-way direction of dst from src, ties to horizontal."""
    dx, dy = signed_offset(src, dst, h)
    if dx == 0 and dy == 0:
        raise ValueError("no direction between identical cells")
    if abs(dx) >= abs(dy):
        return RIGHT if dx > 0 else LEFT
    return UP if dy > 0 else DOWN


@dataclass(frozen=True)
class RevealConfig:
    n_agents: int = 2
    grid: int = 5
    horizon: int = 30
    gamma: float = 1.0

    def __post_init__(self):
        if self.n_agents < 2:
            raise ConfigError("need at least two agents")
        if self.grid < 3:
            raise ConfigError("grid must be at least 3 so goals can sit 2 away")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")


@dataclass
class RevealState:
    positions: list[Cell]
    goals: list[Cell]
    known_bits: list[dict[Cell, bool]]
    revealed_cells: set[Cell] = field(default_factory=set)
    t: int = 0


class RevealingEnv(Environment):
    name = "revealing"
    simultaneous = True

    def __init__(self, config: RevealConfig):
        self.config = config
        self.n_agents = config.n_agents
        self.gamma = config.gamma
        self.horizon = config.horizon
        self.action_space = ActionSpace(n_regular=N_DIRECTIONS,
                                        n_scouting=N_DIRECTIONS)
        self.state: RevealState | None = None
        self._rng = None
        self._done = True
        self._step_count = 0

    # --- resets -------------------------------------------------------------

    def _cells(self) -> list[Cell]:
        h = self.config.grid
        return [(x, y) for x in range(h) for y in range(h)]

    def _far_cells(self, origin: Cell) -> list[Cell]:
        h = self.config.grid
        return [c for c in self._cells()
                if torus_distance(c, origin, h) >= MIN_GOAL_DISTANCE]

    def reset(self, seed: int) -> tuple[Observation, ...]:
        self._rng = make_rng(seed)
        cells = self._cells()
        positions = [cells[int(i)] for i in
                     self._rng.integers(0, len(cells), size=self.n_agents)]
        goals = [self._draw_goal(p) for p in positions]
        return self._start(positions, goals)

    def reset_to(self, token) -> tuple[Observation, ...]:
        positions, goals = token
        positions = [tuple(p) for p in positions]
        goals = [tuple(g) for g in goals]
        h = self.config.grid
        for p, g in zip(positions, goals):
            if torus_distance(p, g, h) < MIN_GOAL_DISTANCE:
                raise ValueError(f"goal {g} too close to start {p}")
        digest = hashlib.sha256(canonical(token)).digest()
        self._rng = make_rng(int.from_bytes(digest[:8], "big"))
        return self._start(positions, goals)

    def initial_conditions(self, bound: int = 100_000) -> list:
        cells = self._cells()
        per_agent = [(p, g) for p in cells for g in self._far_cells(p)]
        total = len(per_agent) ** self.n_agents
        if total > bound:
            raise ValueError(f"{total} initial conditions exceed bound {bound}")
        tokens = [((), ())]
        for _ in range(self.n_agents):
            tokens = [(ps + (p,), gs + (g,)) for ps, gs in tokens for p, g in per_agent]
        return tokens

    def _draw_goal(self, origin: Cell) -> Cell:
        options = self._far_cells(origin)
        return options[int(self._rng.integers(0, len(options)))]

    def _start(self, positions: list[Cell], goals: list[Cell]) -> tuple[Observation, ...]:
        self.state = RevealState(
            positions=list(positions),
            goals=list(goals),
            known_bits=[{} for _ in range(self.n_agents)])
        self._done = False
        self._step_count = 0
        return tuple(self.observe(a) for a in range(self.n_agents))

    # --- stepping -------------------------------------------------------------

    def acting_agents(self) -> tuple[AgentId, ...]:
        return tuple(range(self.n_agents))

    def legal_actions(self, agent: AgentId) -> frozenset[int]:
        self._require_running()
        return frozenset(range(self.action_space.n_actions))

    def step(self, joint_action) -> Transition:
        self._require_running()
        joint = self._check_joint(joint_action)
        st = self.state
        h = self.config.grid

        for agent, action in enumerate(joint):
            if action < N_DIRECTIONS:
                st.positions[agent] = torus_adjacent(st.positions[agent], action, h)
        newly_revealed = []
        for agent, action in enumerate(joint):
            if action >= N_DIRECTIONS:
                cell = torus_adjacent(
                    st.positions[agent], action - N_DIRECTIONS, h)
                newly_revealed.append(cell)
        for cell in newly_revealed:
            st.revealed_cells.add(cell)
            for agent in range(self.n_agents):
                st.known_bits[agent][cell] = (st.goals[agent] == cell)

        reward = 0.0
        for agent in range(self.n_agents):
            if st.positions[agent] == st.goals[agent]:
                reward += GOAL_REWARD
                st.goals[agent] = self._draw_goal(st.positions[agent])
                st.known_bits[agent] = {}

        st.t += 1
        self._step_count = st.t
        if st.t >= self.horizon:
            self._done = True
        obs = tuple(self.observe(a) for a in range(self.n_agents))
        return Transition(joint_action=joint, reward=reward,
                          observations_next=obs, done=self._done)

    # --- observations -----------------------------------------------------------

    def observe(self, agent: AgentId) -> Observation:
        st = self.state
        payload = {
            "positions": tuple(st.positions),
            "other_goals": tuple((a, st.goals[a])
                                 for a in range(self.n_agents) if a != agent),
            "known": tuple(sorted(st.known_bits[agent].items())),
            "revealed": tuple(sorted(st.revealed_cells)),
            "t": st.t,
        }
        return Observation(agent=agent, step=st.t, payload=payload)

    def compact_payload(self, agent: AgentId) -> dict:
        """Egocentric control view: who I am plus my goal offset once pinned.

        Eliminated cells are dropped on purpose; keeping them multiplies the
        key space combinatorially and starves a tabular learner.  Keeping the
        viewer id lets agents adopt asymmetric roles.
        """
        st = self.state
        h = self.config.grid
        pos = st.positions[agent]
        goal_rel = None
        for cell, has_goal in st.known_bits[agent].items():
            if has_goal:
                goal_rel = signed_offset(pos, cell, h)
        return {"self": agent, "goal_rel": goal_rel}

    # --- learner hooks -------------------------------------------------------------

    def hidden_context(self, viewer: AgentId, target: AgentId) -> int:
        if viewer == target:
            raise UnsupportedModeError("an agent cannot view its own goal")
        st = self.state
        return direction_class(st.positions[target], st.goals[target],
                               self.config.grid)

    def context_domain(self) -> tuple:
        return (UP, DOWN, LEFT, RIGHT)

    def global_payload(self, agent: AgentId) -> dict:
        st = self.state
        h = self.config.grid
        return {"goal_rel": signed_offset(st.positions[agent], st.goals[agent], h)}

    def params_dict(self) -> dict:
        return {"n_agents": self.n_agents, "grid": self.config.grid,
                "horizon": self.horizon}
