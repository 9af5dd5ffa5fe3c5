"""Reduced cooperative card game with hint actions as the scouting subset.

Players see every hand but their own and build per-color fireworks piles in
rank order.  Playing a card that fits the next rank of its color pays +1;
a misplay burns a life.  Hints spend a token and publicly mark, for one
other player, which of their cards match a chosen color or rank (empty
hints are illegal).  A hint changes only the token count and the public
knowledge, never cards, piles or lives, which is what makes it a scouting
action whose choice can carry a message.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from ..core import (AgentId, ActionSpace, ConfigError, Environment,
                    IllegalActionError, NO_ACTION, Observation, Transition,
                    UnsupportedModeError, make_rng)

Card = tuple[int, int]  # (color, rank), rank starting at 1


@dataclass(frozen=True)
class HanabiLiteConfig:
    colors: int = 2
    max_rank: int = 3
    rank_counts: tuple[int, ...] = (3, 2, 1)
    players: int = 3
    hand_size: int = 2
    hint_tokens: int = 3
    lives: int = 2
    horizon: int = 80
    gamma: float = 1.0

    def __post_init__(self):
        if self.colors < 1 or self.max_rank < 1:
            raise ConfigError("need at least one color and one rank")
        if len(self.rank_counts) != self.max_rank:
            raise ConfigError("rank_counts must list a count per rank")
        if any(c < 1 for c in self.rank_counts):
            raise ConfigError("every rank needs at least one copy")
        if self.players < 2:
            raise ConfigError("need at least two players")
        if self.hand_size < 1:
            raise ConfigError("hand size must be positive")
        if self.hint_tokens < 1 or self.lives < 1:
            raise ConfigError("need positive token and life budgets")
        if self.players * self.hand_size > self.deck_size:
            raise ConfigError("deck too small to deal opening hands")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")

    @property
    def deck_size(self) -> int:
        return self.colors * sum(self.rank_counts)

    def full_deck(self) -> list[Card]:
        deck = []
        for color in range(self.colors):
            for rank in range(1, self.max_rank + 1):
                deck.extend([(color, rank)] * self.rank_counts[rank - 1])
        return deck


# per-card public knowledge: sets of colors and ranks still possible
Knowledge = tuple[frozenset, frozenset]


@dataclass
class HanabiLiteState:
    deck: list[Card]
    hands: list[list[Card]]
    knowledge: list[list[Knowledge]]
    fireworks: list[int]
    tokens: int
    lives: int
    discards: list[Card] = field(default_factory=list)
    turn: AgentId = 0
    final_turns: int | None = None  # countdown after the last draw


class HanabiLiteEnv(Environment):
    name = "hanabi_lite"
    simultaneous = False

    def __init__(self, config: HanabiLiteConfig):
        self.config = config
        self.n_agents = config.players
        self.gamma = config.gamma
        self.horizon = config.horizon
        self.hints_per_target = config.colors + config.max_rank
        self.action_space = ActionSpace(
            n_regular=2 * config.hand_size,
            n_scouting=(config.players - 1) * self.hints_per_target)
        self.state: HanabiLiteState | None = None
        self._done = True
        self._step_count = 0

    # --- action encoding ---------------------------------------------------

    def play_action(self, slot: int) -> int:
        return slot

    def discard_action(self, slot: int) -> int:
        return self.config.hand_size + slot

    def hint_action(self, actor: AgentId, target: AgentId,
                    color: int | None = None, rank: int | None = None) -> int:
        offset = (target - actor) % self.n_agents
        if offset == 0:
            raise ValueError("cannot hint yourself")
        if (color is None) == (rank is None):
            raise ValueError("hint exactly one of color or rank")
        slot = color if color is not None else self.config.colors + rank - 1
        return (self.action_space.n_regular
                + (offset - 1) * self.hints_per_target + slot)

    def hint_of(self, actor: AgentId, action: int) -> tuple[AgentId, int | None, int | None]:
        """(target, color, rank) with exactly one of color/rank set."""
        idx = self.action_space.scouting_index(action)
        offset, slot = divmod(idx, self.hints_per_target)
        target = (actor + offset + 1) % self.n_agents
        if slot < self.config.colors:
            return target, slot, None
        return target, None, slot - self.config.colors + 1

    # --- resets --------------------------------------------------------------

    def reset(self, seed: int) -> tuple[Observation, ...]:
        deck = self.config.full_deck()
        order = make_rng(seed).permutation(len(deck))
        return self._start([deck[int(i)] for i in order])

    def reset_to(self, token) -> tuple[Observation, ...]:
        deck = [tuple(c) for c in token]
        if sorted(deck) != sorted(self.config.full_deck()):
            raise ValueError("deck order is not a permutation of the full deck")
        return self._start(deck)

    def initial_conditions(self, bound: int = 100_000) -> list:
        deck = self.config.full_deck()
        counts = {}
        for card in deck:
            counts[card] = counts.get(card, 0) + 1
        total = math.factorial(len(deck))
        for c in counts.values():
            total //= math.factorial(c)
        if total > bound:
            raise ValueError(f"{total} deck orders exceed bound {bound}")
        return sorted(set(itertools.permutations(deck)))

    def _start(self, deck: list[Card]) -> tuple[Observation, ...]:
        cfg = self.config
        hands = []
        for p in range(cfg.players):
            hands.append(deck[p * cfg.hand_size:(p + 1) * cfg.hand_size])
        rest = deck[cfg.players * cfg.hand_size:]
        fresh = self._fresh_knowledge()
        self.state = HanabiLiteState(
            deck=rest,
            hands=[list(h) for h in hands],
            knowledge=[[fresh] * cfg.hand_size for _ in range(cfg.players)],
            fireworks=[0] * cfg.colors,
            tokens=cfg.hint_tokens,
            lives=cfg.lives,
            final_turns=cfg.players if not rest else None)
        self._done = False
        self._step_count = 0
        return tuple(self.observe(a) for a in range(self.n_agents))

    def _fresh_knowledge(self) -> Knowledge:
        return (frozenset(range(self.config.colors)),
                frozenset(range(1, self.config.max_rank + 1)))

    # --- stepping ----------------------------------------------------------------

    def acting_agents(self) -> tuple[AgentId, ...]:
        return (self.state.turn,)

    def legal_actions(self, agent: AgentId) -> frozenset[int]:
        self._require_running()
        st = self.state
        if agent != st.turn:
            raise IllegalActionError(agent, NO_ACTION, "not this agent's turn")
        cfg = self.config
        legal = set()
        hand = st.hands[agent]
        for slot in range(len(hand)):
            legal.add(self.play_action(slot))
            if st.tokens < cfg.hint_tokens:
                legal.add(self.discard_action(slot))
        if st.tokens > 0:
            for action in self.action_space.scouting:
                target, color, rank = self.hint_of(agent, action)
                cards = st.hands[target]
                if color is not None and any(c[0] == color for c in cards):
                    legal.add(action)
                if rank is not None and any(c[1] == rank for c in cards):
                    legal.add(action)
        # the actor always holds a card until its final-round turn, so play
        # actions keep the legal set nonempty
        return frozenset(legal)

    def step(self, joint_action) -> Transition:
        self._require_running()
        joint = self._check_joint(joint_action)
        st = self.state
        cfg = self.config
        actor = st.turn
        action = joint[actor]
        reward = 0.0
        countdown_was_running = st.final_turns is not None

        if self.action_space.is_scouting(action):
            target, color, rank = self.hint_of(actor, action)
            st.tokens -= 1
            for slot, card in enumerate(st.hands[target]):
                colors, ranks = st.knowledge[target][slot]
                if color is not None:
                    colors = colors & {color} if card[0] == color else colors - {color}
                else:
                    ranks = ranks & {rank} if card[1] == rank else ranks - {rank}
                st.knowledge[target][slot] = (colors, ranks)
        elif action < cfg.hand_size:
            card = self._remove(actor, action)
            color, rank = card
            if st.fireworks[color] + 1 == rank:
                st.fireworks[color] = rank
                reward = 1.0
                if rank == cfg.max_rank:
                    st.tokens = min(cfg.hint_tokens, st.tokens + 1)
            else:
                st.lives -= 1
                st.discards.append(card)
            self._draw(actor)
        else:
            card = self._remove(actor, action - cfg.hand_size)
            st.discards.append(card)
            st.tokens = min(cfg.hint_tokens, st.tokens + 1)
            self._draw(actor)

        self._step_count += 1
        # every player, the one who drew the last card included, gets one
        # more turn once the deck is empty
        if countdown_was_running:
            st.final_turns -= 1
        score_done = all(f == cfg.max_rank for f in st.fireworks)
        if (st.lives == 0 or score_done or st.final_turns == 0
                or self._step_count >= self.horizon):
            self._done = True
        else:
            st.turn = (actor + 1) % self.n_agents
        obs = tuple(self.observe(a) for a in range(self.n_agents))
        return Transition(joint_action=joint, reward=reward,
                          observations_next=obs, done=self._done)

    def _remove(self, agent: AgentId, slot: int) -> Card:
        st = self.state
        card = st.hands[agent].pop(slot)
        st.knowledge[agent].pop(slot)
        return card

    def _draw(self, agent: AgentId) -> None:
        st = self.state
        if st.deck:
            st.hands[agent].append(st.deck.pop(0))
            st.knowledge[agent].append(self._fresh_knowledge())
            if not st.deck:
                st.final_turns = self.n_agents

    @property
    def score(self) -> int:
        return sum(self.state.fireworks)

    # --- observations ----------------------------------------------------------------

    def observe(self, agent: AgentId) -> Observation:
        st = self.state
        knowledge = tuple(
            tuple((tuple(sorted(colors)), tuple(sorted(ranks)))
                  for colors, ranks in player_know)
            for player_know in st.knowledge)
        payload = {
            "other_hands": tuple((a, tuple(st.hands[a]))
                                 for a in range(self.n_agents) if a != agent),
            "own_hand_size": len(st.hands[agent]),
            "knowledge": knowledge,
            "fireworks": tuple(st.fireworks),
            "tokens": st.tokens,
            "lives": st.lives,
            "discards": tuple(sorted(st.discards)),
            "deck_size": len(st.deck),
            "turn": st.turn,
            "final_turns": st.final_turns,
        }
        return Observation(agent=agent, step=self._step_count, payload=payload)

    # --- learner hooks ----------------------------------------------------------------

    def _card_known(self, know: Knowledge) -> bool:
        colors, ranks = know
        return len(colors) == 1 and len(ranks) == 1

    def hidden_context(self, viewer: AgentId, target: AgentId):
        if viewer == target:
            raise UnsupportedModeError("an agent cannot view its own cards")
        st = self.state
        for slot, know in enumerate(st.knowledge[target]):
            if not self._card_known(know):
                return st.hands[target][slot]
        return None

    def context_domain(self) -> tuple:
        cards = sorted(set(self.config.full_deck()))
        return (None, *cards)

    def global_payload(self, agent: AgentId) -> dict:
        payload = dict(self.observe(agent).payload)
        payload["own_hand"] = tuple(self.state.hands[agent])
        return payload

    def params_dict(self) -> dict:
        cfg = self.config
        return {
            "colors": cfg.colors, "max_rank": cfg.max_rank,
            "rank_counts": ",".join(str(c) for c in cfg.rank_counts),
            "players": cfg.players, "hand_size": cfg.hand_size,
            "hint_tokens": cfg.hint_tokens, "lives": cfg.lives,
            "horizon": cfg.horizon,
        }
