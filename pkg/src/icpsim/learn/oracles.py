"""Brute-force reference results used to pin expected values in tests.

Everything here is deliberately independent of the learners and of the
evaluation helpers: small exhaustive searches and replays whose outputs
other code must reproduce.
"""

from __future__ import annotations

import math
from functools import lru_cache

from ..core import NO_ACTION, make_rng
from ..envs.guessing import N_SEGMENTS, SEGMENT_TABLE, segment_state


def oracle_injective_hint_map(alphabet, table=SEGMENT_TABLE) -> dict[int, int] | None:
    """Pick one segment per digit so the (segment, lit) facts are distinct.

    Depth-first search over digits in ascending order, segments tried
    ascending, so the returned map is canonical.  Returns None when no
    injective assignment exists; that is an answer, not an error.
    """
    digits = tuple(sorted(set(alphabet)))
    if len(digits) > 2 * N_SEGMENTS:
        return None  # pigeonhole: more digits than (segment, lit) facts
    assignment: dict[int, int] = {}
    used: set[tuple[int, bool]] = set()

    def place(i: int) -> bool:
        if i == len(digits):
            return True
        d = digits[i]
        for seg in range(N_SEGMENTS):
            fact = (seg, segment_state(d, seg, table))
            if fact in used:
                continue
            used.add(fact)
            assignment[d] = seg
            if place(i + 1):
                return True
            used.remove(fact)
            del assignment[d]
        return False

    if not place(0):
        return None
    return dict(assignment)


def oracle_decision_tree_depth(alphabet, table=SEGMENT_TABLE) -> int:
    """Worst-case number of segment queries needed to identify a digit.

    Exact minimax over all adaptive querying strategies, memoized on the
    surviving candidate set.
    """
    digits = frozenset(alphabet)

    @lru_cache(maxsize=None)
    def depth(candidates: frozenset) -> float:
        if len(candidates) <= 1:
            return 0
        best = math.inf
        for seg in range(N_SEGMENTS):
            on = frozenset(d for d in candidates if segment_state(d, seg, table))
            off = candidates - on
            if not on or not off:
                continue
            best = min(best, 1 + max(depth(on), depth(off)))
        return best

    result = depth(digits)
    if math.isinf(result):
        raise ValueError("segment queries cannot separate this alphabet")
    return int(result)


def uniform_random_decide(env, agent: int, rng) -> int:
    legal = sorted(env.legal_actions(agent))
    return legal[int(rng.integers(len(legal)))]


def oracle_exhaustive_eval(env, decide=uniform_random_decide, *,
                           bound: int = 512,
                           seed_base: int = 0x0BAC) -> tuple[float, float]:
    """Mean return and length over every enumerable starting condition.

    `decide(env, agent, rng)` picks each acting agent's action; per-token
    RNGs are derived from the token index so replays are stable.
    """
    tokens = list(env.initial_conditions(bound))
    total_return = 0.0
    total_length = 0
    for i, token in enumerate(tokens):
        env.reset_to(token)
        rng = make_rng(seed_base, i)
        while not env.done:
            joint = [NO_ACTION] * env.n_agents
            for agent in env.acting_agents():
                joint[agent] = decide(env, agent, rng)
            transition = env.step(joint)
            total_return += transition.reward
            total_length += 1
    return total_return / len(tokens), total_length / len(tokens)
