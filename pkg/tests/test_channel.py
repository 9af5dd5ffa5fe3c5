"""Info-map bijection, hat codec, inboxes, and the cheat wrapper."""

import itertools

import numpy as np
import pytest

from icpsim.channel import (Channel, ChannelMode, HatCodec, Inbox, InfoMap,
                            cheat_wrap, hat_decode, hat_encode, map_decode,
                            map_encode, map_from_line, map_new, map_shuffle,
                            map_to_line, receiver_order)
from icpsim.core import ActionSpace

from helpers import restricted_guessing


# --- embeddings -----------------------------------------------------------


def test_map_round_trip_small():
    for k in (1, 2, 5, 13):
        imap = map_new(k, seed=3)
        for m in range(k):
            assert map_decode(imap, map_encode(imap, m)) == m
        for a in range(k):
            assert map_encode(imap, map_decode(imap, a)) == a


def test_map_k1_is_identity():
    assert map_new(1, seed=0).perm == (0,)
    assert map_new(1, seed=999).perm == (0,)


def test_map_seeds_give_distinct_permutations():
    perms = {map_new(8, seed=s).perm for s in range(100)}
    assert len(perms) >= 95


def test_map_rejects_non_permutation():
    with pytest.raises(ValueError):
        InfoMap(perm=(0, 0, 2), seed=1)
    with pytest.raises(ValueError):
        map_new(0, seed=1)


def test_map_encode_bounds():
    imap = map_new(4, seed=2)
    with pytest.raises(ValueError):
        map_encode(imap, 4)
    with pytest.raises(ValueError):
        map_decode(imap, -1)


def test_map_shuffle_is_deterministic_and_leaves_original():
    base = map_new(8, seed=11)
    before = base.perm
    shuffled = [map_shuffle(base, s) for s in range(1, 7)]
    assert base.perm == before
    assert all(sorted(s.perm) == list(range(8)) for s in shuffled)
    again = [map_shuffle(base, s) for s in range(1, 7)]
    assert [s.perm for s in shuffled] == [s.perm for s in again]
    assert len({s.perm for s in shuffled}) >= 5


def test_map_line_round_trip():
    imap = map_new(9, seed=1234)
    line = map_to_line(imap)
    back = map_from_line(line)
    assert back == imap
    with pytest.raises(ValueError):
        map_from_line("not a map line")


# --- hat codec --------------------------------------------------------------


def test_hat_round_trip_exhaustive_k3_r3():
    k = 3
    codec = HatCodec(k=k, receiver_order=(0, 2, 3))
    for locals_ in itertools.product(range(k), repeat=3):
        by_receiver = dict(zip(codec.receiver_order, locals_))
        public = codec.encode(by_receiver)
        for receiver in codec.receiver_order:
            others = {r: by_receiver[r] for r in codec.receiver_order
                      if r != receiver}
            assert codec.decode(public, receiver, others) == by_receiver[receiver]


def test_hat_helpers_match_manual_arithmetic():
    assert hat_encode([2, 4, 1], 5) == 2
    assert hat_decode(2, [4, 1], 5) == 2
    assert hat_decode(2, [2, 1], 5) == 4


def test_hat_rejects_out_of_range():
    with pytest.raises(ValueError):
        hat_encode([], 4)
    with pytest.raises(ValueError):
        hat_encode([4], 4)
    with pytest.raises(ValueError):
        hat_decode(4, [0], 4)


def test_hat_wrong_receiver_set_is_rejected():
    codec = HatCodec(k=4, receiver_order=(1, 2))
    with pytest.raises(ValueError):
        codec.encode({1: 0})
    with pytest.raises(ValueError):
        codec.decode(0, 0, {2: 1})
    with pytest.raises(ValueError):
        codec.decode(0, 1, {1: 1})


def test_hat_corrupted_receiver_order_breaks_decoding():
    # the order is part of the convention: decoding against a permuted order
    # must disagree somewhere once locals are not all equal
    k = 5
    good = HatCodec(k=k, receiver_order=(0, 1, 2))
    bad = HatCodec(k=k, receiver_order=(2, 1, 0))
    mismatches = 0
    for locals_ in itertools.product(range(k), repeat=3):
        by_receiver = dict(zip(good.receiver_order, locals_))
        public = good.encode(by_receiver)
        # a decoder that paired the public symbol with the wrong sender
        # convention: swap two receivers' locals before subtracting
        swapped = {0: by_receiver[2], 1: by_receiver[1], 2: by_receiver[0]}
        for receiver in (0, 1, 2):
            others = {r: swapped[r] for r in (0, 1, 2) if r != receiver}
            if bad.decode(public, receiver, others) != by_receiver[receiver]:
                mismatches += 1
    assert mismatches > 0


def test_receiver_order_excludes_sender_ascending():
    assert receiver_order(4, 2) == (0, 1, 3)
    assert receiver_order(2, 0) == (1,)


# --- inboxes ---------------------------------------------------------------


def test_inbox_keeps_latest_message_per_sender():
    inbox = Inbox()
    inbox.post(2, 5)
    inbox.tick()
    inbox.post(0, 1)
    assert inbox.messages() == ((0, 1), (2, 5))
    inbox.post(2, 3)  # overwrite
    assert inbox.messages() == ((0, 1), (2, 3))


def test_inbox_ages_tick_but_stay_out_of_messages():
    inbox = Inbox()
    inbox.post(1, 4)
    first = inbox.messages()
    inbox.tick()
    inbox.tick()
    assert inbox.messages() == first
    assert inbox.entries[1].age == 2


def test_channel_one_to_one_delivers_to_everyone_else():
    space = ActionSpace(n_regular=2, n_scouting=4)
    imap = map_new(4, seed=5)
    chan = Channel(ChannelMode.ONE_TO_ONE, 3, space, imap)
    message = 3
    raw = space.scouting_action(map_encode(imap, message))
    chan.observe_step((raw, -1, 0))  # agent 0 scouts, agent 2 plays regular
    assert chan.inbox_messages(0) == ()
    assert chan.inbox_messages(1) == ((0, message),)
    assert chan.inbox_messages(2) == ((0, message),)


def test_channel_hat_needs_locals_and_decodes_per_receiver():
    space = ActionSpace(n_regular=2, n_scouting=4)
    imap = map_new(4, seed=5)
    chan = Channel(ChannelMode.HAT, 3, space, imap)
    locals_ = {1: 2, 2: 3}
    from icpsim.channel import hat_encode as enc
    public = enc([locals_[1], locals_[2]], 4)
    raw = space.scouting_action(map_encode(imap, public))
    chan.observe_step((raw, -1, -1), hat_locals={0: locals_})
    assert chan.inbox_messages(1) == ((0, 2),)
    assert chan.inbox_messages(2) == ((0, 3),)
    with pytest.raises(ValueError):
        chan.observe_step((raw, -1, -1))


def test_channel_mode_mismatch_configuration():
    space = ActionSpace(n_regular=2, n_scouting=4)
    with pytest.raises(ValueError):
        Channel(ChannelMode.ONE_TO_ONE, 2, space, None)
    with pytest.raises(ValueError):
        Channel(ChannelMode.HAT, 2, space, map_new(3, seed=1))  # k mismatch


def test_channel_none_stays_silent():
    chan = Channel(ChannelMode.NONE, 2)
    chan.observe_step((0, 1))
    assert chan.inbox_messages(0) == ()
    assert chan.inbox_messages(1) == ()


# --- cheat wrapper -----------------------------------------------------------


def test_cheat_wrap_broadcasts_and_preserves_rewards():
    env = cheat_wrap(restricted_guessing())
    env.reset(3)
    agent = env.acting_agents()[0]
    legal = sorted(env.legal_actions(agent))
    joint = [-1, -1]
    joint[agent] = legal[0]
    tr = env.step(joint, broadcasts={agent: 2})
    other = 1 - agent
    assert env.inbox_messages(other) == ((agent, 2),)
    assert env.inbox_messages(agent) == ()
    assert isinstance(tr.reward, float)


def test_cheat_wrap_bounds_messages_and_restricts_actions():
    base = restricted_guessing()
    env = cheat_wrap(base, restrict_to_regular=True)
    env.reset(3)
    agent = env.acting_agents()[0]
    legal = env.legal_actions(agent)
    assert all(a < base.action_space.n_regular for a in legal)
    with pytest.raises(ValueError):
        env.step([legal and sorted(legal)[0], -1] if agent == 0
                 else [-1, sorted(legal)[0]], broadcasts={agent: 99})


def test_cheat_wrap_message_size_default_is_channel_width():
    base = restricted_guessing()
    assert cheat_wrap(base).message_size == base.action_space.k
    with pytest.raises(ValueError):
        cheat_wrap(base, message_size=0)
