"""Correct-node protocol step and request handler."""

from collections import Counter

from hypothesis import given, settings
from hypothesis import strategies as st

from liftsim.elevator import CacheResponse, elevator_step, handle_cache_request, select_preferred
from liftsim.model import NodeState
from liftsim.rng import RunRng


def make_rng(seed=1, n=64):
    return RunRng(master_seed=seed, run_index=0, n_nodes=n)


def test_handle_request_first_contact():
    node = NodeState(id=0, cache=[5, 7])
    resp = handle_cache_request(node, requester=3, rng=make_rng())
    assert node.backward_peers == [3]
    assert resp.peer_cache == [5, 7]
    assert resp.backward_peer == 3


def test_handle_request_reports_copy():
    node = NodeState(id=0, cache=[5, 7])
    resp = handle_cache_request(node, 3, make_rng())
    resp.peer_cache.append(99)
    assert node.cache == [5, 7]


def test_handle_request_repeat_requester_kept_twice():
    node = NodeState(id=0, cache=[])
    rng = make_rng()
    handle_cache_request(node, 4, rng)
    handle_cache_request(node, 4, rng)
    assert node.backward_peers.count(4) == 2


def test_handle_request_backward_multiset_and_head_distribution():
    seen_heads = set()
    for seed in range(60):
        node = NodeState(id=0, cache=[])
        node.backward_peers.extend([1, 2])
        resp = handle_cache_request(node, 9, make_rng(seed))
        assert sorted(node.backward_peers) == [1, 2, 9]
        assert resp.backward_peer in {1, 2, 9}
        assert resp.backward_peer == node.backward_peers[0]
        seen_heads.add(resp.backward_peer)
    assert seen_heads == {1, 2, 9}


def test_snapshot_view_overrides_reported_cache():
    node = NodeState(id=0, cache=[5, 7])
    resp = handle_cache_request(node, 3, make_rng(), cache_view=[8])
    assert resp.peer_cache == [8]


def test_step_prefers_most_frequent():
    responses = [
        CacheResponse([2, 3], None),
        CacheResponse([2, 4], None),
        CacheResponse([2, 3], None),
    ]
    node = NodeState(id=0, cache=[1, 2, 3])
    cache = elevator_step(node, responses, h=1, c=3, rng=make_rng())
    assert cache[0] == 2
    assert len(cache) == 3
    assert len(set(cache)) == 3
    assert set(cache) <= {2, 3, 4}


def test_step_empty_responses_empty_cache():
    node = NodeState(id=0, cache=[1])
    assert elevator_step(node, [], h=2, c=4, rng=make_rng()) == []
    only_empty = [CacheResponse([], None), CacheResponse([], None)]
    assert elevator_step(node, only_empty, h=2, c=4, rng=make_rng()) == []


def test_step_tie_break_prefers_lower_id():
    responses = [CacheResponse([9, 7], None) for _ in range(5)]
    responses.append(CacheResponse([1], None))
    node = NodeState(id=0, cache=[0])
    cache = elevator_step(node, responses, h=2, c=3, rng=make_rng())
    assert cache[:2] == [7, 9]


def test_select_preferred_order():
    freq = Counter({9: 5, 7: 5, 1: 1})
    assert select_preferred(freq, 2) == [7, 9]
    assert select_preferred(freq, 5) == [7, 9, 1]


def test_step_backward_section_capped():
    # h=1, c=3: at most c-h=2 backward peers even with a rich pool
    responses = [CacheResponse([5], b) for b in (11, 12, 13, 14)]
    node = NodeState(id=0, cache=[5])
    cache = elevator_step(node, responses, h=1, c=3, rng=make_rng())
    assert cache[0] == 5
    assert len(cache) == 3
    assert set(cache[1:]) <= {11, 12, 13, 14}


def test_step_self_id_allowed():
    responses = [CacheResponse([0, 3], 0)]
    node = NodeState(id=0, cache=[3])
    cache = elevator_step(node, responses, h=1, c=3, rng=make_rng())
    assert 0 in cache


responses_strategy = st.lists(
    st.tuples(
        st.lists(st.integers(0, 63), min_size=0, max_size=8).map(lambda v: sorted(set(v))),
        st.one_of(st.none(), st.integers(0, 63)),
    ),
    min_size=0,
    max_size=10,
)


@given(responses_strategy, st.integers(1, 5), st.integers(0, 2**32), st.booleans())
@settings(max_examples=300, deadline=None)
def test_step_invariants_and_prefix_dominance(raw, h, seed, weighted):
    c = h + 3
    responses = [CacheResponse(list(pc), b) for pc, b in raw]
    node = NodeState(id=0, cache=[1])
    cache = elevator_step(node, responses, h, c, make_rng(seed), weighted_fill=weighted)

    # structural invariants
    assert len(cache) <= c
    assert len(set(cache)) == len(cache)

    # independent frequency oracle
    freq = Counter()
    for pc, _ in raw:
        freq.update(pc)
    k = min(h, len(freq))
    prefix = cache[:k]
    if freq:
        remaining_max = max(
            (count for entry, count in freq.items() if entry not in prefix),
            default=0,
        )
        for entry in prefix:
            assert freq[entry] >= remaining_max

    # every entry must come from somewhere observed
    backwards = {b for _, b in raw if b is not None}
    assert set(cache) <= set(freq) | backwards

    # cache fills to c whenever enough distinct ids were offered
    usable_backward = len(backwards - set(prefix))
    assert len(cache) >= min(c, k + min(c - h, usable_backward))
    if len(freq) >= c:
        assert len(cache) == c
