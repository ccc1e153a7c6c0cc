"""Hub-sampling gossip for correct nodes: the per-cycle active step and the
cache-request handler.

Each cycle a node asks every peer in its cycle-start cache for that peer's
cache and one backward peer, then rebuilds its own cache as: the h most
frequent ids seen (preferential attachment), up to c-h backward peers
(random mixing), and random leftovers from the frequency map if still short.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .model import NodeState
from .rng import RunRng, Stream

#: Leftover cache slots are refilled from the frequency map, sampling ids
#: proportionally to their observed frequency (draws over the multiset,
#: without key replacement). Set False to sample uniformly over the distinct
#: remaining ids instead.
WEIGHTED_MAP_FILL = True


@dataclass(slots=True, frozen=True)
class CacheResponse:
    """Reply to a cache request: the responder's reported cache plus one
    backward peer (None when the responder has nothing to offer)."""

    peer_cache: list[int]
    backward_peer: int | None


def record_backward(responder: NodeState, requester: int, stream: Stream) -> int:
    """Record the requester in the responder's backward list and return a
    uniformly random backward entry.

    The random entry is produced by swapping a random element to the head,
    which draws from the same distribution as fully reshuffling the list and
    taking its head, at O(1) instead of O(len).
    """
    peers = responder.backward_peers
    peers.append(requester)
    j = stream.randbelow(len(peers))
    peers[0], peers[j] = peers[j], peers[0]
    return peers[0]


def handle_cache_request(
    responder: NodeState,
    requester: int,
    rng: RunRng,
    cache_view: list[int] | None = None,
) -> CacheResponse:
    """Correct-node request handler: report the true cache and a random
    backward peer.

    cache_view overrides the reported cache contents; the engine passes the
    cycle-start snapshot here when running under snapshot semantics.
    """
    head = record_backward(responder, requester, rng.node_stream(responder.id))
    reported = responder.cache if cache_view is None else cache_view
    return CacheResponse(peer_cache=list(reported), backward_peer=head)


def select_preferred(freq: Counter, h: int) -> list[int]:
    """The h most frequent ids, highest count first, ties to the lower id."""
    return sorted(freq, key=lambda e: (-freq[e], e))[:h]


def elevator_step(
    node: NodeState,
    responses: list[CacheResponse],
    h: int,
    c: int,
    rng: RunRng,
    weighted_fill: bool | None = None,
) -> list[int]:
    """One active step: build the node's next cache from this cycle's replies.

    Returns the new cache without installing it; the engine owns mutation.
    The result is duplicate-free and at most c long; it can come up short only
    when the frequency map runs out of fresh ids.
    """
    if weighted_fill is None:
        weighted_fill = WEIGHTED_MAP_FILL
    stream = rng.node_stream(node.id)

    freq: Counter = Counter()
    pool: list[int] = []
    for resp in responses:
        freq.update(resp.peer_cache)
        if resp.backward_peer is not None:
            pool.append(resp.backward_peer)

    preferred = select_preferred(freq, h)
    for entry in preferred:
        del freq[entry]
    stream.shuffle(pool)

    new_cache = list(preferred)
    seen = set(new_cache)
    taken_backward = 0
    for entry in pool:
        if len(new_cache) >= c or taken_backward >= c - h:
            break
        if entry not in seen:
            new_cache.append(entry)
            seen.add(entry)
            taken_backward += 1

    if len(new_cache) < c and freq:
        candidates = list(freq)
        n_cand = len(candidates)
        if weighted_fill:
            weights = [freq[entry] for entry in candidates]
            total = sum(weights)
            while len(new_cache) < c and n_cand > 0:
                r = stream.randbelow(total)
                j = 0
                acc = weights[0]
                while acc <= r:
                    j += 1
                    acc += weights[j]
                entry = candidates[j]
                total -= weights[j]
                candidates[j] = candidates[n_cand - 1]
                weights[j] = weights[n_cand - 1]
                n_cand -= 1
                if entry not in seen:
                    new_cache.append(entry)
                    seen.add(entry)
        else:
            while len(new_cache) < c and n_cand > 0:
                j = stream.randbelow(n_cand)
                entry = candidates[j]
                candidates[j] = candidates[n_cand - 1]
                n_cand -= 1
                if entry not in seen:
                    new_cache.append(entry)
                    seen.add(entry)

    return new_cache
