"""Byzantine request handlers.

Byzantine nodes run the normal active step on whatever replies they get (a
deviating active thread would be trivially detectable); only their request
handler lies. Three lies are modeled: answer with nothing, answer with your
own id spliced into your cache, or answer with a slice of the full attacker
roster.
"""

from __future__ import annotations

from dataclasses import dataclass

from .elevator import CacheResponse, handle_cache_request, record_backward
from .model import Behavior, NodeState
from .rng import RunRng


@dataclass(slots=True, frozen=True)
class ByzantineRoster:
    """All Byzantine node ids in the run, sorted; shared by every
    coordinated attacker."""

    members: tuple[int, ...]

    def __post_init__(self):
        if list(self.members) != sorted(set(self.members)):
            raise ValueError("roster must be sorted and duplicate-free")

    def __len__(self) -> int:
        return len(self.members)

    def pushed_slice(self, c: int) -> list[int]:
        """The agreed coordinated sublist every attacker reports: the first
        min(c, B) roster members."""
        return list(self.members[: min(c, len(self.members))])


def passive_response(node: NodeState, requester: int, rng: RunRng) -> CacheResponse:
    """Do-nothing attack: bookkeeping happens, the reply is empty."""
    record_backward(node, requester, rng.node_stream(node.id))
    return CacheResponse(peer_cache=[], backward_peer=None)


def noncoord_response(
    node: NodeState,
    requester: int,
    rng: RunRng,
    cache_view: list[int] | None = None,
) -> CacheResponse:
    """Self-promoting attack: the reported cache always contains the
    responder's own id exactly once, and the backward peer is the responder.

    A uniformly random cache entry is overwritten by the attacker's id; if the
    id is already present the cache is reported unchanged (never duplicated).
    """
    stream = rng.node_stream(node.id)
    record_backward(node, requester, stream)
    reported = list(node.cache if cache_view is None else cache_view)
    if node.id not in reported:
        if not reported:
            reported = [node.id]
        else:
            reported[stream.randbelow(len(reported))] = node.id
    return CacheResponse(peer_cache=reported, backward_peer=node.id)


def coordinated_response(
    node: NodeState,
    requester: int,
    roster: ByzantineRoster,
    c: int,
    rng: RunRng,
) -> CacheResponse:
    """Colluding attack: report a coordinated roster sublist and a random
    roster member as backward peer. Correct ids never appear.

    Every attacker reports the same agreed sublist (the first min(c, B)
    roster members). A shared stable sublist is what makes the fabricated
    frequencies coherent: slices re-randomized per request or varied per
    attacker spread the manufactured counts across the whole roster, and
    correct nodes then never agree on any hub set, captured or otherwise.
    """
    stream = rng.node_stream(node.id)
    record_backward(node, requester, stream)
    reported = roster.pushed_slice(c)
    backward = stream.choice(roster.members)
    return CacheResponse(peer_cache=reported, backward_peer=backward)


def respond(
    responder: NodeState,
    requester: int,
    roster: ByzantineRoster | None,
    c: int,
    rng: RunRng,
    cache_view: list[int] | None = None,
) -> CacheResponse:
    """Dispatch a cache request to the handler for the responder's behavior."""
    behavior = responder.behavior
    if behavior is Behavior.CORRECT:
        return handle_cache_request(responder, requester, rng, cache_view)
    if behavior is Behavior.PASSIVE_BYZANTINE:
        return passive_response(responder, requester, rng)
    if behavior in (Behavior.ACTIVE_BYZANTINE, Behavior.NONCOORD_BYZANTINE):
        return noncoord_response(responder, requester, rng, cache_view)
    if behavior is Behavior.COORD_BYZANTINE:
        if roster is None:
            raise ValueError("coordinated responder needs the attacker roster")
        return coordinated_response(responder, requester, roster, c, rng)
    raise ValueError(f"unhandled behavior {behavior!r}")
