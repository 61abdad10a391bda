"""Scenario builders shared by the harness and acceptance tests."""

from __future__ import annotations

from secagg.protocol.roles import Session
from secagg.protocol.wire import Kind, decode_tagged
from secagg.selection import HashBeacon
from secagg.sim import Scenario, equivocation_against, make_strategy, run


def session_of(params, seed: bytes):
    return Session(params, HashBeacon(seed)(0))


def shares_obtainable(result, member: int, corrupt) -> int:
    """Shares of ``member``'s key the server can hold, counted from the transcript.

    Corrupt neighbors hand over the encrypted share they were forwarded; honest
    neighbors contribute what they released.
    """
    holders = set()
    for msg in result.transcript.messages:
        if msg.kind is Kind.SHARE_FORWARD and msg.receiver in corrupt:
            if any(j == member for j, _ in decode_tagged(msg.payload)):
                holders.add(msg.receiver)
        elif msg.kind is Kind.SHARE_RELEASE and msg.sender not in corrupt:
            if any(j == member for j, _ in decode_tagged(msg.payload)):
                holders.add(msg.sender)
    return len(holders)


def input_boundary(params, seed: bytes, below: bool) -> Scenario:
    """Round-2 dropouts leaving |U'_2| = ceil(αn) - 1 (below) or ceil(αn)."""
    s = session_of(params, seed)
    outsiders = [i for i in range(params.n, 0, -1) if i not in s.committee_set]
    count = params.n - params.min_inputs + (1 if below else 0)
    return Scenario(params, seed, dropouts={i: 2 for i in outsiders[:count]})


def committee_boundary(params, seed: bytes, at: bool) -> Scenario:
    """Round-3 committee dropouts: k - c̃ (at the threshold) or one fewer."""
    s = session_of(params, seed)
    count = params.k - params.c_tilde - (0 if at else 1)
    return Scenario(params, seed, dropouts={j: 3 for j in s.committee[:count]})


def share_boundary(params, seed: bytes, below: bool) -> Scenario:
    """One committee member drops; its neighbors go offline before releasing.

    Leaves t - 1 (below) or t releasable shares. Neighbors that drop at round
    5 have already acknowledged the drop set.
    """
    s = session_of(params, seed)
    j = s.committee[0]
    count = params.ell - params.t + (1 if below else 0)
    gone = [i for i in s.neighborhoods[j] if i not in s.committee_set][:count]
    if len(gone) < count:
        raise ValueError("neighborhood too small for this boundary")
    drops = {j: 3}
    drops.update({i: 5 for i in gone})
    return Scenario(params, seed, dropouts=drops)


def ack_boundary(params, seed: bytes, below: bool) -> Scenario | None:
    """Neighbors of one member skip acknowledging, leaving t - 1 or t acks there.

    Returns None when no member's neighborhood can be thinned without also
    starving another neighborhood or the dropped member's shares.
    """
    s = session_of(params, seed)
    j = s.committee[0]
    want = params.t - 1 if below else params.t
    for target in s.committee[1:]:
        present = [l for l in s.neighborhoods[target] if l != j]
        count = len(present) - want
        cand = [i for i in present if i not in s.committee_set and i not in s.neighborhoods[j]]
        if count < 0 or len(cand) < count:
            continue
        gone = set(cand[:count]) | {j}
        others_ok = all(
            sum(1 for l in s.neighborhoods[x] if l not in gone) >= params.t for x in s.committee if x != target
        )
        if others_ok:
            gone.discard(j)
            drops = {j: 3}
            drops.update({i: 4 for i in gone})
            return Scenario(params, seed, dropouts=drops)
    return None


def equivocation_scenario(params, seed: bytes, corrupt, victim: int, dropped: int):
    s = session_of(params, seed)
    strategy = equivocation_against(s, victim, frozenset(corrupt), dropped=[dropped])
    return Scenario(params, seed, dropouts={dropped: 3}, corruption=frozenset(corrupt), adversary=strategy)


__all__ = [
    "ack_boundary",
    "committee_boundary",
    "equivocation_scenario",
    "input_boundary",
    "make_strategy",
    "run",
    "session_of",
    "share_boundary",
    "shares_obtainable",
]
