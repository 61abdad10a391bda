"""Deterministic in-process execution of one protocol run."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .. import modvec
from ..params import Mode
from ..protocol.client import Client
from ..protocol.roles import PartyKeys, ProtocolAbort, Session
from ..protocol.server import Server
from ..protocol.wire import SERVER, Message
from ..selection import HashBeacon
from .adversary import Context, Honest
from .scenario import LAST_ROUND, Scenario
from .transcript import Transcript

log = logging.getLogger(__name__)


@dataclass
class PartyStats:
    messages_sent: int = 0
    messages_received: int = 0
    bytes_sent: int = 0
    bytes_received: int = 0
    rounds_online: int = 0
    roles: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "messages_sent": self.messages_sent,
            "messages_received": self.messages_received,
            "bytes_sent": self.bytes_sent,
            "bytes_received": self.bytes_received,
            "rounds_online": self.rounds_online,
            "roles": list(self.roles),
        }


@dataclass
class Outcome:
    kind: str  # "output" or "abort"
    y: tuple[int, ...] | None = None
    reason: str | None = None
    round: int | None = None
    party: int | None = None

    @property
    def ok(self) -> bool:
        return self.kind == "output"

    def to_dict(self) -> dict:
        if self.ok:
            return {"result": "output", "y": [str(v) for v in self.y]}
        return {"result": "abort", "reason": self.reason, "round": self.round, "party": self.party}


@dataclass
class ExecutionResult:
    outcome: Outcome
    transcript: Transcript
    per_party_stats: dict[int, PartyStats]
    details: dict = field(default_factory=dict)


@lru_cache(maxsize=4096)
def _keys(master_seed: bytes, party: int) -> PartyKeys:
    return PartyKeys.derive(master_seed, party)


def _roles(session: Session, party: int, corrupt: frozenset[int]) -> tuple[str, ...]:
    if party == SERVER:
        return ("server",)
    roles = ["user"]
    if party in session.committee_set:
        roles.append("committee")
    if party in session.backups:
        roles.append("backup")
    if party in corrupt:
        roles.append("corrupt")
    return tuple(roles)


def run(scenario: Scenario) -> ExecutionResult:
    """Execute rounds 2 to 6 and return the outcome with a full transcript.

    Round 1 (key publication) is modeled by the shared directory. A party with
    dropout round r takes no part in round r or later, except that committee
    key sharing opens round 2 and is completed by round-2 dropouts.
    """
    scenario.validate()
    p = scenario.params
    seed = scenario.master_seed
    session = Session(p, HashBeacon(seed)(scenario.beacon_round))
    keys = {i: _keys(seed, i) for i in range(1, p.n + 1)}
    pki = {i: k.public for i, k in keys.items()}
    xs = scenario.input_matrix()
    clients = {i: Client(session, keys[i], pki, modvec.from_ints(xs[i - 1], p.modulus)) for i in keys}
    server = Server(session, pki)
    strategy = scenario.adversary or Honest()
    strategy.bind(Context(session, pki, {c: keys[c] for c in scenario.corruption}))

    tr = Transcript(
        header={
            "params": p.to_dict(),
            "beacon": session.tag.hex(),
            "committee": session.committee,
            "neighborhoods": {str(j): lj for j, lj in session.neighborhoods.items()},
            "corruption": sorted(scenario.corruption),
            "dropouts": {str(i): r for i, r in sorted(scenario.dropouts.items())},
            "adversary": strategy.describe(),
        }
    )

    def deliver(msgs: list[Message]) -> dict[int, list[Message]]:
        boxes: dict[int, list[Message]] = defaultdict(list)
        for msg in msgs:
            if msg.receiver != SERVER and not scenario.online(msg.receiver, msg.round):
                continue
            tr.record(msg)
            boxes[msg.receiver].append(msg)
        return boxes

    seen_aborts: set[int] = set()

    def note_aborts() -> None:
        for i, cl in clients.items():
            if cl.aborted is not None and i not in seen_aborts:
                seen_aborts.add(i)
                tr.event("abort", party=i, round=cl.aborted.round, reason=cl.aborted.reason)

    # round 2: key sharing, then masked inputs
    up: list[Message] = []
    for j in session.committee:
        if scenario.shares_key(j):
            up += clients[j].round2_committee()
    for i in keys:
        if scenario.online(i, 2):
            up += clients[i].round2_input()
    inbox = deliver(up)[SERVER]

    handlers = {3: "round3", 4: "round4", 5: "round5"}
    for r in (3, 4, 5):
        down = strategy.outgoing(r, getattr(server, handlers[r])(inbox))
        boxes = deliver(down)
        up = []
        for i in keys:
            if scenario.online(i, r):
                up += getattr(clients[i], handlers[r])(boxes.get(i, []))
        note_aborts()
        inbox = deliver(up)[SERVER]

    down = strategy.outgoing(6, server.round6(inbox))
    if server.abort is not None:
        tr.event("abort", party=SERVER, round=server.abort.round, reason=server.abort.reason)
    boxes = deliver(down)
    verdicts: dict[int, str] = {}
    if p.mode is Mode.LISA_PLUS and server.output is not None:
        for i in keys:
            if scenario.online(i, 6):
                clients[i].round6(boxes.get(i, []))
                if clients[i].verdict is not None:
                    verdicts[i] = clients[i].verdict
                    tr.event("verdict", party=i, verdict=clients[i].verdict)

    outcome = _outcome(scenario, server, clients, verdicts)
    tr.outcome = outcome.to_dict()
    for f in server.flags:
        tr.event("flag", **f)

    stats = _stats(session, scenario, tr)
    details = {
        "committee": session.committee,
        "u2": list(server.u2),
        "k_drop": list(server.k_drop),
        "recovered": sorted(server.recovered_keys),
        "aborts": {i: (c.aborted.round, c.aborted.reason) for i, c in clients.items() if c.aborted is not None},
        "server_abort": None if server.abort is None else server.abort.reason,
        "verdicts": verdicts,
        "flags": list(server.flags),
        "session": session,
    }
    log.debug("run finished: %s", outcome.to_dict())
    return ExecutionResult(outcome, tr, stats, details)


def _outcome(scenario: Scenario, server: Server, clients: dict[int, Client], verdicts: dict[int, str]) -> Outcome:
    p = scenario.params
    if server.output is not None:
        if p.mode is Mode.LISA_PLUS:
            for i in sorted(verdicts):
                if i not in scenario.corruption and verdicts[i] != "accept":
                    return Outcome("abort", reason=verdicts[i], round=LAST_ROUND, party=i)
        return Outcome("output", y=tuple(int(v) for v in server.output))
    aborted = sorted(
        ((c.aborted.round, i, c.aborted.reason) for i, c in clients.items() if c.aborted is not None),
    )
    if aborted:
        r, i, reason = aborted[0]
        return Outcome("abort", reason=reason, round=r, party=i)
    exc = server.abort or ProtocolAbort("no-output", LAST_ROUND, SERVER)
    return Outcome("abort", reason=exc.reason, round=exc.round, party=exc.party)


def _stats(session: Session, scenario: Scenario, tr: Transcript) -> dict[int, PartyStats]:
    n = session.params.n
    stats = {i: PartyStats(roles=_roles(session, i, scenario.corruption)) for i in range(n + 1)}
    for msg in tr.messages:
        size = msg.size
        snd, rcv = stats[msg.sender], stats[msg.receiver]
        snd.messages_sent += 1
        snd.bytes_sent += size
        rcv.messages_received += 1
        rcv.bytes_received += size
    for i in range(1, n + 1):
        stats[i].rounds_online = sum(scenario.online(i, r) for r in range(2, LAST_ROUND + 1))
    stats[SERVER].rounds_online = LAST_ROUND - 1
    return stats


def surviving_sum(scenario: Scenario, u2) -> np.ndarray:
    """Plain componentwise sum of the inputs of ``u2``, the reference output."""
    p = scenario.params
    xs = scenario.input_matrix()
    return modvec.total((modvec.from_ints(xs[i - 1], p.modulus) for i in u2), p.m, p.modulus)
