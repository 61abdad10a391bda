"""Crypto-free model of the honest-server message schedule.

Given a session and a dropout schedule, this reproduces which messages the
harness would record and their sizes, without generating keys or masks. The
campaign runner relies on it to simulate thousands of users per round.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..params import Mode
from ..protocol import messages as M
from ..protocol.roles import Session
from ..protocol.wire import SERVER

LAST_ROUND = 6


@dataclass
class RoundTraffic:
    messages_sent: np.ndarray
    messages_received: np.ndarray
    bytes_sent: np.ndarray
    bytes_received: np.ndarray
    k_drop: list[int]
    abort: str | None

    @property
    def recovered(self) -> int:
        return 0 if self.abort else len(self.k_drop)


def simulate_round(session: Session, dropouts: dict[int, int]) -> RoundTraffic:
    """Per-party traffic of one honest-server execution (index 0 is the server)."""
    p = session.params
    n = p.n
    ms = np.zeros(n + 1, dtype=np.int64)
    mr = np.zeros(n + 1, dtype=np.int64)
    bs = np.zeros(n + 1, dtype=np.int64)
    br = np.zeros(n + 1, dtype=np.int64)

    def drop(i: int) -> int:
        return dropouts.get(i, LAST_ROUND + 1)

    def online(i: int, r: int) -> bool:
        return drop(i) > r

    def send(snd: int, rcv: int, size: int) -> None:
        ms[snd] += 1
        bs[snd] += size
        mr[rcv] += 1
        br[rcv] += size

    def to_users(ids: np.ndarray, size: int) -> None:
        ms[SERVER] += len(ids)
        bs[SERVER] += size * len(ids)
        mr[ids] += 1
        br[ids] += size

    lisa_plus = p.mode is Mode.LISA_PLUS
    committee = session.committee
    sharing = [j for j in committee if drop(j) >= 2]

    # round 2
    for j in sharing:
        send(j, SERVER, M.size_key_shares(p))
    u2 = [i for i in range(1, n + 1) if online(i, 2)]
    up = np.array(u2, dtype=np.int64)
    up_size = M.size_masked_input(p) + (M.size_integrity(p) if lisa_plus else 0)
    ms[up] += 2 if lisa_plus else 1
    bs[up] += up_size
    mr[SERVER] += len(u2) * (2 if lisa_plus else 1)
    br[SERVER] += len(u2) * up_size

    # round 3
    forward = np.zeros(n + 1, dtype=np.int64)
    for j in sharing:
        forward[session.neighborhoods[j]] += 1
    stored_by = {i for i in np.nonzero(forward)[0].tolist() if online(i, 3)}
    for i in sorted(stored_by):
        send(SERVER, i, M.size_share_forward(int(forward[i])))
    u2_set = set(u2)
    alive = []
    for j in committee:
        if j not in u2_set or not online(j, 3):
            continue
        send(SERVER, j, M.size_ids(len(u2)))
        if lisa_plus:
            send(SERVER, j, M.size_commitments(p, len(u2)))
            send(SERVER, j, M.size_rand_shares(p, len(u2)))
        if len(u2) < p.min_inputs:
            continue
        send(j, SERVER, M.size_masked_input(p))
        if lisa_plus:
            send(j, SERVER, M.size_opening(p))
        alive.append(j)

    # round 4
    alive_set = set(alive)
    k_drop = [j for j in committee if j not in alive_set]
    if not k_drop:
        return _finish(session, ms, mr, bs, br, k_drop, None, u2, online)
    backups = sorted(session.backups)
    got_drop = [i for i in backups if online(i, 4)]
    to_users(np.array(got_drop, dtype=np.int64), M.size_ids(len(k_drop)))
    if len(k_drop) >= p.k - p.c_tilde:
        return _finish(session, ms, mr, bs, br, k_drop, "insufficient-shares", u2, online)
    acks = []
    if p.mode.malicious:
        for i in got_drop:
            send(i, SERVER, M.size_ack())
        acks = got_drop

    # round 5
    if p.mode.malicious:
        receivers = [i for i in acks if online(i, 5)]
        to_users(np.array(receivers, dtype=np.int64), M.size_ack_set(len(acks)))
        ack_set = set(acks)
        if any(sum(1 for l in session.neighborhoods[j] if l in ack_set) < p.t for j in committee):
            return _finish(session, ms, mr, bs, br, k_drop, "insufficient-shares", u2, online)
    else:
        receivers = [i for i in got_drop if online(i, 5)]
    releasing = set(receivers) & stored_by
    released = {j: 0 for j in k_drop}
    per_sender: dict[int, int] = {}
    sharing_set = set(sharing)
    for j in k_drop:
        if j not in sharing_set:
            continue
        for i in session.neighborhoods[j]:
            if i in releasing:
                released[j] += 1
                per_sender[i] = per_sender.get(i, 0) + 1
    for i in sorted(per_sender):
        send(i, SERVER, M.size_share_release(per_sender[i]))

    # round 6
    if any(c < p.t for c in released.values()):
        return _finish(session, ms, mr, bs, br, k_drop, "insufficient-shares", u2, online)
    return _finish(session, ms, mr, bs, br, k_drop, None, u2, online)


def _finish(session, ms, mr, bs, br, k_drop, abort, u2, online) -> RoundTraffic:
    p = session.params
    if abort is None and p.mode is Mode.LISA_PLUS:
        size = M.size_result(p, len(u2), p.k - len(k_drop), len(k_drop))
        ids = np.array([i for i in range(1, p.n + 1) if online(i, 6)], dtype=np.int64)
        ms[SERVER] += len(ids)
        bs[SERVER] += size * len(ids)
        mr[ids] += 1
        br[ids] += size
    return RoundTraffic(ms, mr, bs, br, list(k_drop), abort)
