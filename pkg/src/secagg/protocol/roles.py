"""Per-role protocol steps as functions of explicit state.

Naming follows the role a party plays in one aggregation round: every user
blinds its input; committee members share and later use their committee key;
backup neighbors hold key shares and release them when a committee member
has dropped out.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .. import modvec
from ..crypto import ae, commit
from ..crypto.keys import KeyPair, ds_gen, ds_sign, ds_verify, ka_derive, ka_gen, scalar_to_keypair
from ..crypto.prg import prg_expand
from ..crypto.shamir import FIELD_PRIME, Share, additive_share, ss_recon, ss_share
from ..params import Mode, ProtocolParams
from ..selection import BeaconSeed, committee, neighborhood
from .wire import encode_ids

CTX_PRG = "prg"
CTX_ENC = "enc"


class ProtocolAbort(Exception):
    def __init__(self, reason: str, round_no: int, party: int):
        super().__init__(f"{reason} (party {party}, round {round_no})")
        self.reason = reason
        self.round = round_no
        self.party = party


# ---------------------------------------------------------------------------
# Keys and directory
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PublicKeys:
    mask: bytes
    committee: bytes
    signing: bytes


@dataclass(frozen=True)
class PartyKeys:
    party: int
    mask: KeyPair
    committee: KeyPair
    signing: KeyPair

    @classmethod
    def derive(cls, master_seed: bytes, party: int) -> PartyKeys:
        base = master_seed + struct.pack(">Q", party)
        return cls(
            party=party,
            mask=ka_gen(base + b"/mask"),
            committee=ka_gen(base + b"/committee"),
            signing=ds_gen(base + b"/signing"),
        )

    @property
    def public(self) -> PublicKeys:
        return PublicKeys(self.mask.public, self.committee.public, self.signing.public)


Directory = Mapping[int, PublicKeys]


# ---------------------------------------------------------------------------
# Session: parameters plus the beacon-derived selections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Session:
    params: ProtocolParams
    beacon: BeaconSeed

    @cached_property
    def committee(self) -> list[int]:
        return committee(self.beacon, self.params.n, self.params.k)

    @cached_property
    def committee_set(self) -> frozenset[int]:
        return frozenset(self.committee)

    @cached_property
    def neighborhoods(self) -> dict[int, list[int]]:
        return {j: neighborhood(self.beacon, j, self.params.n, self.params.ell) for j in self.committee}

    @cached_property
    def neighbor_position(self) -> dict[int, dict[int, int]]:
        """neighbor_position[j][i] = share index of neighbor i for member j."""
        return {j: {i: p + 1 for p, i in enumerate(lj)} for j, lj in self.neighborhoods.items()}

    @cached_property
    def backups(self) -> frozenset[int]:
        return frozenset(i for lj in self.neighborhoods.values() for i in lj)

    @property
    def tag(self) -> bytes:
        return self.beacon.to_bytes()


# ---------------------------------------------------------------------------
# Signed statements (domain-separated, bound to the session)
# ---------------------------------------------------------------------------


def kdrop_statement(session: Session, k_drop) -> bytes:
    return b"secagg/kdrop" + session.tag + encode_ids(k_drop)


def commitment_statement(session: Session, party: int, comm: bytes) -> bytes:
    return b"secagg/comm" + session.tag + struct.pack(">Q", party) + comm


def aggregate_statement(session: Session, agg: bytes, u2) -> bytes:
    return b"secagg/agg" + session.tag + agg + encode_ids(u2)


def opening_statement(session: Session, member: int, rho: bytes) -> bytes:
    return b"secagg/rho" + session.tag + struct.pack(">Q", member) + rho


def _ae_context(purpose: bytes, session: Session) -> bytes:
    return b"secagg/" + purpose + session.tag


# ---------------------------------------------------------------------------
# Round 2
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EncryptedKeyShare:
    member: int
    neighbor: int
    ciphertext: bytes


@dataclass(frozen=True)
class IntegrityBundle:
    commitment: commit.VectorCommitment
    signature: bytes
    enc_rand_shares: dict[int, bytes]


def mask_vector(secret: bytes | int, public: bytes, m: int, modulus: int) -> np.ndarray:
    return prg_expand(ka_derive(secret, public, CTX_PRG), m, modulus)


def user_round2(
    session: Session,
    x: np.ndarray,
    keys: PartyKeys,
    committee_pks: Mapping[int, bytes],
) -> tuple[np.ndarray, IntegrityBundle | None]:
    """Blind ``x`` with one mask per committee member."""
    p = session.params
    if len(x) != p.m:
        raise ValueError(f"input has length {len(x)}, expected {p.m}")
    c = modvec.from_ints(x, p.modulus)
    for j in session.committee:
        if j not in committee_pks:
            raise KeyError(f"missing committee key for {j}")
        c = modvec.add(c, mask_vector(keys.mask.secret, committee_pks[j], p.m, p.modulus), p.modulus)
    bundle = None
    if p.mode is Mode.LISA_PLUS:
        bundle = _integrity_bundle(session, c, x, keys, committee_pks)
    return c, bundle


def _integrity_bundle(session, c, x, keys: PartyKeys, committee_pks) -> IntegrityBundle:
    p = session.params
    q = commit.GROUP_ORDER
    rseed = hashlib.sha256(b"secagg/commit-rand" + keys.mask.secret + session.tag).digest()
    r = [int(v) for v in prg_expand(rseed, p.m, q)]
    comm = commit.vcomm_gen([int(v) % q for v in x], r)
    sig = ds_sign(keys.signing.secret, commitment_statement(session, keys.party, commit.vcomm_bytes(comm)))
    # k-of-k additive shares of the randomness vector, one vector per member
    per_member = {j: [] for j in session.committee}
    for comp, rc in enumerate(r):
        parts = additive_share(rc, p.k, rseed + struct.pack(">I", comp), q)
        for j, part in zip(session.committee, parts):
            per_member[j].append(part)
    enc = {}
    for j, vec in per_member.items():
        key = ka_derive(keys.mask.secret, committee_pks[j], CTX_ENC)
        nonce = ae.derive_nonce(2, keys.party, j, b"rand-share")
        enc[j] = ae.ae_encrypt(key, scalars_bytes(vec), nonce, _ae_context(b"rand-share", session))
    return IntegrityBundle(comm, sig, enc)


def scalars_bytes(vals: Sequence[int]) -> bytes:
    return b"".join(int(v).to_bytes(commit.SCALAR_BYTES, "big") for v in vals)


def scalars_from(data: bytes, m: int) -> list[int]:
    w = commit.SCALAR_BYTES
    if len(data) != m * w:
        raise ValueError("scalar vector has wrong length")
    vals = [int.from_bytes(data[i : i + w], "big") for i in range(0, len(data), w)]
    if any(v >= commit.GROUP_ORDER for v in vals):
        raise ValueError("scalar out of range")
    return vals


def committee_round2(session: Session, keys: PartyKeys, pki: Directory) -> list[EncryptedKeyShare]:
    """Shamir-share the committee secret among the member's backup neighbors."""
    p = session.params
    j = keys.party
    if j not in session.committee_set:
        raise ValueError(f"party {j} is not on the committee")
    lj = session.neighborhoods[j]
    seed = hashlib.sha256(b"secagg/share-poly" + keys.committee.secret + session.tag).digest()
    shares = ss_share(keys.committee.scalar, p.t, p.ell, seed)
    out = []
    for i, share in zip(lj, shares):
        key = ka_derive(keys.mask.secret, pki[i].mask, CTX_ENC)
        nonce = ae.derive_nonce(2, j, i, b"key-share")
        ct = ae.ae_encrypt(key, share.to_bytes(), nonce, _ae_context(b"key-share", session))
        out.append(EncryptedKeyShare(j, i, ct))
    return out


# ---------------------------------------------------------------------------
# Round 3
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Opening:
    """A committee member's signed aggregate commitment and randomness share."""

    member: int
    rho: tuple[int, ...]
    rho_sig: bytes
    agg: commit.VectorCommitment
    agg_sig: bytes


def partial_blinding(session: Session, committee_secret: bytes | int, u2: Sequence[int], pki: Directory) -> np.ndarray:
    p = session.params
    acc = modvec.zeros(p.m, p.modulus)
    for i in u2:
        acc = modvec.add(acc, mask_vector(committee_secret, pki[i].mask, p.m, p.modulus), p.modulus)
    return acc


def committee_round3(
    session: Session,
    keys: PartyKeys,
    u2: Sequence[int],
    pki: Directory,
    commitments: Mapping[int, tuple[bytes, bytes]] | None = None,
    rand_shares: Mapping[int, bytes] | None = None,
) -> tuple[np.ndarray, Opening | None]:
    p = session.params
    j = keys.party
    if len(set(u2)) < p.min_inputs:
        raise ProtocolAbort("too-few-inputs", 3, j)
    if any(not 1 <= i <= p.n for i in u2):
        raise ProtocolAbort("invalid-survivor-set", 3, j)
    opening = None
    if p.mode is Mode.LISA_PLUS:
        opening = _aggregate_opening(session, keys, u2, pki, commitments or {}, rand_shares or {})
    return partial_blinding(session, keys.committee.secret, u2, pki), opening


def _aggregate_opening(session, keys, u2, pki, commitments, rand_shares) -> Opening:
    p = session.params
    j = keys.party
    comms = []
    for i in u2:
        entry = commitments.get(i)
        if entry is None:
            raise ProtocolAbort("bad-commitment-signature", 3, j)
        comm_bytes, sig = entry
        if not ds_verify(pki[i].signing, sig, commitment_statement(session, i, comm_bytes)):
            raise ProtocolAbort("bad-commitment-signature", 3, j)
        try:
            comms.append(commit.vcomm_from_bytes(comm_bytes, p.m))
        except ValueError:
            raise ProtocolAbort("bad-commitment-signature", 3, j) from None
    agg = commit.vcomm_product(comms, p.m)
    rho = [0] * p.m
    q = commit.GROUP_ORDER
    for i in u2:
        ct = rand_shares.get(i)
        if ct is None:
            raise ProtocolAbort("missing-randomness-share", 3, j)
        key = ka_derive(keys.committee.secret, pki[i].mask, CTX_ENC)
        try:
            vec = scalars_from(ae.ae_decrypt(key, ct, _ae_context(b"rand-share", session)), p.m)
        except (ae.AuthenticationError, ae.MalformedCiphertext, ValueError):
            raise ProtocolAbort("corrupt-randomness-share", 3, j) from None
        rho = [(a + b) % q for a, b in zip(rho, vec)]
    agg_bytes = commit.vcomm_bytes(agg)
    rho_bytes = scalars_bytes(rho)
    return Opening(
        member=j,
        rho=tuple(rho),
        rho_sig=ds_sign(keys.signing.secret, opening_statement(session, j, rho_bytes)),
        agg=agg,
        agg_sig=ds_sign(keys.signing.secret, aggregate_statement(session, agg_bytes, u2)),
    )


def recover_rho(session: Session, committee_secret: int, u2: Sequence[int], pki: Directory, rand_shares: Mapping[int, bytes]) -> tuple[int, ...]:
    """Server-side ρ_j for a member whose committee key was reconstructed."""
    p = session.params
    q = commit.GROUP_ORDER
    rho = [0] * p.m
    for i in u2:
        key = ka_derive(committee_secret, pki[i].mask, CTX_ENC)
        vec = scalars_from(ae.ae_decrypt(key, rand_shares[i], _ae_context(b"rand-share", session)), p.m)
        rho = [(a + b) % q for a, b in zip(rho, vec)]
    return tuple(rho)


# ---------------------------------------------------------------------------
# Rounds 4 and 5: backup neighbors
# ---------------------------------------------------------------------------


def backup_round4(session: Session, keys: PartyKeys, k_drop: Sequence[int]) -> bytes | None:
    """Check the announced drop set; sign it in the malicious modes."""
    p = session.params
    i = keys.party
    if not set(k_drop) <= session.committee_set:
        raise ProtocolAbort("invalid-drop-set", 4, i)
    if len(set(k_drop)) >= p.k - p.c_tilde:
        raise ProtocolAbort("too-many-committee-dropouts", 4, i)
    if p.mode.malicious:
        return ds_sign(keys.signing.secret, kdrop_statement(session, k_drop))
    return None


def acknowledged(session: Session, k_drop: Sequence[int], signatures: Mapping[int, bytes], pki: Directory) -> set[int]:
    stmt = kdrop_statement(session, k_drop)
    return {
        l for l, sig in signatures.items()
        if l in session.backups and l in pki and ds_verify(pki[l].signing, sig, stmt)
    }


def backup_round5(
    session: Session,
    keys: PartyKeys,
    k_drop: Sequence[int],
    signatures: Mapping[int, bytes] | None,
    stored: Mapping[int, bytes],
    pki: Directory,
) -> list[tuple[int, Share]]:
    """Release this neighbor's shares of the dropped members' keys."""
    p = session.params
    i = keys.party
    if p.mode.malicious:
        acks = acknowledged(session, k_drop, signatures or {}, pki)
        for j in session.committee:
            if sum(1 for l in session.neighborhoods[j] if l in acks) < p.t:
                raise ProtocolAbort("insufficient-acks", 5, i)
    out = []
    for j in sorted(set(k_drop)):
        pos = session.neighbor_position[j].get(i)
        if pos is None or j not in stored:
            continue
        key = ka_derive(keys.mask.secret, pki[j].mask, CTX_ENC)
        try:
            share = Share.from_bytes(ae.ae_decrypt(key, stored[j], _ae_context(b"key-share", session)))
        except (ae.AuthenticationError, ae.MalformedCiphertext, ValueError):
            raise ProtocolAbort("corrupt-share", 5, i) from None
        if share.index != pos:
            raise ProtocolAbort("corrupt-share", 5, i)
        out.append((j, share))
    return out


# ---------------------------------------------------------------------------
# Round 6: published result and its verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PublishedResult:
    y: tuple[int, ...]
    u2: tuple[int, ...]
    alive: dict[int, Opening] = field(default_factory=dict)
    recovered: dict[int, tuple[int, ...]] = field(default_factory=dict)


def user_verify_output(session: Session, result: PublishedResult, pki: Directory) -> str:
    """Return "accept" or the name of the first failed check."""
    p = session.params
    q = commit.GROUP_ORDER
    members = set(result.alive) | set(result.recovered)
    if set(result.alive) & set(result.recovered) or members != session.committee_set:
        return "committee-mismatch"
    if len(result.alive) < p.k - p.c_tilde:
        return "too-few-alive"
    aggs = {op.agg for op in result.alive.values()}
    if len(aggs) != 1:
        return "inconsistent-commitments"
    for j, op in sorted(result.alive.items()):
        if not ds_verify(pki[j].signing, op.rho_sig, opening_statement(session, j, scalars_bytes(op.rho))):
            return "bad-opening-signature"
    for j, op in sorted(result.alive.items()):
        if not ds_verify(pki[j].signing, op.agg_sig, aggregate_statement(session, commit.vcomm_bytes(op.agg), result.u2)):
            return "bad-commitment-signature"
    agg = next(iter(aggs))
    rho_total = [0] * p.m
    for rho in list(op.rho for op in result.alive.values()) + list(result.recovered.values()):
        if len(rho) != p.m:
            return "commitment-mismatch"
        rho_total = [(a + b) % q for a, b in zip(rho_total, rho)]
    if len(result.y) != p.m or not commit.vcomm_vfy(agg, result.y, rho_total):
        return "commitment-mismatch"
    return "accept"


def reconstruct_committee_key(shares: Sequence[Share], t: int, expected_public: bytes) -> int | None:
    """Reconstruct a committee scalar; None if it does not match the directory."""
    scalar = ss_recon(shares, t)
    if not 1 <= scalar < FIELD_PRIME:
        return None
    if scalar_to_keypair(scalar).public != expected_public:
        return None
    return scalar


__all__ = [
    "EncryptedKeyShare",
    "IntegrityBundle",
    "Opening",
    "PartyKeys",
    "ProtocolAbort",
    "PublicKeys",
    "PublishedResult",
    "Session",
    "backup_round4",
    "backup_round5",
    "committee_round2",
    "committee_round3",
    "partial_blinding",
    "user_round2",
    "user_verify_output",
]
