"""Protocol roles, wire format, and the honest server."""

from .client import Client
from .roles import (
    EncryptedKeyShare,
    IntegrityBundle,
    Opening,
    PartyKeys,
    ProtocolAbort,
    PublicKeys,
    PublishedResult,
    Session,
    backup_round4,
    backup_round5,
    committee_round2,
    committee_round3,
    partial_blinding,
    user_round2,
    user_verify_output,
)
from .server import Server
from .wire import SERVER, Kind, Message

__all__ = [
    "Client",
    "EncryptedKeyShare",
    "IntegrityBundle",
    "Kind",
    "Message",
    "Opening",
    "PartyKeys",
    "ProtocolAbort",
    "PublicKeys",
    "PublishedResult",
    "SERVER",
    "Server",
    "Session",
    "backup_round4",
    "backup_round5",
    "committee_round2",
    "committee_round3",
    "partial_blinding",
    "user_round2",
    "user_verify_output",
]
