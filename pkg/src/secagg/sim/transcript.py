"""Execution transcripts as newline-delimited JSON with base64 payloads."""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from typing import Iterator, Union

from ..protocol.wire import Kind, Message

Entry = Union[Message, dict]


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def message_record(msg: Message) -> dict:
    return {
        "type": "message",
        "round": msg.round,
        "kind": msg.kind.name,
        "sender": msg.sender,
        "receiver": msg.receiver,
        "size": msg.size,
        "payload": base64.b64encode(msg.payload).decode("ascii"),
    }


def message_from_record(rec: dict) -> Message:
    return Message(rec["round"], Kind[rec["kind"]], rec["sender"], rec["receiver"], base64.b64decode(rec["payload"]))


@dataclass
class Transcript:
    header: dict = field(default_factory=dict)
    entries: list[Entry] = field(default_factory=list)
    outcome: dict = field(default_factory=dict)

    def record(self, msg: Message) -> None:
        self.entries.append(msg)

    def event(self, kind: str, **info) -> None:
        self.entries.append({"type": kind, **info})

    @property
    def messages(self) -> list[Message]:
        return [e for e in self.entries if isinstance(e, Message)]

    def events(self, kind: str | None = None) -> list[dict]:
        return [e for e in self.entries if isinstance(e, dict) and (kind is None or e["type"] == kind)]

    def lines(self) -> Iterator[str]:
        yield _dumps({"type": "header", **self.header})
        for e in self.entries:
            yield _dumps(message_record(e) if isinstance(e, Message) else e)
        yield _dumps({"type": "outcome", **self.outcome})

    def to_ndjson(self) -> str:
        return "\n".join(self.lines()) + "\n"

    @classmethod
    def from_ndjson(cls, text: str) -> Transcript:
        tr = cls()
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {n}: {exc}") from None
            kind = rec.pop("type", None)
            if kind == "header":
                tr.header = rec
            elif kind == "outcome":
                tr.outcome = rec
            elif kind == "message":
                rec["type"] = kind
                tr.entries.append(message_from_record(rec))
            elif kind is not None:
                tr.entries.append({"type": kind, **rec})
            else:
                raise ValueError(f"line {n}: record without type")
        return tr
