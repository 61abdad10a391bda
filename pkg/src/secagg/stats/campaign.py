"""Multi-round campaigns: role frequencies, key recoveries, and traffic."""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import modvec
from ..params import ProtocolParams
from ..protocol.roles import Session
from ..selection import HashBeacon
from ..sim.scenario import sample_corruptions_and_dropouts
from .traffic import simulate_round


@dataclass
class Summary:
    mean: float
    sd: float
    min: float
    max: float

    @classmethod
    def of(cls, values) -> Summary:
        a = np.asarray(values, dtype=float)
        sd = float(a.std(ddof=1)) if a.size > 1 else 0.0
        return cls(float(a.mean()), sd, float(a.min()), float(a.max()))


@dataclass
class CampaignReport:
    params: dict
    rounds: int
    timing: str
    committee: Summary
    backup: Summary
    key_recoveries: Summary
    recoveries_per_round: list[int]
    recoveries_ecdf: list[tuple[int, float]]
    aborted_rounds: int
    messages: Summary
    messages_per_round_mean: float
    bytes: Summary
    bytes_per_round_mean: float
    regular_bytes_per_round_mean: float
    per_round: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isnan(d["regular_bytes_per_round_mean"]):
            d["regular_bytes_per_round_mean"] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["round", "metric", "value"])
        for row in self.per_round:
            for metric in sorted(k for k in row if k != "round"):
                w.writerow([row["round"], metric, _fmt(row[metric])])
        for name in ("committee", "backup", "key_recoveries", "messages", "bytes"):
            for stat, v in asdict(getattr(self, name)).items():
                w.writerow(["summary", f"{name}_{stat}", _fmt(v)])
        for name in (
            "rounds",
            "aborted_rounds",
            "messages_per_round_mean",
            "bytes_per_round_mean",
            "regular_bytes_per_round_mean",
        ):
            w.writerow(["summary", name, _fmt(getattr(self, name))])
        for value, frac in self.recoveries_ecdf:
            w.writerow(["summary", f"recoveries_ecdf_le_{value}", _fmt(frac)])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float) and math.isnan(v):
        return ""
    if isinstance(v, float):
        return repr(round(v, 10))
    return str(v)


def ecdf(values) -> list[tuple[int, float]]:
    """(v, fraction of values <= v) at each distinct value, ascending."""
    vals, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
    cum = np.cumsum(counts) / counts.sum()
    return [(int(v), float(c)) for v, c in zip(vals, cum)]


def _round_seed(master_seed: bytes, r: int) -> bytes:
    return master_seed + b"/round" + struct.pack(">Q", r)


def run_campaign(params: ProtocolParams, rounds: int, master_seed: bytes, timing: str = "early") -> CampaignReport:
    """Simulate ``rounds`` executions with a fresh beacon and fresh dropouts each.

    Corruption is resampled too, but corrupt users follow the protocol under
    an honest server, so it has no effect on the statistics here.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if params.k < 1:
        raise ValueError("a campaign needs a committee (k >= 1)")
    n = params.n
    beacon = HashBeacon(master_seed)
    committee_count = np.zeros(n + 1, dtype=np.int64)
    backup_count = np.zeros(n + 1, dtype=np.int64)
    messages = np.zeros(n + 1, dtype=np.int64)
    nbytes = np.zeros(n + 1, dtype=np.int64)
    regular_bytes = 0
    regular_slots = 0
    recoveries: list[int] = []
    per_round: list[dict] = []
    aborted = 0
    for r in range(1, rounds + 1):
        session = Session(params, beacon(r))
        _, dropouts = sample_corruptions_and_dropouts(_round_seed(master_seed, r), n, params.gamma, params.delta, timing)
        tr = simulate_round(session, dropouts)
        special = np.zeros(n + 1, dtype=bool)
        for j, lj in session.neighborhoods.items():
            committee_count[j] += 1
            special[j] = True
            np.add.at(backup_count, lj, 1)
            special[lj] = True
        users = slice(1, None)
        msgs = tr.messages_sent + tr.messages_received
        byts = tr.bytes_sent + tr.bytes_received
        messages[users] += msgs[users]
        nbytes[users] += byts[users]
        for i, rnd in dropouts.items():
            if rnd <= 2:
                special[i] = True
        regular = ~special[users]
        regular_bytes += int(byts[users][regular].sum())
        regular_slots += int(regular.sum())
        recoveries.append(tr.recovered)
        aborted += tr.abort is not None
        per_round.append(
            {
                "round": r,
                "committee_dropouts": len(tr.k_drop),
                "key_recoveries": tr.recovered,
                "aborted": int(tr.abort is not None),
                "messages_mean": float(msgs[users].mean()),
                "bytes_mean": float(byts[users].mean()),
            }
        )
    u = slice(1, None)
    return CampaignReport(
        params=params.to_dict(),
        rounds=rounds,
        timing=timing,
        committee=Summary.of(committee_count[u]),
        backup=Summary.of(backup_count[u]),
        key_recoveries=Summary.of(recoveries),
        recoveries_per_round=recoveries,
        recoveries_ecdf=ecdf(recoveries),
        aborted_rounds=aborted,
        messages=Summary.of(messages[u]),
        messages_per_round_mean=float(messages[u].mean() / rounds),
        bytes=Summary.of(nbytes[u]),
        bytes_per_round_mean=float(nbytes[u].mean() / rounds),
        regular_bytes_per_round_mean=regular_bytes / regular_slots if regular_slots else math.nan,
        per_round=per_round,
    )


def baseline_bytes(m: int, modulus: int) -> int:
    """One m-vector of residues: what a user sends without secure aggregation."""
    return m * modvec.element_bytes(modulus)


def expansion_factor(report: CampaignReport, m: int, modulus: int, population: str = "all") -> float:
    """Mean per-user bytes per round (sent + received) over the plaintext baseline.

    ``population="regular"`` averages only user-rounds without a committee or
    backup role in which the user submitted its input.
    """
    if report.params.get("k", 0) < 1:
        raise ValueError("expansion factor needs k >= 1")
    if population == "all":
        num = report.bytes_per_round_mean
    elif population == "regular":
        num = report.regular_bytes_per_round_mean
        if math.isnan(num):
            raise ValueError("no regular users in this campaign")
    else:
        raise ValueError("population must be 'all' or 'regular'")
    return num / baseline_bytes(m, modulus)
