"""Scenario definition, validation, sampling, and YAML loading."""

from __future__ import annotations

import hashlib
import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ..crypto.commit import GROUP_ORDER
from ..crypto.prg import prg_expand
from ..params import Mode, ProtocolParams, plan_params
from ..selection import PartyRange, select
from .adversary import Strategy, make_strategy

log = logging.getLogger(__name__)

LAST_ROUND = 6


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    params: ProtocolParams
    master_seed: bytes
    inputs: np.ndarray | None = None
    dropouts: dict[int, int] = field(default_factory=dict)
    corruption: frozenset[int] = frozenset()
    adversary: Strategy | None = None
    beacon_round: int = 0

    def input_matrix(self) -> list[np.ndarray]:
        p = self.params
        if self.inputs is not None:
            return [np.asarray(row) for row in self.inputs]
        return [
            prg_expand(hashlib.sha256(b"secagg/input" + self.master_seed + struct.pack(">Q", i)).digest(), p.m, p.modulus)
            for i in range(1, p.n + 1)
        ]

    def validate(self) -> None:
        p = self.params
        if not self.master_seed:
            raise ScenarioError("master_seed must be nonempty")
        if self.inputs is not None:
            shape = np.shape(self.inputs)
            if len(shape) != 2 or shape[0] != p.n or shape[1] != p.m:
                raise ScenarioError(f"inputs must be an {p.n} x {p.m} matrix, got shape {shape}")
            if any(int(v) < 0 or int(v) >= p.modulus for row in self.inputs for v in row):
                raise ScenarioError("inputs must be residues in [0, modulus)")
        for party, rnd in self.dropouts.items():
            if not 1 <= party <= p.n:
                raise ScenarioError(f"dropout for unknown party {party}")
            if not 1 <= rnd <= LAST_ROUND:
                raise ScenarioError(f"dropout round {rnd} outside 1..{LAST_ROUND}")
        if any(not 1 <= c <= p.n for c in self.corruption):
            raise ScenarioError("corruption set names unknown parties")
        if len(self.corruption) > math.floor(p.gamma * p.n + 1e-9):
            raise ScenarioError(f"{len(self.corruption)} corrupt users exceed gamma*n = {p.gamma * p.n:g}")
        if len(self.dropouts) > math.floor(p.delta * p.n + 1e-9):
            log.warning("%d dropouts exceed delta*n = %g", len(self.dropouts), p.delta * p.n)
        strategy = self.adversary
        if strategy is not None:
            strategy.check(p)

    def online(self, party: int, round_no: int) -> bool:
        """Whether ``party`` still acts (sends or receives) in ``round_no``."""
        return self.dropouts.get(party, LAST_ROUND + 1) > round_no

    def shares_key(self, party: int) -> bool:
        """Committee key sharing opens round 2, so round-2 dropouts complete it."""
        return self.dropouts.get(party, LAST_ROUND + 1) >= 2


def _seed(master_seed: bytes, label: bytes) -> bytes:
    return hashlib.sha256(b"secagg/sample/" + label + master_seed).digest()


def sample_corruptions_and_dropouts(
    master_seed: bytes, n: int, gamma: float, delta: float, timing: str = "uniform"
) -> tuple[frozenset[int], dict[int, int]]:
    """Exactly floor(γn) corrupt and floor(δn) dropped users, uniformly chosen.

    ``timing="uniform"`` draws each dropout round from 2..5; ``"early"`` drops
    everyone at round 2, the worst case assumed by the parameter analysis.
    """
    if timing not in ("uniform", "early"):
        raise ValueError("timing must be 'uniform' or 'early'")
    corrupt = frozenset(select(_seed(master_seed, b"corrupt"), PartyRange(n), math.floor(gamma * n + 1e-9)))
    dropped = select(_seed(master_seed, b"dropped"), PartyRange(n), math.floor(delta * n + 1e-9))
    if timing == "early":
        return corrupt, {i: 2 for i in dropped}
    raw = hashlib.shake_256(_seed(master_seed, b"rounds")).digest(max(1, len(dropped)))
    return corrupt, {i: 2 + raw[pos] % 4 for pos, i in enumerate(dropped)}


# ---------------------------------------------------------------------------
# YAML loading
# ---------------------------------------------------------------------------


def _seed_bytes(value: Any) -> bytes:
    if isinstance(value, int):
        return value.to_bytes(8, "big")
    s = str(value)
    if s.startswith("hex:"):
        return bytes.fromhex(s[4:])
    return s.encode("utf-8")


def params_from_config(cfg: dict) -> ProtocolParams:
    if "params" in cfg and "plan" in cfg:
        raise ScenarioError("give either 'params' or 'plan', not both")
    if "params" in cfg:
        d = dict(cfg["params"])
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        if str(d.get("modulus", "")).lower() in ("group", "group-order"):
            d["modulus"] = GROUP_ORDER
        try:
            return ProtocolParams.from_dict(d)
        except (TypeError, ValueError) as exc:
            raise ScenarioError(str(exc)) from None
    if "plan" in cfg:
        d = dict(cfg["plan"])
        try:
            return plan_params(
                n=int(d["n"]),
                gamma=float(d["gamma"]),
                delta=float(d["delta"]),
                eta=float(d.get("eta", 40)),
                lam=float(d.get("lambda", d.get("lam", 40))),
                mode=Mode(d.get("mode", "malicious")),
                use_exact=bool(d.get("exact", True)),
                m=int(d.get("m", 1)),
                modulus=d.get("modulus"),
                alpha=d.get("alpha"),
            )
        except KeyError as exc:
            raise ScenarioError(f"plan section missing {exc}") from None
    raise ScenarioError("config needs a 'params' or 'plan' section")


def scenario_from_config(cfg: dict) -> Scenario:
    if not isinstance(cfg, dict):
        raise ScenarioError("config must be a mapping")
    params = params_from_config(cfg)
    seed = _seed_bytes(cfg.get("master_seed", "secagg"))
    inputs = cfg.get("inputs", "random")
    matrix = None if inputs == "random" else np.array(inputs, dtype=object)
    corruption: frozenset[int] = frozenset(int(c) for c in cfg.get("corruption", []))
    dropouts = {int(k): int(v) for k, v in (cfg.get("dropouts") or {}).items()}
    sample = cfg.get("sample")
    if sample:
        timing = sample.get("timing", "uniform") if isinstance(sample, dict) else "uniform"
        corruption, dropouts = sample_corruptions_and_dropouts(seed, params.n, params.gamma, params.delta, timing)
    adv = cfg.get("adversary") or {"strategy": "honest"}
    try:
        strategy = make_strategy(adv)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad adversary spec: {exc}") from None
    return Scenario(
        params=params,
        master_seed=seed,
        inputs=matrix,
        dropouts=dropouts,
        corruption=corruption,
        adversary=strategy,
        beacon_round=int(cfg.get("beacon_round", 0)),
    )


def load_config(path: str | Path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{path} does not contain a mapping")
    return data
