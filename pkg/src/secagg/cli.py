"""Command-line interface: plan, run, campaign, verify.

Exit codes: 0 success (output / accept), 1 usage or input error, 2 protocol
abort or rejected result, 3 replayed transcript differs from the saved one.
Set SECAGG_LOG_LEVEL (e.g. DEBUG) for diagnostics on stderr.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
import os
import sys
from pathlib import Path

import click

from .params import InfeasibleError, Mode, ProtocolParams, bound_report, plan_params
from .protocol import messages as M
from .protocol.roles import PartyKeys, PublicKeys, Session, user_verify_output
from .protocol.wire import Kind, MalformedMessage
from .selection import BeaconSeed
from .sim import ScenarioError, load_config, run as run_scenario, scenario_from_config
from .sim.scenario import params_from_config
from .stats import expansion_factor, run_campaign

EXIT_ABORT = 2
EXIT_MISMATCH = 3

MODES = click.Choice([m.value for m in Mode])


def _emit(obj: dict) -> None:
    click.echo(json.dumps(obj, sort_keys=True, separators=(",", ":")))


def _fail(msg: str, code: int = 1) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


class _Group(click.Group):
    """Click reports usage errors with exit code 2; remap them to 1."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            rv = super().main(*args, **kwargs)
        except click.exceptions.Abort:
            click.echo("aborted", err=True)
            sys.exit(1)
        except click.ClickException as exc:
            exc.show()
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=_Group)
@click.version_option(package_name="artifact")
def main() -> None:
    """Secure aggregation with a sampled committee: planning and simulation."""
    level = os.environ.get("SECAGG_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--n", "n", type=int, required=True, help="Number of users.")
@click.option("--gamma", type=float, required=True, help="Corrupt-user rate.")
@click.option("--delta", type=float, required=True, help="Dropout rate.")
@click.option("--eta", type=float, default=40.0, show_default=True, help="Correctness bits.")
@click.option("--lambda", "lam", type=float, default=40.0, show_default=True, help="Security bits.")
@click.option("--mode", type=MODES, default="malicious", show_default=True)
@click.option("--exact/--bound", "exact", default=False, help="Exact hypergeometric tails instead of tail bounds.")
@click.option("--m", "m", type=int, default=1, show_default=True, help="Input vector length.")
def plan(n, gamma, delta, eta, lam, mode, exact, m):
    """Smallest committee and neighborhood meeting the failure budgets."""
    try:
        p = plan_params(n, gamma, delta, eta=eta, lam=lam, mode=Mode(mode), use_exact=exact, m=m)
    except (InfeasibleError, ValueError) as exc:
        _fail(str(exc))
    rep = bound_report(p, use_exact=exact)
    _emit({"params": p.to_dict(), "report": rep.to_dict(), "exact": exact})


def _load_scenario(config: str, scenario: str | None, mode: str | None):
    cfg = load_config(config)
    if scenario:
        cfg.update(load_config(scenario))
    if mode:
        for section in ("params", "plan"):
            if section in cfg:
                cfg[section] = {**cfg[section], "mode": mode}
    return scenario_from_config(cfg)


def _result_file(session: Session, res_bytes: bytes) -> dict:
    return {
        "params": session.params.to_dict(),
        "beacon": session.beacon.value.hex(),
        "beacon_round": session.beacon.round_index,
        "result": base64.b64encode(res_bytes).decode("ascii"),
    }


def _keys_file(session: Session, pki) -> dict:
    return {
        str(j): {"mask": pki[j].mask.hex(), "committee": pki[j].committee.hex(), "signing": pki[j].signing.hex()}
        for j in session.committee
    }


@main.command()
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), required=True, help="YAML configuration.")
@click.option("--scenario", type=click.Path(exists=True, dir_okay=False), help="YAML overlay with scenario keys.")
@click.option("--mode", type=MODES, help="Override the protocol mode.")
@click.option("--transcript-out", type=click.Path(dir_okay=False), help="Write the NDJSON transcript here.")
@click.option("--replay", type=click.Path(exists=True, dir_okay=False), help="Re-execute and compare with a saved transcript.")
@click.option("--result-out", type=click.Path(dir_okay=False), help="lisa-plus: write the published result.")
@click.option("--keys-out", type=click.Path(dir_okay=False), help="lisa-plus: write the committee public keys.")
def run(config, scenario, mode, transcript_out, replay, result_out, keys_out):
    """Execute one protocol run described by a configuration file."""
    try:
        sc = _load_scenario(config, scenario, mode)
        res = run_scenario(sc)
    except (ScenarioError, InfeasibleError, ValueError) as exc:
        _fail(str(exc))
    text = res.transcript.to_ndjson()
    if transcript_out:
        Path(transcript_out).write_text(text, encoding="utf-8")
    session = res.details["session"]
    if result_out or keys_out:
        if session.params.mode is not Mode.LISA_PLUS:
            _fail("--result-out and --keys-out need lisa-plus mode")
    if result_out:
        pub = next((m for m in res.transcript.messages if m.kind is Kind.RESULT), None)
        if pub is None:
            click.echo("warning: no result was published", err=True)
        else:
            Path(result_out).write_text(json.dumps(_result_file(session, pub.payload)) + "\n", encoding="utf-8")
    if keys_out:
        pki = {j: PartyKeys.derive(sc.master_seed, j).public for j in session.committee}
        Path(keys_out).write_text(json.dumps(_keys_file(session, pki)) + "\n", encoding="utf-8")
    _emit({"outcome": res.outcome.to_dict(), "messages": len(res.transcript.messages)})
    if replay:
        saved = Path(replay).read_text(encoding="utf-8")
        if saved != text:
            click.echo("error: replayed transcript differs from the saved one", err=True)
            sys.exit(EXIT_MISMATCH)
        click.echo("replay: identical", err=True)
    if not res.outcome.ok:
        click.echo(f"abort: {res.outcome.reason} (round {res.outcome.round})", err=True)
        sys.exit(EXIT_ABORT)


@main.command()
@click.option("--rounds", type=int, default=100, show_default=True)
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), help="YAML with params or plan.")
@click.option("--n", "n", type=int, help="Number of users (planned when no config is given).")
@click.option("--gamma", type=float, default=0.2, show_default=True)
@click.option("--delta", type=float, default=0.2, show_default=True)
@click.option("--eta", type=float, default=30.0, show_default=True)
@click.option("--lambda", "lam", type=float, default=40.0, show_default=True)
@click.option("--mode", type=MODES, default="malicious", show_default=True)
@click.option("--exact/--bound", "exact", default=True, help="Planner mode when planning here.")
@click.option("--m", "m", type=int, default=1, show_default=True)
@click.option("--timing", type=click.Choice(["early", "uniform"]), default="early", show_default=True)
@click.option("--seed", default="campaign", show_default=True, help="Master seed.")
@click.option("--allow-large", is_flag=True, help="Permit n above 10^4.")
@click.option("--csv-out", type=click.Path(dir_okay=False))
@click.option("--json-out", type=click.Path(dir_okay=False))
def campaign(rounds, config, n, gamma, delta, eta, lam, mode, exact, m, timing, seed, allow_large, csv_out, json_out):
    """Simulate many rounds and report role, recovery and traffic statistics."""
    try:
        if config:
            p = params_from_config(load_config(config))
        elif n is not None:
            p = plan_params(n, gamma, delta, eta=eta, lam=lam, mode=Mode(mode), use_exact=exact, m=m)
        else:
            _fail("give --config or --n")
        if p.n > 10_000 and not allow_large:
            _fail("n above 10^4 needs --allow-large")
        rep = run_campaign(p, rounds, seed.encode("utf-8"), timing=timing)
    except (ScenarioError, InfeasibleError, ValueError) as exc:
        _fail(str(exc))
    if csv_out:
        Path(csv_out).write_text(rep.to_csv(), encoding="utf-8", newline="")
    if json_out:
        Path(json_out).write_text(rep.to_json(), encoding="utf-8")
    _emit(
        {
            "rounds": rep.rounds,
            "k": p.k,
            "ell": p.ell,
            "committee_mean": rep.committee.mean,
            "backup_mean": rep.backup.mean,
            "key_recoveries_mean": rep.key_recoveries.mean,
            "aborted_rounds": rep.aborted_rounds,
            "expansion_factor": expansion_factor(rep, p.m, p.modulus),
        }
    )


def _read_json(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        _fail(f"{path}: not valid JSON ({exc})")
    if not isinstance(data, dict):
        _fail(f"{path}: expected a JSON object")
    return data


@main.command()
@click.option("--result", "result_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--committee-keys", "keys_path", type=click.Path(exists=True, dir_okay=False), required=True)
def verify(result_path, keys_path):
    """Check a published lisa-plus result against committee public keys."""
    doc = _read_json(result_path)
    keys = _read_json(keys_path)
    try:
        p = ProtocolParams.from_dict(doc["params"])
        if p.mode is not Mode.LISA_PLUS:
            _fail("result was not produced in lisa-plus mode")
        session = Session(p, BeaconSeed(bytes.fromhex(doc["beacon"]), int(doc["beacon_round"])))
        res = M.decode_result(base64.b64decode(doc["result"], validate=True), p)
        pki = {
            int(j): PublicKeys(bytes.fromhex(v["mask"]), bytes.fromhex(v["committee"]), bytes.fromhex(v["signing"]))
            for j, v in keys.items()
        }
    except (KeyError, TypeError, ValueError, binascii.Error, MalformedMessage) as exc:
        _fail(f"malformed input: {exc}")
    missing = [j for j in session.committee if j not in pki]
    if missing:
        _fail(f"committee keys missing for {missing[:5]}")
    verdict = user_verify_output(session, res, pki)
    _emit({"verdict": verdict})
    if verdict != "accept":
        sys.exit(EXIT_ABORT)


if __name__ == "__main__":
    main()
