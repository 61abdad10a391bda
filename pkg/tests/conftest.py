import pytest

from secagg.crypto.commit import GROUP_ORDER
from secagg.params import Mode, ProtocolParams
from secagg.protocol.roles import PartyKeys, Session
from secagg.selection import HashBeacon


def small_params(mode=Mode.MALICIOUS, **kw) -> ProtocolParams:
    base = dict(n=40, k=8, ell=10, t=6, c_tilde=3, gamma=0.1, delta=0.25, m=3)
    base["modulus"] = GROUP_ORDER if Mode(mode) is Mode.LISA_PLUS else 1 << 32
    base.update(kw)
    return ProtocolParams(mode=mode, **base)


def make_world(p: ProtocolParams, seed: bytes = b"world"):
    session = Session(p, HashBeacon(seed)(0))
    keys = {i: PartyKeys.derive(seed, i) for i in range(1, p.n + 1)}
    pki = {i: k.public for i, k in keys.items()}
    return session, keys, pki


@pytest.fixture(params=list(Mode), ids=lambda m: m.value)
def mode(request):
    return request.param


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
