"""Failure-probability bounds and minimal parameter planning.

Committee and neighborhood sizes are chosen so that, with ``δn`` dropouts and
``γn`` corruptions drawn without replacement, recovery fails with probability
at most 2^-η and the server learns more than allowed with probability at most
2^-λ. Each requirement is a sum of a committee term and ``k`` times a
neighborhood term; the planner gives each term half of the budget.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.special import gammaln, logsumexp

from .crypto.commit import GROUP_ORDER

LN2 = math.log(2.0)


class Mode(str, enum.Enum):
    SEMI_HONEST = "semi-honest"
    MALICIOUS = "malicious"
    LISA_PLUS = "lisa-plus"

    @property
    def malicious(self) -> bool:
        return self is not Mode.SEMI_HONEST


class InfeasibleError(ValueError):
    """No parameters can satisfy both requirements (2δ + γn/(n-1) ≥ 1)."""


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    k: int
    ell: int
    t: int
    c_tilde: int
    gamma: float
    delta: float
    eta: float = 40.0
    lam: float = 40.0
    m: int = 1
    modulus: int = 1 << 32
    alpha: float | None = None
    mode: Mode = Mode.MALICIOUS

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.alpha is None:
            object.__setattr__(self, "alpha", round(1.0 - self.delta, 12))
        problems = self.structural_violations()
        if problems:
            raise ValueError("invalid parameters: " + "; ".join(problems))

    @property
    def gamma_tilde(self) -> float:
        return self.c_tilde / self.k

    @property
    def beta(self) -> float:
        return self.t / self.ell

    @property
    def min_inputs(self) -> int:
        """Smallest |U'_2| a committee member accepts, i.e. ceil(α·n)."""
        return math.ceil(round(self.alpha * self.n, 9))

    @property
    def max_committee_drops(self) -> int:
        """Largest |K_drop| that backup neighbors still serve."""
        return self.k - self.c_tilde - 1

    def structural_violations(self) -> list[str]:
        out = []
        if self.n < 2:
            out.append("n must be at least 2")
        if not 1 <= self.k <= self.n:
            out.append(f"need 1 <= k <= n (k={self.k}, n={self.n})")
        if not 1 <= self.t <= self.ell <= self.n - 1:
            out.append(f"need 1 <= t <= ell <= n-1 (t={self.t}, ell={self.ell}, n={self.n})")
        if not 0 <= self.c_tilde < self.k:
            out.append(f"need 0 <= c_tilde < k (c_tilde={self.c_tilde}, k={self.k})")
        if not 0 <= self.gamma < 1 or not 0 <= self.delta < 1:
            out.append("rates must lie in [0, 1)")
        if self.m < 1:
            out.append("m must be at least 1")
        if self.modulus < 2:
            out.append("modulus must be at least 2")
        if not 0 < (self.alpha or 0) <= 1:
            out.append("alpha must lie in (0, 1]")
        if self.mode is Mode.LISA_PLUS and self.modulus != GROUP_ORDER:
            out.append("lisa-plus requires modulus equal to the commitment group order")
        return out

    def ratio_violations(self) -> list[str]:
        """Analytic constraints on γ̃ and β that planned parameters satisfy."""
        g1 = scaled_rate(self.gamma, self.n)
        out = []
        if not self.gamma < self.gamma_tilde < 1 - self.delta:
            out.append(f"need gamma < gamma_tilde < 1 - delta (gamma_tilde={self.gamma_tilde:.4f})")
        lo = 0.5 * (1 + g1) if self.mode.malicious else g1
        if not lo < self.beta < 1 - self.delta:
            out.append(f"need {lo:.4f} < beta < 1 - delta (beta={self.beta:.4f})")
        if feasibility_margin(self.n, self.gamma, self.delta) <= 0:
            out.append("need 1 - 2 delta - gamma n/(n-1) > 0")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["gamma_tilde"] = self.gamma_tilde
        d["beta"] = self.beta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ProtocolParams:
        names = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in names})

    def with_(self, **changes) -> ProtocolParams:
        return replace(self, **changes)


@dataclass(frozen=True)
class BoundReport:
    correctness_failure: float
    security_failure: float
    binding_constraint: str
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Hypergeometric tails
# ---------------------------------------------------------------------------


def hg_tail_bound(n_draws: int, upper_deviation: float) -> float:
    """Bound on P[X >= E[X] + dev * n_draws] for a hypergeometric draw."""
    if upper_deviation < 0:
        raise ValueError("deviation must be nonnegative")
    return min(1.0, max(0.0, math.exp(-2.0 * upper_deviation * upper_deviation * n_draws)))


def _log_comb(a, b):
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


def hg_tail_exact(N: int, C: int, n: int, x: int) -> float:
    """P[X >= x] for X ~ HG(N, C, n), summed in log space."""
    if not (0 <= C <= N and 0 <= n <= N):
        raise ValueError(f"invalid hypergeometric parameters N={N} C={C} n={n}")
    lo = max(0, n - (N - C))
    hi = min(n, C)
    start = max(x, lo)
    if start > hi:
        return 0.0
    if start <= lo:
        return 1.0
    xs = np.arange(start, hi + 1, dtype=np.float64)
    logs = _log_comb(C, xs) + _log_comb(N - C, n - xs) - _log_comb(N, n)
    return float(min(1.0, math.exp(logsumexp(logs))))


def scaled_rate(rate: float, n: int) -> float:
    """Fraction of the other n-1 users that are special: rate·n/(n-1)."""
    return rate * n / (n - 1)


def feasibility_margin(n: int, gamma: float, delta: float) -> float:
    return 1.0 - 2.0 * delta - scaled_rate(gamma, n)


def _count(rate: float, n: int) -> int:
    return math.floor(rate * n + 1e-9)


# ---------------------------------------------------------------------------
# Per-term failure probabilities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Terms:
    """The four terms as functions of the integer sizes."""

    n: int
    gamma: float
    delta: float
    malicious: bool
    exact: bool

    def committee_correctness(self, k: int, c: int) -> float:
        # P[X >= k - c], X ~ HG(n, δn, k)
        if self.exact:
            return hg_tail_exact(self.n, _count(self.delta, self.n), k, k - c)
        dev = 1.0 - self.delta - c / k
        return 1.0 if dev <= 0 else hg_tail_bound(k, dev)

    def committee_security(self, k: int, c: int) -> float:
        # P[Z > c], Z ~ HG(n, γn, k)
        if self.exact:
            return hg_tail_exact(self.n, _count(self.gamma, self.n), k, c + 1)
        dev = c / k - self.gamma
        return 1.0 if dev <= 0 else hg_tail_bound(k, dev)

    def neighborhood_correctness(self, ell: int, t: int) -> float:
        # P[Y >= ell - t], Y ~ HG(n-1, δn, ell)
        if self.exact:
            return hg_tail_exact(self.n - 1, _count(self.delta, self.n), ell, ell - t)
        dev = 1.0 - scaled_rate(self.delta, self.n) - t / ell
        return 1.0 if dev <= 0 else hg_tail_bound(ell, dev)

    def neighborhood_security(self, ell: int, t: int) -> float:
        # malicious: P[W > 2t - ell]; semi-honest: P[W >= t]; W ~ HG(n-1, γn, ell)
        g1 = scaled_rate(self.gamma, self.n)
        if self.exact:
            threshold = 2 * t - ell + 1 if self.malicious else t
            if threshold <= 0:
                return 1.0
            return hg_tail_exact(self.n - 1, _count(self.gamma, self.n), ell, threshold)
        dev = (2 * t / ell - 1 - g1) if self.malicious else (t / ell - g1)
        return 1.0 if dev <= 0 else hg_tail_bound(ell, dev)


def _terms_for(p: ProtocolParams, use_exact: bool) -> _Terms:
    return _Terms(p.n, p.gamma, p.delta, p.mode.malicious, use_exact)


def correctness_failure(p: ProtocolParams, use_exact: bool = False) -> float:
    tm = _terms_for(p, use_exact)
    if p.delta == 0 and use_exact:
        return 0.0
    return min(1.0, tm.committee_correctness(p.k, p.c_tilde) + p.k * tm.neighborhood_correctness(p.ell, p.t))


def security_failure(p: ProtocolParams, use_exact: bool = False) -> float:
    tm = _terms_for(p, use_exact)
    if p.gamma == 0 and use_exact:
        return 0.0
    return min(1.0, tm.committee_security(p.k, p.c_tilde) + p.k * tm.neighborhood_security(p.ell, p.t))


def bound_report(p: ProtocolParams, use_exact: bool = False) -> BoundReport:
    tm = _terms_for(p, use_exact)
    terms = {
        "committee-correctness": tm.committee_correctness(p.k, p.c_tilde),
        "neighborhood-correctness": p.k * tm.neighborhood_correctness(p.ell, p.t),
        "committee-security": tm.committee_security(p.k, p.c_tilde),
        "neighborhood-security": p.k * tm.neighborhood_security(p.ell, p.t),
    }
    budgets = {
        "committee-correctness": 2.0 ** -(p.eta + 1),
        "neighborhood-correctness": 2.0 ** -(p.eta + 1),
        "committee-security": 2.0 ** -(p.lam + 1),
        "neighborhood-security": 2.0 ** -(p.lam + 1),
    }
    binding = max(terms, key=lambda name: terms[name] / budgets[name])
    return BoundReport(
        correctness_failure=correctness_failure(p, use_exact),
        security_failure=security_failure(p, use_exact),
        binding_constraint=binding,
        terms=terms,
    )


# ---------------------------------------------------------------------------
# Planner
# ---------------------------------------------------------------------------


def _first_true(lo: int, hi: int, pred: Callable[[int], bool]) -> int | None:
    """Smallest v in [lo, hi] with pred(v), for pred monotone false -> true."""
    if lo > hi or not pred(hi):
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _last_true(lo: int, hi: int, pred: Callable[[int], bool]) -> int | None:
    """Largest v in [lo, hi] with pred(v), for pred monotone true -> false."""
    if lo > hi or not pred(lo):
        return None
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def plan_committee(tm: _Terms, eta: float, lam: float) -> tuple[int, int]:
    """Smallest k, then smallest c̃, meeting both committee terms."""
    cor_budget = 2.0 ** -(eta + 1)
    sec_budget = 2.0 ** -(lam + 1)
    for k in range(1, tm.n + 1):
        c = _first_true(0, k - 1, lambda c: tm.committee_security(k, c) <= sec_budget)
        if c is not None and tm.committee_correctness(k, c) <= cor_budget:
            return k, c
    raise InfeasibleError(f"no committee size up to n={tm.n} meets the requirements")


def plan_neighborhood(tm: _Terms, k: int, eta: float, lam: float) -> tuple[int, int]:
    """Smallest ell, then smallest t, meeting both neighborhood terms."""
    cor_budget = 2.0 ** -(eta + 1)
    sec_budget = 2.0 ** -(lam + 1)
    for ell in range(1, tm.n):
        t_max = _last_true(1, ell, lambda t: k * tm.neighborhood_correctness(ell, t) <= cor_budget)
        if t_max is None:
            continue
        t_min = _first_true(1, t_max, lambda t: k * tm.neighborhood_security(ell, t) <= sec_budget)
        if t_min is not None:
            return ell, t_min
    raise InfeasibleError(f"no neighborhood size up to n-1={tm.n - 1} meets the requirements")


def plan_params(
    n: int,
    gamma: float,
    delta: float,
    eta: float = 40.0,
    lam: float = 40.0,
    mode: Mode | str = Mode.MALICIOUS,
    use_exact: bool = False,
    m: int = 1,
    modulus: int | None = None,
    alpha: float | None = None,
) -> ProtocolParams:
    mode = Mode(mode)
    if n < 3:
        raise ValueError("need at least 3 users")
    if not (0 <= gamma < 1 and 0 <= delta < 1):
        raise ValueError("rates must lie in [0, 1)")
    margin = feasibility_margin(n, gamma, delta)
    if margin <= 0:
        raise InfeasibleError(
            f"infeasible rates: 1 - 2*delta - gamma*n/(n-1) = {margin:.6f} <= 0"
        )
    tm = _Terms(n, gamma, delta, mode.malicious, use_exact)
    k, c = plan_committee(tm, eta, lam)
    ell, t = plan_neighborhood(tm, k, eta, lam)
    if modulus is None:
        modulus = GROUP_ORDER if mode is Mode.LISA_PLUS else 1 << 32
    return ProtocolParams(
        n=n, k=k, ell=ell, t=t, c_tilde=c, gamma=gamma, delta=delta,
        eta=eta, lam=lam, m=m, modulus=modulus, alpha=alpha, mode=mode,
    )


def closed_form_committee_bound(bits: float, margin: float) -> float:
    """k above which a committee term with deviation ``margin`` is <= 2^-(bits+1).

    Written with a base-2 logarithm: (bits + 1) / (2 log2(e) margin^2).
    """
    return (bits + 1) / (2.0 * math.log2(math.e) * margin * margin)
