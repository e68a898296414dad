"""Explicit constants, closed-form tails and their numeric verification.

Constants are evaluated with mpmath at ``PRECISION`` decimal digits: the
Laforgia gaps at p = lambda shrink like 1/p**2 and drop below double
precision once lambda exceeds ~1e7 (d = 6).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import mpmath as mp
import numpy as np

from .stochastics import (Model, MomentEstimate, ParameterError, estimate_moment,
                          make_rng, sample_beta_power)
from .subtree_dp import WeightedTreeSample

PRECISION = 60


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    relation: str
    passed: bool


@dataclass
class BoundsReport:
    model: str
    d: Optional[int]
    r: Optional[int]
    lam: float
    kappa: float
    tau: float
    delta: float
    extras: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["all_pass"] = self.all_pass
        return out

    def to_json(self, **kwargs) -> str:
        # repr-exact floats: json emits the shortest round-tripping decimal
        return json.dumps(self.to_dict(), **kwargs)


def _check(name: str, lhs, rhs, relation: str) -> Check:
    ops = {"<": lambda a, b: a < b, ">": lambda a, b: a > b, "<=": lambda a, b: a <= b}
    return Check(name, float(lhs), float(rhs), relation, bool(ops[relation](lhs, rhs)))


def log_gamma(x):
    """High-precision log-gamma (mpmath) for positive real ``x``."""
    with mp.workdps(PRECISION):
        return mp.loggamma(mp.mpf(x))


# ---------------------------------------------------------------------------
# Laforgia inequalities


@dataclass(frozen=True)
class LaforgiaResult:
    first_lhs: float
    first_rhs: float
    first_pass: bool
    second_lhs: float
    second_rhs: float
    second_pass: bool
    boundary: bool

    @property
    def passed(self) -> bool:
        return self.first_pass and self.second_pass


def laforgia_check(p, q, iota, sigma) -> LaforgiaResult:
    """(p + iota/2)**(iota-1) < G(p+iota)/G(p+1) and G(q+sigma)/G(q+1) < (q + sigma/2)**(sigma-1).

    Valid for p, q > 0 and 0 < sigma < 1 < iota < 2.  The closed endpoints
    iota = 2 and sigma = 1 are accepted: both sides then coincide exactly, and
    the check passes on equality (``boundary`` is set).
    """
    if not (p > 0 and q > 0):
        raise ParameterError("p and q must be positive")
    if not (1 < iota <= 2 and 0 < sigma <= 1):
        raise ParameterError("need 1 < iota <= 2 and 0 < sigma <= 1")
    with mp.workdps(PRECISION):
        p, q = mp.mpf(p), mp.mpf(q)
        iota, sigma = mp.mpf(iota), mp.mpf(sigma)
        # compare in log space; exponentiating huge-p ratios is pointless
        l1 = (iota - 1) * mp.log(p + iota / 2)
        r1 = mp.loggamma(p + iota) - mp.loggamma(p + 1)
        l2 = mp.loggamma(q + sigma) - mp.loggamma(q + 1)
        r2 = (sigma - 1) * mp.log(q + sigma / 2)
        tol = mp.mpf(10) ** (-(PRECISION - 15))
        first_edge = iota == 2
        second_edge = sigma == 1
        first = abs(l1 - r1) <= tol * (1 + abs(r1)) if first_edge else l1 < r1
        second = abs(l2 - r2) <= tol * (1 + abs(r2)) if second_edge else l2 < r2
        return LaforgiaResult(float(mp.exp(l1)), float(mp.exp(r1)), bool(first),
                              float(mp.exp(l2)), float(mp.exp(r2)), bool(second),
                              bool(first_edge or second_edge))


# ---------------------------------------------------------------------------
# explicit constants for r-ary subtrees


def explicit_constants_dary(d: int, r: int) -> BoundsReport:
    if int(d) != d or d < 2 or not 1 <= r < d:
        raise ParameterError(f"need 1 <= r < d, d >= 2 (got d={d}, r={r})")
    with mp.workdps(PRECISION):
        e = mp.e
        D, R = mp.mpf(d), mp.mpf(r)
        lam = e * D ** (2 * d - 2) / (D - R)
        log_kappa = 1 / (lam * (D - 1))
        kappa = mp.exp(log_kappa)
        log11 = mp.log(11 * D * mp.log(D))
        tau0 = (11 * D * mp.log(D)) ** (D - 1)
        gap = (D - R) / (e * D ** (2 * d) * log11)
        delta = 1 - gap

        # smallest tau0 * 2**k keeping log(kappa)/log(tau) strictly above 1 - delta
        k = 0
        while not log_kappa / mp.log(tau0 * 2**k) > gap:
            k += 1
            if k > 200:
                raise RuntimeError("no admissible tau found")
        tau = tau0 * 2**k
        log_tau = mp.log(tau)

        iota, sigma = D / (D - 1), 1 / (D - 1)
        # int_0^1 (1 - x**(1/lam))**sigma dx = G(iota) G(lam+1) / G(lam+iota)
        log_integral = mp.loggamma(iota) + mp.loggamma(lam + 1) - mp.loggamma(lam + iota)
        # d * kappa**lam * E[(1-U)**lam] <= d * kappa**lam * d * (d-r)**(-sigma) * integral
        log_kappa_cond = (2 * mp.log(D) + lam * log_kappa - sigma * mp.log(D - R)
                          + log_integral)
        chain = D**2 * mp.exp(lam * log_kappa) / (lam * (D - R)) ** sigma
        laf = laforgia_check(lam, 1, iota, sigma)

        checks = [
            _check("kappa_gt_1", kappa, 1, ">"),
            _check("delta_lt_1", delta, 1, "<"),
            _check("m_cond_tau0", e * D * mp.log(tau0), (D - 1) * tau0 ** sigma, "<"),
            _check("m_cond", e * D * log_tau, (D - 1) * tau ** sigma, "<"),
            _check("integral_vs_lambda_power", mp.exp(log_integral), lam ** (-sigma), "<"),
            _check("kappa_cond_bound", mp.exp(log_kappa_cond), 1, "<"),
            _check("kappa_chain_identity", abs(chain - 1), mp.mpf(10) ** -30, "<="),
            Check("laforgia_first", laf.first_lhs, laf.first_rhs,
                  "<=" if iota == 2 else "<", laf.first_pass),
            Check("laforgia_second", laf.second_lhs, laf.second_rhs,
                  "<=" if sigma == 1 else "<", laf.second_pass),
            _check("log_kappa_over_log_tau0", log_kappa / mp.log(tau0), gap, ">"),
            _check("delta_cond_left", mp.log(R) / log_tau, 1 - log_kappa / log_tau, "<"),
            _check("delta_cond_right", 1 - log_kappa / log_tau, delta, "<"),
            _check("tau_vs_r_kappa", mp.log(R) + log_kappa, log_tau, "<"),
        ]
        return BoundsReport(
            "dary", d, r, float(lam), float(kappa), float(tau), float(delta),
            extras={"tau0": float(tau0), "tau_doublings": k, "log_kappa": float(log_kappa),
                    "one_minus_delta": float(gap), "laforgia_boundary": laf.boundary},
            checks=checks,
        )


# ---------------------------------------------------------------------------
# Apollonian constants


def g_of_lambda(lam: float) -> float:
    """Closed-form upper bound on E[(1 - Upsilon)**lam] for the Apollonian Upsilon."""
    if not lam > 1:
        raise ParameterError("g(lambda) needs lambda > 1")
    s = math.sqrt(math.pi)
    return 9 * lam / (2 * (lam - 1) ** 1.5) * (s + s * math.log(lam - 1) / 2 + 4 / 9)


def _g_mp(lam):
    s = mp.sqrt(mp.pi)
    return 9 * lam / (2 * (lam - 1) ** mp.mpf(1.5)) * (s + s * mp.log(lam - 1) / 2 + mp.mpf(4) / 9)


def _round_down_one_digit(x: float) -> float:
    """Largest number a * 10**k (a in 1..9) not exceeding positive ``x``."""
    k = math.floor(math.log10(x))
    return math.floor(x / 10.0**k) * 10.0**k


RAN_LAMBDA = 10**6
RAN_TAU = 720


def explicit_constants_ran() -> BoundsReport:
    with mp.workdps(PRECISION):
        lam, tau = mp.mpf(RAN_LAMBDA), mp.mpf(RAN_TAU)
        g = _g_mp(lam)
        log_kappa = -mp.log(9 * g) / lam
        kappa = mp.exp(log_kappa)
        log_tau = mp.log(tau)
        margin = log_kappa / (2 * log_tau)
        delta = 1 - _round_down_one_digit(float(margin))
        first = 1 - log_kappa / (2 * log_tau)
        second = mp.log(8) / (2 * log_tau)

        tie_lhs, tie_rhs = 3 * math.e * math.log(RAN_TAU), 2 * math.sqrt(RAN_TAU)
        checks = [
            _check("m_cond_rans", tie_lhs, tie_rhs, "<"),
            _check("m_cond_rans_extended", 3 * mp.e * log_tau, 2 * mp.sqrt(tau), "<"),
            _check("nine_g_lt_1", 9 * g, 1, "<"),
            _check("kappa_gt_1", kappa, 1, ">"),
            _check("kappa_identity", abs(9 * mp.exp(lam * log_kappa) * g - 1),
                   mp.mpf(10) ** -30, "<="),
            _check("tau_gt_8", tau, 8, ">"),
            _check("delta_gt_kappa_term", delta, first, ">"),
            _check("delta_gt_log8_term", delta, second, ">"),
            _check("delta_lt_1", delta, 1, "<"),
        ]
        return BoundsReport(
            "ran", None, None, float(lam), float(kappa), float(tau), float(delta),
            extras={"g_lambda": float(g), "log_kappa": float(log_kappa),
                    "kappa_term": float(first), "log8_term": float(second),
                    "one_minus_kappa_term": float(margin)},
            checks=checks,
        )


# ---------------------------------------------------------------------------
# tails of products of Beta(1/(d-1), 1) variates


@dataclass(frozen=True)
class TailBound:
    value: float
    vacuous: bool


def beta_product_tail_bound(d: int, beta: float, n: int) -> TailBound:
    """Chernoff bound on P(B_1 ... B_n <= beta**n).

    For beta >= e**(1-d) the optimising exponent leaves its admissible range
    and nothing better than the trivial bound 1 is available; that case is
    returned as ``TailBound(1.0, vacuous=True)``.
    """
    if int(d) != d or d < 2:
        raise ParameterError("d must be an integer >= 2")
    if not 0 < beta < 1:
        raise ParameterError("beta must lie in (0, 1)")
    if n < 1:
        raise ParameterError("n must be >= 1")
    if beta >= math.exp(1 - d):
        return TailBound(1.0, True)
    base = math.e * math.log(1 / beta) * beta ** (1 / (d - 1)) / (d - 1)
    return TailBound(base**n, False)


def empirical_product_tail(d: int, beta: float, n: int, samples: int,
                           rng: np.random.Generator, chunk: int = 250_000) -> tuple[float, float]:
    """Monte Carlo P(prod of n Beta(1/(d-1),1) <= beta**n) and its standard error."""
    hits = 0
    done = 0
    thresh = n * math.log(beta)
    while done < samples:
        m = min(chunk, samples - done)
        logs = np.log(sample_beta_power(d, rng, (m, n))).sum(axis=1)
        hits += int((logs <= thresh).sum())
        done += m
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 0.0) / samples)


def beta_half_product_cdf(eps: float) -> float:
    """P(B1 * B2 <= eps) for independent Beta(1/2, 1) variates."""
    if not 0 < eps <= 1:
        raise ParameterError("eps must lie in (0, 1]")
    return math.sqrt(eps) * (1 + math.log(1 / eps) / 2)


def compare_moment_to_g(lam: float, samples: int = 100_000,
                        rng: Optional[np.random.Generator] = None) -> tuple[MomentEstimate, float]:
    """Monte Carlo E[(1 - Upsilon_RAN)**lam] next to g(lam)."""
    est = estimate_moment(Model.ran(), lam, samples, rng if rng is not None else make_rng(lam))
    return est, g_of_lambda(lam)


# ---------------------------------------------------------------------------
# the event C_{n,kappa}


def _log_path_products(sample: WeightedTreeSample, upto: int) -> list:
    """log prod over [root, v] of 1/(1 - Upsilon) for every level k < upto."""
    out = []
    acc = np.zeros(1)
    for k in range(upto):
        if k:
            acc = np.repeat(acc, sample.d)
        acc = acc - np.log1p(-sample.upsilon[k])
        out.append(acc)
    return out


def event_Cnk_margin(sample: WeightedTreeSample, kappa: float, n: int) -> float:
    """min over level-n vertices of prod_{[root, parent]} (1-Upsilon)**-1, over kappa**n.

    C_{n,kappa} holds iff the result is >= 1.
    """
    if n < 0 or n > sample.depth:
        raise ParameterError(f"level {n} outside sample depth {sample.depth}")
    if not kappa > 0:
        raise ParameterError("kappa must be positive")
    if n == 0:
        return 1.0
    logs = _log_path_products(sample, n)[n - 1]
    return float(np.exp(logs.min() - n * math.log(kappa)))


def estimate_N1(sample: WeightedTreeSample, kappa: float) -> Optional[int]:
    """Smallest n with C_{j,kappa} for every j in [n, depth]; None if C_depth fails."""
    logs = _log_path_products(sample, sample.depth)
    holds = [logs[j - 1].min() >= j * math.log(kappa) for j in range(1, sample.depth + 1)]
    n1 = None
    for j in range(sample.depth, 0, -1):
        if not holds[j - 1]:
            break
        n1 = j
    return n1


def proof_kappa(model: Model, lam: float, samples: int = 100_000,
                rng: Optional[np.random.Generator] = None) -> float:
    """kappa = (d E[(1-Upsilon)**lam])**(-1/(2 lam)), with the moment by Monte Carlo."""
    est = estimate_moment(model, lam, samples, rng)
    return (model.d * est.mean) ** (-1.0 / (2 * lam))
