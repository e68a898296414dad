"""One-shot battery of the statistical checks spread across the modules.

Each check is small enough that the full battery runs in well under a minute
at the default sample size.  Checks flagged ``informational`` are reported but
never decide the overall verdict.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds_calc import (beta_half_product_cdf, beta_product_tail_bound,
                          compare_moment_to_g, empirical_product_tail)
from .experiments import (CHERNOFF_DOUBLING_RATE, chernoff_weight_check, domination_check,
                          urn_mixture_test)
from .stochastics import derive_seed, make_rng, mean_ci, sample_beta_power
from .subtree_dp import adjusted_mass, random_r_ary_level_set, sample_weighted_tree


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    informational: bool = False

    def __post_init__(self):
        self.passed = bool(self.passed)

    def to_dict(self) -> dict:
        return asdict(self)


def check_beta_moment(d: int, lam: float, samples: int, seed: int) -> CheckResult:
    est = mean_ci(sample_beta_power(d, make_rng(seed), samples) ** lam)
    exact = 1 / ((d - 1) * lam + 1)
    ok = abs(est.mean - exact) <= 3 * est.half_width_95
    return CheckResult(f"beta_moment d={d} lambda={lam}", ok,
                       {"estimate": est.mean, "exact": exact, "half_width": est.half_width_95})


def check_beta_half_cdf(eps: float, samples: int, seed: int) -> CheckResult:
    b = sample_beta_power(3, make_rng(seed), (samples, 2))
    p = float((b.prod(axis=1) <= eps).mean())
    exact = beta_half_product_cdf(eps)
    sigma = math.sqrt(exact * (1 - exact) / samples)
    return CheckResult(f"beta_half_cdf eps={eps}", abs(p - exact) <= 3 * sigma,
                       {"estimate": p, "exact": exact, "sigma": sigma})


def check_product_tail(d: int, beta: float, n: int, samples: int, seed: int) -> CheckResult:
    bound = beta_product_tail_bound(d, beta, n)
    p, se = empirical_product_tail(d, beta, n, samples, make_rng(seed))
    return CheckResult(f"product_tail d={d} beta={beta} n={n}", p <= bound.value + 3 * se,
                       {"empirical": p, "se": se, "bound": bound.value, "vacuous": bound.vacuous})


def check_moment_vs_g(lam: float, samples: int, seed: int) -> CheckResult:
    est, g = compare_moment_to_g(lam, samples, make_rng(seed))
    return CheckResult(f"ran_moment_below_g lambda={lam}", est.mean < g,
                       {"estimate": est.mean, "half_width": est.half_width_95, "g": g})


def check_adjusted_mass(d: int, r: int, n: int, trees: int, seed: int) -> CheckResult:
    rng = make_rng(seed)
    worst, conservation = 0.0, 0.0
    for _ in range(trees):
        sample = sample_weighted_tree(d, r, n, rng)
        conservation = max(conservation, abs(sample.mass[n].sum() - 1))
        for _ in range(4):
            worst = max(worst, adjusted_mass(sample, random_r_ary_level_set(sample, n, rng), n))
    ok = worst <= 1 + 1e-12 and conservation <= 1e-9
    return CheckResult(f"adjusted_mass d={d} r={r} n={n}", ok,
                       {"max_adjusted": worst, "mass_error": conservation})


def check_urn(d: int, t: int, size: int, seed: int) -> CheckResult:
    res = urn_mixture_test(d, t, size, seed)
    return CheckResult(f"urn_vs_mixture d={d} t={t}", res.passed,
                       {"statistic": res.statistic, "p_value": res.p_value})


def check_domination(d: int, k: int, t: int, replicates: int, seed: int) -> CheckResult:
    res = domination_check(d, k, t, replicates, seed)
    return CheckResult(f"weight_domination d={d} k={k} t={t}", res.passed,
                       {"violation": res.max_cdf_violation, "allowance": res.allowance})


def check_chernoff(rate: float, replicates: int, seed: int, informational: bool) -> CheckResult:
    res = chernoff_weight_check(3, 3, 1000, replicates, rate=rate, base_seed=seed)
    return CheckResult(f"chernoff_weight rate={rate:.4f}", res.passed,
                       {"worst_ratio": res.worst_ratio, "rows": res.rows}, informational)


def run_all(samples: int = 100_000, base_seed: int = 0) -> list:
    """Every check at ``samples`` Monte Carlo draws (coarser checks scale down)."""
    samples = max(int(samples), 1000)
    seeds = iter(derive_seed(base_seed, i) for i in range(1000))
    reps = int(np.clip(samples // 10, 1000, 10_000))
    out = [
        check_beta_moment(3, 2.0, samples, next(seeds)),
        check_beta_moment(2, 0.5, samples, next(seeds)),
        check_beta_half_cdf(0.1, samples, next(seeds)),
        check_product_tail(3, 0.05, 5, samples, next(seeds)),
        check_moment_vs_g(2.0, samples, next(seeds)),
        check_moment_vs_g(10.0, samples, next(seeds)),
        check_adjusted_mass(3, 2, 6, 50, next(seeds)),
        check_urn(3, 10, max(samples // 5, 1000), next(seeds)),
        check_domination(3, 1, 200, reps, next(seeds)),
        check_chernoff(CHERNOFF_DOUBLING_RATE, samples, next(seeds), informational=False),
        check_chernoff(1.0, samples, next(seeds), informational=True),
    ]
    return out
