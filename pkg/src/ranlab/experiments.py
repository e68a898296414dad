"""Seeded ensembles, exponent fits and Monte Carlo checks of the weight couplings."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .apollonian import grow_ran
from .dary_tree import grow_tree, node_at_position
from .paths import (InstanceTooLarge, buono_upper_bound, longest_path_exact,
                    longest_path_heuristic)
from .stochastics import (Model, ParameterError, beta_binomial_mixture, derive_seed,
                          make_rng, polya_urn_hits_batch, sample_beta_power,
                          two_sample_chi2)
from .subtree_dp import largest_r_ary_subtree, max_mass_r_ary, sample_weighted_tree

STATISTICS = ("s_t", "buono_bound", "heuristic_path", "exact_path", "mass_max")
CSV_HEADER = ["model", "params", "t", "replicate", "seed", "statistic", "value"]
MASS_MAX_NODES = 1 << 22


@dataclass
class ExperimentConfig:
    model: Model
    t_grid: Sequence[int]
    replicates: int = 1
    base_seed: int = 0
    statistics: Sequence[str] = ("s_t",)
    workers: int = 1
    exact_cap: int = 12

    def __post_init__(self):
        grid = list(self.t_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("t_grid must be non-empty and strictly increasing")
        if min(grid) < 0:
            raise ParameterError("t values must be nonnegative")
        if self.replicates < 1:
            raise ParameterError("replicates must be >= 1")
        unknown = set(self.statistics) - set(STATISTICS)
        if unknown:
            raise ParameterError(f"unknown statistics: {sorted(unknown)}")


@dataclass
class ExperimentRecord:
    model: str
    params: str
    t: int
    replicate: int
    seed: int
    statistic: str
    value: Optional[float]
    error: Optional[str] = None

    @property
    def key(self) -> tuple:
        return (self.model, self.params, self.t, self.replicate, STATISTICS.index(self.statistic))

    def value_text(self) -> str:
        if self.error is not None:
            return f"error:{self.error}"
        return repr(self.value)


def _statistic(model: Model, stat: str, t: int, seed: int, cache: dict, exact_cap: int):
    if stat == "mass_max":
        if model.name != "dary":
            raise ParameterError("mass_max is defined for dary models")
        if model.d ** t > MASS_MAX_NODES:
            raise InstanceTooLarge(f"{model.d}**{t} level vertices exceed {MASS_MAX_NODES}")
        sample = sample_weighted_tree(model.d, model.r, t, make_rng(derive_seed(seed, 1)))
        return max_mass_r_ary(sample, model.r, t)
    if model.name == "dary":
        if stat != "s_t":
            raise ParameterError(f"{stat} is defined for the ran model")
        if "tree" not in cache:
            cache["tree"] = grow_tree(model.d, t, make_rng(seed), seed=seed)
        return largest_r_ary_subtree(cache["tree"], model.r, witness=False).size
    if stat == "s_t":
        raise ParameterError("s_t is defined for dary models")
    if "ran" not in cache:
        cache["ran"] = grow_ran(t, make_rng(seed), seed=seed)
    ran, delta = cache["ran"]
    if stat == "buono_bound":
        return buono_upper_bound(delta)
    if stat == "heuristic_path":
        return longest_path_heuristic(ran, delta).length
    return longest_path_exact(ran, delta, cap=exact_cap).length


def _run_item(args) -> list:
    model, t, rep, base_seed, statistics, exact_cap = args
    seed = derive_seed(base_seed, t, rep)
    cache: dict = {}
    out = []
    for stat in statistics:
        try:
            value = _statistic(model, stat, t, seed, cache, exact_cap)
            out.append(ExperimentRecord(model.name, model.params, t, rep, seed, stat, value))
        except (InstanceTooLarge, ParameterError) as exc:
            out.append(ExperimentRecord(model.name, model.params, t, rep, seed, stat, None,
                                        error=str(exc)))
    return out


def run_ensemble(config: ExperimentConfig, journal: Optional[Path] = None) -> list:
    """Run every (t, replicate) item; records come back sorted by key.

    ``journal`` receives each item's records as JSON lines the moment the item
    finishes (completion order); the return value is scheduling-independent.
    """
    items = [(config.model, t, rep, config.base_seed, tuple(config.statistics), config.exact_cap)
             for t in config.t_grid for rep in range(config.replicates)]
    records: list = []
    sink = open(journal, "a") if journal is not None else None
    try:
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                batches = pool.map(_run_item, items, chunksize=max(1, len(items) // (8 * config.workers)))
                for batch in batches:
                    records.extend(batch)
                    _journal(sink, batch)
        else:
            for item in items:
                batch = _run_item(item)
                records.extend(batch)
                _journal(sink, batch)
    finally:
        if sink is not None:
            sink.close()
    records.sort(key=lambda r: r.key)
    return records


def _journal(sink, batch) -> None:
    if sink is None:
        return
    for rec in batch:
        sink.write(json.dumps(asdict(rec)) + "\n")
    sink.flush()


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.model, r.params, r.t, r.replicate, r.seed, r.statistic, r.value_text()])
    return buf.getvalue()


def records_to_jsonl(records: Iterable[ExperimentRecord]) -> str:
    return "".join(json.dumps(asdict(r)) + "\n" for r in records)


def read_records(path) -> list:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return [ExperimentRecord(**json.loads(line)) for line in text.splitlines() if line.strip()]
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        raw = row["value"]
        err = raw[len("error:"):] if raw.startswith("error:") else None
        value = None if err is not None else float(raw)
        out.append(ExperimentRecord(row["model"], row["params"], int(row["t"]),
                                    int(row["replicate"]), int(row["seed"]),
                                    row["statistic"], value, err))
    return out


# ---------------------------------------------------------------------------
# exponent fits


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    ci95: tuple
    points: int


def fit_exponent(records: Iterable[ExperimentRecord], aggregate: str = "mean") -> FitResult:
    """OLS of log(statistic) on log(t) with a Student-t 95% CI on the slope.

    ``aggregate="mean"`` regresses the log of the per-t mean; ``"log"`` uses
    the log of every record.
    """
    by_t: dict = {}
    for r in records:
        if r.error is None and r.value is not None:
            by_t.setdefault(r.t, []).append(float(r.value))
    ts = sorted(t for t in by_t if t > 0)
    if len(ts) < 3:
        raise ParameterError("need at least three distinct positive t values")
    if aggregate == "mean":
        x = np.log(ts)
        y = np.log([np.mean(by_t[t]) for t in ts])
    elif aggregate == "log":
        x = np.concatenate([np.full(len(by_t[t]), math.log(t)) for t in ts])
        y = np.log(np.concatenate([by_t[t] for t in ts]))
    else:
        raise ParameterError(f"unknown aggregate {aggregate!r}")
    n = len(x)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    if n > 2:
        se = math.sqrt(float(resid @ resid) / (n - 2) / sxx)
        half = float(stats.t.ppf(0.975, n - 2)) * se
    else:
        half = float("inf")
    return FitResult(slope, intercept, (slope - half, slope + half), n)


def log_grid(lo: float, hi: float, points: int) -> list:
    return sorted({int(round(v)) for v in np.geomspace(lo, hi, points)})


# ---------------------------------------------------------------------------
# statistical checks of the weight couplings


def dkw_allowance(n: int, m: int, alpha: float = 0.01) -> float:
    """One-sided two-sample DKW band half-width at level ``alpha``."""
    return math.sqrt(math.log(1 / alpha) * (n + m) / (2 * n * m))


@dataclass(frozen=True)
class DominationResult:
    passed: bool
    max_cdf_violation: float
    allowance: float


def sample_branch_weight(d: int, k: int, t: int, replicates: int, base_seed: int) -> np.ndarray:
    """W(v, t) for the vertex reached by k first-child steps; 0 when absent."""
    out = np.zeros(replicates, dtype=np.int64)
    for i in range(replicates):
        tree = grow_tree(d, t, make_rng(derive_seed(base_seed, i)))
        v = node_at_position(tree, [0] * k)
        out[i] = tree.weights[v] if v >= 0 else 0
    return out


def domination_check(d: int, k: int, t: int, replicates: int = 10_000, base_seed: int = 0,
                     alpha: float = 0.01) -> DominationResult:
    """Empirical W(v,t) against Binomial(t, product of k Beta(1/(d-1),1)).

    Domination means P(W <= s) >= P(Bin <= s) for every s; the check allows
    the one-sided two-sample DKW band at level ``alpha``.
    """
    if k < 0 or replicates < 1000:
        raise ParameterError("need k >= 0 and at least 1000 replicates")
    w = sample_branch_weight(d, k, t, replicates, base_seed)
    rng = make_rng(derive_seed(base_seed, 0xB1A5))
    p = sample_beta_power(d, rng, (replicates, k)).prod(axis=1) if k else np.ones(replicates)
    mix = rng.binomial(t, p)
    support = np.arange(t + 1)
    cdf_w = np.searchsorted(np.sort(w), support, side="right") / replicates
    cdf_mix = np.searchsorted(np.sort(mix), support, side="right") / replicates
    violation = float(max(0.0, (cdf_mix - cdf_w).max()))
    eps = dkw_allowance(replicates, replicates, alpha)
    return DominationResult(violation <= eps, violation, eps)


@dataclass
class ChernoffResult:
    passed: bool
    worst_ratio: float
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def coupled_weights(d: int, n: int, t: int, replicates: int, rng: np.random.Generator):
    """(mass, weight) pairs from the urn coupling along one root path of length n.

    Given the Beta factors, each level thins the parent weight minus one by a
    Binomial draw with that level's factor.
    """
    b = sample_beta_power(d, rng, (replicates, n))
    w = np.full(replicates, t, dtype=np.int64)
    for k in range(n):
        w = rng.binomial(np.maximum(w - 1, 0), b[:, k])
    return b.prod(axis=1), w


def chernoff_weight_check(d: int, n: int, t: int, replicates: int = 100_000,
                          q_grid: Sequence[float] = (0.001, 0.003, 0.01, 0.03, 0.1),
                          rate: float = 1.0, base_seed: int = 0) -> ChernoffResult:
    """P(W >= 2 t Ma | Ma >= q) against exp(-rate * t * q), one-sided with 3 sigma."""
    mass, w = coupled_weights(d, n, t, replicates, make_rng(derive_seed(base_seed, d, n, t)))
    event = w >= 2 * t * mass
    res = ChernoffResult(True, 0.0)
    for q in q_grid:
        cond = mass >= q
        m = int(cond.sum())
        if m == 0:
            res.skipped.append(q)
            continue
        freq = float(event[cond].mean())
        bound = math.exp(-rate * t * q)
        allowance = 3 * math.sqrt(bound * (1 - bound) / m)
        ok = bool(freq <= bound + allowance)
        res.rows.append({"q": q, "conditioned": m, "frequency": freq, "bound": bound,
                         "allowance": allowance, "passed": ok})
        res.passed &= ok
        res.worst_ratio = max(res.worst_ratio, freq / bound)
    return res


#: Exponent of the standard multiplicative Chernoff bound P(X >= 2 mu) <= exp(-c mu).
CHERNOFF_DOUBLING_RATE = 2 * math.log(2) - 1


@dataclass(frozen=True)
class UrnTestResult:
    passed: bool
    statistic: float
    p_value: float


def urn_mixture_test(d: int, t: int, size: int = 20_000, base_seed: int = 0,
                     alpha: float = 0.01) -> UrnTestResult:
    """Two-sample chi-square: Polya urn hits against the Beta-mixed binomial."""
    urn = polya_urn_hits_batch(d, t, size, make_rng(derive_seed(base_seed, d, t, 1)))
    mix = beta_binomial_mixture(d, t, size, make_rng(derive_seed(base_seed, d, t, 2)))
    stat, p = two_sample_chi2(urn, mix)
    return UrnTestResult(p >= alpha, stat, p)
