"""Samplers and Monte Carlo estimators for the offspring-fraction distributions.

Every sampler takes an explicit ``numpy.random.Generator``; use
:func:`make_rng` to obtain a seeded counter-based (Philox) stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

MASK64 = (1 << 64) - 1


class ParameterError(ValueError):
    """Raised when an operation receives parameters outside its domain."""


def make_rng(seed: int) -> np.random.Generator:
    """Seeded Philox stream (64-bit key, counter-based)."""
    return np.random.Generator(np.random.Philox(int(seed) & MASK64))


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(*parts: int) -> int:
    """Mix integers into one 64-bit seed; order-sensitive and schedule-free."""
    h = 0
    for p in parts:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


@dataclass(frozen=True)
class Model:
    """Which random structure (and offspring-fraction law) is meant."""

    name: str
    d: Optional[int] = None
    r: Optional[int] = None

    @classmethod
    def dary(cls, d: int, r: int) -> "Model":
        if d < 2 or not 1 <= r < d:
            raise ParameterError(f"need 1 <= r < d, d >= 2 (got d={d}, r={r})")
        return cls("dary", d, r)

    @classmethod
    def ran(cls) -> "Model":
        return cls("ran")

    @property
    def params(self) -> str:
        return f"d={self.d};r={self.r}" if self.name == "dary" else ""

    def __str__(self) -> str:
        return f"dary({self.d},{self.r})" if self.name == "dary" else "ran"


@dataclass(frozen=True)
class UrnState:
    init_a: int
    init_b: int
    reinforcement: int
    draws: int = 0
    hits_a: int = 0

    @property
    def count_a(self) -> int:
        return self.init_a + self.reinforcement * self.hits_a

    @property
    def count_b(self) -> int:
        return self.init_b + self.reinforcement * (self.draws - self.hits_a)

    def draw(self, rng: np.random.Generator) -> "UrnState":
        p = self.count_a / (self.count_a + self.count_b)
        hit = int(rng.random() < p)
        return UrnState(self.init_a, self.init_b, self.reinforcement,
                        self.draws + 1, self.hits_a + hit)


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    half_width_95: float
    samples: int
    degenerate: bool = False


def _check_d(d: int) -> None:
    if int(d) != d or d < 2:
        raise ParameterError(f"d must be an integer >= 2, got {d}")


def sample_beta_power(d: int, rng: np.random.Generator, size=None):
    """Beta(1/(d-1), 1) by inverse CDF: U**(d-1).

    ``1 - random()`` keeps the uniform in (0, 1] so the variate is never 0.
    """
    _check_d(d)
    u = 1.0 - rng.random(size)
    return u ** (d - 1)


def sample_dirichlet(d: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Symmetric Dirichlet(1/(d-1), ..., 1/(d-1)) vectors along the last axis.

    Gamma(a) variates are drawn as Gamma(a+1) * U**(1/a) in log space, so
    small shape parameters cannot underflow to an exact zero entry.
    """
    _check_d(d)
    a = 1.0 / (d - 1)
    shape = (d,) if size is None else tuple(np.atleast_1d(size)) + (d,)
    log_g = np.log(rng.gamma(a + 1.0, size=shape))
    log_g += np.log(1.0 - rng.random(shape)) / a
    log_g -= log_g.max(axis=-1, keepdims=True)
    g = np.exp(log_g)
    return g / g.sum(axis=-1, keepdims=True)


def upsilon_dary(x, r: int):
    """Total of the d - r smallest entries (the least mass an r-selection drops)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    if not 1 <= r < d:
        raise ParameterError(f"need 1 <= r < d = {d}, got r={r}")
    k = d - r
    part = np.partition(x, k - 1, axis=-1)[..., :k]
    out = part.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def upsilon_ran(a, b):
    """Minimum of the 27 products a_i * b_j (factorizes as min(a) * min(b))."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != 3 or b.shape[-1] != 9:
        raise ParameterError("a must have 3 entries and b must have 9")
    out = a.min(axis=-1) * b.min(axis=-1)
    return float(out) if out.ndim == 0 else out


def sample_upsilon(model: Model, size: int, rng: np.random.Generator) -> np.ndarray:
    if model.name == "dary":
        return upsilon_dary(sample_dirichlet(model.d, rng, size), model.r)
    vecs = sample_dirichlet(3, rng, (size, 4))
    return upsilon_ran(vecs[:, 0, :], vecs[:, 1:, :].reshape(size, 9))


def polya_urn_hits(d: int, t: int, rng: np.random.Generator) -> int:
    """Colour-1 draws after t draws of an urn started at (1, d-1), reinforcement d-1."""
    _check_d(d)
    if t < 0:
        raise ParameterError("t must be nonnegative")
    state = UrnState(1, d - 1, d - 1)
    for _ in range(t):
        state = state.draw(rng)
    return state.hits_a


def polya_urn_hits_batch(d: int, t: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Independent copies of :func:`polya_urn_hits`, stepped in lockstep."""
    _check_d(d)
    if t < 0:
        raise ParameterError("t must be nonnegative")
    hits = np.zeros(size, dtype=np.int64)
    for s in range(t):
        count_a = 1 + (d - 1) * hits
        total = d + (d - 1) * s
        hits += rng.random(size) * total < count_a
    return hits


def beta_binomial_mixture(d: int, t: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Binomial(t, B) with B ~ Beta(1/(d-1), 1)."""
    return rng.binomial(t, sample_beta_power(d, rng, size))


def two_sample_chi2(x, y, min_expected: float = 5.0) -> tuple[float, float]:
    """Chi-square homogeneity test for two integer samples.

    Adjacent values are pooled until every cell has the required expected
    count. Returns ``(statistic, p_value)``.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    lo = min(x.min(), y.min())
    hi = max(x.max(), y.max())
    cx = np.bincount(x - lo, minlength=hi - lo + 1)
    cy = np.bincount(y - lo, minlength=hi - lo + 1)
    frac = min(len(x), len(y)) / (len(x) + len(y))
    rows_x, rows_y = [], []
    ax = ay = 0
    for a, b in zip(cx, cy):
        ax += a
        ay += b
        if (ax + ay) * frac >= min_expected:
            rows_x.append(ax)
            rows_y.append(ay)
            ax = ay = 0
    if ax + ay:
        if rows_x:
            rows_x[-1] += ax
            rows_y[-1] += ay
        else:
            rows_x.append(ax)
            rows_y.append(ay)
    if len(rows_x) < 2:
        return 0.0, 1.0
    stat, p, _, _ = stats.chi2_contingency(np.array([rows_x, rows_y]), correction=False)
    return float(stat), float(p)


def mean_ci(values) -> MomentEstimate:
    v = np.asarray(values, dtype=float)
    n = v.size
    sd = float(v.std(ddof=1)) if n > 1 else 0.0
    return MomentEstimate(float(v.mean()), 1.96 * sd / math.sqrt(n), n)


def estimate_moment(model: Model, lam: float, samples: int = 100_000,
                    rng: Optional[np.random.Generator] = None) -> MomentEstimate:
    """Monte Carlo E[(1 - Upsilon)**lam] with a normal-approximation 95% CI."""
    if lam < 0:
        raise ParameterError("lambda must be nonnegative")
    if samples < 1000:
        raise ParameterError("need at least 1000 samples")
    if lam == 0:
        return MomentEstimate(1.0, 0.0, samples)
    rng = rng if rng is not None else make_rng(0)
    ups = sample_upsilon(model, samples, rng)
    log_terms = lam * np.log1p(-ups)
    if log_terms.max() < math.log(np.finfo(float).tiny):
        return MomentEstimate(float("nan"), float("nan"), samples, degenerate=True)
    return mean_ci(np.exp(log_terms))
