"""Seeded Monte Carlo oracle for the threshold policy and the prophet.

Sampling is inverse-transform in quantile space: a uniform draw u maps to
the value tail_quantile(u), and the policy accepts while u <= q.  For
atomic laws that acceptance rule is exactly uniform tie-breaking at the
threshold value (a threshold-equal value is taken with the residual
quantile probability); ``tie_break="none"`` compares values against the
threshold directly instead.

Streams are counter-based: each fixed-size chunk of trials gets its own
Philox key derived from (seed, stream, chunk index), and chunk results are
reduced in chunk order, so estimates are bit-identical however the chunks
are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .binom import SelectionInstance
from .distributions import Distribution

CHUNK = 1 << 16

_STREAM_THRESHOLD = 1
_STREAM_PROPHET = 2
_STREAM_SCAN = 3

_TIE_MODES = ("uniform-noise", "none")


@dataclass(frozen=True)
class McConfig:
    """Simulation knobs; identical configs reproduce identical estimates."""

    trials: int = 1_000_000
    seed: int = 0
    tie_break: str = "uniform-noise"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.seed) < 1 << 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.tie_break not in _TIE_MODES:
            raise ValueError(f"tie_break must be one of {_TIE_MODES}, got {self.tie_break!r}")


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    trials: int


def _chunk_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    key = (int(seed) << 64) | (stream << 48) | index
    return np.random.Generator(np.random.Philox(key=key))


def _chunk_sizes(trials: int):
    full, rest = divmod(trials, CHUNK)
    sizes = [CHUNK] * full
    if rest:
        sizes.append(rest)
    return sizes


class _RunningMoment:
    """Shifted first/second moment accumulator, reduced in deterministic order."""

    def __init__(self):
        self.count = 0
        self.shift = None
        self.linear = 0.0
        self.quadratic = 0.0

    def add(self, values: np.ndarray):
        if self.shift is None:
            self.shift = float(values.mean())
        centered = values - self.shift
        self.count += values.size
        self.linear += float(centered.sum())
        self.quadratic += float((centered * centered).sum())

    def estimate(self) -> McEstimate:
        n = self.count
        mean = self.shift + self.linear / n
        if n > 1:
            var = max(self.quadratic - self.linear * self.linear / n, 0.0) / (n - 1)
            stderr = math.sqrt(var / n)
        else:
            stderr = 0.0
        return McEstimate(mean=mean, stderr=stderr, trials=n)


class _RunningPair:
    """Joint moments of a coupled (numerator, denominator) sample stream."""

    def __init__(self):
        self.count = 0
        self.shift = None
        self.sums = np.zeros(5)  # a, o, a*a, o*o, a*o (shift-centered)

    def add(self, a: np.ndarray, o: np.ndarray):
        if self.shift is None:
            self.shift = (float(a.mean()), float(o.mean()))
        ca = a - self.shift[0]
        co = o - self.shift[1]
        self.count += a.size
        self.sums += (
            float(ca.sum()),
            float(co.sum()),
            float((ca * ca).sum()),
            float((co * co).sum()),
            float((ca * co).sum()),
        )

    def ratio(self) -> tuple[float, float]:
        """Delta-method mean and standard error of E[a]/E[o]."""
        n = self.count
        sa, so, saa, soo, sao = self.sums
        mean_a = self.shift[0] + sa / n
        mean_o = self.shift[1] + so / n
        r = mean_a / mean_o
        if n > 1:
            var_a = max(saa - sa * sa / n, 0.0) / (n - 1)
            var_o = max(soo - so * so / n, 0.0) / (n - 1)
            cov = (sao - sa * so / n) / (n - 1)
            spread = max(var_a - 2.0 * r * cov + r * r * var_o, 0.0)
            stderr = math.sqrt(spread / n) / abs(mean_o)
        else:
            stderr = 0.0
        return r, stderr


def _threshold_totals(
    dist, m: int, k: int, q: float, uniforms: np.ndarray, tie_break: str, values=None
):
    if values is None:
        values = dist.tail_quantile(uniforms)
    if tie_break == "uniform-noise":
        accept = uniforms <= q
    else:
        accept = values >= float(dist.tail_quantile(q))
    budget_open = np.cumsum(accept, axis=1) <= k
    return np.where(accept & budget_open, values, 0.0).sum(axis=1)


def simulate_threshold(
    dist: Distribution, m: int, k: int, q: float, cfg: McConfig
) -> McEstimate:
    """Estimate the expected sum collected by the quantile-q policy on m draws."""
    if k < 1 or m < k:
        raise ValueError(f"need m >= k >= 1, got m={m}, k={k}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    acc = _RunningMoment()
    for index, size in enumerate(_chunk_sizes(cfg.trials)):
        rng = _chunk_rng(cfg.seed, _STREAM_THRESHOLD, index)
        uniforms = rng.random((size, m))
        acc.add(_threshold_totals(dist, m, k, q, uniforms, cfg.tie_break))
    return acc.estimate()


def simulate_prophet(dist: Distribution, n: int, k: int, cfg: McConfig) -> McEstimate:
    """Estimate the expected sum of the k largest of n draws."""
    if k < 1 or n < k:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    acc = _RunningMoment()
    for index, size in enumerate(_chunk_sizes(cfg.trials)):
        rng = _chunk_rng(cfg.seed, _STREAM_PROPHET, index)
        uniforms = rng.random((size, n))
        if k < n:
            top = np.partition(uniforms, k - 1, axis=1)[:, :k]
        else:
            top = uniforms
        acc.add(dist.tail_quantile(top).sum(axis=1))
    return acc.estimate()


def empirical_ratio_scan(
    dist: Distribution, inst: SelectionInstance, q_grid: int, cfg: McConfig
) -> list[tuple[float, float, float]]:
    """Estimate policy/prophet value ratios across a quantile grid.

    All quantiles share each chunk's uniforms (common random numbers), and
    the prophet reads the first n columns of the same matrix, so noise from
    rare extreme values largely cancels in the ratio.  Standard errors come
    from the delta method with the sampled covariance.  Returns
    (q, ratio, stderr) triples on a grid containing k/n.
    """
    if q_grid < 2:
        raise ValueError(f"q_grid must be >= 2, got {q_grid}")
    qs = np.unique(
        np.concatenate([np.linspace(0.0, 1.0, q_grid), [inst.k / inst.n]])
    )
    pairs = [_RunningPair() for _ in qs]
    width = max(inst.m, inst.n)
    for index, size in enumerate(_chunk_sizes(cfg.trials)):
        rng = _chunk_rng(cfg.seed, _STREAM_SCAN, index)
        uniforms = rng.random((size, width))
        prophet_uniforms = uniforms[:, : inst.n]
        if inst.k < inst.n:
            top = np.partition(prophet_uniforms, inst.k - 1, axis=1)[:, : inst.k]
        else:
            top = prophet_uniforms
        prophet_totals = dist.tail_quantile(top).sum(axis=1)
        policy_uniforms = uniforms[:, : inst.m]
        policy_values = dist.tail_quantile(policy_uniforms)
        for pair, q in zip(pairs, qs):
            totals = _threshold_totals(
                dist, inst.m, inst.k, float(q), policy_uniforms, cfg.tie_break,
                values=policy_values,
            )
            pair.add(totals, prophet_totals)

    out = []
    for pair, q in zip(pairs, qs):
        ratio, stderr = pair.ratio()
        out.append((float(q), ratio, stderr))
    return out
