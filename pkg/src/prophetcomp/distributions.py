"""Nonnegative value distributions described by their tail quantile function.

Every variant exposes ``tail_quantile(u) = F^{-1}(1 - u)``, the value whose
upper-tail probability is u, plus the exact integral of that function over
[0, q].  All ratio formulas, the Monte Carlo sampler and the worst-case
construction operate purely in this quantile space.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

_TINY_U = 1e-300  # floor for tail probabilities in unbounded quantile maps


class Distribution(ABC):
    """A nonnegative distribution with finite mean, seen through its quantiles."""

    @abstractmethod
    def tail_quantile(self, u):
        """Value with upper-tail probability u, vectorized; nonincreasing in u."""

    @abstractmethod
    def tail_quantile_integral(self, q) -> float:
        """Exact integral of ``tail_quantile`` over [0, q]."""

    def mean(self) -> float:
        return self.tail_quantile_integral(1.0)

    def label(self) -> str:
        return repr(self)


@dataclass(frozen=True)
class Uniform(Distribution):
    """Uniform on [lo, hi], 0 <= lo < hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi):
            raise ValueError(f"need 0 <= lo < hi, got lo={self.lo}, hi={self.hi}")

    def tail_quantile(self, u):
        return self.hi - (self.hi - self.lo) * np.asarray(u, dtype=float)

    def tail_quantile_integral(self, q) -> float:
        q = float(q)
        return self.hi * q - 0.5 * (self.hi - self.lo) * q * q


@dataclass(frozen=True)
class Exponential(Distribution):
    """Exponential with the given rate (mean 1/rate)."""

    rate: float

    def __post_init__(self):
        if self.rate <= 0.0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def tail_quantile(self, u):
        u = np.maximum(np.asarray(u, dtype=float), _TINY_U)
        return -np.log(u) / self.rate

    def tail_quantile_integral(self, q) -> float:
        q = float(q)
        if q == 0.0:
            return 0.0
        return q * (1.0 - np.log(q)) / self.rate


@dataclass(frozen=True)
class Pareto(Distribution):
    """Pareto with tail index ``shape`` > 1 (finite mean) and minimum ``scale``."""

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 1.0:
            raise ValueError(
                f"shape must exceed 1 for a finite mean, got shape={self.shape}"
            )
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def tail_quantile(self, u):
        u = np.maximum(np.asarray(u, dtype=float), _TINY_U)
        return self.scale * u ** (-1.0 / self.shape)

    def tail_quantile_integral(self, q) -> float:
        q = float(q)
        if q == 0.0:
            return 0.0
        a = 1.0 - 1.0 / self.shape
        return self.scale * q**a / a


@dataclass(frozen=True)
class QuantileTable(Distribution):
    """Piecewise-linear tail quantile through knots (u_i, value_i).

    Knot abscissae must be strictly increasing, start at 0 and end at 1;
    values must be nonnegative and nonincreasing.
    """

    knots: tuple = field()

    def __post_init__(self):
        knots = tuple((float(u), float(v)) for u, v in self.knots)
        object.__setattr__(self, "knots", knots)
        us = np.array([u for u, _ in knots])
        vs = np.array([v for _, v in knots])
        if len(knots) < 2:
            raise ValueError("need at least two knots")
        if us[0] != 0.0 or us[-1] != 1.0:
            raise ValueError("knot abscissae must start at 0 and end at 1")
        if np.any(np.diff(us) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        if np.any(vs < 0):
            raise ValueError("knot values must be nonnegative")
        if np.any(np.diff(vs) > 0):
            raise ValueError("knot values must be nonincreasing")

    def _arrays(self):
        us = np.array([u for u, _ in self.knots])
        vs = np.array([v for _, v in self.knots])
        return us, vs

    def tail_quantile(self, u):
        us, vs = self._arrays()
        return np.interp(np.asarray(u, dtype=float), us, vs)

    def tail_quantile_integral(self, q) -> float:
        q = float(q)
        us, vs = self._arrays()
        total = 0.0
        for (u0, v0), (u1, v1) in zip(self.knots, self.knots[1:]):
            if q <= u0:
                break
            hi = min(q, u1)
            vhi = v0 + (v1 - v0) * (hi - u0) / (u1 - u0)
            total += 0.5 * (v0 + vhi) * (hi - u0)
        return total


@dataclass(frozen=True)
class AtomWorstCase(Distribution):
    """Two-point law: value B + A/p with probability p, value B otherwise.

    As p shrinks this realizes a tail quantile with mass A concentrated at
    quantile 0 on top of a flat level B, the extremal shape for the
    competitive-ratio bound; for q >= p the quantile integral is exactly
    A + q*B.
    """

    A: float
    B: float
    p: float

    def __post_init__(self):
        if self.A < 0.0 or self.B < 0.0:
            raise ValueError("A and B must be nonnegative")
        if not (0.0 < self.p <= 1.0):
            raise ValueError(f"p must lie in (0, 1], got {self.p}")

    def tail_quantile(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u <= self.p, self.B + self.A / self.p, self.B)

    def tail_quantile_integral(self, q) -> float:
        q = float(q)
        return self.B * q + self.A * min(q, self.p) / self.p


def catalog() -> list[Distribution]:
    """Fixed spread of distributions used by validation batteries."""
    return [
        Uniform(0.0, 1.0),
        Uniform(2.0, 5.0),
        Exponential(1.0),
        Exponential(0.25),
        Pareto(3.0, 1.0),
        QuantileTable(((0.0, 4.0), (0.1, 2.5), (0.4, 1.0), (1.0, 0.0))),
    ]


_GRAMMAR = (
    "distribution grammar: uniform:LO,HI | exp:RATE | pareto:SHAPE,SCALE | "
    "atomwc:A,B,P | atomwc:auto"
)


def parse_distribution(spec: str, instance=None) -> Distribution:
    """Parse ``name:params`` distribution strings used on the command line.

    ``atomwc:auto`` expands to the worst-case two-point law at the
    certificate constants of ``instance`` with resolution p = 1e-3.
    """
    try:
        name, _, rest = spec.partition(":")
        name = name.strip().lower()
        if name in ("uniform", "unif"):
            lo, hi = (float(x) for x in rest.split(","))
            return Uniform(lo, hi)
        if name in ("exp", "exponential"):
            return Exponential(float(rest))
        if name == "pareto":
            shape, scale = (float(x) for x in rest.split(","))
            return Pareto(shape, scale)
        if name in ("atomwc", "atom"):
            if rest.strip().lower() == "auto":
                if instance is None:
                    raise ValueError("atomwc:auto needs an instance for its constants")
                from .certificates import build_certificates

                primal, _ = build_certificates(instance)
                return AtomWorstCase(primal.A, primal.B, 1e-3)
            a, b, p = (float(x) for x in rest.split(","))
            return AtomWorstCase(a, b, p)
    except ValueError as exc:
        raise ValueError(f"cannot parse {spec!r}; {_GRAMMAR} ({exc})") from exc
    raise ValueError(f"unknown distribution {name!r}; {_GRAMMAR}")
