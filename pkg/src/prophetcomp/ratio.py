"""Expected values of threshold policies and the prophet benchmark.

Both sides are integrals of the tail quantile function: the policy value is
(expected acceptances / q) times the top-q quantile mass, the prophet value
integrates the quantile function against the order-statistic kernel.  The
worst case of their ratio over all distributions has the closed form
``q_value(m, k, k/n) / k`` attained at acceptance quantile k/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from .binom import SelectionInstance, g_cumulative, g_kernel, q_value
from .certificates import build_certificates, phi_values
from .distributions import AtomWorstCase, Distribution, QuantileTable

_QUAD_TOL = 1e-10
_MAX_EXACT_DEGREE = 2000


@dataclass(frozen=True)
class RatioResult:
    """Worst-case ratio of the best threshold policy to the prophet."""

    gamma: float
    optimal_quantile: float
    instance: SelectionInstance


def alg_value(dist: Distribution, m: int, k: int, q: float) -> float:
    """Expected sum collected by the quantile-q threshold policy on m draws.

    Equals E[min(k, Binomial(m, q))] times the mean value above the
    threshold; 0 at q = 0 by continuity.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if q == 0.0:
        return 0.0
    return q_value(m, k, q) / q * dist.tail_quantile_integral(q)


def _opt_quantile_table(dist: QuantileTable, n: int, k: int) -> float:
    # Kernel is a degree n-1 polynomial and f is linear per piece, so
    # fixed-order Gauss-Legendre integrates each piece exactly.
    nodes, weights = roots_legendre(n // 2 + 2)
    total = 0.0
    for (u0, _), (u1, _) in zip(dist.knots, dist.knots[1:]):
        mid, half = 0.5 * (u0 + u1), 0.5 * (u1 - u0)
        x = mid + half * nodes
        total += half * float(np.sum(weights * g_kernel(n, k, x) * dist.tail_quantile(x)))
    return total


def opt_value(dist: Distribution, n: int, k: int) -> float:
    """Expected sum of the k largest of n draws (the prophet's value).

    Step-shaped laws are integrated exactly against the cumulative kernel;
    smooth ones by adaptive quadrature split at the kernel's shoulder.
    """
    if k < 1 or n < k:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    if isinstance(dist, AtomWorstCase):
        top = g_cumulative(n, k, dist.p)
        return (dist.B + dist.A / dist.p) * top + dist.B * (k - top)
    if isinstance(dist, QuantileTable) and n <= _MAX_EXACT_DEGREE:
        return _opt_quantile_table(dist, n, k)
    val, _ = quad(
        lambda u: g_kernel(n, k, u) * float(dist.tail_quantile(u)),
        0.0,
        1.0,
        points=[k / n],
        limit=400,
        epsabs=_QUAD_TOL,
        epsrel=_QUAD_TOL,
    )
    return val


def competitive_ratio(inst: SelectionInstance) -> RatioResult:
    """Worst-case ratio over all distributions, with its optimal quantile k/n."""
    q = inst.k / inst.n
    gamma = q_value(inst.m, inst.k, q) / inst.k
    return RatioResult(gamma=gamma, optimal_quantile=q, instance=inst)


def phi_curve(inst: SelectionInstance, grid: int) -> list[tuple[float, float]]:
    """Sample the policy-value curve of the extremal two-level quantile shape.

    Evaluates (q_value(m,k,q)/q) * (A + q*B) with the certificate constants
    of the instance over a grid that contains 0, 1 and k/n exactly; the
    maximum sits at q = k/n and equals the competitive ratio.
    """
    if grid < 2:
        raise ValueError(f"grid must have at least 2 points, got {grid}")
    primal, _ = build_certificates(inst)
    qs = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid), [inst.k / inst.n]]))
    vals = phi_values(primal.A, primal.B, inst.m, inst.k, qs)
    return [(float(q), float(v)) for q, v in zip(qs, vals)]
