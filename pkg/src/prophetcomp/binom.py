"""Numerically stable binomial and Poisson primitives.

Everything is evaluated in log space so that trial counts up to ~10^7 stay
finite.  Short probability chains (the first ``k`` pmf terms) use the
multiplicative pmf recurrence seeded at the lowest index; single-point pmf
evaluation uses a saddle-point form (Stirling error plus binomial deviance,
the approach used by R's ``dbinom``) whose relative error stays near machine
precision even where naive ``gammaln`` differencing loses digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaln, logsumexp, xlogy

_LOG_2PI = math.log(2.0 * math.pi)

# Stirling series coefficients for log(n!) - log(sqrt(2*pi*n)*(n/e)^n).
_S0 = 1.0 / 12.0
_S1 = 1.0 / 360.0
_S2 = 1.0 / 1260.0
_S3 = 1.0 / 1680.0
_S4 = 1.0 / 1188.0


@dataclass(frozen=True)
class SelectionInstance:
    """Problem size triple: m observed values, n benchmark values, k picks.

    Requires k >= 1, n >= k and m >= k.
    """

    m: int
    n: int
    k: int

    def __post_init__(self):
        for name in ("m", "n", "k"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise ValueError(f"{name} must be an integer, got {v!r}")
        if self.k < 1:
            raise ValueError(f"selection budget k must be >= 1, got {self.k}")
        if self.n < self.k:
            raise ValueError(f"need n >= k, got n={self.n}, k={self.k}")
        if self.m < self.k:
            raise ValueError(f"need m >= k, got m={self.m}, k={self.k}")

    @property
    def threshold_quantile(self) -> float:
        """The optimal acceptance quantile k/n."""
        return self.k / self.n


@dataclass(frozen=True)
class BinomialLaw:
    """Binomial(trials, success) specification."""

    trials: int
    success: float

    def __post_init__(self):
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 0:
            raise ValueError(f"trials must be a nonnegative integer, got {self.trials!r}")
        if not 0.0 <= self.success <= 1.0:
            raise ValueError(f"success probability must lie in [0, 1], got {self.success!r}")

    def log_pmf(self, ell) -> np.ndarray | float:
        """Vectorized log pmf; see :func:`binom_pmf_log`."""
        return _binom_log_pmf(self.trials, self.success, ell)


def _check_quantile(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if np.any(q < 0.0) or np.any(q > 1.0):
        raise ValueError("quantile arguments must lie in [0, 1]")
    return q


def _check_mk(m: int, k: int):
    if k < 1:
        raise ValueError(f"need k >= 1, got k={k}")
    if m < k:
        raise ValueError(f"need m >= k, got m={m}, k={k}")


def _stirlerr(n: np.ndarray) -> np.ndarray:
    """log(n!) minus the leading Stirling term, for integer n >= 1."""
    n = np.asarray(n, dtype=float)
    small = n < 16.0
    ns = np.where(small, n, 16.0)
    direct = gammaln(ns + 1.0) - ((ns + 0.5) * np.log(ns) - ns + 0.5 * _LOG_2PI)
    inv2 = 1.0 / (n * n)
    series = (_S0 - (_S1 - (_S2 - (_S3 - _S4 * inv2) * inv2) * inv2) * inv2) / n
    return np.where(small, direct, series)


def _binom_deviance(x: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Stable x*log(x/mu) + mu - x for x, mu > 0."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    near = np.abs(x - mu) < 0.1 * (x + mu)
    # Series in v = (x-mu)/(x+mu); |v| < 0.05 so 16 terms are far past float64.
    v = np.where(near, (x - mu) / (x + mu), 0.0)
    s = (x - mu) * v
    ej = 2.0 * x * v
    v2 = v * v
    for j in range(1, 16):
        ej = ej * v2
        s = s + ej / (2 * j + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = x * np.log(x / mu) + mu - x
    return np.where(near, s, direct)


def _binom_log_pmf(trials: int, q: float, ell) -> np.ndarray | float:
    """log P[Binomial(trials, q) = ell], vectorized over ell."""
    ell_arr = np.asarray(ell)
    if np.any(ell_arr < 0) or np.any(ell_arr > trials):
        raise ValueError(f"pmf index out of range [0, {trials}]")
    x = ell_arr.astype(float)
    nf = float(trials)
    if trials == 0:
        out = np.zeros_like(x)
        return out if out.ndim else float(out)

    with np.errstate(divide="ignore", invalid="ignore"):
        at_zero = nf * math.log1p(-q) if q < 1.0 else -math.inf
        at_top = nf * math.log(q) if q > 0.0 else -math.inf
        xi = np.where((x > 0) & (x < trials), x, 0.5)  # interior placeholder
        lc = (
            _stirlerr(nf)
            - _stirlerr(xi)
            - _stirlerr(nf - xi)
            - _binom_deviance(xi, nf * q)
            - _binom_deviance(nf - xi, nf * (1.0 - q))
        )
        interior = lc - 0.5 * (_LOG_2PI + np.log(xi) + np.log1p(-xi / nf))

    out = np.where(x == 0, at_zero, np.where(x == trials, at_top, interior))
    if 0.0 < q < 1.0:
        pass
    else:
        # Degenerate laws put all mass at one endpoint.
        out = np.where((x > 0) & (x < trials), -math.inf, out)
    return out if out.ndim else float(out)


def binom_pmf_log(law: BinomialLaw, ell: int) -> float:
    """log P[Y = ell] for Y ~ Binomial(law.trials, law.success).

    Returns -inf where the pmf vanishes (degenerate success probabilities).
    Raises ValueError when ell falls outside {0, ..., trials}.
    """
    if not isinstance(ell, (int, np.integer)):
        raise ValueError(f"ell must be an integer, got {ell!r}")
    return float(_binom_log_pmf(law.trials, law.success, ell))


def _log_pmf_prefix(trials: int, q, count: int) -> np.ndarray:
    """log pmf of Binomial(trials, q) at ell = 0..count-1, shape (count, *q.shape).

    Uses the multiplicative recurrence
    ``pmf(ell+1)/pmf(ell) = (trials-ell)/(ell+1) * q/(1-q)``
    in log space, seeded at ell = 0.  Boundary probabilities q in {0, 1}
    are handled by their analytic limits rather than the recurrence.
    """
    if count < 1 or count > trials + 1:
        raise ValueError(f"need 1 <= count <= trials+1, got count={count}, trials={trials}")
    q = np.asarray(q, dtype=float)
    shape = (count,) + q.shape
    flat = np.atleast_1d(q)
    out = np.full((count,) + flat.shape, -np.inf)

    interior = (flat > 0.0) & (flat < 1.0)
    if np.any(interior):
        qi = np.where(interior, flat, 0.5)
        lp0 = trials * np.log1p(-qi)
        if count > 1:
            ell = np.arange(count - 1, dtype=float)
            steps = (
                np.log(trials - ell)[:, None]
                - np.log(ell + 1.0)[:, None]
                + (np.log(qi) - np.log1p(-qi))[None, :]
            )
            lp = lp0[None, :] + np.concatenate(
                [np.zeros((1,) + qi.shape), np.cumsum(steps, axis=0)], axis=0
            )
        else:
            lp = lp0[None, :]
        out = np.where(interior[None, :], lp, out)

    out[0] = np.where(flat == 0.0, 0.0, out[0])
    if count == trials + 1:
        out[trials] = np.where(flat == 1.0, 0.0, out[trials])
    return out.reshape(shape)


def binom_shortfall(m: int, k: int, q) -> float | np.ndarray:
    """E[(k - Y)_+] for Y ~ Binomial(m, q): the expected unused budget.

    Computed directly from the first k pmf terms, so it stays accurate when
    the result is many orders of magnitude below k.
    """
    _check_mk(m, k)
    qa = _check_quantile(q)
    lp = _log_pmf_prefix(m, qa, k)
    weights = (k - np.arange(k, dtype=float)).reshape((k,) + (1,) * qa.ndim)
    val = np.exp(logsumexp(lp, axis=0, b=weights))
    return float(val) if np.ndim(q) == 0 else val


def q_value(m: int, k: int, q) -> float | np.ndarray:
    """E[min(k, Y)] for Y ~ Binomial(m, q): expected number of acceptances.

    Equals ``k - binom_shortfall(m, k, q)``; increasing and concave in q,
    with range [0, k].
    """
    return k - binom_shortfall(m, k, q)


def q_deriv(m: int, k: int, q) -> float | np.ndarray:
    """Derivative of :func:`q_value` in q:  m * P[Binomial(m-1, q) <= k-1]."""
    _check_mk(m, k)
    qa = _check_quantile(q)
    if m == 1:  # Binomial(0, q) sits at 0, inside the prefix window
        val = np.ones_like(qa)
    else:
        lp = _log_pmf_prefix(m - 1, qa, min(k, m))
        val = np.exp(logsumexp(lp, axis=0))
    out = m * val
    return float(out) if np.ndim(q) == 0 else out


def q_second_deriv(m: int, k: int, q) -> float | np.ndarray:
    """Second derivative of :func:`q_value` in q; always <= 0.

    Closed form -m(m-1) C(m-2, k-1) q^(k-1) (1-q)^(m-k-1).  Zero when m = k
    (the expected-acceptance curve is linear); for m = k+1 both exponent
    conventions reduce to -m(m-1) q^(k-1).
    """
    _check_mk(m, k)
    qa = _check_quantile(q)
    if m == k or m == 1:
        out = np.zeros_like(qa)
        return float(out) if np.ndim(q) == 0 else out
    log_coeff = (
        math.log(m)
        + math.log(m - 1)
        + gammaln(m - 1)
        - gammaln(k)
        - gammaln(m - k)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = xlogy(k - 1, qa) + xlogy(m - k - 1, 1.0 - qa)
    out = -np.exp(log_coeff + log_term)
    return float(out) if np.ndim(q) == 0 else out


def g_kernel(n: int, k: int, u) -> float | np.ndarray:
    """Order-statistic kernel weighting the tail-quantile function.

    g(u) = sum_{ell=n-k+1}^{n} ell C(n, ell) (1-u)^(ell-1) u^(n-ell),
    which equals n * P[Binomial(n-1, u) <= k-1].  Bounded by n and
    integrating to k over [0, 1].
    """
    _check_mk(n, k)
    ua = _check_quantile(u)
    if n == 1:
        out = np.ones_like(ua)
    else:
        lp = _log_pmf_prefix(n - 1, ua, min(k, n))
        out = n * np.exp(logsumexp(lp, axis=0))
    return float(out) if np.ndim(u) == 0 else out


def g_cumulative(n: int, k: int, u) -> float | np.ndarray:
    """Exact integral of :func:`g_kernel` over [0, u].

    Each pmf term integrates to a regularized incomplete beta function:
    G(u) = sum_{j=0}^{k-1} I_u(j+1, n-j).  G(1) = k.
    """
    _check_mk(n, k)
    ua = _check_quantile(u)
    total = np.zeros_like(ua)
    for j in range(k):
        total = total + betainc(j + 1, n - j, ua)
    return float(total) if np.ndim(u) == 0 else total


def poisson_shortfall(k: int, lam: float) -> float:
    """E[(k - Z)_+] for Z ~ Poisson(lam)."""
    if k < 1:
        raise ValueError(f"need k >= 1, got k={k}")
    if lam < 0:
        raise ValueError(f"need lambda >= 0, got {lam}")
    if lam == 0.0:
        return float(k)
    ell = np.arange(k, dtype=float)
    if k > 1:
        steps = math.log(lam) - np.log(np.arange(1, k, dtype=float))
        lp = -lam + np.concatenate([[0.0], np.cumsum(steps)])
    else:
        lp = np.array([-lam])
    return float(np.exp(logsumexp(lp, b=k - ell)))


def poisson_min_expectation(k: int, lam: float) -> float:
    """E[min(k, Z)] for Z ~ Poisson(lam); the large-m limit of :func:`q_value`
    along m*q -> lam.  Nondecreasing in lam with range [0, k].
    """
    return k - poisson_shortfall(k, lam)
