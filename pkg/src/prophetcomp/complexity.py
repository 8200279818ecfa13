"""How much extra competition a threshold policy needs to reach the prophet.

For accuracy target 1 - epsilon the required observation scaling m/n is
computed three ways: exactly for finite n by integer search, in the
large-n Poisson limit by bisection, and through closed-form bounds.  The
optimizer t* of the exponential bound solves e^t = theta + 1 + t and is
cross-validated against an independent Lambert W_{-1} evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .binom import binom_shortfall, poisson_shortfall

_MIN_EPSILON = 1e-15  # below this the log arithmetic is no longer trustworthy
_BETA_BISECT_TOL = 1e-10
_SOLVER_AGREEMENT = 1e-10


@dataclass(frozen=True)
class ComplexityQuery:
    """Accuracy target: budget k, tolerance epsilon, optional benchmark length n."""

    k: int
    epsilon: float
    n: int | None = None

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        if not _MIN_EPSILON <= self.epsilon < 1.0:
            raise ValueError(
                f"epsilon must lie in [{_MIN_EPSILON}, 1), got {self.epsilon!r}"
            )
        if self.n is not None and self.n < self.k:
            raise ValueError(f"need n >= k, got n={self.n}, k={self.k}")


@dataclass(frozen=True)
class ComplexityReport:
    """Bounds and estimates for the required observation scaling.

    ``poisson_estimate`` is the large-n limit value; for k > 1 the limit is
    not proven to attain the supremum over n, so finite-n values serve as
    certified lower witnesses.
    """

    lower: float
    upper: float
    t_star: float
    psi_at_t_star: float
    poisson_estimate: float
    finite_n_value: float | None = None

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "t_star": self.t_star,
            "psi_at_t_star": self.psi_at_t_star,
            "poisson_estimate": self.poisson_estimate,
            "finite_n_value": self.finite_n_value,
        }


def psi(k: int, t: float, epsilon: float) -> float:
    """Exponential-bound rate (t(k-1) + ln(1/eps)) / (k (1 - e^-t)), t > 0."""
    if k <= 1:
        raise ValueError(f"psi needs k > 1, got k={k}")
    if t <= 0.0:
        raise ValueError(f"psi needs t > 0, got t={t}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return (t * (k - 1) + math.log(1.0 / epsilon)) / (k * -math.expm1(-t))


def lambert_wm1(y: float) -> float:
    """Lower real branch of w e^w = y on [-1/e, 0), by seeded Halley iteration."""
    if y >= 0.0 or y < -1.0 / math.e - 1e-15:
        raise ValueError(f"lambert_wm1 needs -1/e <= y < 0, got {y}")
    if y <= -1.0 / math.e:
        return -1.0
    if y > -0.27:
        # Asymptotic seed near zero: w ~ ln(-y) - ln(-ln(-y)).
        l1 = math.log(-y)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    else:
        # Series seed near the branch point.
        s = math.sqrt(2.0 * (1.0 + math.e * y))
        w = -1.0 - s - s * s / 3.0 - 11.0 * s**3 / 72.0
    for _ in range(60):
        ew = math.exp(w)
        f = w * ew - y
        if f == 0.0:
            break
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        step = f / denom
        w -= step
        if abs(step) <= 1e-15 * abs(w):
            break
    return w


def _exp_gap(t: float, theta: float) -> float:
    """e^t - 1 - t - theta, the stationarity residual of the rate bound."""
    return math.expm1(t) - t - theta


def t_star(k: int, epsilon: float) -> float:
    """Unique positive minimizer of t -> psi(k, t, epsilon).

    Solves e^t = theta + 1 + t with theta = ln(1/eps)/(k-1) by safeguarded
    Newton iteration, and insists the independent Lambert W_{-1} route
    agrees to 1e-10 before returning.
    """
    if k <= 1:
        raise ValueError(f"t_star needs k > 1, got k={k}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    theta = math.log(1.0 / epsilon) / (k - 1)

    lo, hi = 0.0, max(1.0, math.sqrt(2.0 * theta) + 1.0)
    while _exp_gap(hi, theta) < 0.0:
        hi *= 2.0
    t = min(max(math.sqrt(2.0 * theta), 1e-8), hi)
    for _ in range(100):
        f = _exp_gap(t, theta)
        if f > 0.0:
            hi = t
        else:
            lo = t
        step = f / math.expm1(t) if t > 0 else 0.0
        t_new = t - step
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 1e-16 * max(t_new, 1.0):
            t = t_new
            break
        t = t_new

    via_lambert = math.log(-lambert_wm1(-math.exp(-theta - 1.0)))
    if abs(via_lambert - t) > _SOLVER_AGREEMENT * max(1.0, t):
        raise AssertionError(
            f"stationary-point solvers disagree: newton={t!r}, lambert={via_lambert!r}"
        )
    return t


def closed_form_upper(k: int, epsilon: float) -> float:
    """Explicit bound 1 + 2 ln(1/eps)/(k-1) + sqrt(2 ln(1/eps)/(k-1)), k > 1."""
    if k <= 1:
        raise ValueError(f"closed_form_upper needs k > 1, got k={k}")
    ratio = 2.0 * math.log(1.0 / epsilon) / (k - 1)
    return 1.0 + ratio + math.sqrt(ratio)


def poisson_complexity_estimate(k: int, epsilon: float) -> float:
    """Smallest scaling beta with E[(k - Z)_+] <= k*epsilon, Z ~ Poisson(beta*k).

    Bisects inside [ln(1/eps)/k, upper bound], where the root is guaranteed
    to lie; for k = 1 the answer is exactly ln(1/eps).
    """
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if not _MIN_EPSILON <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [{_MIN_EPSILON}, 1), got {epsilon}")
    target = k * epsilon
    lo = math.log(1.0 / epsilon) / k
    if poisson_shortfall(k, lo * k) <= target:
        return lo
    hi = closed_form_upper(k, epsilon) if k > 1 else lo
    while poisson_shortfall(k, hi * k) > target:  # analytic guarantee; belt and braces
        hi *= 2.0
    while hi - lo > _BETA_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if poisson_shortfall(k, mid * k) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def beta_finite_n(k: int, n: int, epsilon: float) -> Fraction:
    """Exact minimal scaling m/n with the finite-n ratio >= 1 - epsilon.

    The smallest m >= k with q_value(m, k, k/n) >= k(1-epsilon), found by
    doubling then binary search over the monotone acceptance count.
    """
    if k < 1 or n < k:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    if not _MIN_EPSILON <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [{_MIN_EPSILON}, 1), got {epsilon}")
    q = k / n
    target = k * epsilon

    def satisfied(m: int) -> bool:
        return binom_shortfall(m, k, q) <= target

    if satisfied(k):
        return Fraction(k, n)
    hi = 2 * k
    while not satisfied(hi):
        hi *= 2
        if hi > 1 << 62:
            raise AssertionError("runaway search for the finite-n scaling")
    lo = hi // 2  # known to fail
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if satisfied(mid):
            hi = mid
        else:
            lo = mid
    return Fraction(hi, n)


def finite_n_scan(k: int, epsilon: float, ns) -> list[tuple[int, Fraction]]:
    """Exact finite-n scalings over a grid of benchmark lengths."""
    return [(int(n), beta_finite_n(k, int(n), epsilon)) for n in ns]


def beta_bounds(query: ComplexityQuery) -> ComplexityReport:
    """Assemble bounds, the Poisson-limit estimate and optional finite-n value.

    For k = 1 everything collapses to ln(1/epsilon); for k > 1 the upper
    bound is the optimized exponential rate, capped by its closed form.
    """
    k, eps = query.k, query.epsilon
    log_inv = math.log(1.0 / eps)
    lower = log_inv / k
    if k == 1:
        ts = math.inf
        psi_star = log_inv
        upper = log_inv
    else:
        ts = t_star(k, eps)
        psi_star = psi(k, ts, eps)
        upper = min(psi_star, closed_form_upper(k, eps))
    pois = poisson_complexity_estimate(k, eps)
    finite = float(beta_finite_n(k, query.n, eps)) if query.n is not None else None
    return ComplexityReport(
        lower=lower,
        upper=upper,
        t_star=ts,
        psi_at_t_star=psi_star,
        poisson_estimate=pois,
        finite_n_value=finite,
    )
