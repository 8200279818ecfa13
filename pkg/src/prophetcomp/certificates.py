"""Optimality certificates for the worst-case ratio, checked numerically.

The closed-form ratio ``q_value(m,k,k/n)/k`` is pinned down by an explicit
pair of solutions to an infinite-dimensional minimax program and its dual:
a two-level extremal quantile shape (atom mass A at quantile zero over a
flat level B) on the primal side, and a point mass at k/n with an
absolutely continuous slack function eta on the dual side.  This module
builds both, verifies feasibility and complementarity on dense grids, and
checks the curvature machinery that makes k/n the unique maximizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, roots_legendre, xlogy

from .binom import (
    SelectionInstance,
    g_cumulative,
    g_kernel,
    q_deriv,
    q_value,
)

EQUALITY_RTOL = 1e-10  # residuals on constraints that hold with equality
SIGN_SLACK = 1e-12  # slack for strict sign checks
NONNEG_SLACK = 1e-12  # allowed dip below zero for nonnegative functions
IDENTITY_TOL = 1e-8  # quadrature-vs-closed-form identity tolerance

_GL_NODES, _GL_WEIGHTS = roots_legendre(16)


@dataclass(frozen=True)
class PrimalCertificate:
    """Extremal quantile shape (A, B) and its policy value bound d.

    A is the mass concentrated at quantile zero, B the flat level on (0, 1];
    they are normalized so the prophet value is one: A*n + B*k = 1.
    """

    A: float
    B: float
    d: float

    def __post_init__(self):
        if self.A < 0.0 or self.B < 0.0:
            raise ValueError(f"certificate weights must be nonnegative, got A={self.A}, B={self.B}")
        if self.d <= 0.0:
            raise ValueError(f"objective must be positive, got d={self.d}")


@dataclass(frozen=True)
class DualCertificate:
    """Dual point mass at k/n with value v and slack function eta.

    ``eta`` vanishes at both endpoints and stays nonnegative; its slope,
    together with v times the order-statistic kernel, reproduces the
    step-shaped right-hand side exactly.
    """

    instance: SelectionInstance
    v: float
    atom_location: float
    qhat: float = field(repr=False)  # expected acceptances at k/n (= k*v)

    def eta(self, u) -> np.ndarray | float:
        inst = self.instance
        ua = np.asarray(u, dtype=float)
        cum = g_cumulative(inst.n, inst.k, ua)
        left = (inst.n / inst.k) * self.qhat * ua - self.v * cum
        right = self.qhat - self.v * cum
        out = np.where(ua <= self.atom_location, left, right)
        return float(out) if np.ndim(u) == 0 else out

    def eta_slope(self, u) -> np.ndarray | float:
        inst = self.instance
        ua = np.asarray(u, dtype=float)
        ker = g_kernel(inst.n, inst.k, ua)
        left = (inst.n / inst.k) * self.qhat - self.v * ker
        out = np.where(ua <= self.atom_location, left, -self.v * ker)
        return float(out) if np.ndim(u) == 0 else out


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid on [0, 1] that always contains the breakpoint k/n."""

    points: int = 10_000

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"need at least 2 grid points, got {self.points}")

    def quantiles(self, inst: SelectionInstance) -> np.ndarray:
        base = np.linspace(0.0, 1.0, self.points)
        return np.unique(np.concatenate([base, [inst.k / inst.n]]))


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one numerical verification, serializable to JSON."""

    instance: SelectionInstance
    check: str
    passed: bool
    max_residual: float
    witness: float | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def as_dict(self) -> dict:
        return {
            "instance": {"m": self.instance.m, "n": self.instance.n, "k": self.instance.k},
            "check": self.check,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "witness": self.witness,
            "details": self.details,
        }


def phi_values(A: float, B: float, m: int, k: int, q) -> np.ndarray | float:
    """Policy value (q_value(m,k,q)/q) * (A + q*B) of the two-level shape.

    Continuous at q = 0 with value 0 when A carries no kernel weight there.
    """
    qa = np.asarray(q, dtype=float)
    out = np.zeros_like(qa)
    pos = qa > 0.0
    if np.any(pos):
        qp = qa[pos]
        out[pos] = q_value(m, k, qp) / qp * (A + qp * B)
    return float(out) if np.ndim(q) == 0 else out


def build_certificates(inst: SelectionInstance) -> tuple[PrimalCertificate, DualCertificate]:
    """Construct the matched primal/dual optimal solutions of an instance.

    Both objectives equal q_value(m, k, k/n) / k by the same expression, so
    the pair witnesses a zero duality gap once feasibility is verified.
    """
    m, n, k = inst.m, inst.n, inst.k
    qhat_arg = k / n
    qv = q_value(m, k, qhat_arg)
    qd = q_deriv(m, k, qhat_arg)
    a = k * qd / (n * n * qv)
    b = 1.0 / k - qd / (n * qv)
    if b < 0.0:
        if b < -1e-13 / k:
            raise AssertionError(f"flat level came out negative: {b}")
        b = 0.0  # m = k makes this identically zero; absorb roundoff
    d = qv / k
    primal = PrimalCertificate(A=a, B=b, d=d)
    dual = DualCertificate(instance=inst, v=d, atom_location=qhat_arg, qhat=qv)
    return primal, dual


def check_primal_feasibility(
    primal: PrimalCertificate, inst: SelectionInstance, grid: GridSpec
) -> CheckReport:
    """Verify that d dominates the value curve, with equality at k/n.

    Also confirms the normalization A*n + B*k = 1 that pins the prophet
    value to one.
    """
    qs = grid.quantiles(inst)
    vals = phi_values(primal.A, primal.B, inst.m, inst.k, qs)
    violation = vals - primal.d
    worst = int(np.argmax(violation))
    max_violation = float(violation[worst])

    qhat_arg = inst.k / inst.n
    at_peak = float(phi_values(primal.A, primal.B, inst.m, inst.k, qhat_arg))
    peak_residual = abs(at_peak - primal.d)
    norm_residual = abs(primal.A * inst.n + primal.B * inst.k - 1.0)

    tol = EQUALITY_RTOL * primal.d
    passed = (max_violation <= tol) and (peak_residual <= tol) and (norm_residual <= 1e-12)
    return CheckReport(
        instance=inst,
        check="primal-feasibility",
        passed=passed,
        max_residual=max(max_violation, 0.0),
        witness=float(qs[worst]),
        details={
            "objective": primal.d,
            "peak_residual": peak_residual,
            "normalization_residual": norm_residual,
            "grid_points": len(qs),
        },
    )


def check_dual_feasibility(
    dual: DualCertificate, inst: SelectionInstance, grid: GridSpec
) -> CheckReport:
    """Verify the dual constraint holds with equality and eta is a valid slack."""
    us = grid.quantiles(inst)
    ker = g_kernel(inst.n, inst.k, us)
    lhs = dual.v * ker + dual.eta_slope(us)
    rhs = np.where(us <= dual.atom_location, (inst.n / inst.k) * dual.qhat, 0.0)
    residual = np.abs(lhs - rhs)
    worst = int(np.argmax(residual))

    eta_vals = dual.eta(us)
    eta_min = float(np.min(eta_vals))
    end_residual = max(abs(float(dual.eta(0.0))), abs(float(dual.eta(1.0))))
    scale = max(1.0, (inst.n / inst.k) * dual.qhat)

    passed = (
        float(residual[worst]) <= EQUALITY_RTOL * scale
        and eta_min >= -NONNEG_SLACK
        and end_residual <= NONNEG_SLACK
    )
    return CheckReport(
        instance=inst,
        check="dual-feasibility",
        passed=passed,
        max_residual=float(residual[worst]),
        witness=float(us[worst]),
        details={
            "objective": dual.v,
            "alpha_mass": 1.0,
            "eta_min": eta_min,
            "eta_endpoint_residual": end_residual,
            "grid_points": len(us),
        },
    )


def check_weak_duality(
    primal: PrimalCertificate,
    dual: DualCertificate,
    inst: SelectionInstance,
    grid: GridSpec,
    perturbations: int = 1000,
    seed: int = 20240901,
) -> CheckReport:
    """Every feasible two-level shape must pay at least the dual value.

    Random normalized (A', B') pairs are repaired to feasibility by taking
    d' as the grid supremum of their value curve; all must satisfy d' >= v.
    """
    m, n, k = inst.m, inst.n, inst.k
    qs = grid.quantiles(inst)
    pos = qs > 0.0
    qp = qs[pos]
    qv = q_value(m, k, qp)
    basis = np.stack([qv / qp, qv])  # phi = A' * (Q/q) + B' * Q

    rng = np.random.default_rng(seed)
    a_max = 1.0 / n
    a_prime = rng.uniform(0.0, a_max, size=perturbations)
    a_prime[0] = primal.A  # include the certificate itself as the tight case
    b_prime = (1.0 - n * a_prime) / k
    d_prime = (np.column_stack([a_prime, b_prime]) @ basis).max(axis=1)

    margin = d_prime - dual.v
    worst = int(np.argmin(margin))
    min_margin = float(margin[worst])
    passed = min_margin >= -SIGN_SLACK * dual.v
    return CheckReport(
        instance=inst,
        check="weak-duality",
        passed=passed,
        max_residual=max(-min_margin, 0.0),
        witness=float(a_prime[worst]),
        details={
            "perturbations": int(perturbations),
            "min_margin": min_margin,
            "tight_margin": float(margin[0]),
        },
    )


def _cell_integrals(qs: np.ndarray, m: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell Gauss-Legendre integrals of w and of t*w between grid points."""
    lo, hi = qs[:-1], qs[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    wx = _beta_shape(x, m, k)
    w_cells = half * (wx @ _GL_WEIGHTS)
    tw_cells = half * ((x * wx) @ _GL_WEIGHTS)
    return w_cells, tw_cells


def _beta_shape(q, m: int, k: int) -> np.ndarray:
    """w(q) = C(m-2, k-1) q^(k-1) (1-q)^(m-k-1), the negated curvature density."""
    log_coeff = gammaln(m - 1) - gammaln(k) - gammaln(m - k)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.exp(log_coeff + xlogy(k - 1, q) + xlogy(m - k - 1, 1.0 - q))


def check_quasiconcavity(inst: SelectionInstance, grid: GridSpec) -> CheckReport:
    """Curvature machinery that makes k/n the unique maximizer, for m >= k+2.

    Checks, on a grid containing k/n:
      * the reparametrized slope ratio R = q^2 I / J is strictly decreasing,
      * its numerator combination h = 2IJ - qwJ - q^2 wI is negative inside
        (0, 1) and vanishes at the endpoints,
      * the analytic slope of the value curve changes sign exactly where
        R crosses its level at k/n,
      * the quadrature integrals I, J match their closed forms
        (c*I = q_deriv and c*J = q_value - q * q_deriv, c = m(m-1)).
    """
    m, n, k = inst.m, inst.n, inst.k
    if m < k + 2:
        raise ValueError(f"curvature analysis needs m >= k+2, got m={m}, k={k}")

    qs = grid.quantiles(inst)
    w = _beta_shape(qs, m, k)
    w_cells, tw_cells = _cell_integrals(qs, m, k)
    # I integrates w to the right of q, J integrates t*w to the left.
    i_vals = np.concatenate([np.cumsum(w_cells[::-1])[::-1], [0.0]])
    j_vals = np.concatenate([[0.0], np.cumsum(tw_cells)])

    h = 2.0 * i_vals * j_vals - qs * w * j_vals - qs * qs * w * i_vals
    h_scale = max(1.0, float(np.max(np.abs(h))))
    h_interior_ok = bool(np.all(h[1:-1] < SIGN_SLACK * h_scale))
    h_end_residual = max(abs(float(h[0])), abs(float(h[-1])))

    interior = slice(1, -1)
    r_vals = qs[interior] ** 2 * i_vals[interior] / j_vals[interior]
    r_steps = np.diff(r_vals)
    r_ok = bool(np.all(r_steps < SIGN_SLACK * (1.0 + np.abs(r_vals[:-1]))))

    # Slope sign agreement against the R criterion, away from noise level.
    qhat_arg = k / n
    qv = q_value(m, k, qs[interior])
    qd = q_deriv(m, k, qs[interior])
    primal, _ = build_certificates(inst)
    slope = (primal.A * (qd * qs[interior] - qv) + primal.B * qd * qs[interior] ** 2) / (
        qs[interior] ** 2
    )
    r_at_peak = float(
        qhat_arg**2 * q_deriv(m, k, qhat_arg) / (q_value(m, k, qhat_arg) - qhat_arg * q_deriv(m, k, qhat_arg))
    )
    r_gap = r_vals - r_at_peak
    slope_scale = float(np.max(np.abs(slope))) or 1.0
    gap_scale = 1.0 + abs(r_at_peak)
    decided = (np.abs(slope) > 1e-9 * slope_scale) & (np.abs(r_gap) > 1e-9 * gap_scale)
    sign_ok = bool(np.all(np.sign(slope[decided]) == np.sign(r_gap[decided])))

    # Quadrature-vs-closed-form identities.
    c = m * (m - 1)
    id_i = np.max(np.abs(c * i_vals - q_deriv(m, k, qs)) / (1.0 + np.abs(q_deriv(m, k, qs))))
    qv_all = q_value(m, k, qs)
    qd_all = q_deriv(m, k, qs)
    id_j = np.max(np.abs(c * j_vals - (qv_all - qs * qd_all)) / (1.0 + c * j_vals))
    identities_ok = bool(id_i <= IDENTITY_TOL and id_j <= IDENTITY_TOL)

    passed = h_interior_ok and h_end_residual <= 1e-10 and r_ok and sign_ok and identities_ok
    worst_r = int(np.argmax(r_steps)) if len(r_steps) else 0
    return CheckReport(
        instance=inst,
        check="quasiconcavity",
        passed=passed,
        max_residual=float(np.max(h[1:-1])) if len(h) > 2 else 0.0,
        witness=float(qs[interior][worst_r]),
        details={
            "h_endpoint_residual": h_end_residual,
            "max_r_step": float(np.max(r_steps)) if len(r_steps) else 0.0,
            "slope_sign_agreement": sign_ok,
            "identity_residual_i": float(id_i),
            "identity_residual_j": float(id_j),
            "grid_points": len(qs),
        },
    )
