"""Molecule validation: local size, weighted tail decay, and moment
smallness.

A (p, s, lambda, omega) molecule adapted to B = B(x_B, r) satisfies,
with lambda > n(s/p - 1),

    M1:  ||M||_{L^s(B)} <= C r^{n(1/s - 1/p)}
    M2:  (int_{B^c} |M|^s |x - x_B|^lambda dx)^{1/s}
             <= C r^{lambda/s + n(1/s - 1/p)}
    M3:  |moment_alpha| <= omega below the critical order and
         <= phi_p(r) at the critical order N_p = gamma_p.

C = 1 is the normalized case.  Tail integrals beyond the gridded domain
are never silently dropped: the caller either supplies a pointwise decay
envelope, asserts compact support, or provides a grid reaching far
enough out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, TruncationError
from .grid import (
    Ball,
    GridFunction,
    envelope_tail_power,
    ls_norm,
    moment,
    weighted_power_integral,
    weighted_tail,
)
from .params import HardyParams, phi_p
from .atoms import MomentCheck, _resolution_guard

__all__ = [
    "MoleculeParams",
    "MoleculeReport",
    "validate_molecule",
    "GlobalEquivalents",
    "global_equivalents",
    "moment_decay_check",
    "make_molecule",
]

GRID_EXTENT_FACTOR = 2.0 ** 10


@dataclass(frozen=True)
class MoleculeParams:
    """Hardy parameters plus the tail weight lambda and the norming
    constant C."""

    params: HardyParams
    lam: float
    C: float = 1.0

    def __post_init__(self):
        pr = self.params
        if np.isinf(pr.s):
            raise ParameterError("molecules require finite s")
        threshold = pr.n * (pr.s / pr.p - 1.0)
        if not (self.lam > threshold):
            raise ParameterError(
                f"lambda must exceed n(s/p - 1) = {threshold}, got {self.lam}")
        if self.C <= 0:
            raise ParameterError("norming constant must be positive")

    @property
    def m1_exponent(self) -> float:
        pr = self.params
        return pr.n * (1.0 / pr.s - 1.0 / pr.p)

    @property
    def m2_exponent(self) -> float:
        return self.lam / self.params.s + self.m1_exponent


@dataclass(frozen=True)
class SizeCheck:
    value: float
    bound: float
    ok: bool
    implied_constant: float


@dataclass(frozen=True)
class MoleculeReport:
    ball: Ball
    m1: SizeCheck
    m2: SizeCheck
    m2_tail_bound: float
    moments: tuple
    tightest_constant: float
    passed: bool
    tol: float
    compact_support_assumed: bool

    def as_dict(self) -> dict:
        return {
            "ball": {"center": self.ball.center, "radius": self.ball.radius},
            "m1": vars(self.m1),
            "m2": vars(self.m2),
            "m2_tail_bound": self.m2_tail_bound,
            "moments": [vars(m) for m in self.moments],
            "tightest_constant": self.tightest_constant,
            "passed": self.passed,
            "tol": self.tol,
            "compact_support_assumed": self.compact_support_assumed,
        }


def _tail_certified(M: GridFunction, ball: Ball, envelope, assume_compact):
    """Decide how the beyond-grid tail is accounted for."""
    lo, hi = M.domain
    reach = min(ball.center - lo, hi - ball.center)
    if envelope is not None:
        return False
    if assume_compact:
        if abs(M.samples[0]) > 0 or abs(M.samples[-1]) > 0:
            raise TruncationError(
                "assume_compact set but edge samples are nonzero")
        return True
    if reach >= GRID_EXTENT_FACTOR * ball.radius:
        return True
    raise TruncationError(
        "grid does not extend 2^10 r beyond the ball; supply a decay "
        "envelope or assert compact support")


def _moment_tail_bound(envelope, ball: Ball, M: GridFunction, alpha: int) -> float:
    """Bound |int_{beyond grid} M (x-c)^alpha| from the envelope."""
    if envelope is None:
        return 0.0
    A, beta = envelope
    if beta - alpha <= 1.0:
        raise TruncationError(
            f"moment of order {alpha} not certifiable: envelope decay "
            f"beta = {beta} too slow")
    lo, hi = M.domain
    out = 0.0
    for edge in (abs(lo - ball.center), abs(hi - ball.center)):
        R = max(edge, ball.radius)
        out += envelope_tail_power(A, beta - alpha, 0.0, 1.0, R)
    return out


def validate_molecule(M: GridFunction, ball: Ball, mp: MoleculeParams,
                      tol: float = 1e-6,
                      envelope: tuple[float, float] | None = None,
                      assume_compact: bool = False) -> MoleculeReport:
    """Full M1/M2/M3 validation with honest tail accounting."""
    _resolution_guard(M, ball)
    compact = _tail_certified(M, ball, envelope, assume_compact)
    pr = mp.params
    r = ball.radius

    v1 = ls_norm(M, ball.interval, pr.s)
    b1 = mp.C * r ** mp.m1_exponent
    m1 = SizeCheck(v1, b1, v1 <= (1 + tol) * b1, v1 / r ** mp.m1_exponent)

    wt = weighted_tail(M, ball, mp.lam, pr.s, envelope=envelope)
    b2 = mp.C * r ** mp.m2_exponent
    m2 = SizeCheck(wt.total, b2, wt.total <= (1 + tol) * b2,
                   wt.total / r ** mp.m2_exponent)

    l1 = ls_norm(M, M.domain, 1.0)
    checks = []
    for alpha in range(pr.N_p + 1):
        val = abs(moment(M, ball, alpha)) + _moment_tail_bound(
            envelope, ball, M, alpha)
        zero_floor = tol * r ** alpha * l1
        if pr.is_critical and alpha == pr.N_p:
            level = phi_p(r, pr.p, pr.omega)
        else:
            level = pr.omega
        bound = level * (1.0 + tol) + (zero_floor if level == 0.0 else 0.0)
        checks.append(MomentCheck(alpha, val, bound, val <= bound))

    tightest = max(m1.implied_constant, m2.implied_constant)
    passed = m1.ok and m2.ok and all(c.ok for c in checks)
    return MoleculeReport(ball, m1, m2, wt.tail_bound, tuple(checks),
                          tightest, passed, tol, compact)


@dataclass(frozen=True)
class GlobalEquivalents:
    """Global-norm form of M1/M2 (no annulus split)."""

    ls_global: float
    weighted_global: float
    implied_c1: float
    implied_c2: float
    consistency_factor: float
    consistent: bool


def global_equivalents(M: GridFunction, ball: Ball, mp: MoleculeParams,
                       envelope: tuple[float, float] | None = None,
                       reference_constant: float | None = None) -> GlobalEquivalents:
    """||M||_{L^s(R)} and || |x-x_B|^{lambda/s} M ||_{L^s(R)} with their
    implied constants; consistent when they exceed the local/tail pair
    by at most 2^{1 + lambda/s}."""
    pr = mp.params
    s, lam, r = pr.s, mp.lam, ball.radius
    base_pow = weighted_power_integral(M, (M.domain,), ball.center, 0.0, s)
    wt_pow = weighted_power_integral(M, (M.domain,), ball.center, lam, s)
    if envelope is not None:
        A, beta = envelope
        lo, hi = M.domain
        for edge in (abs(lo - ball.center), abs(hi - ball.center)):
            R = max(edge, r)
            base_pow += envelope_tail_power(A, beta, 0.0, s, R)
            wt_pow += envelope_tail_power(A, beta, lam, s, R)
    ls_global = base_pow ** (1.0 / s)
    weighted_global = wt_pow ** (1.0 / s)
    c1 = ls_global / r ** mp.m1_exponent
    c2 = weighted_global / r ** mp.m2_exponent
    if reference_constant is None:
        rep = validate_molecule(M, ball, mp, envelope=envelope,
                                assume_compact=envelope is None)
        reference_constant = rep.tightest_constant
    factor = 2.0 ** (1.0 + lam / s)
    consistent = (c1 <= factor * max(reference_constant, 1e-300)
                  and c2 <= factor * max(reference_constant, 1e-300))
    return GlobalEquivalents(ls_global, weighted_global, c1, c2, factor,
                             consistent)


def make_molecule(mp: MoleculeParams, r: float, K: int = 6, subdiv: int = 6,
                  seed: int = 0, moment_fill: float = 0.0,
                  decay_margin: float = 0.5) -> tuple[GridFunction, Ball]:
    """Random normalized molecule on a grid spanning B(0, 2^K r).

    Construction: random cell noise on the ball, random per-half-annulus
    blocks with amplitude 2^{-j ((lambda+1)/s + decay_margin)} out to the
    (K-1)-st annulus (the outermost annulus stays zero, so the support is
    compact on the grid and dyadic-annulus edges fall on cell edges).
    Full-grid moments up to N_p are then cancelled exactly through the
    dual basis on the ball, the profile is rescaled so the tighter of
    the M1/M2 constants equals 1, and, if moment_fill > 0, moments of
    size moment_fill * (allowed level) are injected back through the
    same basis (followed by one more rescale, which can only shrink
    them).
    """
    from .polyproj import Region, dual_basis, region_moments

    pr = mp.params
    if not (0 < moment_fill <= 1.0 or moment_fill == 0.0):
        raise ParameterError("moment_fill must lie in [0, 1]")
    if K < 2:
        raise ParameterError("need K >= 2")
    rng = np.random.default_rng(seed)
    cells_per_r = 2 ** subdiv
    n = 2 * 2 ** K * cells_per_r
    dx = r / cells_per_r
    x0 = -(2.0 ** K) * r
    samples = np.zeros(n)
    mid = x0 + (np.arange(n) + 0.5) * dx
    ball = Ball(0.0, r)
    inside = np.abs(mid) < r
    samples[inside] = rng.standard_normal(np.count_nonzero(inside))
    theta = (mp.lam + 1.0) / pr.s + decay_margin
    for j in range(1, K):
        amp = 2.0 ** (-j * theta)
        left = (mid > -(2.0 ** j) * r) & (mid < -(2.0 ** (j - 1)) * r)
        right = (mid > (2.0 ** (j - 1)) * r) & (mid < (2.0 ** j) * r)
        samples[left] = amp * rng.standard_normal()
        samples[right] = amp * rng.standard_normal()
    M = GridFunction(x0, dx, samples)

    reg = Region.ball(ball)
    basis = dual_basis(reg, pr.N_p, grid=M)
    pts = M.points()
    carriers = np.stack([
        np.asarray(basis.evaluate(alpha, pts)) * inside / ball.measure
        for alpha in range(pr.N_p + 1)])

    def kill_moments(arr):
        g = M.with_samples(arr)
        out = arr.copy()
        for alpha in range(pr.N_p + 1):
            out = out - moment(g, ball, alpha) * carriers[alpha]
            g = M.with_samples(out)
        return out

    def tightest(arr):
        g = M.with_samples(arr)
        c1 = ls_norm(g, ball.interval, pr.s) / r ** mp.m1_exponent
        c2 = (weighted_tail(g, ball, mp.lam, pr.s).total
              / r ** mp.m2_exponent)
        return max(c1, c2)

    samples = kill_moments(samples)
    samples = samples / tightest(samples)
    if moment_fill > 0:
        for alpha in range(pr.N_p + 1):
            if pr.is_critical and alpha == pr.N_p:
                level = phi_p(r, pr.p, pr.omega)
            else:
                level = pr.omega
            if level > 0:
                samples = samples + (moment_fill * level
                                     * rng.choice([-1.0, 1.0])
                                     * carriers[alpha])
        scale = tightest(samples)
        if scale > 1.0:
            samples = samples / scale
    return M.with_samples(samples), ball


def moment_decay_check(M: GridFunction, ball: Ball, params: HardyParams,
                       max_alpha: int | None = None):
    """Table of |moment_alpha| * r^{gamma_p - alpha}: the combination the
    size conditions force to stay bounded, large balls included."""
    if max_alpha is None:
        max_alpha = params.N_p
    r = ball.radius
    rows = []
    for alpha in range(max_alpha + 1):
        m = abs(moment(M, ball, alpha))
        rows.append({"alpha": alpha, "moment": m,
                     "normalized": m * r ** (params.gamma_p - alpha)})
    return rows
