"""Atom validation, the critical-index counterexample family, and the
log-pairing experiment.

A (p, s) atom supported in B = B(x_B, r) satisfies

    (i)   supp a in B
    (ii)  ||a||_{L^s} <= r^{n(1/s - 1/p)}
    (iii) if r < 1: all moments of order <= N_p vanish.

The approximate-atom relaxation keeps (i)-(ii) and replaces (iii) by
size conditions on the moments: |moment_alpha| <= omega below the
critical order, and <= phi_p(r) = [log(1 + 1/(omega r))]^{-1/p} exactly
at the critical order N_p = gamma_p (integer case).  omega = 0 recovers
exact vanishing.

The counterexample family shows the log factor is necessary: for
k = p^{-1} integer it produces compactly supported bounded functions
with moments vanishing up to order k-2 and a *constant* (k-1)-st
moment, whose pairing against t^{k-1} log|t| grows like log r.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ResolutionError
from .grid import Ball, GridFunction, ls_norm, moment
from .params import HardyParams, phi_p
from .polyproj import Region, project

__all__ = [
    "MomentCheck",
    "AtomReport",
    "validate_ps_atom",
    "validate_psomega_atom",
    "CutoffSpec",
    "build_counterexample",
    "moment_constant",
    "PairingResult",
    "pairing_log_test",
    "make_approx_atom",
]

MIN_SAMPLES_IN_BALL = 64


@dataclass(frozen=True)
class MomentCheck:
    alpha: int
    value: float
    bound: float
    ok: bool


@dataclass(frozen=True)
class AtomReport:
    atom_class: str
    ball: Ball
    support_ok: bool
    size_value: float
    size_bound: float
    size_ok: bool
    moments: tuple
    passed: bool
    tol: float
    constant_bound: tuple | None = None  # (measured max moment, C_{p,omega})

    def as_dict(self) -> dict:
        return {
            "atom_class": self.atom_class,
            "ball": {"center": self.ball.center, "radius": self.ball.radius},
            "support_ok": self.support_ok,
            "size_value": self.size_value,
            "size_bound": self.size_bound,
            "size_ok": self.size_ok,
            "moments": [vars(m) for m in self.moments],
            "constant_bound": list(self.constant_bound)
            if self.constant_bound else None,
            "passed": self.passed,
            "tol": self.tol,
        }


def _support_check(f: GridFunction, ball: Ball, tol: float) -> bool:
    edges = f.cell_edges()
    lo, hi = ball.interval
    outside = (edges[1:] <= lo) | (edges[:-1] >= hi)
    if not np.any(outside):
        return True
    peak = float(np.max(np.abs(f.samples))) or 1.0
    return float(np.max(np.abs(f.samples[outside]))) <= tol * peak


def _resolution_guard(f: GridFunction, ball: Ball):
    inside = np.count_nonzero(
        (f.points() >= ball.interval[0]) & (f.points() <= ball.interval[1]))
    if inside < MIN_SAMPLES_IN_BALL:
        raise ResolutionError(
            f"only {inside} samples inside the ball; need "
            f">= {MIN_SAMPLES_IN_BALL}")


def _size_check(f: GridFunction, ball: Ball, params: HardyParams, tol: float):
    value = ls_norm(f, f.domain, params.s)
    bound = ball.radius ** params.size_exponent()
    return value, bound, value <= (1.0 + tol) * bound


def validate_ps_atom(f: GridFunction, ball: Ball, params: HardyParams,
                     tol: float = 1e-6) -> AtomReport:
    """Check the (p, s) atom conditions; moments are tested against a
    scale-aware zero threshold tol * r^alpha * ||f||_1."""
    _resolution_guard(f, ball)
    support_ok = _support_check(f, ball, tol)
    size_value, size_bound, size_ok = _size_check(f, ball, params, tol)
    checks = []
    if ball.radius < 1.0:
        l1 = ls_norm(f, f.domain, 1.0)
        for alpha in range(params.N_p + 1):
            val = abs(moment(f, ball, alpha))
            bound = tol * ball.radius ** alpha * l1
            checks.append(MomentCheck(alpha, val, bound, val <= bound))
    passed = support_ok and size_ok and all(c.ok for c in checks)
    return AtomReport("(p,s)", ball, support_ok, size_value, size_bound,
                      size_ok, tuple(checks), passed, tol)


def validate_psomega_atom(f: GridFunction, ball: Ball, params: HardyParams,
                          tol: float = 1e-6) -> AtomReport:
    """Check the (p, s, omega) approximate-atom conditions.

    With omega = 0 the moment conditions degenerate to the exact-
    vanishing test of validate_ps_atom (any ball size).
    """
    _resolution_guard(f, ball)
    support_ok = _support_check(f, ball, tol)
    size_value, size_bound, size_ok = _size_check(f, ball, params, tol)
    r = ball.radius
    l1 = ls_norm(f, f.domain, 1.0)
    checks = []
    for alpha in range(params.N_p + 1):
        val = abs(moment(f, ball, alpha))
        zero_floor = tol * r ** alpha * l1
        if params.is_critical and alpha == params.N_p:
            level = phi_p(r, params.p, params.omega)
        else:
            level = params.omega
        bound = level * (1.0 + tol) + (zero_floor if level == 0.0 else 0.0)
        checks.append(MomentCheck(alpha, val, bound, val <= bound))
    constant = None
    if params.omega > 0:
        # uniform bound: moments <= max(omega, phi_p evaluated at max(r,1))
        c_bound = max(params.omega, phi_p(max(r, 1.0), params.p, params.omega))
        measured = max((c.value for c in checks), default=0.0)
        constant = (measured, c_bound)
    passed = support_ok and size_ok and all(c.ok for c in checks)
    return AtomReport("(p,s,omega)", ball, support_ok, size_value, size_bound,
                      size_ok, tuple(checks), passed, tol,
                      constant_bound=constant)


# ---------------------------------------------------------------------------
# counterexample family


def moment_constant(m: int, k: int) -> float:
    """C_{m,k} with C_{1,k} = 2^{-k(k-1)} and
    C_{m+1,k} = (m+1) 2^m C_{m,k}."""
    if not (1 <= m <= k - 1):
        raise ParameterError("need 1 <= m <= k-1")
    c = (2.0 ** (k - 1)) ** (-k)
    for j in range(1, m):
        c *= (j + 1) * 2.0 ** j
    return c


def build_counterexample(k: int, r: float, phi_value: float,
                         subdiv: int = 6) -> tuple[GridFunction, Ball]:
    """Iterated shift-and-reflect profile a_{k-1} on the ball
    [-2^{k-2} r, 2^{k-2} r].

    Starting from a_1 = +/- (2^{k-1} r)^{-k} phi_value on [0, r] and
    [-r, 0), the step

        a_{m+1}(t) = a_m(t - 2^{m-1} r) -+ a_m(-t - 2^{m-1} r)

    (minus for m even, plus for m odd) kills one more moment each time
    while keeping the (k-1)-st moment equal to C_{k-1,k} phi_value
    r^0 -- constant in r.  All shifts are whole numbers of grid cells,
    so the construction is exact on the grid.
    """
    if k < 2 or k != int(k):
        raise ParameterError("k must be an integer >= 2")
    if not (0.0 < r < 2.0 ** (1 - k)):
        raise ParameterError(f"need 0 < r < 2^(1-k) = {2.0 ** (1 - k)}")
    if phi_value <= 0:
        raise ParameterError("phi_value must be positive")
    cells_per_r = 2 ** subdiv
    n_tot = 2 ** (k - 1) * cells_per_r
    dx = r / cells_per_r
    half = n_tot // 2
    amp = (2.0 ** (k - 1) * r) ** (-k) * phi_value
    a = np.zeros(n_tot)
    a[half - cells_per_r:half] = -amp
    a[half:half + cells_per_r] = +amp
    for m in range(1, k - 1):
        shift = 2 ** (m - 1) * cells_per_r
        fwd = np.zeros(n_tot)
        fwd[shift:] = a[:n_tot - shift]
        refl = a[::-1]
        back = np.zeros(n_tot)
        back[:n_tot - shift] = refl[shift:]
        sign = -1.0 if m % 2 == 0 else 1.0
        a = fwd + sign * back
    ball = Ball(0.0, 2.0 ** (k - 2) * r)
    return GridFunction(-(2.0 ** (k - 2)) * r, dx, a), ball


@dataclass(frozen=True)
class CutoffSpec:
    """Even C^2 cutoff: 1 on [-flat, flat], 0 outside [-supp, supp],
    quintic smoothstep in between."""

    flat_radius: float = 0.5
    support_radius: float = 1.0

    def __post_init__(self):
        if not (0 < self.flat_radius < self.support_radius):
            raise ParameterError("need 0 < flat_radius < support_radius")

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        u = np.clip((self.support_radius - t)
                    / (self.support_radius - self.flat_radius), 0.0, 1.0)
        out = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PairingResult:
    pairing: float
    log_term: float
    residual: float
    k: int
    r: float
    phi_value: float


def _log_weight_cell_integrals(edges: np.ndarray, k: int) -> np.ndarray:
    """Exact ``int_cell t^{k-1} log|t| dt`` per cell; cells must not
    straddle 0."""
    def F(t):
        # antiderivative of t^{k-1} log t on t > 0, F(0+) = 0
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        out[pos] = tp ** k * (k * np.log(tp) - 1.0) / k ** 2
        return out

    lo, hi = edges[:-1], edges[1:]
    if np.any((lo < 0) & (hi > 0)):
        raise ValueError("cells must not straddle t = 0")
    out = np.zeros(lo.size)
    pos = lo >= 0
    out[pos] = F(hi[pos]) - F(lo[pos])
    neg = ~pos
    # substitute u = -t on the negative side
    out[neg] = (-1.0) ** (k - 1) * (F(-lo[neg]) - F(-hi[neg]))
    return out


def pairing_log_test(f: GridFunction, ball: Ball, k: int,
                     eta: CutoffSpec = CutoffSpec(),
                     phi_value: float | None = None) -> PairingResult:
    """Pair a counterexample atom against f_k(t) = t^{k-1} log|t| eta(t).

    The cutoff must be flat on the atom's support, so the pairing is
    computed in closed form per cell (no quadrature near the log
    singularity).  Returns the pairing, the predicted divergent part
    C_k phi(r) log r, and the residual, which the construction keeps
    bounded uniformly in r.
    """
    if ball.radius > eta.flat_radius:
        raise ParameterError(
            "cutoff must be identically 1 on the atom support: "
            f"ball radius {ball.radius} > flat radius {eta.flat_radius}")
    r = ball.radius / 2.0 ** (k - 2)
    if phi_value is None:
        phi_value = float(np.max(np.abs(f.samples))) * (2.0 ** (k - 1) * r) ** k
    w = _log_weight_cell_integrals(f.cell_edges(), k)
    pairing = float(np.dot(f.samples, w))
    log_term = moment_constant(k - 1, k) * phi_value * float(np.log(r))
    return PairingResult(pairing, log_term, abs(pairing - log_term),
                         k, r, phi_value)


# ---------------------------------------------------------------------------
# battery generator (test plumbing for sweeps, not a formal contract)


def make_approx_atom(params: HardyParams, r: float, seed: int = 0,
                     subdiv: int = 6, saturate: bool = True,
                     fill: float = 1.0,
                     critical_fill: float | None = None,
                     oscillatory: bool = False) -> tuple[GridFunction, Ball]:
    """Random (p, s, omega) atom on B(0, r) with the size bound met with
    equality and moments pushed toward their allowed levels.

    The cancellation carrier is a random sample vector minus its own
    degree-N_p projection (exact discrete moment kill); moment levels
    are injected through the dual basis, then the whole profile is
    rescaled down onto the size bound, which can only shrink moments.

    ``fill`` scales the injected moment levels (1.0 = the allowed
    maximum); ``critical_fill`` overrides it at the critical order,
    where the allowed level is the log gauge rather than omega.  The
    gauge approaches its small-r limit only logarithmically, so
    batteries probing uniformity in r may want the critical order
    damped while still exercising nonzero lower-order moments.

    ``oscillatory`` builds the carrier from cancelling adjacent-cell
    pairs, so its smoothed values die off at the cell scale rather than
    the ball scale.  The maximal-function mass of such an atom sits
    almost entirely inside the ball, which makes the quasi-norm of a
    dilated family nearly scale-exact; the generic carrier instead
    carries O(1) mass outside the ball that saturates only as r -> 0.
    """
    rng = np.random.default_rng(seed)
    ball = Ball(0.0, r)
    n = 2 ** (subdiv + 1)
    dx = 2.0 * r / n
    if oscillatory:
        g = rng.standard_normal(n // 2)
        raw = GridFunction(-r, dx, np.repeat(g, 2) * np.tile([1.0, -1.0], n // 2))
    else:
        raw = GridFunction(-r, dx, rng.standard_normal(n))
    reg = Region.ball(ball)
    N = params.N_p
    proj = project(raw, reg, N, sampled=True)
    h = raw.samples - proj(raw.points())
    from .polyproj import dual_basis

    basis = dual_basis(reg, N, grid=raw)
    pts = raw.points()
    v = np.zeros(n)
    if saturate:
        for alpha in range(N + 1):
            if params.is_critical and alpha == params.N_p:
                frac = fill if critical_fill is None else critical_fill
                level = frac * phi_p(r, params.p, params.omega)
            else:
                level = fill * params.omega
            if level > 0:
                # g_alpha has integral-moments exactly delta_{alpha beta}
                g_alpha = np.asarray(basis.evaluate(alpha, pts)) / ball.measure
                v += level * rng.choice([-1.0, 1.0]) * g_alpha
    bound = r ** params.size_exponent()

    def norm_of(arr):
        return ls_norm(raw.with_samples(arr), raw.domain, params.s)

    amp = 1.0
    if norm_of(h) > 0:
        amp = bound / norm_of(h)
    total = v + amp * h
    for _ in range(64):
        if norm_of(total) >= bound:
            break
        amp *= 2.0
        total = v + amp * h
    total *= bound / norm_of(total)
    return raw.with_samples(total), ball
