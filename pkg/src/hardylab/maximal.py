"""Local smooth maximal function and the h^p quasi-norm.

m_phi f(x) = sup_{0<t<1} |f * phi_t(x)| with phi_t(x) = t^{-1} phi(x/t)
for a fixed mass-one mollifier supported in [-1, 1].

Convolution of an exact-mode step function with phi_t has a closed form:
with Psi(z) = CDF(z/t) and e_k the cell edges,

    (f * phi_t)(x) = sum_k (s_k - s_{k-1}) Psi(x - e_k),

a discrete convolution of the jump sequence with CDF samples (the
plateau Psi = 1 beyond the kernel reach telescopes into a shifted copy
of f).  So mollify is exact for the step function itself; treating the
output as a step function again costs O(dx^2), which is why t is kept
at 4 cells or wider.

The far field is a *model*: the two-regime envelope from the maximal
bound's proof (exponent n + alpha out to |x - x_B| = 2, exponent
n + N_p + 1 beyond), fed by measured moments.  For compactly supported
mollifiers the true profile vanishes beyond reach 1 + r, so the model
is a certified upper envelope; it is what hp_quasinorm integrates when
the grid stops early.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import signal, special

from .errors import ParameterError, ResolutionError, TailDivergenceError
from .grid import Ball, GridFunction, ls_norm, moment

__all__ = [
    "MollifierSpec",
    "make_mollifier",
    "mollify",
    "hl_maximal",
    "MaximalProfile",
    "local_maximal",
    "FarFieldModel",
    "far_field_model",
    "HpResult",
    "hp_quasinorm",
    "DEFAULT_T_POINTS",
]

DEFAULT_T_POINTS = 64
MAX_T_RATIO = 2.0 ** 0.25
_BUMP_COEFFS = 35.0 / 32.0 * np.array([1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0])


@dataclass(frozen=True)
class MollifierSpec:
    """Mass-one even mollifier on [-1, 1].

    profile "bump" is the C^2 polynomial (35/32)(1-u^2)^3; "gauss" is a
    truncated Gaussian (renormalized; the truncation leaves a jump of
    size exp(-1/(2 sigma^2)) at the support edge, negligible for the
    default width).
    """

    profile: str = "bump"
    sigma: float = 0.25
    support_radius: float = 1.0

    def __post_init__(self):
        if self.profile not in ("bump", "gauss"):
            raise ParameterError(f"unknown mollifier profile {self.profile!r}")
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive")
        if self.support_radius != 1.0:
            raise ParameterError("only support radius 1 is implemented")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) <= 1.0
        if self.profile == "bump":
            vals = npoly.polyval(u, _BUMP_COEFFS)
        else:
            vals = np.exp(-u * u / (2.0 * self.sigma ** 2)) / self._gauss_mass()
        out = np.where(inside, vals, 0.0)
        return float(out) if out.ndim == 0 else out

    def _gauss_mass(self) -> float:
        s = self.sigma
        return s * np.sqrt(2.0 * np.pi) * special.erf(1.0 / (s * np.sqrt(2)))

    def cdf(self, z):
        """int_{-inf}^z phi(u) du, exactly 0 / 1 outside the support."""
        z = np.asarray(z, dtype=float)
        zc = np.clip(z, -1.0, 1.0)
        if self.profile == "bump":
            anti = npoly.polyint(_BUMP_COEFFS)
            vals = npoly.polyval(zc, anti) + 0.5
        else:
            s = self.sigma
            vals = (s * np.sqrt(np.pi / 2.0)
                    * (special.erf(zc / (s * np.sqrt(2)))
                       + special.erf(1.0 / (s * np.sqrt(2))))
                    / self._gauss_mass())
        vals = np.clip(vals, 0.0, 1.0)
        return float(vals) if vals.ndim == 0 else vals

    def mass_defect(self) -> float:
        return abs(float(self.cdf(1.0)) - 1.0)

    def derivative_sup(self, alpha: int, samples: int = 4097) -> float:
        """sup |phi^(alpha)| on the support (polynomial part; the bump
        is C^2, so alpha <= 3 is the trustworthy range)."""
        u = np.linspace(-1.0, 1.0, samples)
        if self.profile == "bump":
            c = _BUMP_COEFFS
            for _ in range(alpha):
                c = npoly.polyder(c)
            return float(np.max(np.abs(npoly.polyval(u, c))))
        q = np.array([1.0])
        for _ in range(alpha):
            dq = npoly.polyder(q) if q.size > 1 else np.array([0.0])
            q = npoly.polyadd(dq, npoly.polymul([0.0, -1.0 / self.sigma ** 2], q))
        vals = npoly.polyval(u, q) * self(u)
        return float(np.max(np.abs(vals)))


def make_mollifier(name: str, **kwargs) -> MollifierSpec:
    return MollifierSpec(profile=name, **kwargs)


DEFAULT_SPEC = MollifierSpec()


def mollify(f: GridFunction, spec: MollifierSpec, t: float) -> GridFunction:
    """f * phi_t at the cell midpoints (exact for the step function,
    zero extension beyond the grid)."""
    if f.mode != "exact":
        raise ParameterError("mollify requires an exact-mode grid")
    if t <= 0:
        raise ParameterError("t must be positive")
    if t < 4.0 * f.dx:
        raise ResolutionError(
            f"mollifier width t = {t} below the 4-cell guard {4 * f.dx}")
    n, dx = f.n, f.dx
    reach = int(np.ceil(t * spec.support_radius / dx)) + 1
    m = np.arange(-reach, reach + 1)
    kernel = spec.cdf((m + 0.5) * dx / t)
    jumps = np.diff(f.samples, prepend=0.0, append=0.0)
    conv = signal.convolve(jumps, kernel, mode="full")[reach:reach + n]
    plateau = np.concatenate([np.zeros(reach + 1), f.samples])[:n]
    return f.with_samples(conv + plateau)


def hl_maximal(f: GridFunction) -> GridFunction:
    """Discrete centered Hardy-Littlewood maximal of |f| over dyadic
    cell windows (used as a domination oracle)."""
    a = np.abs(f.samples)
    prefix = np.concatenate([[0.0], np.cumsum(a)])
    n = f.n
    out = a.copy()
    w = 1
    idx = np.arange(n)
    while w < n:
        lo = np.maximum(idx - w, 0)
        hi = np.minimum(idx + w + 1, n)
        avg = (prefix[hi] - prefix[lo]) / (hi - lo)
        out = np.maximum(out, avg)
        w *= 2
    return f.with_samples(out)


@dataclass(frozen=True)
class MaximalProfile:
    """Pointwise max of |f * phi_t| over a geometric t-grid.

    A certified lower bound for the true sup over t; the gap to the sup
    is at most refinement_defect (Lipschitz-in-log-t parabola bound).
    """

    values: GridFunction
    t_grid: np.ndarray
    spec: MollifierSpec
    argmax_t: np.ndarray = field(repr=False)
    lipschitz_log_t: float = 0.0
    refinement_defect: float = 0.0


def local_maximal(f: GridFunction, spec: MollifierSpec = DEFAULT_SPEC,
                  t_grid=None, n_t: int = DEFAULT_T_POINTS,
                  t_min: float | None = None,
                  t_max: float | None = None) -> MaximalProfile:
    """sup over the t-grid of |f * phi_t|; defaults to a geometric grid
    of 64 points in [4 dx, 1)."""
    if t_grid is None:
        lo = 4.0 * f.dx if t_min is None else t_min
        hi = 1.0 - 1e-9 if t_max is None else t_max
        if not (0 < lo < hi):
            raise ResolutionError(
                f"cannot place a t-grid in [{lo}, {hi}); grid too coarse")
        t_grid = np.geomspace(lo, hi, n_t)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ParameterError("t_grid must be a nonempty 1-d array")
    if t_grid.size > 1:
        ratios = t_grid[1:] / t_grid[:-1]
        if np.any(ratios <= 1.0) or np.any(ratios > MAX_T_RATIO * (1 + 1e-12)):
            raise ParameterError(
                "t_grid must be increasing with ratio <= 2^(1/4)")
    best = np.full(f.n, -np.inf)
    arg = np.zeros(f.n)
    prev = None
    lip = 0.0
    for i, t in enumerate(t_grid):
        cur = np.abs(mollify(f, spec, float(t)).samples)
        take = cur > best
        best = np.where(take, cur, best)
        arg = np.where(take, t, arg)
        if prev is not None:
            dlog = np.log(t_grid[i] / t_grid[i - 1])
            lip = max(lip, float(np.max(np.abs(cur - prev))) / dlog)
        prev = cur
    dlog = float(np.log(t_grid[1] / t_grid[0])) if t_grid.size > 1 else 0.0
    return MaximalProfile(f.with_samples(best), t_grid, spec, arg,
                          lip, lip * dlog / 4.0)


# ---------------------------------------------------------------------------
# far-field envelope model


@dataclass(frozen=True)
class FarFieldModel:
    """Two-regime envelope for m_phi f beyond distance 2r from the
    center: sum_alpha c_alpha |m_alpha| d^{-(n+alpha)} plus a Taylor
    remainder term at d^{-(n+N+1)} out to d = 2, all folded into the
    single exponent n+N+1 beyond.  Valid (dominating) because the
    mollifier is supported in [-1, 1], so only scales t >= d/2 reach x.
    """

    ball: Ball
    moments: np.ndarray
    l1: float
    N: int
    coeffs: np.ndarray        # c_alpha = 2^{n+alpha} sup|phi^(alpha)| / alpha!
    remainder_coeff: float
    switch: float = 2.0
    n: int = 1

    def _terms(self):
        amps, exps = [], []
        for alpha in range(self.N + 1):
            amps.append(self.coeffs[alpha] * abs(self.moments[alpha]))
            exps.append(self.n + alpha)
        amps.append(self.remainder_coeff * self.l1
                    * self.ball.radius ** (self.N + 1))
        exps.append(self.n + self.N + 1)
        return np.array(amps), np.array(exps)

    def evaluate(self, d):
        d = np.asarray(d, dtype=float)
        amps, exps = self._terms()
        inner = np.zeros_like(d)
        for a, b in zip(amps, exps):
            inner += a * np.minimum(d, self.switch) ** (-b)
        top = self.n + self.N + 1
        out = inner * np.where(d > self.switch,
                               (d / self.switch) ** (-top), 1.0)
        return float(out) if out.ndim == 0 else out

    def validity_ratio(self, profile: MaximalProfile) -> float:
        """sup of measured / model over grid points with d >= 2r; <= 1
        certifies the model as an envelope on the grid."""
        x = profile.values.points()
        d = np.abs(x - self.ball.center)
        mask = d >= 2.0 * self.ball.radius
        if not np.any(mask):
            return 0.0
        model = self.evaluate(d[mask])
        vals = profile.values.samples[mask]
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(model > 0, vals / model,
                             np.where(vals > 0, np.inf, 0.0))
        return float(np.max(ratio))

    def tail_lp_power(self, p: float, d0: float) -> float:
        """Upper bound for ∫_{d>d0} model(d)^p dd (one side), via
        p-subadditivity of the sum (p <= 1)."""
        amps, exps = self._terms()
        top = (self.n + self.N + 1) * p
        if top <= self.n:
            raise TailDivergenceError(
                "far-field model not L^p integrable: p(n+N+1) <= n")
        total = 0.0
        for a, b in zip(amps, exps):
            if a == 0.0:
                continue
            q = b * p
            lo = min(d0, self.switch)
            if lo < self.switch:
                # ∫_lo^switch d^{-q}
                if abs(q - 1.0) < 1e-12:
                    total += a ** p * np.log(self.switch / lo)
                else:
                    total += (a ** p * (lo ** (1 - q) - self.switch ** (1 - q))
                              / (q - 1.0))
            # beyond the switch the term decays with the top exponent
            start = max(d0, self.switch)
            amp_out = a ** p * self.switch ** (top - q)
            total += amp_out * start ** (1 - top) / (top - 1.0)
        return total


def far_field_model(f: GridFunction, ball: Ball, N: int,
                    spec: MollifierSpec = DEFAULT_SPEC) -> FarFieldModel:
    """Build the envelope model from measured moments of f."""
    moments = np.array([moment(f, ball, alpha) for alpha in range(N + 1)])
    l1 = ls_norm(f, f.domain, 1.0)
    fact = 1.0
    coeffs = []
    for alpha in range(N + 1):
        if alpha > 0:
            fact *= alpha
        coeffs.append(2.0 ** (1 + alpha) * spec.derivative_sup(alpha) / fact)
    rem = (2.0 ** (1 + N + 1) * spec.derivative_sup(N + 1)
           / (fact * (N + 1)))
    return FarFieldModel(ball, moments, l1, N, np.array(coeffs), rem)


# ---------------------------------------------------------------------------
# h^p quasi-norm


@dataclass(frozen=True)
class HpResult:
    value: float
    tail_bound: float
    total: float
    profile: MaximalProfile
    model: FarFieldModel | None


def _support_ball(f: GridFunction) -> Ball:
    nz = np.nonzero(f.samples)[0]
    if nz.size == 0:
        return Ball(f.x0 + 0.5 * f.n * f.dx, 0.5 * f.n * f.dx)
    edges = f.cell_edges()
    lo, hi = edges[nz[0]], edges[nz[-1] + 1]
    return Ball(0.5 * (lo + hi), max(0.5 * (hi - lo), f.dx))


def hp_quasinorm(f: GridFunction, p: float,
                 spec: MollifierSpec = DEFAULT_SPEC,
                 ball: Ball | None = None, N: int | None = None,
                 t_grid=None, n_t: int = DEFAULT_T_POINTS) -> HpResult:
    """(∫ (m_phi f)^p dx)^{1/p} over the grid plus an analytic far-field
    bound.

    If the grid extends a full unit past the support of f on both sides
    the tail is exactly zero (the mollifier cannot reach further);
    otherwise the far-field model is integrated from the grid edge.
    """
    if not (0 < p <= 1):
        raise ParameterError("p must lie in (0, 1]")
    if ball is None:
        ball = _support_ball(f)
    if N is None:
        N = max(int(np.floor(1.0 / p - 1.0 + 1e-12)), 0)
    profile = local_maximal(f, spec, t_grid=t_grid, n_t=n_t)
    m = profile.values
    grid_pow = float(np.sum(m.samples ** p) * f.dx)
    lo, hi = f.domain
    s_lo, s_hi = ball.interval
    reach = spec.support_radius  # t < 1
    model = None
    tail_pow = 0.0
    if not (lo <= s_lo - reach and hi >= s_hi + reach):
        model = far_field_model(f, ball, N, spec)
        for edge in (ball.center - lo, hi - ball.center):
            d0 = max(edge, 2.0 * ball.radius)
            tail_pow += model.tail_lp_power(p, d0)
    value = grid_pow ** (1.0 / p)
    tail = tail_pow ** (1.0 / p)
    return HpResult(value, tail, (grid_pow + tail_pow) ** (1.0 / p),
                    profile, model)
