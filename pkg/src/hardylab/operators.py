"""Inhomogeneous singular-kernel checks and operator application.

A kernel here is an off-diagonal function K(x, y) declared with a size
order mu (envelope min{|x-y|^{-n}, |x-y|^{-n-mu}}), an integral
regularity order delta (annulus L^s differences against
|A_j|^{1/s-1} 2^{-j delta}), and optional structure flags.  The module
measures the declared conditions (they are claims to be checked, not
assumptions), applies the operator by aligned-lattice quadrature with
principal-value pairing or diagonal exclusion, realizes the dual-side
moment functions y -> int (x-c)^alpha K(x,y) dx, runs the per-ball
oscillation (Campanato-type) cancellation check against the psi gauge,
verifies that images of atoms are molecules, and exposes the parameter
arithmetic for the strongly singular variant.

Diagonal policy: kernels declared antisymmetric are summed over
symmetric off-diagonal nodes (the lattice principal value, exact for
odd kernels); all others exclude a radius max(diagonal_cutoff, 2 dx)
around the diagonal, and ``exclusion_error_bound`` reports the mass the
exclusion can drop.  Kernels that grow like the inverse distance at the
diagonal without declared antisymmetry are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .atoms import validate_ps_atom
from .errors import ParameterError, TailDivergenceError, TruncationError
from .grid import Ball, GridFunction, intersect_intervals, intervals_measure, ls_norm
from .maximal import MollifierSpec
from .molecules import MoleculeParams, MoleculeReport, validate_molecule
from .params import HardyParams, psi_gauge

__all__ = [
    "KernelSpec",
    "bump_kernel",
    "hilbert_kernel",
    "warped_kernel",
    "kernel_by_name",
    "KERNEL_NAMES",
    "KernelSizeReport",
    "kernel_size_check",
    "standard_sample_pairs",
    "AnnulusRow",
    "RegularityReport",
    "kernel_regularity_check",
    "hormander_sweep",
    "apply_operator",
    "aligned_output_grid",
    "exclusion_error_bound",
    "l2_operator_ratio",
    "tstar_moment_function",
    "absolute_moment_partials",
    "CancellationRow",
    "CancellationProfile",
    "local_campanato_check",
    "verify_Ta_molecule",
    "StrongSingularParams",
    "strong_singular_params",
]


# ---------------------------------------------------------------------------
# kernel declarations


@dataclass(frozen=True)
class KernelSpec:
    """Off-diagonal kernel with declared size/regularity orders.

    ``evaluator(x, y)`` must broadcast over arrays and return finite
    values off the diagonal; values inside the diagonal-handling radius
    are never used.  ``reach`` declares a support radius in |x - y|
    (None = possibly unbounded), which decides whether operator images
    can be certified compactly supported.
    """

    evaluator: Callable
    mu: float
    delta: float
    s: float = 2.0
    diagonal_cutoff: float = 0.0
    antisymmetric: bool = False
    reach: float | None = None
    name: str = "kernel"

    def __post_init__(self):
        if self.mu <= 0:
            raise ParameterError("mu must be positive")
        if not (0 < self.delta <= 1):
            raise ParameterError("delta must lie in (0, 1]")
        if not (1 <= self.s <= 2):
            raise ParameterError("s must lie in [1, 2]")
        if self.diagonal_cutoff < 0:
            raise ParameterError("diagonal_cutoff must be nonnegative")
        if self.reach is not None and self.reach <= 0:
            raise ParameterError("reach must be positive when given")


def bump_kernel(mu: float = 1.0, delta: float = 1.0,
                s: float = 2.0) -> KernelSpec:
    """Smooth mass-one convolution kernel k(x - y) supported in |x-y|<=1."""
    b = MollifierSpec("bump")

    def ev(x, y):
        return b(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    return KernelSpec(ev, mu, delta, s, reach=1.0, name="bump")


def hilbert_kernel(reach: float = 1.0, mu: float = 1.0, delta: float = 1.0,
                   s: float = 1.0) -> KernelSpec:
    """Truncated inverse-distance kernel 1/(x-y) for 0 < |x-y| <= reach.

    The unit-reach version is the model singular antisymmetric kernel
    (size constant exactly 1).  Large ``reach`` gives the wide variant
    whose slow tails exhibit the moment-integral divergence that the
    size envelope is designed to exclude.
    """
    if reach <= 0:
        raise ParameterError("reach must be positive")

    def ev(x, y):
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where((np.abs(d) > 0) & (np.abs(d) <= reach),
                           1.0 / np.where(d == 0, 1.0, d), 0.0)
        return out

    name = "hilbert" if reach <= 1.0 else "hilbert-wide"
    return KernelSpec(ev, mu, delta, s, antisymmetric=True, reach=reach,
                      name=name)


def warped_kernel(theta: float = 0.1, mu: float = 1.0, delta: float = 1.0,
                  s: float = 2.0) -> KernelSpec:
    """Non-convolution smooth kernel k((x-y)(1 + theta sin x))."""
    if not (0 <= theta < 1):
        raise ParameterError("theta must lie in [0, 1)")
    b = MollifierSpec("bump")

    def ev(x, y):
        x = np.asarray(x, dtype=float)
        d = x - np.asarray(y, dtype=float)
        return b(d * (1.0 + theta * np.sin(x)))

    return KernelSpec(ev, mu, delta, s, reach=1.0 / (1.0 - theta),
                      name="warped")


KERNEL_NAMES = ("bump", "hilbert", "hilbert-wide", "warped")


def kernel_by_name(name: str, **kwargs) -> KernelSpec:
    if name == "bump":
        return bump_kernel(**kwargs)
    if name == "hilbert":
        return hilbert_kernel(**kwargs)
    if name == "hilbert-wide":
        kwargs.setdefault("reach", 1e4)
        return hilbert_kernel(**kwargs)
    if name == "warped":
        return warped_kernel(**kwargs)
    raise ParameterError(f"unknown kernel name {name!r}; "
                         f"choose from {KERNEL_NAMES}")


# ---------------------------------------------------------------------------
# size condition


@dataclass(frozen=True)
class KernelSizeReport:
    c_measured: float
    passed: bool
    n_pairs: int
    worst_separation: float


def _size_envelope(d: np.ndarray, mu: float) -> np.ndarray:
    ad = np.abs(d)
    return np.minimum(ad ** -1.0, ad ** (-1.0 - mu))


def standard_sample_pairs(domain, dx: float, n_seps: int = 96,
                          centers=(-1.7, 0.0, 0.9)) -> np.ndarray:
    """Deterministic off-diagonal (x, y) pairs with separations log-spaced
    from dx to the domain width, both signs, around a few centers."""
    lo, hi = domain
    width = hi - lo
    if width <= 0 or dx <= 0 or dx >= width:
        raise ParameterError("need 0 < dx < domain width")
    seps = np.geomspace(dx, width, n_seps)
    xs, ys = [], []
    for z in centers:
        for sign in (1.0, -1.0):
            xs.append(z + sign * seps)
            ys.append(np.full(n_seps, z))
    return np.column_stack([np.concatenate(xs), np.concatenate(ys)])


def kernel_size_check(K: KernelSpec, sample_pairs) -> KernelSizeReport:
    """Smallest C with |K(x,y)| <= C min{|x-y|^-1, |x-y|^-1-mu} over the
    sampled pairs."""
    pairs = np.asarray(sample_pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] == 0:
        raise ParameterError("sample_pairs must be a nonempty (m, 2) array")
    x, y = pairs[:, 0], pairs[:, 1]
    d = x - y
    if np.any(d == 0):
        raise ParameterError("sample pairs must be off-diagonal")
    vals = np.abs(np.asarray(K.evaluator(x, y), dtype=float))
    ratios = vals / _size_envelope(d, K.mu)
    k = int(np.argmax(ratios))
    c = float(ratios[k])
    return KernelSizeReport(c, bool(np.isfinite(c)), pairs.shape[0],
                            float(abs(d[k])))


def _probe_size_constant(K: KernelSpec, lo: float, hi: float) -> float:
    """Empirical size constant over a standard probe set."""
    rep = kernel_size_check(K, standard_sample_pairs((-hi, hi), lo))
    return rep.c_measured


# ---------------------------------------------------------------------------
# annulus regularity condition


@dataclass(frozen=True)
class AnnulusRow:
    j: int
    inner: float
    outer: float
    ratio_direct: float
    ratio_transposed: float
    flagged: bool


@dataclass(frozen=True)
class RegularityReport:
    rows: tuple
    z: float
    y: float
    r: float
    s_used: float
    delta: float

    @property
    def sup_ratio(self) -> float:
        vals = [max(row.ratio_direct, row.ratio_transposed)
                for row in self.rows if not row.flagged]
        return max(vals) if vals else 0.0


def kernel_regularity_check(K: KernelSpec, z: float, y: float, r: float,
                            j_max: int = 8,
                            n_quad: int = 512) -> RegularityReport:
    """Per-annulus L^s difference ratios against |A_j|^{1/s-1} 2^{-j delta}.

    For each dyadic annulus A_j = {2^j r <= |x-z| < 2^{j+1} r} the direct
    quantity is (int_{A_j} |K(x,y)-K(x,z)|^s dx)^{1/s}; the transposed
    one swaps the kernel arguments.  Rows whose annulus comes within the
    declared diagonal cutoff of the singular points are flagged (their
    quadrature is unreliable) and skipped by ``sup_ratio``.
    """
    if not (0 < r < 1):
        raise ParameterError("need 0 < r < 1")
    off = abs(y - z)
    if not (0 < off < r):
        raise ParameterError("need 0 < |y - z| < r")
    s = K.s
    rows = []
    for j in range(j_max):
        lo, hi = 2.0 ** j * r, 2.0 ** (j + 1) * r
        du = (hi - lo) / n_quad
        u = lo + (np.arange(n_quad) + 0.5) * du
        direct = transposed = 0.0
        for sign in (1.0, -1.0):
            x = z + sign * u
            dkd = np.abs(np.asarray(K.evaluator(x, y), dtype=float)
                         - np.asarray(K.evaluator(x, z), dtype=float))
            dkt = np.abs(np.asarray(K.evaluator(y, x), dtype=float)
                         - np.asarray(K.evaluator(z, x), dtype=float))
            direct += float(np.sum(dkd ** s)) * du
            transposed += float(np.sum(dkt ** s)) * du
        measure = 2.0 * (hi - lo)
        bound = measure ** (1.0 / s - 1.0) * 2.0 ** (-j * K.delta)
        rows.append(AnnulusRow(
            j, lo, hi,
            direct ** (1.0 / s) / bound,
            transposed ** (1.0 / s) / bound,
            bool(lo - off <= K.diagonal_cutoff)))
    return RegularityReport(tuple(rows), z, y, r, s, K.delta)


def hormander_sweep(K: KernelSpec, rs=(2.0 ** -2, 2.0 ** -4, 2.0 ** -6),
                    offset_fracs=(0.25, 0.5), z_values=(0.0, 0.7),
                    j_max: int = 8, n_quad: int = 256):
    """Sup of the annulus ratios over a (z, y, r) sample set.

    Returns (sup, reports); the sup is the empirical regularity constant
    of the declared (delta, s) condition over the sweep.
    """
    reports = []
    sup = 0.0
    for z in z_values:
        for r in rs:
            for frac in offset_fracs:
                rep = kernel_regularity_check(K, z, z + frac * r, r,
                                              j_max=j_max, n_quad=n_quad)
                reports.append(rep)
                sup = max(sup, rep.sup_ratio)
    return sup, reports


# ---------------------------------------------------------------------------
# operator application


def aligned_output_grid(f: GridFunction, half_extension: float) -> GridFunction:
    """Zero template on f's lattice extended by at least half_extension
    on each side (aligned grids keep the diagonal on exact nodes)."""
    pad = int(np.ceil(half_extension / f.dx)) + 1
    return GridFunction(f.x0 - pad * f.dx, f.dx, np.zeros(f.n + 2 * pad))


def _check_alignment(f: GridFunction, out: GridFunction):
    if abs(out.dx - f.dx) > 1e-12 * f.dx:
        raise ParameterError("output grid must share the input spacing")
    off = (out.x0 - f.x0) / f.dx
    if abs(off - round(off)) > 1e-9:
        raise ParameterError("output grid must sit on the input lattice")


def _reject_singular_diagonal(K: KernelSpec, dx: float, where: float):
    for eps in (dx / 4.0, dx / 64.0):
        v = max(abs(float(np.asarray(K.evaluator(where + eps, where)))),
                abs(float(np.asarray(K.evaluator(where - eps, where)))))
        if v * eps > 0.25:
            raise ParameterError(
                "kernel grows like the inverse distance at the diagonal; "
                "declare antisymmetric=True for principal-value handling")


def _exclusion_radius(K: KernelSpec, dx: float) -> float:
    if K.antisymmetric:
        return 0.5 * dx
    return max(K.diagonal_cutoff, 2.0 * dx)


def apply_operator(K: KernelSpec, f: GridFunction,
                   out: GridFunction | None = None) -> GridFunction:
    """Tf(x) = int K(x, y) f(y) dy by midpoint quadrature on an aligned
    output lattice.

    Antisymmetric kernels are summed over symmetric nodes omitting the
    exact diagonal (lattice principal value); other kernels drop the
    radius max(diagonal_cutoff, 2 dx) around the diagonal, with the
    dropped mass bounded by ``exclusion_error_bound``.  The default
    output grid extends past the declared reach so the image's support
    is fully represented.
    """
    if f.mode != "exact":
        raise ParameterError("apply_operator requires an exact-mode grid")
    dx = f.dx
    if out is None:
        half = K.reach if K.reach is not None else 4.0 * f.n * dx
        out = aligned_output_grid(f, half + 2 * dx)
    else:
        _check_alignment(f, out)
    if not K.antisymmetric:
        _reject_singular_diagonal(K, dx, f.x0 + 0.5 * dx * f.n)
    excl = _exclusion_radius(K, dx)
    X = out.points()
    Y = f.points()
    vals = np.empty(out.n)
    block = max(1, int(5e6) // max(f.n, 1))
    for i0 in range(0, out.n, block):
        xb = X[i0:i0 + block]
        D = xb[:, None] - Y[None, :]
        with np.errstate(all="ignore"):
            km = np.asarray(K.evaluator(xb[:, None], Y[None, :]), dtype=float)
        # relative margin keeps nodes sitting exactly on the exclusion
        # radius regardless of roundoff in the lattice differences
        km = np.where(np.abs(D) < excl * (1.0 - 1e-9), 0.0, km)
        vals[i0:i0 + block] = km @ f.samples * dx
    return GridFunction(out.x0, dx, vals)


def exclusion_error_bound(K: KernelSpec, f: GridFunction) -> float:
    """Pointwise bound on |Tf| mass dropped by the diagonal exclusion
    (zero for principal-value kernels)."""
    if K.antisymmetric:
        return 0.0
    excl = _exclusion_radius(K, f.dx)
    us = np.linspace(-excl, excl, 129)
    us = us[np.abs(us) > excl / 256.0]
    sup = 0.0
    lo, hi = f.domain
    for z in (lo + 0.25 * (hi - lo), lo + 0.5 * (hi - lo),
              lo + 0.75 * (hi - lo)):
        with np.errstate(all="ignore"):
            v = np.abs(np.asarray(K.evaluator(z + us, z), dtype=float))
        sup = max(sup, float(np.max(v[np.isfinite(v)], initial=0.0)))
    return 2.0 * excl * sup * float(np.max(np.abs(f.samples), initial=0.0))


def l2_operator_ratio(K: KernelSpec, f: GridFunction,
                      out: GridFunction | None = None) -> float:
    """Measured ||Tf||_2 / ||f||_2 (the operator-boundedness surrogate)."""
    Tf = apply_operator(K, f, out)
    denom = ls_norm(f, f.domain, 2.0)
    if denom == 0.0:
        return 0.0
    return ls_norm(Tf, Tf.domain, 2.0) / denom


# ---------------------------------------------------------------------------
# dual-side moment functions


def tstar_moment_function(K: KernelSpec, ball: Ball, alpha: int,
                          eval_grid: GridFunction,
                          tail_tol: float = 1e-9) -> GridFunction:
    """The function y -> int (x - x_B)^alpha K(x, y) dx on eval_grid.

    The x-integral runs over an aligned lattice covering the declared
    reach exactly (zero truncation error), or, for unbounded-reach
    kernels, out to a radius where the size-envelope tail bound drops
    below tail_tol.  Convergence requires alpha < mu (envelope decay)
    and the regularity order requires alpha < delta; both are enforced.
    """
    if alpha < 0 or alpha != int(alpha):
        raise ParameterError("alpha must be a nonnegative integer")
    if alpha >= K.mu:
        raise TailDivergenceError(
            f"moment order {alpha} >= mu = {K.mu}: the dual moment "
            f"integral diverges under the size envelope")
    if alpha >= min(K.mu, K.delta):
        raise ParameterError(
            f"moment order {alpha} >= min(mu, delta) = "
            f"{min(K.mu, K.delta)}")
    if eval_grid.mode != "exact":
        raise ParameterError("eval_grid must be exact mode")
    dx = eval_grid.dx
    ylo, yhi = eval_grid.domain
    c = ball.center
    if K.reach is not None:
        lo, hi = ylo - K.reach - dx, yhi + K.reach + dx
    else:
        c_env = _probe_size_constant(K, dx, 64.0)
        half = max(abs(ylo - c), abs(yhi - c), ball.radius)
        R = 4.0 * max(half, 1.0)
        while True:
            tail = (2.0 * c_env * 2.0 ** (1.0 + K.mu)
                    * R ** (alpha - K.mu) / (K.mu - alpha))
            if tail <= tail_tol:
                break
            R *= 2.0
            if R > 2.0 ** 40:
                raise TruncationError(
                    f"cannot certify the x-truncation below {tail_tol:.0e} "
                    f"(bound {tail:.3e} at radius {R:.3e})")
        lo, hi = c - R, c + R
    n_lo = int(np.ceil((eval_grid.x0 - lo) / dx))
    x0x = eval_grid.x0 - n_lo * dx
    nx = int(np.ceil((hi - x0x) / dx))
    X = x0x + (np.arange(nx) + 0.5) * dx
    Y = eval_grid.points()
    if not K.antisymmetric:
        _reject_singular_diagonal(K, dx, c)
    excl = _exclusion_radius(K, dx)
    mono = (X - c) ** alpha
    vals = np.zeros(eval_grid.n)
    block = max(1, int(5e6) // max(eval_grid.n, 1))
    for i0 in range(0, nx, block):
        xb = X[i0:i0 + block]
        with np.errstate(all="ignore"):
            km = np.asarray(K.evaluator(xb[None, :], Y[:, None]), dtype=float)
        km = np.where(np.abs(xb[None, :] - Y[:, None])
                      < excl * (1.0 - 1e-9), 0.0, km)
        vals += km @ mono[i0:i0 + block] * dx
    return GridFunction(eval_grid.x0, dx, vals)


def absolute_moment_partials(K: KernelSpec, g: GridFunction, alpha: int,
                             radii, center: float = 0.0) -> np.ndarray:
    """Partial integrals int_{|x-center|<=R} |(x-center)^alpha (Tg)(x)| dx
    for each R in radii (the convergence/divergence probe for the dual
    moment functions)."""
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(radii <= 0):
        raise ParameterError("radii must be positive")
    R_max = float(np.max(radii))
    out = aligned_output_grid(g, max(R_max - (center - g.x0), R_max) + 2 * g.dx)
    Tg = apply_operator(K, g, out)
    X = Tg.points()
    w = np.abs((X - center) ** alpha * Tg.samples) * Tg.dx
    dist = np.abs(X - center)
    return np.array([float(np.sum(w[dist <= R])) for R in radii])


# ---------------------------------------------------------------------------
# cancellation (oscillation) check


@dataclass(frozen=True)
class CancellationRow:
    alpha: int
    oscillation: float
    gauge: float
    ratio: float


@dataclass(frozen=True)
class CancellationProfile:
    ball: Ball
    rows: tuple

    @property
    def sup_ratio(self) -> float:
        return max((row.ratio for row in self.rows), default=0.0)


def local_campanato_check(K: KernelSpec, ball: Ball, params: HardyParams,
                          subdiv: int = 64) -> CancellationProfile:
    """Per-alpha normalized oscillation of the dual moment functions over
    the ball, against the psi gauge.

    For each alpha <= N_p: realize f = (dual moment function for alpha),
    subtract its degree-N_p moment-matching polynomial over the ball,
    take the mean-square average, and divide by psi(r).  The reported
    ratios are the empirical constants of the cancellation condition.
    """
    from .polyproj import Region, project

    r = ball.radius
    dx = r / subdiv
    eval_grid = GridFunction(ball.center - r, dx, np.zeros(2 * subdiv))
    rows = []
    for alpha in range(params.N_p + 1):
        f = tstar_moment_function(K, ball, alpha, eval_grid)
        clipped = intersect_intervals((ball.interval,), f.domain)
        region = Region(clipped, x_ref=ball.center)
        proj = project(f, region, params.N_p, sampled=True)
        resid = f.with_samples(f.samples - proj(f.points()))
        measure = intervals_measure(clipped)
        osc = ls_norm(resid, clipped, 2.0) / np.sqrt(measure)
        gauge = float(psi_gauge(r, params, alpha))
        scale = float(np.max(np.abs(f.samples), initial=0.0))
        if osc <= 1e-12 * max(scale, 1.0):
            ratio = 0.0
        elif gauge > 0:
            ratio = osc / gauge
        else:
            ratio = np.inf
        rows.append(CancellationRow(alpha, float(osc), gauge, float(ratio)))
    return CancellationProfile(ball, tuple(rows))


# ---------------------------------------------------------------------------
# molecule verification for operator images


def verify_Ta_molecule(K: KernelSpec, atom: GridFunction, ball: Ball,
                       params: HardyParams, lam: float,
                       C: float = 16.0, tol: float = 1e-6) -> MoleculeReport:
    """Apply the operator to a validated atom and check the image against
    the molecule class with tail exponent lam.

    lam must satisfy gamma_p < lam/s - n/s' < min(mu, delta) (the window
    in which the kernel regularity transfers the atom's concentration to
    the image).  Kernels with finite reach give exactly compactly
    supported images, certified as such; unbounded-reach kernels get the
    size-envelope far-field bound A |x-x_B|^{-1-mu} with A from the
    measured size constant.  The class constant C is a frozen desk-scale
    calibration (the underlying statement has an unspecified constant).
    """
    rep = validate_ps_atom(atom, ball, params)
    if not rep.passed:
        raise ParameterError("input does not validate as a (p, s) atom")
    inv_s = 1.0 / params.s
    mid = lam * inv_s - params.n * (1.0 - inv_s)
    window_hi = min(K.mu, K.delta)
    if not (params.gamma_p < mid < window_hi):
        raise ParameterError(
            f"lam = {lam} gives lam/s - n/s' = {mid}, outside the window "
            f"({params.gamma_p}, {window_hi})")
    mp = MoleculeParams(params, lam, C=C)
    r = ball.radius
    if K.reach is not None:
        half = max(4.0 * r, 2.0 * (r + K.reach))
        out = aligned_output_grid(atom, half)
        Ta = apply_operator(K, atom, out)
        return validate_molecule(Ta, ball, mp, tol=tol, assume_compact=True)
    half = max(8.0 * r, 16.0)
    out = aligned_output_grid(atom, half)
    Ta = apply_operator(K, atom, out)
    l1 = ls_norm(atom, atom.domain, 1.0)
    c_size = _probe_size_constant(K, atom.dx, 8.0 * half)
    A = c_size * 2.0 ** (1.0 + K.mu) * l1
    return validate_molecule(Ta, ball, mp, tol=tol, envelope=(A, 1.0 + K.mu))


# ---------------------------------------------------------------------------
# strongly singular parameter arithmetic


@dataclass(frozen=True)
class StrongSingularParams:
    q: float
    p0: float
    rho: float
    lambda_max: float
    beta: float
    sigma: float
    delta: float
    mu: float
    s: float
    n: int

    @property
    def p_lower(self) -> float:
        """Lower end of the admissible p range, max(n/(n+mu), p0)."""
        return max(self.n / (self.n + self.mu), self.p0)

    def as_dict(self) -> dict:
        return {
            "q": self.q, "p0": self.p0, "rho": self.rho,
            "lambda_max": self.lambda_max, "p_lower": self.p_lower,
            "beta": self.beta, "sigma": self.sigma, "delta": self.delta,
            "mu": self.mu, "s": self.s, "n": self.n,
        }


def strong_singular_params(beta: float, sigma: float, delta: float,
                           mu: float, s: float,
                           n: int = 1) -> StrongSingularParams:
    """Closed-form index arithmetic for the strongly singular variant.

    1/q = 1/2 + beta/n (the strengthened boundedness exponent),
    1/p0 = 1/2 + beta (delta/sigma + n/2) / (n (delta/sigma - delta + beta)),
    rho  = (n (1 - 1/q) + delta) / (n/2 + delta/sigma)  (the concentration
    rescaling exponent), and the tail-exponent cap
    lambda_max = -n (1 - s/2) + s beta (n/2 + delta/sigma)
                 / (beta + delta/sigma + delta).
    """
    if n < 1 or n != int(n):
        raise ParameterError("n must be a positive integer")
    if not (0 < sigma <= 1):
        raise ParameterError("sigma must lie in (0, 1]")
    if not (0 < delta <= 1):
        raise ParameterError("delta must lie in (0, 1]")
    if mu <= 0:
        raise ParameterError("mu must be positive")
    if not (1 <= s <= 2):
        raise ParameterError("s must lie in [1, 2]")
    lo = (1.0 - sigma) * n / 2.0
    if not (lo <= beta < n / 2.0):
        raise ParameterError(
            f"beta = {beta} outside [(1 - sigma) n/2, n/2) = [{lo}, {n / 2})")
    q = 1.0 / (0.5 + beta / n)
    dsig = delta / sigma
    denom = n * (dsig - delta + beta)
    if denom <= 0:
        raise ParameterError(
            "p0 undefined: delta/sigma - delta + beta must be positive")
    p0 = 1.0 / (0.5 + beta * (dsig + n / 2.0) / denom)
    rho = (n * (1.0 - 1.0 / q) + delta) / (n / 2.0 + dsig)
    lambda_max = (-n * (1.0 - s / 2.0)
                  + s * beta * (n / 2.0 + dsig) / (beta + dsig + delta))
    return StrongSingularParams(q, p0, rho, lambda_max,
                                beta, sigma, delta, mu, s, int(n))
