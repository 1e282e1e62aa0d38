"""Exponent bookkeeping for h^p, the log moment gauge, and oscillation
functionals (Campanato-style and bmo).

The regime is 0 < p <= 1 in dimension n.  The derived quantities are

    gamma_p = n*(1/p - 1)        (moment-decay exponent)
    N_p     = floor(gamma_p)     (required moment order)

with the *critical* case gamma_p integer (p = n/(n+k)).  Criticality is
decided in exact rational arithmetic: floats are snapped to a nearby
small-denominator rational when one exists within 1e-12, so p = 1/3
passed as a float is still recognized as critical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .grid import Ball, GridFunction, integrate, intervals_measure, \
    intersect_intervals, ls_norm

__all__ = [
    "HardyParams",
    "derive_exponents",
    "phi_p",
    "psi_gauge",
    "make_gauge",
    "campanato_functional",
    "bmo_norm",
    "default_ball_family",
]

_SNAP_DENOMINATOR = 10 ** 6
_SNAP_TOL = 1e-12


def as_exact(p) -> Fraction:
    """Coerce p to an exact Fraction (see module docstring for floats)."""
    if isinstance(p, Fraction):
        return p
    if isinstance(p, int):
        return Fraction(p)
    if isinstance(p, str):
        return Fraction(p)
    exact = Fraction(float(p))
    snapped = exact.limit_denominator(_SNAP_DENOMINATOR)
    if abs(snapped - exact) < _SNAP_TOL:
        return snapped
    return exact


def derive_exponents(p, n: int = 1) -> tuple[float, int, bool]:
    """Return (gamma_p, N_p, is_critical) for exponent p in dimension n."""
    p_ex = as_exact(p)
    if not (0 < p_ex <= 1):
        raise ParameterError(f"p must lie in (0, 1], got {p_ex}")
    gamma = n * (1 / p_ex - 1)
    critical = gamma.denominator == 1
    return float(gamma), math.floor(gamma), critical


@dataclass(frozen=True)
class HardyParams:
    """Integrability/size/moment parameters (p, s, omega) with n fixed.

    s = inf is allowed for atoms; omega = 0 recovers the exact-moment
    (homogeneous-style) conditions.
    """

    p: float
    s: float = 2.0
    omega: float = 0.0
    n: int = 1
    p_exact: Fraction = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p_ex = as_exact(self.p)
        if not (0 < p_ex <= 1):
            raise ParameterError(f"p must lie in (0, 1], got {self.p}")
        if not (self.s >= 1):
            raise ParameterError(f"s must be >= 1 (or inf), got {self.s}")
        if self.omega < 0:
            raise ParameterError("omega must be >= 0")
        if self.n < 1:
            raise ParameterError("n must be a positive integer")
        object.__setattr__(self, "p_exact", p_ex)
        object.__setattr__(self, "p", float(p_ex))

    @property
    def gamma_p(self) -> float:
        return float(self.n * (1 / self.p_exact - 1))

    @property
    def N_p(self) -> int:
        return math.floor(self.n * (1 / self.p_exact - 1))

    @property
    def is_critical(self) -> bool:
        return (self.n * (1 / self.p_exact - 1)).denominator == 1

    def phi(self, t):
        return phi_p(t, self.p, self.omega)

    def size_exponent(self) -> float:
        """Exponent in the L^s size bound r^{n(1/s - 1/p)}."""
        inv_s = 0.0 if np.isinf(self.s) else 1.0 / self.s
        return self.n * (inv_s - 1.0 / self.p)


def phi_p(t, p, omega):
    """Log moment gauge ``[log(1 + 1/(omega t))]^{-1/p}``; 0 when omega=0.

    Increasing in t, -> 0 as t -> 0+, and bounded by phi_p(1) for t < 1.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("phi_p requires t > 0")
    if omega == 0:
        out = np.zeros_like(t)
        return float(out) if out.ndim == 0 else out
    out = np.log1p(1.0 / (omega * t)) ** (-1.0 / float(as_exact(p)))
    return float(out) if out.ndim == 0 else out


def psi_gauge(t, params: HardyParams, alpha: int | None = None):
    """Oscillation gauge t^{gamma_p}, with the extra log factor exactly at
    the critical moment order.

    alpha = None gives the log-corrected gauge whenever the parameters
    are critical; an explicit alpha applies the correction only when
    alpha equals N_p = gamma_p.
    """
    t = np.asarray(t, dtype=float)
    power = t ** params.gamma_p
    log_branch = params.is_critical and (alpha is None or alpha == params.N_p)
    if log_branch:
        out = power * phi_p(t, params.p, params.omega)
    else:
        out = power
    return float(out) if out.ndim == 0 else out


def make_gauge(name: str, params: HardyParams):
    """Gauge selection by name for run configs.

    ``power``     t^{gamma_p}
    ``power-log`` t^{gamma_p} * phi_p(t)
    ``constant``  1
    """
    if name == "power":
        return lambda t: np.asarray(t, dtype=float) ** params.gamma_p
    if name == "power-log":
        return lambda t: (np.asarray(t, dtype=float) ** params.gamma_p
                          * phi_p(t, params.p, params.omega))
    if name == "constant":
        return lambda t: np.ones_like(np.asarray(t, dtype=float)) * 1.0
    raise ParameterError(f"unknown gauge name: {name!r}")


# ---------------------------------------------------------------------------
# oscillation functionals


def _ball_mean(f: GridFunction, ball: Ball) -> tuple[float, float]:
    clipped = intersect_intervals((ball.interval,), f.domain)
    m = intervals_measure(clipped)
    if m == 0.0:
        return 0.0, 0.0
    return integrate(f, clipped) / m, m


def campanato_functional(f: GridFunction, k: int, q: float, psi, balls) -> float:
    """sup over balls of ``psi(r)^-1 (fint_B |f - P_B^k f|^q)^{1/q}``.

    P_B^k is the degree-k moment-matching projection over B (computed in
    the grid's own pairing, so adding a sampled polynomial of degree <= k
    to f leaves the value unchanged up to solver roundoff).
    """
    from .polyproj import Region, project

    best = 0.0
    for ball in balls:
        clipped = intersect_intervals((ball.interval,), f.domain)
        m = intervals_measure(clipped)
        if m == 0.0:
            continue
        region = Region(clipped, x_ref=ball.center)
        proj = project(f, region, k, sampled=True)
        resid = f.with_samples(f.samples - proj(f.points()))
        if np.isinf(q):
            osc = ls_norm(resid, clipped, np.inf)
        else:
            osc = ls_norm(resid, clipped, q) / m ** (1.0 / q)
        best = max(best, osc / float(psi(ball.radius)))
    return best


def bmo_norm(f: GridFunction, balls=None) -> float:
    """Local BMO norm: mean-oscillation sup over balls with |B| < 1 plus
    plain-average sup over balls with |B| >= 1."""
    if balls is None:
        balls = default_ball_family(f.domain)
    small = 0.0
    large = 0.0
    for ball in balls:
        if ball.measure < 1.0:
            mean, m = _ball_mean(f, ball)
            if m == 0.0:
                continue
            resid = f.with_samples(f.samples - mean)
            small = max(small, ls_norm(resid, ball.interval, 1.0) / m)
        else:
            clipped = intersect_intervals((ball.interval,), f.domain)
            m = intervals_measure(clipped)
            if m == 0.0:
                continue
            large = max(large, ls_norm(f, clipped, 1.0) / m)
    return small + large


def default_ball_family(domain, min_radius=None, max_radius=None,
                        centers_per_radius: int = 2):
    """Dyadic ball family covering the domain: radii in powers of two,
    centers spaced radius/centers_per_radius apart."""
    lo, hi = float(domain[0]), float(domain[1])
    length = hi - lo
    if max_radius is None:
        max_radius = max(length, 1.0)
    if min_radius is None:
        min_radius = max(length / 512.0, 1e-6)
    balls = []
    r = max_radius
    while r >= min_radius:
        step = r / centers_per_radius
        c = lo
        while c <= hi:
            balls.append(Ball(c, r))
            c += step
        r /= 2.0
    return balls
