"""Uniform 1-D grids, balls, and exact integral primitives.

A ``GridFunction`` stores samples on a uniform grid in one of two modes:

``"exact"``
    The function *is* the step function equal to ``samples[i]`` on the
    cell ``[x0 + i*dx, x0 + (i+1)*dx)``.  Integrals, moments and
    ``L^s`` norms are evaluated in closed form (no quadrature error),
    which is what makes moment cancellation checkable to near machine
    precision.

``"quadrature"``
    The samples are point values at the nodes ``x0 + i*dx`` and
    integrals use the composite trapezoid rule.

All integral helpers accept regions given as finite unions of
intervals and clip them to the gridded domain.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import TailDivergenceError

__all__ = [
    "Ball",
    "GridFunction",
    "WeightedTailResult",
    "EmptyRegionWarning",
    "integrate",
    "moment",
    "region_moment",
    "ls_norm",
    "weighted_power_integral",
    "weighted_tail",
    "normalize_intervals",
    "intersect_intervals",
    "intervals_measure",
]

MODES = ("exact", "quadrature")


class EmptyRegionWarning(UserWarning):
    """Raised (as a warning) when an integration region has zero overlap
    with the gridded domain."""


# ---------------------------------------------------------------------------
# interval unions


def normalize_intervals(intervals) -> tuple[tuple[float, float], ...]:
    """Sort, drop empty, and merge overlapping intervals.

    Parameters
    ----------
    intervals : iterable of (a, b) pairs

    Returns
    -------
    tuple of disjoint, sorted (a, b) pairs with a < b.
    """
    ivs = [(float(a), float(b)) for a, b in intervals if float(b) > float(a)]
    ivs.sort()
    merged: list[list[float]] = []
    for a, b in ivs:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


def intersect_intervals(intervals, window) -> tuple[tuple[float, float], ...]:
    """Intersect a normalized interval union with a single window."""
    lo, hi = float(window[0]), float(window[1])
    out = []
    for a, b in intervals:
        a2, b2 = max(a, lo), min(b, hi)
        if b2 > a2:
            out.append((a2, b2))
    return tuple(out)


def intervals_measure(intervals) -> float:
    return float(sum(b - a for a, b in intervals))


def _as_region(region) -> tuple[tuple[float, float], ...]:
    """Accept a Ball, a single (a, b) pair, or an iterable of pairs."""
    if isinstance(region, Ball):
        return (region.interval,)
    if hasattr(region, "intervals"):  # polyproj.Region quacks like this
        return normalize_intervals(region.intervals)
    region = tuple(region)
    if len(region) == 2 and np.isscalar(region[0]):
        return normalize_intervals([region])
    return normalize_intervals(region)


# ---------------------------------------------------------------------------
# core types


@dataclass(frozen=True)
class Ball:
    """Interval ``[center - radius, center + radius]``."""

    center: float
    radius: float

    def __post_init__(self):
        if not np.isfinite(self.center) or not np.isfinite(self.radius):
            raise ValueError("ball parameters must be finite")
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def interval(self) -> tuple[float, float]:
        return (self.center - self.radius, self.center + self.radius)

    @property
    def measure(self) -> float:
        return 2.0 * self.radius

    def dilate(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on the uniform grid ``x0 + i*dx``, see module docstring."""

    x0: float
    dx: float
    samples: np.ndarray
    mode: str = "exact"

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        if not (np.isfinite(self.dx) and self.dx > 0):
            raise ValueError("dx must be positive and finite")
        if not np.isfinite(self.x0):
            raise ValueError("x0 must be finite")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dx", float(self.dx))

    # -- geometry ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def domain(self) -> tuple[float, float]:
        if self.mode == "exact":
            return (self.x0, self.x0 + self.n * self.dx)
        return (self.x0, self.x0 + (self.n - 1) * self.dx)

    def points(self) -> np.ndarray:
        """Representative coordinates: cell midpoints in exact mode,
        nodes in quadrature mode."""
        if self.mode == "exact":
            return self.x0 + (np.arange(self.n) + 0.5) * self.dx
        return self.x0 + np.arange(self.n) * self.dx

    def cell_edges(self) -> np.ndarray:
        return self.x0 + np.arange(self.n + 1) * self.dx

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_callable(cls, fn, x0, dx, n, mode="exact") -> "GridFunction":
        """Sample ``fn`` at the representative points of the grid."""
        if mode == "exact":
            pts = float(x0) + (np.arange(n) + 0.5) * float(dx)
        else:
            pts = float(x0) + np.arange(n) * float(dx)
        return cls(float(x0), float(dx), np.asarray(fn(pts), dtype=float), mode)

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.x0, self.dx, samples, self.mode)

    def embedded(self, left_pad_cells: int, right_pad_cells: int) -> "GridFunction":
        """Zero-pad by whole cells on either side (support unchanged)."""
        if left_pad_cells < 0 or right_pad_cells < 0:
            raise ValueError("pad cell counts must be >= 0")
        samples = np.concatenate([
            np.zeros(left_pad_cells), self.samples, np.zeros(right_pad_cells)])
        return GridFunction(self.x0 - left_pad_cells * self.dx, self.dx,
                            samples, self.mode)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "x0": self.x0,
            "dx": self.dx,
            "samples": [float(v) for v in self.samples],
            "mode": self.mode,
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "GridFunction":
        d = json.loads(text)
        return cls(d["x0"], d["dx"], np.asarray(d["samples"], dtype=float),
                   d.get("mode", "exact"))

    def to_csv(self, path) -> None:
        xs = self.points()
        with open(path, "w") as fh:
            fh.write("x,value\n")
            for x, v in zip(xs, self.samples):
                fh.write(f"{float(x)!r},{float(v)!r}\n")

    @classmethod
    def from_csv(cls, path, mode="exact") -> "GridFunction":
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        data = np.atleast_2d(data)
        xs, vs = data[:, 0], data[:, 1]
        if xs.size < 2:
            raise ValueError("csv needs at least two rows")
        steps = np.diff(xs)
        dx = float(np.mean(steps))
        if not np.allclose(steps, dx, rtol=1e-9, atol=1e-12 * max(abs(dx), 1)):
            raise ValueError("csv x column is not uniformly spaced")
        # stored x are representative points; recover the cell origin
        x0 = float(xs[0]) - (0.5 * dx if mode == "exact" else 0.0)
        return cls(x0, dx, vs, mode)


@dataclass(frozen=True)
class WeightedTailResult:
    """Split of a weighted L^s tail into gridded part and analytic bound.

    ``total**s == value**s + tail_bound**s`` (for finite s).
    """

    value: float
    tail_bound: float
    total: float


# ---------------------------------------------------------------------------
# closed-form cell integrals


def _cell_overlaps(f: GridFunction, region):
    """Per-interval arrays (lo, hi) of clipped cell sub-intervals with
    positive length, plus the matching sample values."""
    edges = f.cell_edges()
    a_all, b_all = edges[:-1], edges[1:]
    for a, b in region:
        lo = np.maximum(a_all, a)
        hi = np.minimum(b_all, b)
        mask = hi > lo
        if np.any(mask):
            yield lo[mask], hi[mask], f.samples[mask]


def _check_region(f: GridFunction, region):
    region = _as_region(region)
    clipped = intersect_intervals(region, f.domain)
    if intervals_measure(clipped) == 0.0:
        warnings.warn("region does not meet the gridded domain",
                      EmptyRegionWarning, stacklevel=3)
    return clipped


def _signed_power_antideriv(x, c, power):
    # antiderivative of (x - c)**power
    return (x - c) ** (power + 1) / (power + 1)


def _abs_power_antideriv(x, c, lam):
    # antiderivative of |x - c|**lam, valid on either side of c
    u = x - c
    return np.sign(u) * np.abs(u) ** (lam + 1) / (lam + 1)


def _quadrature_integral(f: GridFunction, region, values) -> float:
    """Trapezoid of node values restricted to region (linear interpolation
    at region endpoints that fall between nodes)."""
    xs = f.points()
    total = 0.0
    for a, b in region:
        # nodes strictly inside, plus interpolated endpoint values
        i0 = int(np.searchsorted(xs, a, side="left"))
        i1 = int(np.searchsorted(xs, b, side="right"))
        sub_x = np.concatenate(([a], xs[i0:i1], [b]))
        sub_v = np.concatenate((
            [np.interp(a, xs, values)], values[i0:i1], [np.interp(b, xs, values)]))
        # drop duplicated abscissae at the ends
        keep = np.concatenate(([True], np.diff(sub_x) > 0))
        total += float(np.trapezoid(sub_v[keep], sub_x[keep]))
    return total


def integrate(f: GridFunction, region) -> float:
    """Integral of f over the region (clipped to the domain).

    Exact for piecewise-constant-exact mode; composite trapezoid in
    quadrature mode.
    """
    region = _check_region(f, region)
    if not region:
        return 0.0
    if f.mode == "exact":
        total = 0.0
        for lo, hi, vals in _cell_overlaps(f, region):
            total += float(np.dot(vals, hi - lo))
        return total
    return _quadrature_integral(f, region, f.samples)


def region_moment(f: GridFunction, region, center: float, alpha: int) -> float:
    """Signed moment ``∫_region f(x) (x - center)^alpha dx``.

    Exact in exact mode (closed-form monomial integral per clipped cell).
    """
    if alpha < 0 or alpha != int(alpha):
        raise ValueError("alpha must be a non-negative integer")
    alpha = int(alpha)
    region = _check_region(f, region)
    if not region:
        return 0.0
    if f.mode == "exact":
        total = 0.0
        for lo, hi, vals in _cell_overlaps(f, region):
            w = _signed_power_antideriv(hi, center, alpha) - \
                _signed_power_antideriv(lo, center, alpha)
            total += float(np.dot(vals, w))
        return total
    xs = f.points()
    return _quadrature_integral(f, region, f.samples * (xs - center) ** alpha)


def moment(f: GridFunction, ball: Ball, alpha: int) -> float:
    """Signed moment ``∫ f(x) (x - x_B)^alpha dx`` over the grid domain."""
    return region_moment(f, (f.domain,), ball.center, alpha)


def ls_norm(f: GridFunction, region, s: float) -> float:
    """``L^s`` norm over the region; ``s = inf`` gives the sup of |samples|
    on cells (nodes) meeting the region."""
    region = _check_region(f, region)
    if not region:
        return 0.0
    if not np.isinf(s) and s <= 0:
        raise ValueError("s must be positive or inf")
    if np.isinf(s):
        worst = 0.0
        if f.mode == "exact":
            for _, _, vals in _cell_overlaps(f, region):
                worst = max(worst, float(np.max(np.abs(vals))))
        else:
            xs = f.points()
            for a, b in region:
                mask = (xs >= a - 0.5 * f.dx) & (xs <= b + 0.5 * f.dx)
                if np.any(mask):
                    worst = max(worst, float(np.max(np.abs(f.samples[mask]))))
        return worst
    if f.mode == "exact":
        total = 0.0
        for lo, hi, vals in _cell_overlaps(f, region):
            total += float(np.dot(np.abs(vals) ** s, hi - lo))
        return total ** (1.0 / s)
    return _quadrature_integral(f, region, np.abs(f.samples) ** s) ** (1.0 / s)


def weighted_power_integral(f: GridFunction, region, center: float,
                            lam: float, s: float) -> float:
    """``∫_region |f|^s |x - center|^lam dx`` (no root taken).

    Exact in exact mode: per clipped cell the weight integral is in
    closed form; cells straddling the center are split there.
    """
    region = _check_region(f, region)
    if not region:
        return 0.0
    if f.mode == "exact":
        total = 0.0
        for lo, hi, vals in _cell_overlaps(f, region):
            # the signed antiderivative is continuous across the kink at
            # center, so one difference per sub-cell is exact
            part = _abs_power_antideriv(hi, center, lam) \
                - _abs_power_antideriv(lo, center, lam)
            total += float(np.dot(np.abs(vals) ** s, part))
        return total
    xs = f.points()
    vals = np.abs(f.samples) ** s * np.abs(xs - center) ** lam
    return _quadrature_integral(f, region, vals)


def envelope_tail_power(A: float, beta: float, lam: float, s: float,
                        R: float) -> float:
    """``∫_{|x-c|>R} (A |x-c|^-beta)^s |x-c|^lam dx`` for one side,
    in closed form.  Raises if the exponent does not decay."""
    q = beta * s - lam
    if q <= 1.0:
        raise TailDivergenceError(
            f"analytic tail diverges: beta*s - lam = {q} <= 1")
    return A ** s * R ** (1.0 - q) / (q - 1.0)


def weighted_tail(f: GridFunction, ball: Ball, lam: float, s: float,
                  envelope: tuple[float, float] | None = None) -> WeightedTailResult:
    """``(∫_{domain \\ B} |f|^s |x - x_B|^lam dx)^{1/s}`` plus an analytic
    bound for the un-gridded region.

    Parameters
    ----------
    envelope : (A, beta) or None
        Pointwise bound ``|f(x)| <= A |x - x_B|^{-beta}`` assumed beyond
        the gridded domain.  None means the caller asserts f vanishes
        there (tail bound 0).
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    lo, hi = f.domain
    c, r = ball.center, ball.radius
    outside = normalize_intervals([(lo, min(hi, c - r)), (max(lo, c + r), hi)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyRegionWarning)
        grid_pow = weighted_power_integral(f, outside, c, lam, s) if outside else 0.0
    tail_pow = 0.0
    if envelope is not None:
        A, beta = envelope
        for edge_dist in (abs(lo - c), abs(hi - c)):
            R = max(edge_dist, r)
            tail_pow += envelope_tail_power(A, beta, lam, s, R)
    value = grid_pow ** (1.0 / s)
    tail_bound = tail_pow ** (1.0 / s)
    total = (grid_pow + tail_pow) ** (1.0 / s)
    return WeightedTailResult(value, tail_bound, total)
