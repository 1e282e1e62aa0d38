"""Molecular-to-atomic decomposition on dyadic annuli.

Write B_k = B(x_B, 2^k r), E_0 = B, E_k = B_k \\ B_{k-1}, and let
phi_alpha^k be the dual basis on E_k (grid pairing, so every identity
below holds to solver roundoff on the grid).  With

    m_alpha^k = fint_{E_k} M (x - x_B)^alpha dx
    nu_alpha  = sum_k |E_k| m_alpha^k          (= full moment of M)
    N_alpha^k = sum_{j >= k+1} |E_j| m_alpha^j (= moment outside B_k)

the function splits as

    M = sum_k (M_k - P_k)                      (atoms with cancellation)
      + sum_k sum_alpha Phi_alpha^k            (two-annulus corrections)
      + a_omega                                (moment carrier on B)

where P_k = sum_alpha m_alpha^k phi_alpha^k,

    Phi_alpha^k = N_alpha^k (phi_alpha^{k+1}/|E_{k+1}|
                             - phi_alpha^k/|E_k|),

and a_omega = sum_alpha nu_alpha phi_alpha^0 / |E_0|.  The telescoping
N_alpha^{k-1} - N_alpha^k = |E_k| m_alpha^k makes the rearrangement an
identity; the factor in Phi_alpha^k must be N_alpha^k (with the suffix
sum starting at k+1) for the boundary terms to cancel, which the exact
reconstruction check below enforces.

Coefficients: t_k = ||M_k - P_k||_{L^s} |B_k|^{1/p - 1/s}, and s_k is
the measured sup-norm normalizer of the assembled Phi-sum against the
(p, infinity) bound on B_{k+1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .grid import Ball, GridFunction, ls_norm
from .molecules import MoleculeParams
from .polyproj import Region, dual_basis, region_moments

__all__ = [
    "AtomPiece",
    "PhiPiece",
    "OmegaPiece",
    "AnnulusRecord",
    "DecompositionResult",
    "molecular_decompose",
    "BudgetReport",
    "coefficient_budget",
]


@dataclass(frozen=True)
class AtomPiece:
    k: int
    coeff: float
    f: GridFunction
    ball: Ball


@dataclass(frozen=True)
class PhiPiece:
    k: int
    coeff: float
    f: GridFunction
    ball: Ball


@dataclass(frozen=True)
class OmegaPiece:
    coeff: float
    f: GridFunction
    ball: Ball
    omega_implied: float


@dataclass(frozen=True)
class AnnulusRecord:
    k: int
    measure: float
    moments: np.ndarray        # m_alpha^k (averages)
    suffix: np.ndarray         # N_alpha^k (moment of M outside B_k)
    basis_sup_bound: float
    basis_defect: float


@dataclass(frozen=True)
class DecompositionResult:
    ball: Ball
    atoms: tuple
    phis: tuple
    a_omega: OmegaPiece
    nu: np.ndarray
    annuli: tuple
    residual_rel: float
    coeff_sum_t: float
    coeff_sum_s: float
    K_max: int

    def telescoping_defect(self) -> float:
        """max over k, alpha of the relative defect in
        N^{k-1} - N^k = |E_k| m^k, plus the total-moment identity."""
        worst = 0.0
        scale = max(float(np.max(np.abs(self.nu))), 1e-300)
        prev = self.nu
        acc = np.zeros_like(self.nu)
        for rec in self.annuli:
            gap = prev - rec.suffix - rec.measure * rec.moments
            worst = max(worst, float(np.max(np.abs(gap))) / max(scale, 1.0))
            acc += rec.measure * rec.moments
            prev = rec.suffix
        worst = max(worst, float(np.max(np.abs(acc - self.nu)))
                    / max(scale, 1.0))
        return worst

    def reconstruction(self) -> np.ndarray:
        out = self.a_omega.coeff * self.a_omega.f.samples.copy()
        for piece in self.atoms:
            out = out + piece.coeff * piece.f.samples
        for piece in self.phis:
            out = out + piece.coeff * piece.f.samples
        return out


def _aligned(value: float, dx: float) -> bool:
    q = value / dx
    return abs(q - round(q)) < 1e-9


def _annulus_masks(M: GridFunction, ball: Ball, k: int):
    """Cell masks for E_k; annulus edges are whole cell edges by the
    alignment precondition."""
    edges = M.cell_edges()
    mid = 0.5 * (edges[:-1] + edges[1:])
    c, r = ball.center, ball.radius
    d = np.abs(mid - c)
    if k == 0:
        return d < r
    return (d > 2.0 ** (k - 1) * r) & (d < 2.0 ** k * r)


def molecular_decompose(M: GridFunction, ball: Ball, mp: MoleculeParams,
                        K_max: int | None = None) -> DecompositionResult:
    """Decompose a gridded molecule into atoms, two-annulus corrections,
    and the moment carrier (see module docstring).

    Preconditions: exact-mode grid; the ball radius and center sit on
    cell edges so every dyadic annulus is a whole number of cells.
    K_max defaults to the smallest K with B_K covering the grid, which
    makes the reconstruction exact on the grid.
    """
    if M.mode != "exact":
        raise ParameterError("decomposition requires an exact-mode grid")
    c, r = ball.center, ball.radius
    if not (_aligned(r, M.dx) and _aligned(c - M.x0, M.dx)):
        raise ParameterError(
            "ball radius and center must be aligned to whole grid cells")
    pr = mp.params
    N = pr.N_p
    lo, hi = M.domain
    half_width = max(hi - c, c - lo)
    if K_max is None:
        K_max = max(1, int(np.ceil(np.log2(max(half_width / r, 1.0)))))
    if K_max > 60:
        raise ParameterError("K_max unreasonably large")

    pts = M.points()
    inv_s = 1.0 / pr.s

    regions, bases, measures, mtab = [], [], [], []
    masks = []
    for k in range(K_max + 1):
        reg = Region.annulus(ball, k).clipped((lo, hi))
        regions.append(reg)
        basis = dual_basis(reg, N, grid=M)
        bases.append(basis)
        measures.append(reg.measure)
        mtab.append(region_moments(M, reg, N))
        masks.append(_annulus_masks(M, ball, k))
    mtab = np.asarray(mtab)                      # (K+1, N+1)
    measures = np.asarray(measures)

    weighted = measures[:, None] * mtab          # |E_k| m_alpha^k
    nu = weighted.sum(axis=0)
    # N_alpha^k = sum_{j >= k+1} |E_j| m_alpha^j
    suffix = np.zeros_like(weighted)
    suffix[:-1] = weighted[::-1].cumsum(axis=0)[::-1][1:]

    phi_vals = []                                # phi_alpha^k at grid points
    for k in range(K_max + 1):
        vals = np.stack([
            np.asarray(bases[k].evaluate(alpha, pts)) * masks[k]
            for alpha in range(N + 1)])
        phi_vals.append(vals)

    atom_pieces = []
    sum_t = 0.0
    for k in range(K_max + 1):
        if not np.any(masks[k]):
            continue
        P_k = (mtab[k][:, None] * phi_vals[k]).sum(axis=0)
        piece = np.where(masks[k], M.samples - P_k, 0.0)
        norm = ls_norm(M.with_samples(piece), M.domain, pr.s)
        if norm == 0.0:
            continue
        B_k = Ball(c, 2.0 ** k * r)
        t_k = norm * B_k.measure ** (1.0 / pr.p - inv_s)
        atom_pieces.append(AtomPiece(
            k, t_k, M.with_samples(piece / norm * B_k.measure
                                   ** (inv_s - 1.0 / pr.p)), B_k))
        sum_t += t_k ** pr.p

    phi_pieces = []
    sum_s = 0.0
    for k in range(K_max):
        contrib = suffix[k][:, None] * (
            phi_vals[k + 1] / measures[k + 1] - phi_vals[k] / measures[k])
        assembled = contrib.sum(axis=0)
        peak = float(np.max(np.abs(assembled)))
        if peak == 0.0:
            continue
        B_next = Ball(c, 2.0 ** (k + 1) * r)
        s_k = peak * B_next.radius ** (1.0 / pr.p)
        phi_pieces.append(PhiPiece(
            k, s_k, M.with_samples(assembled / peak
                                   * B_next.radius ** (-1.0 / pr.p)), B_next))
        sum_s += s_k ** pr.p

    m_norm = ls_norm(M, M.domain, pr.s)
    carrier = (nu[:, None] * phi_vals[0]).sum(axis=0) / measures[0]
    norm = ls_norm(M.with_samples(carrier), M.domain, pr.s)
    bound = r ** (pr.n * (inv_s - 1.0 / pr.p))
    if norm <= 1e-13 * m_norm:
        # moments are zero to roundoff; a noise-normalized carrier would
        # report a meaningless implied omega
        t_om = 0.0
        a_om = M.with_samples(np.zeros_like(carrier))
        omega_implied = 0.0
    else:
        t_om = norm / bound
        if pr.omega > 0:
            # absorb whichever constraint binds, so the normalized
            # carrier is an actual (p, s, omega) atom
            for alpha in range(N + 1):
                if pr.is_critical and alpha == N:
                    level = pr.phi(r)
                else:
                    level = pr.omega
                t_om = max(t_om, abs(nu[alpha]) / level)
        a_om = M.with_samples(carrier / t_om)
        omega_implied = 0.0
        for alpha in range(N + 1):
            level = abs(nu[alpha]) / t_om
            if level == 0.0:
                continue
            if pr.is_critical and alpha == N:
                # smallest omega whose critical gauge reaches the level
                growth = np.expm1(level ** -pr.p)
                omega_implied = max(omega_implied,
                                    1.0 / (r * growth) if growth > 0
                                    else np.inf)
            else:
                omega_implied = max(omega_implied, level)

    a_omega = OmegaPiece(t_om, a_om, ball, omega_implied)

    recon = t_om * a_om.samples.copy()
    for piece in atom_pieces:
        recon += piece.coeff * piece.f.samples
    for piece in phi_pieces:
        recon += piece.coeff * piece.f.samples
    res = ls_norm(M.with_samples(M.samples - recon), M.domain, pr.s)
    residual_rel = res / max(m_norm, 1e-300)

    annuli = tuple(
        AnnulusRecord(k, measures[k], mtab[k].copy(), suffix[k].copy(),
                      bases[k].scaled_sup_bound(),
                      bases[k].biorthogonality_defect())
        for k in range(K_max + 1))
    return DecompositionResult(ball, tuple(atom_pieces), tuple(phi_pieces),
                               a_omega, nu, annuli, residual_rel,
                               sum_t, sum_s, K_max)


# ---------------------------------------------------------------------------
# coefficient budget


@dataclass(frozen=True)
class BudgetReport:
    bound_t: float
    bound_s: float
    ratio: float
    basis_constant: float


def coefficient_budget(mp: MoleculeParams, basis_constant: float = 10.0,
                       C: float | None = None) -> BudgetReport:
    """Closed-form ceilings for sum |t_k|^p and sum |s_k|^p over the
    decomposition of a molecule with norming constant C (defaults to the
    one carried by mp).

    Both series are geometric with ratio 2^{-lambda p/s + n(1 - p/s)};
    the prefactors track the construction's actual estimates: Hoelder on
    each annulus for t_k, the dual-basis sup bound and the suffix-sum
    majorant for s_k.  basis_constant is the (scale-invariant) sup bound
    of the annulus bases; pass the measured value for tight ceilings.
    """
    pr = mp.params
    p, s, lam, n = pr.p, pr.s, mp.lam, pr.n
    if C is None:
        C = mp.C
    ratio = 2.0 ** (-lam * p / s + n * (1.0 - p / s))
    if ratio >= 1.0:
        raise ParameterError(
            "geometric ratio >= 1: lambda at or below n(s/p - 1)")
    cb = basis_constant
    # t-series: first term from M1, k >= 1 terms from M2 via Hoelder
    head = ((1.0 + cb) * C * 2.0 ** (n * (1.0 / p - 1.0 / s))) ** p
    bound_t = head * (1.0 + 2.0 ** (lam * p / s) * ratio / (1.0 - ratio))

    # s-series: sup |Phi_alpha^k| <= N-bar * cb * [(2^{k+1} r)^{-alpha-1}
    # + e_k (2^k r)^{-alpha-1}] with the suffix-sum majorant N-bar
    N = pr.N_p
    inv_sp = 1.0 - 1.0 / s                      # 1/s'
    bound_s = 0.0
    for k in range(400):
        e_k = 0.5 if k == 0 else 1.0
        s_bar = 0.0
        for alpha in range(N + 1):
            q_alpha = 2.0 ** (alpha + inv_sp - lam / s)
            if q_alpha >= 1.0:
                raise ParameterError(
                    "suffix majorant diverges: lambda/s too small for "
                    f"alpha = {alpha}")
            n_bar = C * 2.0 ** (lam / s) * q_alpha ** (k + 1) / (1.0 - q_alpha)
            geom = (2.0 ** (-(k + 1) * (alpha + 1))
                    + e_k * 2.0 ** (-k * (alpha + 1)))
            s_bar += n_bar * cb * geom
        s_bar *= 2.0 ** ((k + 1) / p)
        term = s_bar ** p
        bound_s += term
        if k > 2 and term < 1e-18 * max(bound_s, 1.0):
            break
    return BudgetReport(bound_t, bound_s, ratio, cb)
