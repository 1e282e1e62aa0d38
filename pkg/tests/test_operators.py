"""Kernel condition checks, operator application, and index arithmetic."""

import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, settings, strategies as st

from hardylab.atoms import make_approx_atom, validate_ps_atom
from hardylab.errors import ParameterError, TailDivergenceError, TruncationError
from hardylab.grid import Ball, GridFunction, ls_norm, moment
from hardylab.operators import (
    KERNEL_NAMES,
    KernelSpec,
    absolute_moment_partials,
    aligned_output_grid,
    apply_operator,
    bump_kernel,
    exclusion_error_bound,
    hilbert_kernel,
    hormander_sweep,
    kernel_by_name,
    kernel_regularity_check,
    kernel_size_check,
    l2_operator_ratio,
    local_campanato_check,
    standard_sample_pairs,
    strong_singular_params,
    tstar_moment_function,
    verify_Ta_molecule,
    warped_kernel,
)
from hardylab.params import HardyParams


def zero_kernel():
    return KernelSpec(lambda x, y: 0.0 * (np.asarray(x) + np.asarray(y)),
                      mu=1.0, delta=1.0, reach=1.0, name="zero")


def poisson_kernel(mu=1.0, delta=1.0):
    """Smooth unbounded-reach kernel (1 + (x-y)^2)^{-1}."""
    return KernelSpec(
        lambda x, y: 1.0 / (1.0 + (np.asarray(x) - np.asarray(y)) ** 2),
        mu=mu, delta=delta, name="poisson")


def transpose(K):
    ev = K.evaluator
    return replace(K, evaluator=lambda x, y: ev(y, x))


def odd_step_atom(r, subdiv=6):
    """Deterministic odd (1,2) atom with first moment r/sqrt(2)."""
    dx = r / 2 ** subdiv
    n = 2 * 2 ** subdiv
    y = -r + (np.arange(n) + 0.5) * dx
    c = r ** -0.5 / np.sqrt(2.0 * r)
    return GridFunction(-r, dx, c * np.sign(y)), Ball(0.0, r)


P1 = HardyParams(1.0, s=2.0, omega=1.0)
P23 = HardyParams(2.0 / 3.0, s=2.0, omega=1.0)


# ---------------------------------------------------------------------------
# kernel declarations


class TestKernelSpec:
    def test_parameter_guards(self):
        ev = lambda x, y: np.asarray(x) - np.asarray(y)
        with pytest.raises(ParameterError):
            KernelSpec(ev, mu=0.0, delta=1.0)
        with pytest.raises(ParameterError):
            KernelSpec(ev, mu=1.0, delta=1.5)
        with pytest.raises(ParameterError):
            KernelSpec(ev, mu=1.0, delta=0.0)
        with pytest.raises(ParameterError):
            KernelSpec(ev, mu=1.0, delta=1.0, s=2.5)
        with pytest.raises(ParameterError):
            KernelSpec(ev, mu=1.0, delta=1.0, diagonal_cutoff=-0.1)
        with pytest.raises(ParameterError):
            KernelSpec(ev, mu=1.0, delta=1.0, reach=0.0)

    def test_factories_by_name(self):
        for name in KERNEL_NAMES:
            K = kernel_by_name(name)
            assert K.name == name
        assert kernel_by_name("hilbert-wide").reach == pytest.approx(1e4)
        assert kernel_by_name("hilbert").antisymmetric
        assert not kernel_by_name("bump").antisymmetric
        with pytest.raises(ParameterError):
            kernel_by_name("nosuch")

    def test_warped_theta_guard(self):
        with pytest.raises(ParameterError):
            warped_kernel(theta=1.0)
        assert warped_kernel(theta=0.2).reach == pytest.approx(1.25)

    def test_hilbert_reach_guard(self):
        with pytest.raises(ParameterError):
            hilbert_kernel(reach=-1.0)


# ---------------------------------------------------------------------------
# size condition


class TestSizeCheck:
    def test_zero_kernel(self):
        rep = kernel_size_check(zero_kernel(),
                                standard_sample_pairs((-2, 2), 1 / 64))
        assert rep.c_measured == 0.0
        assert rep.passed

    def test_hilbert_constant_exactly_one(self):
        rep = kernel_size_check(hilbert_kernel(),
                                standard_sample_pairs((-4, 4), 1 / 256))
        assert rep.c_measured == pytest.approx(1.0, rel=1e-12)

    def test_bump_constant_matches_direct_max(self):
        pairs = standard_sample_pairs((-4, 4), 1 / 256)
        rep = kernel_size_check(bump_kernel(), pairs)
        d = pairs[:, 0] - pairs[:, 1]
        b = bump_kernel().evaluator(pairs[:, 0], pairs[:, 1])
        direct = np.max(np.abs(b) / np.minimum(np.abs(d) ** -1.0,
                                               np.abs(d) ** -2.0))
        assert rep.c_measured == pytest.approx(direct, rel=1e-12)
        # the smooth profile peaks well below the singular envelope
        assert 0.2 < rep.c_measured < 0.3

    def test_pair_guards(self):
        K = bump_kernel()
        with pytest.raises(ParameterError):
            kernel_size_check(K, np.zeros((0, 2)))
        with pytest.raises(ParameterError):
            kernel_size_check(K, np.array([[1.0, 1.0]]))
        with pytest.raises(ParameterError):
            kernel_size_check(K, np.array([1.0, 2.0, 3.0]))

    def test_standard_pairs_geometry(self):
        pairs = standard_sample_pairs((-2, 2), 1 / 32, n_seps=10)
        assert pairs.shape == (60, 2)
        assert np.all(pairs[:, 0] != pairs[:, 1])
        with pytest.raises(ParameterError):
            standard_sample_pairs((-2, 2), 8.0)


# ---------------------------------------------------------------------------
# annulus regularity


class TestRegularity:
    def test_zero_kernel_all_zero(self):
        rep = kernel_regularity_check(zero_kernel(), 0.0, 0.05, 0.25)
        assert rep.sup_ratio == 0.0

    def test_smooth_kernels_bounded(self):
        for K in (bump_kernel(), warped_kernel()):
            sup, _ = hormander_sweep(K)
            assert 0.0 < sup < 1.0

    def test_hilbert_bounded_at_s1(self):
        sup, reps = hormander_sweep(hilbert_kernel())
        assert 0.0 < sup < 2.0
        # far annuli beyond the reach contribute nothing
        row_far = reps[0].rows[-1]
        assert max(row_far.ratio_direct, row_far.ratio_transposed) == 0.0

    def test_warped_comparable_to_bump(self):
        sup_b, _ = hormander_sweep(bump_kernel())
        sup_w, _ = hormander_sweep(warped_kernel())
        assert sup_w < 2.0 * sup_b

    def test_flagged_rows_skipped(self):
        K = replace(hilbert_kernel(), diagonal_cutoff=0.25)
        rep = kernel_regularity_check(K, 0.0, 0.1, 0.25)
        assert rep.rows[0].flagged
        assert not rep.rows[1].flagged
        clean = kernel_regularity_check(hilbert_kernel(), 0.0, 0.1, 0.25)
        vals = [max(r.ratio_direct, r.ratio_transposed)
                for r in clean.rows[1:]]
        assert rep.sup_ratio == pytest.approx(max(vals), rel=1e-12)

    def test_argument_guards(self):
        K = bump_kernel()
        with pytest.raises(ParameterError):
            kernel_regularity_check(K, 0.0, 0.05, 1.5)
        with pytest.raises(ParameterError):
            kernel_regularity_check(K, 0.0, 0.3, 0.25)
        with pytest.raises(ParameterError):
            kernel_regularity_check(K, 0.0, 0.0, 0.25)


# ---------------------------------------------------------------------------
# operator application


class TestApplyOperator:
    def test_zero_kernel_zero_image(self):
        a, _ = make_approx_atom(P1, 0.25, seed=0, subdiv=5, fill=0.0)
        Ta = apply_operator(zero_kernel(), a)
        assert np.all(Ta.samples == 0.0)

    def test_young_bound(self):
        a, _ = make_approx_atom(P1, 0.25, seed=3, subdiv=5, fill=0.0)
        Ta = apply_operator(bump_kernel(), a)
        assert ls_norm(Ta, Ta.domain, 2.0) <= ls_norm(a, a.domain, 2.0) + 1e-12

    def test_hilbert_odd_input_even_image(self):
        n = 128
        x = (np.arange(n) + 0.5) / n - 0.5
        g = GridFunction(-0.5, 1.0 / n, np.sin(2 * np.pi * x))
        Hg = apply_operator(hilbert_kernel(), g)
        scale = np.max(np.abs(Hg.samples))
        assert scale > 0.1
        assert np.max(np.abs(Hg.samples - Hg.samples[::-1])) <= 1e-12 * scale

    def test_undeclared_singular_kernel_rejected(self):
        bad = KernelSpec(
            lambda x, y: 1.0 / np.where(np.asarray(x) - np.asarray(y) == 0,
                                        1.0, np.asarray(x) - np.asarray(y)),
            mu=1.0, delta=1.0)
        a, _ = make_approx_atom(P1, 0.25, seed=0, subdiv=5, fill=0.0)
        with pytest.raises(ParameterError, match="antisymmetric"):
            apply_operator(bad, a)

    def test_alignment_guards(self):
        a, _ = make_approx_atom(P1, 0.25, seed=0, subdiv=5, fill=0.0)
        with pytest.raises(ParameterError):
            apply_operator(bump_kernel(), a,
                           out=GridFunction(-1.0, 2 * a.dx, np.zeros(64)))
        with pytest.raises(ParameterError):
            apply_operator(bump_kernel(), a,
                           out=GridFunction(a.x0 + 0.3 * a.dx, a.dx,
                                            np.zeros(64)))

    def test_quadrature_mode_rejected(self):
        g = GridFunction(0.0, 0.1, np.ones(8), mode="quadrature")
        with pytest.raises(ParameterError):
            apply_operator(bump_kernel(), g)

    def test_exclusion_error_bound(self):
        a, _ = make_approx_atom(P1, 0.25, seed=1, subdiv=5, fill=0.0)
        assert exclusion_error_bound(hilbert_kernel(), a) == 0.0
        bound = exclusion_error_bound(bump_kernel(), a)
        peak = np.max(np.abs(a.samples))
        assert 4.0 * a.dx * 1.0 * peak <= bound <= 4.0 * a.dx * 1.2 * peak

    @settings(max_examples=20, deadline=None)
    @given(c=st.floats(-4.0, 4.0, allow_nan=False))
    def test_linearity_in_scaling(self, c):
        a, _ = make_approx_atom(P1, 0.25, seed=2, subdiv=5, fill=0.0)
        out = aligned_output_grid(a, 1.1)
        Ta = apply_operator(bump_kernel(), a, out)
        Tca = apply_operator(bump_kernel(), a.with_samples(c * a.samples), out)
        assert np.allclose(Tca.samples, c * Ta.samples, atol=1e-12)

    def test_l2_ratio_values(self):
        prof = GridFunction(-0.5, 1 / 128,
                            np.exp(-np.linspace(-3, 3, 128) ** 2))
        assert l2_operator_ratio(bump_kernel(), prof) < 1.0
        assert 0.5 < l2_operator_ratio(hilbert_kernel(), prof) < 4.0
        zero = prof.with_samples(np.zeros(prof.n))
        assert l2_operator_ratio(bump_kernel(), zero) == 0.0


# ---------------------------------------------------------------------------
# dual moment functions


class TestTstarMoment:
    EG = GridFunction(-0.3, 1 / 64, np.zeros(38))
    BALL = Ball(0.0, 0.25)

    def test_zero_kernel(self):
        f = tstar_moment_function(zero_kernel(), self.BALL, 0, self.EG)
        assert np.all(f.samples == 0.0)

    def test_bump_order0_constant_near_one(self):
        f = tstar_moment_function(bump_kernel(), self.BALL, 0, self.EG)
        # translation invariance on aligned lattices: exactly constant
        assert np.ptp(f.samples) == 0.0
        # deficit from the diagonal exclusion: mass of b over radius 2 dx
        deficit = 1.0 - f.samples[0]
        assert 0.0 < deficit <= 4.0 * self.EG.dx * 35.0 / 32.0

    def test_bump_deficit_halves_under_refinement(self):
        f1 = tstar_moment_function(bump_kernel(), self.BALL, 0, self.EG)
        eg2 = GridFunction(-0.3, 1 / 128, np.zeros(76))
        f2 = tstar_moment_function(bump_kernel(), self.BALL, 0, eg2)
        d1, d2 = 1.0 - f1.samples[0], 1.0 - f2.samples[0]
        assert d1 / d2 == pytest.approx(2.0, rel=0.05)

    def test_hilbert_order0_vanishes(self):
        f = tstar_moment_function(hilbert_kernel(), self.BALL, 0, self.EG)
        assert np.max(np.abs(f.samples)) <= 1e-12

    def test_warped_order0_varies_smoothly(self):
        f = tstar_moment_function(warped_kernel(), self.BALL, 0, self.EG)
        assert np.all(np.isfinite(f.samples))
        assert 0.0 < np.ptp(f.samples) < 0.2
        assert np.mean(f.samples) == pytest.approx(1.0, abs=0.15)

    def test_divergence_and_window_guards(self):
        with pytest.raises(TailDivergenceError):
            tstar_moment_function(hilbert_kernel(), self.BALL, 1, self.EG)
        K = hilbert_kernel(mu=1.5)
        with pytest.raises(ParameterError):
            tstar_moment_function(K, self.BALL, 1, self.EG)
        with pytest.raises(ParameterError):
            tstar_moment_function(K, self.BALL, -1, self.EG)

    def test_unbounded_reach_envelope_truncation(self):
        eg = GridFunction(-1 / 16, 1 / 64, np.zeros(8))
        f = tstar_moment_function(poisson_kernel(), Ball(0.0, 1 / 16), 0, eg,
                                  tail_tol=2e-3)
        assert np.ptp(f.samples) <= 1e-10
        # integral of (1+u^2)^{-1} minus the three excluded lattice nodes
        assert f.samples[0] == pytest.approx(np.pi - 3.0 / 64.0, abs=5e-3)

    def test_unbounded_reach_uncertifiable(self):
        K = poisson_kernel(mu=0.05, delta=0.04)
        eg = GridFunction(-1 / 16, 1 / 64, np.zeros(8))
        with pytest.raises(TruncationError):
            tstar_moment_function(K, Ball(0.0, 1 / 16), 0, eg)


class TestMomentPartials:
    def test_mean_zero_input_cauchy(self):
        a, _ = make_approx_atom(P1, 0.25, seed=2, subdiv=5, fill=0.0)
        radii = np.array([4.0, 16.0, 64.0, 256.0])
        parts = absolute_moment_partials(hilbert_kernel(reach=1e4), a, 0,
                                         radii)
        inc = np.diff(parts)
        assert np.all(inc >= 0)
        assert np.all(np.diff(inc) < 0)
        assert inc[-1] < 1e-2 * parts[0]

    def test_uncancelled_order1_grows_linearly(self):
        g = GridFunction(-0.25, 1 / 128, np.full(64, 2.0))  # mass one
        radii = np.array([4.0, 16.0, 64.0, 256.0])
        parts = absolute_moment_partials(hilbert_kernel(reach=1e4), g, 1,
                                         radii)
        assert parts[-1] / parts[0] > 50.0
        assert parts / radii == pytest.approx(2.0, rel=0.01)

    def test_radius_guard(self):
        g = GridFunction(-0.25, 1 / 64, np.ones(32))
        with pytest.raises(ParameterError):
            absolute_moment_partials(hilbert_kernel(), g, 0, [])


# ---------------------------------------------------------------------------
# cancellation profile


class TestCampanato:
    def test_convolution_and_odd_kernels_cancel(self):
        for K in (bump_kernel(), hilbert_kernel()):
            for pr in (P1, P23):
                prof = local_campanato_check(K, Ball(0.1, 0.25), pr)
                assert prof.sup_ratio == 0.0
                assert len(prof.rows) == pr.N_p + 1
                assert all(row.gauge > 0 for row in prof.rows)

    def test_warped_oscillation_linear_in_radius(self):
        W = warped_kernel()
        oscs = []
        for k in range(2, 9):
            r = 2.0 ** -k
            prof = local_campanato_check(W, Ball(0.0, r), P1)
            assert prof.sup_ratio < 0.05
            oscs.append(prof.rows[0].oscillation / r)
        oscs = np.array(oscs)
        assert np.all((0.04 < oscs) & (oscs < 0.06))


# ---------------------------------------------------------------------------
# images of atoms are molecules


class TestVerifyTaMolecule:
    @pytest.mark.parametrize("kernel_fn", [bump_kernel, hilbert_kernel,
                                           warped_kernel])
    def test_images_validate(self, kernel_fn):
        K = kernel_fn()
        for pr, lam in ((P1, 2.0), (P23, 2.5)):
            for seed in (0, 1):
                for r in (2.0 ** -2, 2.0 ** -5):
                    a, ball = make_approx_atom(pr, r, seed=seed, subdiv=5,
                                               fill=0.0)
                    rep = verify_Ta_molecule(K, a, ball, pr, lam)
                    assert rep.passed
                    assert rep.tightest_constant < 16.0

    def test_window_guard(self):
        a, ball = make_approx_atom(P1, 0.25, seed=0, subdiv=5, fill=0.0)
        with pytest.raises(ParameterError, match="window"):
            verify_Ta_molecule(bump_kernel(), a, ball, P1, 1.0)
        with pytest.raises(ParameterError, match="window"):
            verify_Ta_molecule(bump_kernel(), a, ball, P1, 4.0)

    def test_non_atom_rejected(self):
        a, ball = make_approx_atom(P1, 0.25, seed=0, subdiv=5, fill=0.0)
        big = a.with_samples(10.0 * a.samples)
        with pytest.raises(ParameterError, match="atom"):
            verify_Ta_molecule(bump_kernel(), big, ball, P1, 2.0)

    def test_hilbert_far_field_matches_first_moment(self):
        K = hilbert_kernel()
        for r in (2.0 ** -4, 2.0 ** -6):
            a, ball = odd_step_atom(r)
            assert validate_ps_atom(a, ball, P1).passed
            m1 = moment(a, ball, 1)
            Ta = apply_operator(K, a)
            x = Ta.points()
            sel = (np.abs(x) >= 8 * r) & (np.abs(x) <= 0.75)
            ratio = x[sel] ** 2 * np.abs(Ta.samples[sel]) / abs(m1)
            assert np.max(np.abs(ratio - 1.0)) < 0.2


# ---------------------------------------------------------------------------
# adjoint consistency


class TestAdjoint:
    @pytest.mark.parametrize("kernel_fn", [bump_kernel, hilbert_kernel,
                                           warped_kernel])
    def test_pairing_identity(self, kernel_fn):
        K = kernel_fn()
        f, _ = make_approx_atom(P1, 0.25, seed=7, subdiv=5, fill=0.0)
        Tf = apply_operator(K, f)
        x = Tf.points()
        g = Tf.with_samples(np.where(np.abs(x - 0.3) < 0.5, np.sin(5 * x),
                                     0.0))
        lhs = float(np.sum(Tf.samples * g.samples) * Tf.dx)
        Ttg = apply_operator(transpose(K), g,
                             out=f.with_samples(np.zeros(f.n)))
        rhs = float(np.sum(f.samples * Ttg.samples) * f.dx)
        assert abs(lhs - rhs) <= 1e-6 * max(abs(lhs), 1e-30)


# ---------------------------------------------------------------------------
# strongly singular index arithmetic


class TestStrongSingular:
    def test_reference_values(self):
        sp = strong_singular_params(beta=0.25, sigma=1.0, delta=1.0, mu=1.0,
                                    s=2.0)
        assert sp.q == pytest.approx(4.0 / 3.0, rel=1e-12)
        assert sp.p0 == pytest.approx(0.5, rel=1e-12)
        assert sp.rho == pytest.approx(5.0 / 6.0, rel=1e-12)
        assert sp.lambda_max == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_p_lower(self):
        sp = strong_singular_params(0.25, 1.0, 1.0, 1.0, 2.0)
        assert sp.p_lower == pytest.approx(max(1.0 / 2.0, 0.5))
        sp2 = strong_singular_params(0.25, 1.0, 1.0, 3.0, 2.0)
        assert sp2.p_lower == pytest.approx(0.5)  # p0 dominates 1/(1+3)

    def test_beta_range_guards(self):
        with pytest.raises(ParameterError):
            strong_singular_params(0.5, 1.0, 1.0, 1.0, 2.0)
        with pytest.raises(ParameterError):
            strong_singular_params(-0.1, 1.0, 1.0, 1.0, 2.0)
        with pytest.raises(ParameterError):
            strong_singular_params(0.2, 0.5, 1.0, 1.0, 2.0)
        strong_singular_params(0.25, 0.5, 1.0, 1.0, 2.0)  # admissible

    def test_degenerate_denominator(self):
        with pytest.raises(ParameterError, match="p0 undefined"):
            strong_singular_params(0.0, 1.0, 1.0, 1.0, 2.0)

    def test_parameter_guards(self):
        with pytest.raises(ParameterError):
            strong_singular_params(0.25, 0.0, 1.0, 1.0, 2.0)
        with pytest.raises(ParameterError):
            strong_singular_params(0.25, 1.0, 2.0, 1.0, 2.0)
        with pytest.raises(ParameterError):
            strong_singular_params(0.25, 1.0, 1.0, 0.0, 2.0)
        with pytest.raises(ParameterError):
            strong_singular_params(0.25, 1.0, 1.0, 1.0, 3.0)
        with pytest.raises(ParameterError):
            strong_singular_params(0.25, 1.0, 1.0, 1.0, 2.0, n=0)

    def test_sigma_one_p0_independent_of_beta(self):
        vals = [strong_singular_params(b, 1.0, 1.0, 1.0, 2.0).p0
                for b in (0.1, 0.25, 0.4)]
        assert np.ptp(vals) < 1e-12

    def test_as_dict_round(self):
        d = strong_singular_params(0.25, 1.0, 1.0, 1.0, 2.0).as_dict()
        assert set(d) == {"q", "p0", "rho", "lambda_max", "p_lower", "beta",
                          "sigma", "delta", "mu", "s", "n"}
