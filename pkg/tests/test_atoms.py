"""Atom validation and the critical-index counterexample family.

The counterexample oracles are hand values: the base profile has
moment_1 = phi/4 for k = 2, the recursion constants follow
C_{m+1,k} = (m+1) 2^m C_{m,k} with C_{1,k} = 2^{-k(k-1)}, and the
log pairing for k = 2 is exactly (phi/4) ln r - phi/8.
"""

import numpy as np
import pytest

from hardylab.atoms import (
    CutoffSpec,
    build_counterexample,
    make_approx_atom,
    moment_constant,
    pairing_log_test,
    validate_ps_atom,
    validate_psomega_atom,
)
from hardylab.errors import ParameterError, ResolutionError
from hardylab.grid import Ball, GridFunction, ls_norm, moment
from hardylab.params import HardyParams, phi_p


def test_moment_constant_hand_values():
    assert moment_constant(1, 2) == pytest.approx(0.25, rel=1e-15)
    assert moment_constant(1, 3) == pytest.approx(2.0 ** -6, rel=1e-15)
    assert moment_constant(2, 3) == pytest.approx(1.0 / 16.0, rel=1e-15)
    # C_{3,4} = 3 * 2^2 * C_{2,4} = 12 * (2 * 2 * 2^-12)
    assert moment_constant(3, 4) == pytest.approx(3.0 / 256.0, rel=1e-15)


def test_moment_constant_range():
    with pytest.raises(ParameterError):
        moment_constant(0, 3)
    with pytest.raises(ParameterError):
        moment_constant(3, 3)


@pytest.mark.parametrize("k,r", [(2, 2 ** -3), (2, 2 ** -7),
                                 (3, 2 ** -4), (4, 2 ** -5)])
def test_counterexample_moments(k, r):
    phi = 0.7
    f, ball = build_counterexample(k, r, phi)
    scale = ls_norm(f, f.domain, 1.0)
    for alpha in range(k - 1):
        assert abs(moment(f, ball, alpha)) < 1e-12 * scale
    lead = moment(f, ball, k - 1)
    assert abs(lead) == pytest.approx(moment_constant(k - 1, k) * phi,
                                      rel=1e-12)


def test_counterexample_leading_moment_r_free():
    # the (k-1)-st moment must not depend on r
    vals = []
    for r in (2 ** -4, 2 ** -6, 2 ** -8):
        f, ball = build_counterexample(3, r, 1.0)
        vals.append(abs(moment(f, ball, 2)))
    assert max(vals) == pytest.approx(min(vals), rel=1e-12)


def test_counterexample_param_checks():
    with pytest.raises(ParameterError):
        build_counterexample(1, 0.1, 1.0)
    with pytest.raises(ParameterError):
        build_counterexample(3, 0.3, 1.0)   # r >= 2^{1-k}
    with pytest.raises(ParameterError):
        build_counterexample(2, 0.1, -1.0)


def test_counterexample_is_approx_atom_but_not_exact_atom():
    k, om = 2, 0.05
    r = 2 ** -5
    params = HardyParams(0.5, np.inf, omega=om)
    phi = 0.9 * phi_p(r, 0.5, om)
    f, ball = build_counterexample(k, r, phi)
    assert ball.radius == r
    rep = validate_psomega_atom(f, ball, params)
    assert rep.passed
    # with exact vanishing demanded, the constant first moment shows up
    rep2 = validate_ps_atom(f, ball, HardyParams(0.5, np.inf))
    assert rep2.support_ok and rep2.size_ok
    assert not rep2.passed


def test_pairing_log_exact_k2():
    phi = 1.0
    for r in (2 ** -3, 2 ** -6, 2 ** -9):
        f, ball = build_counterexample(2, r, phi)
        res = pairing_log_test(f, ball, 2)
        assert res.phi_value == pytest.approx(phi, rel=1e-12)
        assert res.pairing == pytest.approx(0.25 * phi * np.log(r) - phi / 8,
                                            rel=1e-11)
        assert res.residual == pytest.approx(phi / 8, rel=1e-10)


def test_pairing_log_slope_matches_constant():
    phi = 0.6
    rs = [2.0 ** -i for i in range(3, 10)]
    pairings = []
    for r in rs:
        f, ball = build_counterexample(2, r, phi)
        pairings.append(pairing_log_test(f, ball, 2).pairing)
    slope = np.polyfit(np.log(rs), pairings, 1)[0]
    assert slope == pytest.approx(moment_constant(1, 2) * phi, rel=1e-10)


def test_pairing_log_residual_bounded_k3():
    res = []
    for r in (2 ** -4, 2 ** -6, 2 ** -8, 2 ** -10):
        f, ball = build_counterexample(3, r, 1.0)
        res.append(pairing_log_test(f, ball, 3).residual)
    # residual is a fixed constant (homogeneity), in particular bounded
    assert max(res) == pytest.approx(min(res), abs=1e-10)


def test_pairing_log_requires_flat_cutoff():
    f, ball = build_counterexample(2, 2 ** -2, 1.0)
    with pytest.raises(ParameterError):
        pairing_log_test(f, ball, 2, eta=CutoffSpec(0.1, 0.2))


def test_cutoff_shape():
    eta = CutoffSpec(0.5, 1.0)
    assert eta(0.0) == 1.0
    assert eta(0.5) == 1.0
    assert eta(-0.5) == 1.0
    assert eta(1.0) == 0.0
    assert eta(0.75) == pytest.approx(0.5)
    t = np.linspace(0, 1.2, 200)
    v = eta(t)
    assert np.all(np.diff(v) <= 1e-12)


def test_validate_exact_atom_p1():
    r = 0.25
    n = 256
    dx = 2 * r / n
    c = 1.0 / (np.sqrt(2.0) * r)  # makes the L^2 norm exactly r^{-1/2}
    samples = np.where(np.arange(n) < n // 2, -c, c)
    f = GridFunction(-r, dx, samples)
    ball = Ball(0.0, r)
    rep = validate_ps_atom(f, ball, HardyParams(1.0, 2.0))
    assert rep.passed
    assert rep.size_value == pytest.approx(rep.size_bound, rel=1e-12)
    # scale violation
    rep2 = validate_ps_atom(f.with_samples(1.01 * samples), ball,
                            HardyParams(1.0, 2.0))
    assert not rep2.size_ok and not rep2.passed
    # moment violation
    rep3 = validate_ps_atom(f.with_samples(np.abs(samples) * 0.5), ball,
                            HardyParams(1.0, 2.0))
    assert rep3.size_ok and not rep3.passed


def test_large_ball_atom_needs_no_moments():
    r = 2.0
    n = 256
    f = GridFunction(-r, 2 * r / n, np.full(n, 1.0))
    ball = Ball(0.0, r)
    bound = r ** HardyParams(1.0, 2.0).size_exponent()
    f = f.with_samples(f.samples * bound / ls_norm(f, f.domain, 2.0))
    rep = validate_ps_atom(f, ball, HardyParams(1.0, 2.0))
    assert rep.passed
    assert rep.moments == ()


def test_support_leak_detected():
    r = 0.25
    n = 256
    samples = np.ones(n)
    f = GridFunction(-2 * r, 4 * r / n, samples)  # half the mass outside B
    rep = validate_ps_atom(f, Ball(0.0, r), HardyParams(1.0, 2.0, n=1))
    assert not rep.support_ok


def test_resolution_guard():
    f = GridFunction(-1.0, 2.0 / 16, np.ones(16))
    with pytest.raises(ResolutionError):
        validate_ps_atom(f, Ball(0.0, 1.0), HardyParams(1.0, 2.0))


@pytest.mark.parametrize("p,s,om", [(1.0, 2.0, 0.0), (0.5, 2.0, 0.02),
                                    (0.6, 4.0, 0.1), (1.0 / 3.0, 2.0, 0.05)])
def test_make_approx_atom_battery(p, s, om):
    params = HardyParams(p, s, omega=om)
    for seed in range(3):
        f, ball = make_approx_atom(params, 2 ** -3, seed=seed)
        rep = validate_psomega_atom(f, ball, params)
        assert rep.passed, rep.as_dict()
        assert rep.size_value == pytest.approx(rep.size_bound, rel=1e-9)


def test_make_approx_atom_omega_zero_is_exact():
    params = HardyParams(0.5, 2.0)
    f, ball = make_approx_atom(params, 2 ** -4, seed=7)
    rep = validate_ps_atom(f, ball, params)
    assert rep.passed


def test_report_dict_roundtrippable():
    params = HardyParams(0.5, 2.0, omega=0.01)
    f, ball = make_approx_atom(params, 2 ** -3, seed=1)
    d = validate_psomega_atom(f, ball, params).as_dict()
    assert set(d) >= {"atom_class", "ball", "moments", "passed"}
    assert isinstance(d["moments"][0]["value"], float)
