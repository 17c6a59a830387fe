import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from triosc.dynamics import (
    CouplingParams,
    ModeCoefficients,
    compose,
    general_coefficients,
    max_identity_residual,
    oscillator_branches,
    special_case_coefficients,
    swap_transform,
    verify_identities,
)
from triosc.errors import InvalidInputError, UnsupportedRegimeError
from triosc.verify import coefficient_gap

rates = st.floats(0.0, 1.0, allow_nan=False)
times = st.floats(0.0, 10.0, allow_nan=False)


def identity_block():
    e = np.zeros(6)
    e[0] = 1.0
    return e


@pytest.mark.parametrize("params", [(0.25, 0.3, 0.3), (1.0, 0.0, 0.5), (0.0, 0.0, 0.0)])
def test_time_zero_is_identity(params):
    c = general_coefficients(CouplingParams(*params), 0.0)
    for block in (c.f, c.g, c.h):
        np.testing.assert_array_equal(block, identity_block())


def test_amplifier_block_matches_two_mode_solution():
    c = general_coefficients(CouplingParams(0.5, 0.0, 0.0), 1.0)
    # A1 = cosh(r) a1 - sinh(r) a2+, so f4 = sinh(r) with the minus sign of the layout
    expected_f = [math.cosh(0.5), 0.0, 0.0, math.sinh(0.5), 0.0, 0.0]
    np.testing.assert_allclose(c.f, expected_f, atol=1e-14)
    np.testing.assert_allclose(c.g, expected_f, atol=1e-14)
    np.testing.assert_allclose(c.h, identity_block(), atol=1e-14)
    assert c.f[0] == pytest.approx(1.127626, abs=1e-6)
    assert c.f[3] == pytest.approx(0.521095, abs=1e-6)


def test_converter_quarter_period():
    c = general_coefficients(CouplingParams(0.0, 0.3, 0.0), math.pi / 0.6)
    assert c.f[0] == pytest.approx(0.0, abs=1e-14)
    assert c.f[4] == pytest.approx(1.0, abs=1e-14)
    assert c.h[4] == pytest.approx(1.0, abs=1e-14)
    assert c.h[0] == pytest.approx(0.0, abs=1e-14)


def test_converter_rotation_against_cosine():
    t = np.linspace(0, 30, 61)
    c = general_coefficients(CouplingParams(0.0, 0.3, 0.0), t)
    np.testing.assert_allclose(c.f[0], np.cos(0.3 * t), atol=1e-13)
    np.testing.assert_allclose(c.f[4], np.sin(0.3 * t), atol=1e-13)


def test_kbar_arithmetic():
    c = special_case_coefficients(CouplingParams(0.25, 0.3, 0.3), 1.0)
    assert c.kbar_sq == pytest.approx(0.164375, abs=1e-15)
    assert math.sqrt(c.kbar_sq) == pytest.approx(0.405432, abs=1e-6)


def test_special_case_hyperbolic_branch_reproduces_amplifier():
    c = special_case_coefficients(CouplingParams(0.5, 0.0, 0.0), 1.0)
    assert c.kbar_sq < 0
    assert c.f[0] == pytest.approx(math.cosh(0.5), abs=1e-14)
    assert c.f[1] == pytest.approx(0.0, abs=1e-14)
    assert c.f[3] == pytest.approx(math.sinh(0.5), abs=1e-14)


@pytest.mark.parametrize("t", [0.3, 2.0, 7.5, 19.0])
def test_special_case_pure_converters(t):
    c = special_case_coefficients(CouplingParams(0.0, 0.3, 0.3), t)
    k = 0.3 * math.sqrt(2)
    assert c.f[0] == pytest.approx((math.cos(k * t) + 1) / 2, abs=1e-14)
    assert c.f[2] == pytest.approx((1 - math.cos(k * t)) / 2, abs=1e-14)
    assert c.f[1] == pytest.approx(0.0, abs=1e-15)
    assert c.f[3] == pytest.approx(0.0, abs=1e-15)
    assert c.f[4] == pytest.approx(math.sin(k * t) / math.sqrt(2), abs=1e-14)
    assert c.f[0] ** 2 + c.f[2] ** 2 + c.f[4] ** 2 == pytest.approx(1.0, abs=1e-14)


def test_special_case_rejects_unequal_converters():
    with pytest.raises(UnsupportedRegimeError, match="general_coefficients"):
        special_case_coefficients(CouplingParams(0.1, 0.2, 0.3), 1.0)


def test_branch_functions_continuous_across_degeneracy():
    t = 3.0
    below = oscillator_branches(-1e-7, t)
    at = oscillator_branches(0.0, t)
    above = oscillator_branches(1e-7, t)
    assert at == (1.0, 3.0)
    for c, s in (below, above):
        assert c == pytest.approx(1.0, abs=1e-6)
        assert s == pytest.approx(3.0, abs=1e-6)
    # inside the series window the expansion is used
    c, s = oscillator_branches(1e-12, t)
    assert c == pytest.approx(1 - 4.5e-12, abs=1e-18)


@pytest.mark.parametrize("lam", [0.1, 0.3, 0.5])
def test_special_case_at_degenerate_point(lam):
    p = CouplingParams(math.sqrt(8) * lam, lam, lam)
    t = np.linspace(0, 20, 201)
    assert coefficient_gap(special_case_coefficients(p, t).rows, general_coefficients(p, t).rows) < 1e-9


@given(lam1=rates, lam=rates, t=st.floats(0.0, 20.0))
def test_special_case_agrees_with_general(lam1, lam, t):
    p = CouplingParams(lam1, lam, lam)
    a = special_case_coefficients(p, np.array([t])).rows
    b = general_coefficients(p, np.array([t])).rows
    assert coefficient_gap(a, b) < 1e-9


def test_identities_zero_at_t0():
    c = general_coefficients(CouplingParams(0.3, 0.4, 0.5), 0.0)
    res = verify_identities(c)
    assert len(res) == 9
    assert all(r.residual == 0 for r in res)


def test_identities_at_t7():
    c = general_coefficients(CouplingParams(0.25, 0.3, 0.3), 7.0)
    assert max(abs(r.residual) for r in verify_identities(c)) < 1e-10


def test_identity_detects_perturbation():
    c = general_coefficients(CouplingParams(0.25, 0.3, 0.3), 2.0)
    f = c.f.copy()
    f[0] += 1e-3
    bad = ModeCoefficients(c.t, f, c.g, c.h)
    first = verify_identities(bad)[0]
    assert first.residual == pytest.approx(2e-3 * c.f[0], rel=1e-2)


@given(l1=rates, l2=rates, l3=rates, t=times)
def test_identities_property(l1, l2, l3, t):
    c = general_coefficients(CouplingParams(l1, l2, l3), t)
    assert max_identity_residual(c) < 1e-10


@given(l1=rates, l2=rates, l3=rates, t1=st.floats(0, 5), t2=st.floats(0, 5))
def test_semigroup(l1, l2, l3, t1, t2):
    p = CouplingParams(l1, l2, l3)
    whole = general_coefficients(p, t1 + t2).propagator()
    split = compose(general_coefficients(p, t1), general_coefficients(p, t2))
    np.testing.assert_allclose(split, whole, rtol=1e-10, atol=1e-10)


@given(l1=rates, l2=rates, l3=rates, t=times)
def test_reversibility(l1, l2, l3, t):
    p = CouplingParams(l1, l2, l3)
    back = compose(general_coefficients(p, t), general_coefficients(p, -t))
    scale = max(1.0, np.abs(general_coefficients(p, t).propagator()).max() ** 2)
    np.testing.assert_allclose(back, np.eye(6), atol=1e-10 * scale)


def test_swap_identity_and_involution():
    c = general_coefficients(CouplingParams(0.2, 0.5, 0.1), 3.0)
    assert swap_transform(c, 1) is c
    for target in (2, 3):
        twice = swap_transform(swap_transform(c, target), target)
        np.testing.assert_array_equal(twice.rows, c.rows)


def test_swap_to_mode2_on_special_case():
    c = special_case_coefficients(CouplingParams(0.25, 0.3, 0.3), 4.0)
    s = swap_transform(c, 2)
    g = c.g
    np.testing.assert_allclose(s.f, [-g[2], -g[3], -g[0], -g[1], g[4], g[5]], atol=0)


def test_swap_to_mode3_matches_direct_rows():
    c = general_coefficients(CouplingParams(0.2, 0.5, 0.1), 3.0)
    s = swap_transform(c, 3)
    np.testing.assert_array_equal(s.rows[0], c.rows[2])
    h = c.h
    np.testing.assert_allclose(s.f, [h[4], h[5], -h[2], -h[3], -h[0], -h[1]], atol=0)


def test_swap_rejects_bad_target():
    c = general_coefficients(CouplingParams(0.2, 0.5, 0.1), 1.0)
    with pytest.raises(InvalidInputError):
        swap_transform(c, 4)


@pytest.mark.parametrize("bad", [(-0.1, 0, 0), (math.inf, 0, 0), (0, math.nan, 0)])
def test_params_validation(bad):
    with pytest.raises(InvalidInputError):
        CouplingParams(*bad)


def test_non_finite_time_rejected():
    with pytest.raises(InvalidInputError):
        general_coefficients(CouplingParams(0.1, 0.1, 0.1), math.nan)


def test_omegas_do_not_enter():
    t = np.linspace(0, 5, 11)
    a = general_coefficients(CouplingParams(0.3, 0.2, 0.1), t)
    b = general_coefficients(CouplingParams(0.3, 0.2, 0.1, omegas=(1.0, 2.0, 3.0)), t)
    np.testing.assert_array_equal(a.rows, b.rows)


def test_batched_matches_scalar():
    p = CouplingParams(0.6, 0.7, 0.2)
    t = np.array([0.0, 1.5, 4.0])
    batch = general_coefficients(p, t)
    for i, ti in enumerate(t):
        np.testing.assert_allclose(batch.at(i).rows, general_coefficients(p, ti).rows, rtol=1e-14, atol=1e-15)
