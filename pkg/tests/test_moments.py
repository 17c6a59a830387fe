import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from triosc.dynamics import CouplingParams, general_coefficients
from triosc.errors import InvalidInputError
from triosc.moments import (
    InitialState,
    Letter,
    ModeState,
    ladder_word,
    mean_photon_closed_form,
    mean_photon_number,
    moment,
    multimode_moment,
    normal_order,
    number_word,
    quartic_moment_mode1_closed_form,
    single_mode_expectation,
)
from triosc.oracle import oracle_moment, propagate


def dense_ladder(N):
    return np.diag(np.sqrt(np.arange(1, N + 1)), 1)


def dense_expectation(daggers, rho, N):
    a = dense_ladder(N)
    op = np.eye(N + 1)
    for d in daggers:
        op = op @ (a.T if d else a)
    return float(np.trace(rho @ op))


def thermal_rho(nbar, N):
    n = np.arange(N + 1)
    p = nbar ** n / (1 + nbar) ** (n + 1)
    return np.diag(p)


@pytest.mark.parametrize(
    "word, state, expected",
    [
        ((True, False), ModeState("fock", 3), 3.0),
        ((True, True, False, False), ModeState("fock", 1), 0.0),
        ((False, True), ModeState("fock", 0), 1.0),
        ((True, False), ModeState("thermal", 2.5), 2.5),
    ],
)
def test_single_mode_examples(word, state, expected):
    assert single_mode_expectation(word, state) == expected


def test_thermal_word_against_dense_matrix():
    word = (False, True, True, False)  # a a+ a+ a
    # normal form a+a+aa + 2 a+a, so 2!*4 + 2*2 = 12 at nbar = 2
    assert normal_order(word) == {(2, 2): 1, (1, 1): 2}
    got = single_mode_expectation(word, ModeState("thermal", 2.0))
    assert got == pytest.approx(12.0, abs=1e-12)
    # the dense truncation at N=40 loses a geometric tail of (2/3)^40 weight
    ref = dense_expectation(word, thermal_rho(2.0, 200), 200)
    assert got == pytest.approx(ref, rel=1e-9)
    assert got == pytest.approx(dense_expectation(word, thermal_rho(2.0, 40), 40), rel=1e-3)


@given(word=st.lists(st.booleans(), max_size=8), n=st.integers(0, 6))
def test_single_mode_fock_against_dense(word, n):
    N = 16
    rho = np.zeros((N + 1, N + 1))
    rho[n, n] = 1.0
    assert single_mode_expectation(tuple(word), ModeState("fock", n)) == pytest.approx(
        dense_expectation(word, rho, N), abs=1e-9
    )


def test_thermal_zero_equals_vacuum():
    c = general_coefficients(CouplingParams(0.3, 0.2, 0.4), 2.5)
    w = ladder_word("A1+ A2 A3+ A1 A2+ A2")
    assert multimode_moment(c, InitialState.thermal(0, 0, 0), w) == pytest.approx(
        multimode_moment(c, InitialState.fock(0, 0, 0), w), abs=1e-14
    )


def test_initial_occupation():
    c = general_coefficients(CouplingParams(0.3, 0.2, 0.4), 0.0)
    assert multimode_moment(c, InitialState.fock(1, 1, 1), number_word(1)) == 1


def test_amplifier_moments():
    c = general_coefficients(CouplingParams(0.5, 0.0, 0.0), 1.0)
    vac = InitialState.fock()
    assert moment(c, vac, number_word(1)) == pytest.approx(math.sinh(0.5) ** 2, abs=1e-14)
    assert math.sinh(0.5) ** 2 == pytest.approx(0.2715403, abs=1e-7)
    quartic = moment(c, vac, ladder_word("A1+ A1+ A1 A1"))
    assert quartic == pytest.approx(2 * math.sinh(0.5) ** 4, abs=1e-14)
    assert quartic_moment_mode1_closed_form(c, vac) == pytest.approx(quartic, abs=1e-14)


def test_mean_photon_examples():
    t = np.array([0.0, 2.0])
    st_ = InitialState.fock(1, 2, 3)
    c = general_coefficients(CouplingParams(0.25, 0.3, 0.3), t)
    for m in (1, 2, 3):
        assert mean_photon_number(c, st_, m)[0] == pytest.approx(m, abs=1e-14)
    conv = general_coefficients(CouplingParams(0.0, 0.3, 0.0), math.pi / 0.6)
    one = InitialState.fock(1, 0, 0)
    assert mean_photon_number(conv, one, 1) == pytest.approx(0.0, abs=1e-14)
    assert mean_photon_number(conv, one, 3) == pytest.approx(1.0, abs=1e-14)


def test_mean_photon_against_oracle():
    p = CouplingParams(0.25, 0.3, 0.3)
    state = InitialState.fock(1, 1, 1)
    c = general_coefficients(p, 2.0)
    psi = propagate(p, state, 2.0)
    for m in (1, 2, 3):
        ref = oracle_moment(psi, number_word(m)).real
        assert mean_photon_number(c, state, m) == pytest.approx(ref, abs=max(1e-6, 10 * psi.tail))


@pytest.mark.parametrize("occ", [(0, 0, 0), (1, 1, 1), (3, 0, 2)])
def test_quartic_closed_form(occ):
    state = InitialState.fock(*occ)
    c0 = general_coefficients(CouplingParams(0.25, 0.3, 0.3), 0.0)
    assert quartic_moment_mode1_closed_form(c0, state) == occ[0] * (occ[0] - 1)
    c = general_coefficients(CouplingParams(0.25, 0.3, 0.3), 1.7)
    engine = moment(c, state, ladder_word("A1+ A1+ A1 A1"))
    assert quartic_moment_mode1_closed_form(c, state) == pytest.approx(engine, rel=1e-9)


def test_quartic_closed_form_rejects_thermal():
    c = general_coefficients(CouplingParams(0.25, 0.3, 0.3), 1.0)
    with pytest.raises(InvalidInputError):
        quartic_moment_mode1_closed_form(c, InitialState.thermal(1, 1, 1))


letters = st.builds(Letter, st.integers(1, 3), st.booleans())


@given(
    word=st.lists(letters, min_size=1, max_size=6),
    l1=st.floats(0, 1), l2=st.floats(0, 1), l3=st.floats(0, 1), t=st.floats(0, 4),
    occ=st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
)
def test_hermiticity(word, l1, l2, l3, t, occ):
    c = general_coefficients(CouplingParams(l1, l2, l3), t)
    state = InitialState.fock(*occ)
    adjoint = [Letter(x.mode, not x.dagger) for x in reversed(word)]
    a, b = multimode_moment(c, state, word), multimode_moment(c, state, adjoint)
    assert abs(a - np.conj(b)) <= 1e-12 * max(1.0, abs(a))


@given(l1=st.floats(0, 1), l2=st.floats(0, 1), l3=st.floats(0, 1), t=st.floats(0, 5),
       means=st.tuples(*[st.floats(0, 3)] * 3))
def test_thermal_photon_number_closed_form(l1, l2, l3, t, means):
    c = general_coefficients(CouplingParams(l1, l2, l3), t)
    state = InitialState.thermal(*means)
    engine = moment(c, state, number_word(1))
    assert engine == pytest.approx(mean_photon_closed_form(c, state), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("text", ["A4", "B1", "A1++ x"])
def test_ladder_word_rejects_garbage(text):
    with pytest.raises(InvalidInputError):
        ladder_word(text)


def test_word_length_limit():
    c = general_coefficients(CouplingParams(0.1, 0.1, 0.1), 1.0)
    with pytest.raises(InvalidInputError):
        multimode_moment(c, InitialState.fock(), [Letter(1, True)] * 9)


@pytest.mark.parametrize("kind, occ", [("fock", (1.5, 0, 0)), ("fock", (-1, 0, 0)), ("thermal", (-0.1, 0, 0)),
                                       ("coherent", (0, 0, 0)), ("fock", (1, 1))])
def test_state_validation(kind, occ):
    with pytest.raises(InvalidInputError):
        InitialState(kind, occ)
