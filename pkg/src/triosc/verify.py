"""Invariant suite run by ``triosc verify``.

Sample points come from an unscrambled Halton sequence, so the suite is
deterministic without any seed.
"""

from __future__ import annotations

import math
import time
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import qmc

from .dynamics import (
    CouplingParams,
    compose,
    general_coefficients,
    max_identity_residual,
    special_case_coefficients,
)
from .moments import InitialState, Letter, moment, multimode_moment, quartic_moment_mode1_closed_form
from .oracle import picture_equivalence
from .phasespace import characteristic_function, laguerre
from .statistics import g2, quadrature_squeezing, sum_squeezing


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float


def halton(n, dims):
    return qmc.Halton(d=dims, scramble=False).random(n + 1)[1:]


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def check_identities(draws=1000):
    pts = halton(draws, 4)
    worst = 0.0
    for lam1, lam2, lam3, u in pts:
        c = general_coefficients(CouplingParams(lam1, lam2, lam3), 10.0 * u)
        worst = max(worst, max_identity_residual(c))
    return worst < 1e-10, f"max scaled residual {worst:.2e} over {draws} draws"


def coefficient_gap(a, b):
    """Entrywise gap of two batched row sets, in units of ``max(1, largest |entry|)`` at each time."""
    scale = np.maximum(1.0, np.abs(b).max(axis=(0, 1)))
    return float(np.max(np.abs(a - b) / scale))


SPECIAL_CASES = [(0.25, 0.3), (0.6, 0.7), (0.5, 0.0), (0.0, 0.3), (1.0, 0.1)] + [
    (math.sqrt(8) * lam, lam) for lam in (0.1, 0.3, 0.5)  # degenerate points 8 lam^2 = lam1^2
]


def check_special_case():
    t = np.linspace(0.0, 20.0, 401)
    worst = 0.0
    for lam1, lam in SPECIAL_CASES:
        p = CouplingParams(lam1, lam, lam)
        worst = max(worst, coefficient_gap(special_case_coefficients(p, t).rows, general_coefficients(p, t).rows))
    return worst < 1e-9, f"max scaled entry gap {worst:.2e}"


def check_group_laws():
    worst = 0.0
    for lam1, lam2, lam3, u, v in halton(40, 5):
        p = CouplingParams(lam1, lam2, lam3)
        t1, t2 = 5 * u, 5 * v
        whole = general_coefficients(p, t1 + t2).propagator()
        split = compose(general_coefficients(p, t1), general_coefficients(p, t2))
        back = compose(general_coefficients(p, t1), general_coefficients(p, -t1))
        worst = max(worst, _rel(split, whole), _rel(back, np.eye(6)))
    return worst < 1e-10, f"semigroup/reversibility gap {worst:.2e}"


def check_engine_closed_forms():
    worst = 0.0
    word = (Letter(1, True), Letter(1, True), Letter(1, False), Letter(1, False))
    for lam1, lam2, lam3, u in halton(30, 4):
        c = general_coefficients(CouplingParams(lam1, lam2, lam3), 3 * u)
        for occ in ((0, 0, 0), (1, 1, 1), (2, 0, 1)):
            st = InitialState.fock(*occ)
            worst = max(worst, _rel(moment(c, st, word), quartic_moment_mode1_closed_form(c, st)))
    return worst < 1e-9, f"quartic engine vs closed form {worst:.2e}"


def check_hermiticity():
    worst = 0.0
    letters = [Letter(m, d) for m in (1, 2, 3) for d in (False, True)]
    pts = halton(20, 4)
    for i, (lam1, lam2, lam3, u) in enumerate(pts):
        c = general_coefficients(CouplingParams(lam1, lam2, lam3), 4 * u)
        st = InitialState.fock(1, 0, 2) if i % 2 else InitialState.thermal(0.5, 1.5, 0.0)
        idx = [(i * 7 + 3 * k) % 6 for k in range(4)]
        word = tuple(letters[j] for j in idx)
        adj = tuple(Letter(l.mode, not l.dagger) for l in reversed(word))
        a, b = multimode_moment(c, st, word), multimode_moment(c, st, adj)
        worst = max(worst, abs(a - np.conj(b)) / max(1.0, abs(a)))
    return worst < 1e-12, f"max |<W> - conj<W+>| {worst:.2e}"


def check_uncertainty():
    worst = np.inf
    t = np.linspace(0.0, 30.0, 121)
    for lam in ((0.25, 0.3, 0.3), (0.1, 0.1, 0.1), (0.6, 0.7, 0.2)):
        c = general_coefficients(CouplingParams(*lam), t)
        st = InitialState.fock(1, 1, 1)
        reports = [quadrature_squeezing(c, st, ms) for ms in ((1,), (3,), (1, 2), (1, 2, 3))]
        reports += [sum_squeezing(c, st, pr) for pr in ((1, 2), (1, 3), (2, 3))]
        for r in reports:
            slack = (r.varX * r.varY - r.commutator_bound ** 2) / np.maximum(1.0, r.commutator_bound ** 2)
            worst = min(worst, float(np.min(slack)))
    return worst >= -1e-9, f"min scaled (varX varY - bound^2) {worst:.2e}"


def check_symmetry():
    worst = 0.0
    t = np.linspace(0.0, 20.0, 81)
    st = InitialState.fock(1, 1, 0)
    a = general_coefficients(CouplingParams(0.2, 0.3, 0.5), t)
    b = general_coefficients(CouplingParams(0.2, 0.5, 0.3), t)
    for x, y in ((1, 2), (2, 1)):
        ra, rb = quadrature_squeezing(a, st, (x,)), quadrature_squeezing(b, st, (y,))
        worst = max(worst, _rel(ra.varX, rb.varX), _rel(ra.varY, rb.varY))
    worst = max(worst, _rel(g2(a, st, 1), g2(b, st, 2)))
    return worst < 1e-10, f"mode 1 <-> 2 gap under lambda2 <-> lambda3 {worst:.2e}"


def check_phase_space_identities():
    worst = 0.0
    c = general_coefficients(CouplingParams(0.25, 0.3, 0.3), 2.0)
    st = InitialState.fock(1, 0, 2)
    for x, y in halton(10, 2):
        z = (complex(x - 0.5, y), complex(y, -x), 0.3j)
        base = characteristic_function(c, st, z, 0)
        ladder = characteristic_function(c, st, z, 1)
        expected = base * math.exp(sum(abs(v) ** 2 for v in z) / 2)
        worst = max(worst, abs(ladder - expected) / max(1.0, abs(expected)))
    for n in range(0, 21, 4):
        for x, y in halton(5, 2) * 6:
            total = sum(laguerre(l, -0.5, x) * laguerre(n - l, -0.5, y) for l in range(n + 1))
            worst = max(worst, abs(total - laguerre(n, 0.0, x + y)) / max(1.0, abs(total)))
    return worst < 1e-10, f"s-ladder and Laguerre addition gap {worst:.2e}"


def check_converter_g2():
    t = np.linspace(0.0, 50.0, 501)
    worst_low, worst_high = np.inf, -np.inf
    for nbar in (1, 2):
        st = InitialState.fock(nbar, nbar, nbar)
        c = general_coefficients(CouplingParams(0.0, 0.1, 0.1), t)
        val = g2(c, st, 1)
        worst_low = min(worst_low, float(np.min(val - (1 - 1 / nbar))))
        worst_high = max(worst_high, float(np.max(val)))
    ok = worst_low >= -1e-12 and worst_high < 2
    return ok, f"min g2 - (1 - 1/n) {worst_low:.2e}, max g2 {worst_high:.4f}"


def check_oracle_sample():
    worst = 0.0
    ok = True
    for lam, occ, t in (((0.0, 0.3, 0.2), (1, 1, 1), 2.0), ((0.25, 0.3, 0.3), (1, 0, 0), 1.0),
                        ((0.2, 0.0, 0.0), (0, 0, 0), 2.0)):
        for rec in picture_equivalence(CouplingParams(*lam), InitialState.fock(*occ), t):
            worst = max(worst, rec.difference)
            ok = ok and rec.ok
    return ok, f"max Heisenberg/Schrodinger gap {worst:.2e}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("coefficient identities", check_identities),
    ("closed-form coefficients", check_special_case),
    ("semigroup and reversibility", check_group_laws),
    ("engine vs closed-form moments", check_engine_closed_forms),
    ("moment hermiticity", check_hermiticity),
    ("uncertainty relation", check_uncertainty),
    ("lambda2/lambda3 symmetry", check_symmetry),
    ("phase-space identities", check_phase_space_identities),
    ("converter-only g2 bounds", check_converter_g2),
    ("oracle sample", check_oracle_sample),
]


def run_checks(checks=None):
    results = []
    for name, fn in checks or CHECKS:
        start = time.perf_counter()
        passed, detail = fn()
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
    return results
