"""Squeezing factors, second-order correlation and the Cauchy-Schwarz factor."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dynamics import oscillator_branches
from .errors import InvalidInputError, UndefinedValueError, UnsupportedRegimeError
from .moments import Letter, mean_photon_number, moment, multimode_moment


@dataclass(frozen=True)
class SqueezingReport:
    """Variances of a quadrature pair and their squeezing factors.

    ``commutator_bound`` is half the modulus of the commutator expectation,
    i.e. the variance of a minimum-uncertainty balanced state; ``S`` and
    ``Q`` are the X- and Y-variances measured relative to it.
    """

    varX: object
    varY: object
    commutator_bound: object
    S: object
    Q: object
    mode_set: tuple


@dataclass(frozen=True)
class CorrelationReport:
    g2: tuple
    I: dict
    mean_photon: tuple


def _variance(coeffs, state, operator):
    """Variance of ``sum_a w_a word_a`` for complex weights ``w_a``."""
    mean = 0j
    second = 0j
    for w, word in operator:
        mean = mean + w * multimode_moment(coeffs, state, word)
    for (wa, a), (wb, b) in ((x, y) for x in operator for y in operator):
        second = second + wa * wb * multimode_moment(coeffs, state, a + b)
    return np.real(second - mean * mean)


def _check_modes(mode_set):
    modes = tuple(sorted(set(mode_set)))
    if not modes:
        raise InvalidInputError("mode_set must not be empty")
    if any(m not in (1, 2, 3) for m in modes):
        raise InvalidInputError(f"mode indices must be in {{1, 2, 3}}, got {mode_set!r}")
    return modes


def _report(var_x, var_y, bound, modes):
    return SqueezingReport(var_x, var_y, bound, (var_x - bound) / bound, (var_y - bound) / bound, modes)


def quadrature_squeezing(coeffs, state, mode_set):
    """Single-, two- or three-mode quadrature squeezing.

    ``X = (1/2) sum (A_j + A_j+)`` and ``Y = (1/2i) sum (A_j - A_j+)`` over the
    modes in ``mode_set``; the commutator is ``m/2`` for ``m`` modes.
    """
    modes = _check_modes(mode_set)
    x_op, y_op = [], []
    for j in modes:
        x_op += [(0.5, (Letter(j, False),)), (0.5, (Letter(j, True),))]
        y_op += [(-0.5j, (Letter(j, False),)), (0.5j, (Letter(j, True),))]
    var_x = _variance(coeffs, state, x_op)
    var_y = _variance(coeffs, state, y_op)
    bound = len(modes) / 4.0
    if np.ndim(var_x):
        bound = np.full_like(var_x, bound)
    return _report(var_x, var_y, bound, modes)


def third_mode_variance_closed_form(params, state, t):
    """Mode-3 quadrature variances in closed form when the converter rates coincide."""
    if params.lambda2 != params.lambda3:
        raise UnsupportedRegimeError("closed-form mode-3 variances need lambda2 == lambda3")
    l1, lam = params.lambda1, params.lambda2
    n1, n2, n3 = state.means
    t = np.asarray(t, dtype=float)
    c, s = oscillator_branches(2 * lam * lam - l1 * l1 / 4, t)
    converted = 2 * (1 + n1 + n2) * (lam * s) ** 2
    var_x = 0.25 * (converted + (1 + 2 * n3) * (c + 0.5 * l1 * s) ** 2) * np.exp(-l1 * t)
    var_y = 0.25 * (converted + (1 + 2 * n3) * (c - 0.5 * l1 * s) ** 2) * np.exp(l1 * t)
    if var_x.ndim == 0:
        return float(var_x), float(var_y)
    return var_x, var_y


def squeezed_number_reference(nbar, lambda1, t):
    """Squeezing factor ``(1 + 2 nbar) exp(-lambda1 t) - 1`` of a squeezed number state."""
    return (1 + 2 * nbar) * np.exp(-lambda1 * np.asarray(t, dtype=float)) - 1


def sum_squeezing(coeffs, state, pair):
    """Sum-squeezing of modes ``j != k``.

    Quadratures ``X = (A_j A_k + A_j+ A_k+)/2`` and ``Y = (A_j A_k - A_j+ A_k+)/2i``;
    their commutator has modulus ``(<n_j> + <n_k> + 1)/2``, evaluated at the
    same time, so the bound is a quarter of ``<n_j> + <n_k> + 1``.
    """
    j, k = pair
    if j == k:
        raise InvalidInputError("sum-squeezing needs two distinct modes")
    _check_modes((j, k))
    ann = (Letter(j, False), Letter(k, False))
    cre = (Letter(j, True), Letter(k, True))
    var_x = _variance(coeffs, state, [(0.5, ann), (0.5, cre)])
    var_y = _variance(coeffs, state, [(-0.5j, ann), (0.5j, cre)])
    bound = (mean_photon_number(coeffs, state, j) + mean_photon_number(coeffs, state, k) + 1) / 4.0
    return _report(var_x, var_y, bound, (j, k))


def _ratio(num, den, what, undefined):
    den = np.asarray(den, dtype=float)
    bad = den <= 0
    if np.any(bad):
        if undefined == "raise":
            raise UndefinedValueError(f"{what} has a vanishing denominator")
        den = np.where(bad, np.nan, den)
    out = np.asarray(num, dtype=float) / den
    return float(out) if out.ndim == 0 else out


def g2(coeffs, state, mode, undefined="raise"):
    """Normalised normally ordered second-order correlation of one mode.

    ``undefined="nan"`` returns NaN where the mean photon number vanishes
    instead of raising.
    """
    _check_modes((mode,))
    word = (Letter(mode, True), Letter(mode, True), Letter(mode, False), Letter(mode, False))
    num = moment(coeffs, state, word)
    den = mean_photon_number(coeffs, state, mode) ** 2
    return _ratio(num, den, f"g2 of mode {mode}", undefined)


def cauchy_schwarz_factor(coeffs, state, pair, undefined="raise"):
    """``sqrt(<A_j+^2 A_j^2><A_k+^2 A_k^2>) / <A_j+ A_j A_k+ A_k> - 1``.

    Negative values mean the intermodal correlation exceeds the same-mode one.
    """
    j, k = pair
    if j == k:
        raise InvalidInputError("the Cauchy-Schwarz factor needs two distinct modes")
    _check_modes((j, k))

    def same(m):
        return moment(coeffs, state, (Letter(m, True), Letter(m, True), Letter(m, False), Letter(m, False)))

    cross = moment(coeffs, state, (Letter(j, True), Letter(j, False), Letter(k, True), Letter(k, False)))
    num = np.sqrt(np.maximum(same(j) * same(k), 0.0))
    ratio = _ratio(num, cross, f"Cauchy-Schwarz factor of modes {pair}", undefined)
    return ratio - 1


def correlation_report(coeffs, state, undefined="nan"):
    means = tuple(mean_photon_number(coeffs, state, m) for m in (1, 2, 3))
    g2s = tuple(g2(coeffs, state, m, undefined=undefined) for m in (1, 2, 3))
    factors = {p: cauchy_schwarz_factor(coeffs, state, p, undefined=undefined)
               for p in combinations((1, 2, 3), 2)}
    return CorrelationReport(g2s, factors, means)
