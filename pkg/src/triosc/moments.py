"""Expectation values of products of evolved ladder operators.

A time-evolved letter ``A_j`` or ``A_j+`` is a six-term combination of the
initial-time operators.  A word of such letters is expanded term by term;
because the initial state is a product over modes, each term factorises
into single-mode words whose expectations are obtained by exact normal
ordering.  No Gaussian (Wick) factorisation is used, so Fock inputs are
treated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .dynamics import ModeCoefficients, swap_transform
from .errors import ConvergenceError, InvalidInputError

MAX_WORD_LENGTH = 8
CLOSED_FORM_TOL = 1e-10

FOCK = "fock"
THERMAL = "thermal"


@dataclass(frozen=True)
class ModeState:
    """Occupation of one mode: integer for Fock, mean photon number for thermal."""

    kind: str
    occupation: object


@dataclass(frozen=True)
class InitialState:
    kind: str
    occupations: tuple

    def __post_init__(self):
        if self.kind not in (FOCK, THERMAL):
            raise InvalidInputError(f"state kind must be 'fock' or 'thermal', got {self.kind!r}")
        occ = tuple(self.occupations)
        if len(occ) != 3:
            raise InvalidInputError("three occupations are required")
        if self.kind == FOCK:
            checked = []
            for n in occ:
                if isinstance(n, bool) or not float(n).is_integer() or n < 0:
                    raise InvalidInputError(f"Fock occupations must be integers >= 0, got {n!r}")
                checked.append(int(n))
            occ = tuple(checked)
        else:
            occ = tuple(float(n) for n in occ)
            if not all(math.isfinite(n) and n >= 0 for n in occ):
                raise InvalidInputError("thermal means must be finite and >= 0")
        object.__setattr__(self, "occupations", occ)

    @classmethod
    def fock(cls, n1=0, n2=0, n3=0):
        return cls(FOCK, (n1, n2, n3))

    @classmethod
    def thermal(cls, n1=0.0, n2=0.0, n3=0.0):
        return cls(THERMAL, (n1, n2, n3))

    def mode(self, j):
        return ModeState(self.kind, self.occupations[j - 1])

    @property
    def means(self):
        return tuple(float(n) for n in self.occupations)


class Letter(NamedTuple):
    mode: int
    dagger: bool


def number_word(j):
    return (Letter(j, True), Letter(j, False))


def ladder_word(text):
    """Parse e.g. ``"A1+ A1+ A1 A1"`` into a tuple of letters."""
    letters = []
    for token in text.split():
        tok = token.strip()
        dagger = tok.endswith("+")
        core = tok.rstrip("+").lstrip("Aa")
        if core not in ("1", "2", "3"):
            raise InvalidInputError(f"cannot parse ladder letter {token!r}")
        letters.append(Letter(int(core), dagger))
    return tuple(letters)


def _as_letters(word):
    out = []
    for item in word:
        if isinstance(item, Letter):
            out.append(item)
        else:
            mode, dagger = item
            out.append(Letter(int(mode), bool(dagger)))
    if len(out) > MAX_WORD_LENGTH:
        raise InvalidInputError(f"word length {len(out)} exceeds {MAX_WORD_LENGTH}")
    for letter in out:
        if letter.mode not in (1, 2, 3):
            raise InvalidInputError(f"invalid mode index {letter.mode!r}")
    return tuple(out)


@lru_cache(maxsize=4096)
def normal_order(daggers):
    """Normal-ordered form of a single-mode word as ``{(p, q): int}``.

    ``daggers`` is a tuple of booleans read left to right (True = a+); the
    key ``(p, q)`` stands for ``a+^p a^q``.  Uses ``a^q a+ = a+ a^q + q a^(q-1)``.
    """
    poly = {(0, 0): 1}
    for dag in daggers:
        nxt = {}
        for (p, q), c in poly.items():
            if not dag:
                key = (p, q + 1)
                nxt[key] = nxt.get(key, 0) + c
            else:
                key = (p + 1, q)
                nxt[key] = nxt.get(key, 0) + c
                if q:
                    key = (p, q - 1)
                    nxt[key] = nxt.get(key, 0) + q * c
        poly = nxt
    return poly


def _diagonal_normal_moment(p, mode_state):
    if mode_state.kind == FOCK:
        n = mode_state.occupation
        return math.perm(n, p) if p <= n else 0
    return math.factorial(p) * float(mode_state.occupation) ** p


@lru_cache(maxsize=65536)
def _single_mode_cached(daggers, kind, occupation):
    mode_state = ModeState(kind, occupation)
    total = 0
    for (p, q), c in normal_order(daggers).items():
        if p == q:
            total += c * _diagonal_normal_moment(p, mode_state)
    return float(total)


def single_mode_expectation(word, state):
    """Expectation of a single-mode word of ``a`` / ``a+`` in a Fock or thermal state.

    ``word`` items are booleans (True = creation) or letters; ``state`` is a
    :class:`ModeState`.
    """
    daggers = tuple(bool(x.dagger) if isinstance(x, Letter) else bool(x) for x in word)
    if len(daggers) > MAX_WORD_LENGTH:
        raise InvalidInputError(f"word length {len(daggers)} exceeds {MAX_WORD_LENGTH}")
    return _single_mode_cached(daggers, state.kind, state.occupation)


# letter slot k of the canonical basis -> (mode index 0..2, creation?)
_SLOT_MODE = (0, 0, 1, 1, 2, 2)
_SLOT_DAGGER = (False, True, False, True, False, True)
_ADJOINT_SLOT = (1, 0, 3, 2, 5, 4)


def multimode_moment(coeffs, state, word):
    """``<W(t)>`` for a word of evolved letters in a product initial state.

    Returns a complex scalar (or complex array for batched coefficients); the
    coefficients are real, so the imaginary part is exactly zero and only
    kept for callers that combine moments with complex weights.
    """
    if not isinstance(coeffs, ModeCoefficients):
        raise InvalidInputError("coeffs must be ModeCoefficients")
    letters = _as_letters(word)
    rows = coeffs.rows
    batch_shape = rows.shape[2:]

    # terms keyed by the per-mode words accumulated so far
    terms = {((), (), ()): np.ones(batch_shape) if batch_shape else 1.0}
    remaining = len(letters)
    for letter in letters:
        remaining -= 1
        row = rows[letter.mode - 1]
        expansion = []
        for slot in range(6):
            src = _ADJOINT_SLOT[slot] if letter.dagger else slot
            c = row[src]
            if not np.any(c):
                continue
            expansion.append((_SLOT_MODE[slot], _SLOT_DAGGER[slot], c))
        nxt = {}
        for key, acc in terms.items():
            for m, dag, c in expansion:
                sub = key[m] + (dag,)
                # drop subwords that can no longer balance
                if abs(2 * sum(sub) - len(sub)) > remaining:
                    continue
                new_key = key[:m] + (sub,) + key[m + 1:]
                val = acc * c
                if new_key in nxt:
                    nxt[new_key] = nxt[new_key] + val
                else:
                    nxt[new_key] = val
        terms = nxt

    mode_states = [state.mode(j) for j in (1, 2, 3)]
    total = np.zeros(batch_shape) if batch_shape else 0.0
    for key, acc in terms.items():
        factor = 1.0
        for m in range(3):
            if key[m]:
                factor *= _single_mode_cached(key[m], mode_states[m].kind, mode_states[m].occupation)
                if factor == 0.0:
                    break
        if factor:
            total = total + factor * acc
    return np.asarray(total, dtype=complex) if batch_shape else complex(total)


def moment(coeffs, state, word):
    """Real part of :func:`multimode_moment` for self-adjoint combinations."""
    value = multimode_moment(coeffs, state, word)
    return value.real if isinstance(value, np.ndarray) else value.real


def mean_photon_closed_form(coeffs, state):
    """Mode-1 photon number from the f-block; other modes via :func:`swap_transform`."""
    f = coeffs.f
    n1, n2, n3 = state.means
    return ((f[0] ** 2 + f[1] ** 2) * n1 + (f[2] ** 2 + f[3] ** 2) * n2
            + (f[4] ** 2 + f[5] ** 2) * n3 + f[1] ** 2 + f[3] ** 2 + f[5] ** 2)


def mean_photon_number(coeffs, state, mode):
    """``<A_mode+ A_mode>`` from the engine, checked against the closed form."""
    if mode not in (1, 2, 3):
        raise InvalidInputError(f"mode must be 1, 2 or 3, got {mode!r}")
    value = moment(coeffs, state, number_word(mode))
    closed = mean_photon_closed_form(swap_transform(coeffs, mode), state)
    gap = np.max(np.abs(value - closed) / np.maximum(1.0, np.abs(closed)))
    if gap > CLOSED_FORM_TOL:
        raise ConvergenceError(
            f"engine and closed-form photon numbers disagree by {gap:.3e}", residual=float(gap)
        )
    return value


def quartic_moment_mode1_closed_form(coeffs, state):
    """``<A1+^2 A1^2>`` for Fock inputs written out in the f coefficients."""
    if state.kind != FOCK:
        raise InvalidInputError("the quartic closed form holds for Fock inputs only")
    f1, f2, f3, f4, f5, f6 = coeffs.f
    n1, n2, n3 = state.means
    pair12 = f1 * f2 * (2 * n1 + 1) + f3 * f4 * (2 * n2 + 1)
    return (
        f1 ** 4 * n1 * (n1 - 1) + f2 ** 4 * (n1 + 1) * (n1 + 2)
        + f3 ** 4 * n2 * (n2 - 1) + f4 ** 4 * (n2 + 1) * (n2 + 2)
        + f5 ** 4 * n3 * (n3 - 1) + f6 ** 4 * (n3 + 1) * (n3 + 2)
        + f5 ** 2 * f6 ** 2 * (2 * n3 + 1) ** 2 + pair12 ** 2
        + 4 * f1 ** 2 * n1 * (f3 ** 2 * n2 + f4 ** 2 * (n2 + 1))
        + 4 * f2 ** 2 * (f3 ** 2 * n2 * (n1 + 1) + f4 ** 2 * (n1 + 1) * (n2 + 1))
        + 2 * (2 * n3 + 1) * f5 * f6 * pair12
        + 4 * (f5 ** 2 * n3 + f6 ** 2 * (n3 + 1))
        * (f1 ** 2 * n1 + f2 ** 2 * (n1 + 1) + f3 ** 2 * n2 + f4 ** 2 * (n2 + 1))
    )
