"""Truncated Fock-space propagation used to validate the Heisenberg-picture engine.

The interaction Hamiltonian

    H_I = i l1 (a1 a2 - a1+ a2+) + i l2 (a1 a3+ - a1+ a3) + i l3 (a2 a3+ - a2+ a3)

gives ``dA/dt = i[H_I, A]``.  With ``[a_j, a_j+] = 1`` this reads

    dA1/dt = -l1 A2+ - l2 A3,   dA2/dt = -l1 A1+ - l3 A3,   dA3/dt = l2 A1 + l3 A2,

which is the linear system integrated in :mod:`triosc.dynamics`.  For
example ``i[i l1 (-a1+ a2+), a1] = l1 [a1+, a1] a2+ = -l1 a2+``.  The
generator ``-i H_I`` is real and antisymmetric on the number basis.

Schrodinger-picture moments ``<psi(t)| W |psi(t)>`` with ``psi(t) =
exp(-i H_I t) psi(0)`` equal the Heisenberg moments ``<W(t)>``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .dynamics import CouplingParams, general_coefficients
from .errors import InvalidInputError, TruncationError
from .moments import FOCK, InitialState, Letter, multimode_moment

MAX_CUTOFF = 128
DENSE_CUTOFF = 10
INPUT_TAIL_LIMIT = 1e-8
OUTPUT_TAIL_LIMIT = 1e-6
NORM_TOL = 1e-10
EQUIVALENCE_FLOOR = 1e-6
# quartic moments weight the edge by ~N^2, so the cross-check propagates
# until the tail is far below the tolerance floor
EQUIVALENCE_TAIL = 1e-10
MAX_AMPLIFIER_GAIN = 1.5


_RNG_LOCK = threading.Lock()


def _expm_action(matrix, vector):
    """``expm_multiply`` with its norm estimator made reproducible.

    scipy picks the Taylor degree and step count with ``onenormest``, which
    draws from numpy's global legacy RNG; different draws change the last
    bits of the result.  The global state is pinned for the call and
    restored afterwards.
    """
    with _RNG_LOCK:
        saved = np.random.get_state()
        np.random.seed(0)
        try:
            return expm_multiply(matrix, vector)
        finally:
            np.random.set_state(saved)


def _check_cutoff(N):
    if int(N) != N or N < 1:
        raise InvalidInputError(f"cutoff must be a positive integer, got {N!r}")
    if N > MAX_CUTOFF:
        raise InvalidInputError(f"cutoff {N} exceeds the supported maximum {MAX_CUTOFF}")
    return int(N)


@lru_cache(maxsize=16)
def _ladders(N):
    """Annihilation operators of the three modes on the ``(N+1)^3`` basis, ``n1`` slowest."""
    a = sp.diags(np.sqrt(np.arange(1, N + 1, dtype=float)), 1, format="csr")
    eye = sp.identity(N + 1, format="csr")
    return (
        sp.kron(sp.kron(a, eye), eye, format="csr"),
        sp.kron(sp.kron(eye, a), eye, format="csr"),
        sp.kron(sp.kron(eye, eye), a, format="csr"),
    )


@lru_cache(maxsize=16)
def _parity(N):
    n = np.arange(N + 1)
    return ((n[:, None, None] + n[None, :, None] + n[None, None, :]) % 2).reshape(-1)


@lru_cache(maxsize=16)
def _edge_mask(N):
    """Basis states with some ``n_j`` in ``{N-1, N}``."""
    n = np.arange(N + 1)
    edge = n >= N - 1
    return (edge[:, None, None] | edge[None, :, None] | edge[None, None, :]).reshape(-1)


def basis_index(N, occupations):
    n1, n2, n3 = occupations
    return (n1 * (N + 1) + n2) * (N + 1) + n3


@dataclass(frozen=True)
class TruncatedState:
    """Amplitudes over ``|n1, n2, n3>`` with ``0 <= n_j <= cutoff``.

    ``norm`` is the Euclidean norm of the amplitudes as computed; it is
    reported, never forced back to 1.
    """

    cutoff: int
    amplitudes: np.ndarray
    norm: float = field(init=False)

    def __post_init__(self):
        N = _check_cutoff(self.cutoff)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != (N + 1) ** 3:
            raise InvalidInputError(f"expected {(N + 1) ** 3} amplitudes for cutoff {N}, got {amps.size}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "norm", float(np.linalg.norm(amps)))

    @classmethod
    def fock(cls, N, occupations):
        occ = tuple(int(n) for n in occupations)
        if any(n < 0 or n > N for n in occ):
            raise InvalidInputError(f"occupations {occ} do not fit under cutoff {N}")
        amps = np.zeros((N + 1) ** 3, dtype=complex)
        amps[basis_index(N, occ)] = 1.0
        return cls(N, amps)

    @property
    def tail(self):
        """Population on states with any occupation in ``{N-1, N}``."""
        return float(np.sum(np.abs(self.amplitudes[_edge_mask(self.cutoff)]) ** 2))


@dataclass(frozen=True)
class Generator:
    """Sparse matrix of ``-i H_I`` on the truncated basis."""

    params: CouplingParams
    cutoff: int
    matrix: sp.csr_matrix

    @cached_property
    def _spectral(self):
        # -i H with H Hermitian: exp(G t) = V exp(-i w t) V+
        w, v = scipy.linalg.eigh(1j * self.matrix.toarray())
        return w, v

    @cached_property
    def _sectors(self):
        # every coupling changes n1 + n2 + n3 by 0 or 2, also after truncation
        parity = _parity(self.cutoff)
        out = {}
        for p in (0, 1):
            idx = np.flatnonzero(parity == p)
            out[p] = (idx, self.matrix[idx][:, idx].tocsr())
        return out


def build_generator(params, N):
    """``-i H_I`` for couplings ``params`` with per-mode cutoff ``N``."""
    if not isinstance(params, CouplingParams):
        raise InvalidInputError("params must be CouplingParams")
    N = _check_cutoff(N)
    a1, a2, a3 = _ladders(N)
    l1, l2, l3 = params.rates
    gen = (
        l1 * (a1 @ a2 - a1.T @ a2.T)
        + l2 * (a1 @ a3.T - a1.T @ a3)
        + l3 * (a2 @ a3.T - a2.T @ a3)
    )
    gen = sp.csr_matrix(gen, dtype=float)
    gen.eliminate_zeros()
    return Generator(params, N, gen)


def evolve(state, generator, t):
    """Propagate ``state`` by ``exp(t * generator)``.

    Dense eigendecomposition for cutoffs up to ``DENSE_CUTOFF``, otherwise
    scipy's ``expm_multiply``.  Raises TruncationError when the evolved
    state puts more than ``OUTPUT_TAIL_LIMIT`` on the edge of the basis.
    """
    if state.cutoff != generator.cutoff:
        raise InvalidInputError("state and generator cutoffs differ")
    if not math.isfinite(t):
        raise InvalidInputError("time must be finite")
    if state.tail >= INPUT_TAIL_LIMIT:
        raise InvalidInputError(f"input tail population {state.tail:.2e} is not below {INPUT_TAIL_LIMIT:.0e}")
    if t == 0:
        return state
    amps = state.amplitudes
    if generator.cutoff <= DENSE_CUTOFF:
        w, v = generator._spectral
        out = v @ (np.exp(-1j * w * t) * (v.conj().T @ amps))
    else:
        out = np.zeros_like(amps)
        for p, (idx, block) in generator._sectors.items():
            part = amps[idx]
            if not np.any(part):
                continue
            # the generator is real, so real and imaginary parts evolve separately
            re = _expm_action(block * t, part.real) if np.any(part.real) else 0.0
            im = _expm_action(block * t, part.imag) if np.any(part.imag) else 0.0
            out[idx] = re + 1j * im
    result = TruncatedState(state.cutoff, out)
    if result.tail > OUTPUT_TAIL_LIMIT:
        raise TruncationError(
            f"tail population {result.tail:.2e} above {OUTPUT_TAIL_LIMIT:.0e} at cutoff {state.cutoff}",
            tail=result.tail,
            suggested_cutoff=min(2 * state.cutoff, MAX_CUTOFF) if state.cutoff < MAX_CUTOFF else None,
        )
    return result


def oracle_moment(state, word):
    """``<psi| W |psi>`` for a word of initial-time ladder letters (left to right)."""
    ladders = _ladders(state.cutoff)
    vec = state.amplitudes
    for item in reversed(tuple(word)):
        letter = item if isinstance(item, Letter) else Letter(*item)
        if letter.mode not in (1, 2, 3):
            raise InvalidInputError(f"invalid mode index {letter.mode!r}")
        op = ladders[letter.mode - 1]
        vec = (op.T if letter.dagger else op) @ vec
    return complex(np.vdot(state.amplitudes, vec))


def initial_cutoff(state):
    return max(8, sum(state.occupations) + 6)


def propagate(params, state, t, cutoff=None, tail_target=OUTPUT_TAIL_LIMIT, growth=2.0):
    """Evolve a Fock product state, growing the cutoff by ``growth`` until the
    tail is below ``tail_target``.

    Returns the evolved :class:`TruncatedState`.  TruncationError is raised
    if even ``MAX_CUTOFF`` leaves more than ``OUTPUT_TAIL_LIMIT`` on the edge.
    """
    if not isinstance(state, InitialState) or state.kind != FOCK:
        raise InvalidInputError("the oracle propagates Fock product states only")
    N = initial_cutoff(state) if cutoff is None else _check_cutoff(cutoff)
    N = min(N, MAX_CUTOFF)
    while True:
        try:
            out = evolve(TruncatedState.fock(N, state.occupations), build_generator(params, N), t)
        except TruncationError as exc:
            if N >= MAX_CUTOFF:
                raise TruncationError(
                    f"cutoff {MAX_CUTOFF} is insufficient (tail {exc.tail:.2e})", tail=exc.tail, suggested_cutoff=None
                ) from exc
            N = min(int(math.ceil(growth * N)), MAX_CUTOFF)
            continue
        if out.tail <= tail_target or N >= MAX_CUTOFF:
            return out
        N = min(int(math.ceil(growth * N)), MAX_CUTOFF)


def statistics_words():
    """Every moment that enters the squeezing, g2 and Cauchy-Schwarz observables."""
    letters = [Letter(m, d) for m in (1, 2, 3) for d in (False, True)]
    words = [(x,) for x in letters]
    words += [(x, y) for x, y in product(letters, repeat=2)]
    for j in (1, 2, 3):
        cre, ann = Letter(j, True), Letter(j, False)
        words.append((cre, cre, ann, ann))
    for j, k in ((1, 2), (1, 3), (2, 3)):
        aj, ak, cj, ck = Letter(j, False), Letter(k, False), Letter(j, True), Letter(k, True)
        words.append((cj, aj, ck, ak))
        for first, second in product(((aj, ak), (cj, ck)), repeat=2):
            words.append(first + second)
    return words


@dataclass(frozen=True)
class EquivalenceRecord:
    word: tuple
    heisenberg: complex
    schrodinger: complex
    tail: float

    @property
    def difference(self):
        return abs(self.heisenberg - self.schrodinger)

    @property
    def tolerance(self):
        return max(EQUIVALENCE_FLOOR, 10.0 * self.tail)

    @property
    def ok(self):
        return self.difference <= self.tolerance


def picture_equivalence(params, state, t, words=None, cutoff=None):
    """Compare engine and oracle moments for one instance.

    ``cutoff`` is the starting cutoff; it grows until the tail is below
    ``EQUIVALENCE_TAIL`` or ``MAX_CUTOFF`` is reached.
    """
    words = statistics_words() if words is None else words
    evolved = propagate(params, state, t, cutoff=cutoff, tail_target=EQUIVALENCE_TAIL, growth=1.5)
    coeffs = general_coefficients(params, t)
    tail = evolved.tail
    return [
        EquivalenceRecord(tuple(w), multimode_moment(coeffs, state, w), oracle_moment(evolved, w), tail)
        for w in words
    ]


STANDARD_COUPLINGS = {
    "converter-only": CouplingParams(0.0, 0.3, 0.2),
    "amplifier-only": CouplingParams(0.2, 0.0, 0.0),
    "mixed-weak": CouplingParams(0.25, 0.3, 0.3),
    "mixed-strong": CouplingParams(0.6, 0.7, 0.7),
}
STANDARD_STATES = ((0, 0, 0), (1, 0, 0), (1, 1, 1))
STANDARD_TIMES = (0.5, 1.0, 2.0, 5.0)


def standard_instances():
    """The (label, params, state, t) instance matrix used for picture equivalence.

    Instances with amplifier gain ``lambda1 t`` above ``MAX_AMPLIFIER_GAIN``
    are left out: their photon numbers outgrow any desk-scale cutoff.
    """
    for label, params in STANDARD_COUPLINGS.items():
        for t in STANDARD_TIMES:
            if params.lambda1 * t > MAX_AMPLIFIER_GAIN:
                continue
            for occ in STANDARD_STATES:
                yield label, params, InitialState.fock(*occ), t
