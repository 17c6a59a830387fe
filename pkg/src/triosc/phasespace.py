"""Characteristic functions, Wigner functions and photon-number distributions.

Conventions: ``alpha = a + i b`` and ``zeta = x + i y``.  The evolved
displacement ``sum_j (zeta_j A_j+ - zeta_j* A_j)`` equals
``sum_m (eta_m a_m+ - eta_m* a_m)`` on the initial-time operators, so the
characteristic function of a product Fock state is a product of
``exp(-|eta_m|^2/2) L_{n_m}(|eta_m|^2)``.  The same linear map applied to
``alpha`` gives the arguments of the joint Wigner function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ModeCoefficients
from .errors import (
    ConvergenceError,
    InvalidInputError,
    NMaxTooSmallError,
    UnsupportedRegimeError,
)
from .moments import FOCK, InitialState
from .quadrature import DEFAULT_NODES, envelope_radius, gauss_legendre

WIGNER_TOL = 1e-6
REFINE_NODES = 32
PROBABILITY_SLACK = 1e-6
TAIL_LIMIT = 1e-3
MAX_N = 512
MAX_PND = 64
# A_+- below this are treated as degenerate by the closed single-mode form
DEGENERACY_FLOOR = 1e-8


# -- Laguerre polynomials ---------------------------------------------------

def scaled_laguerre(n, order, w, r):
    """``r^n L_n^order(w / r)`` by the three-term recurrence.

    Multiplying the standard recurrence through by ``r^(k+1)`` removes the
    division, so ``r -> 0`` is harmless::

        (k+1) P_{k+1} = ((2k+1+order) r - w) P_k - (k+order) r^2 P_{k-1}
    """
    if n < 0 or n > MAX_N or int(n) != n:
        raise InvalidInputError(f"Laguerre degree must be an integer in [0, {MAX_N}], got {n!r}")
    w = np.asarray(w, dtype=float)
    r = np.asarray(r, dtype=float)
    prev = np.ones(np.broadcast(w, r).shape)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = (1.0 + order) * r - w
    for k in range(1, int(n)):
        prev, cur = cur, (((2 * k + 1 + order) * r - w) * cur - (k + order) * r * r * prev) / (k + 1)
    cur = np.asarray(cur)
    return cur if cur.ndim else float(cur)


def laguerre(n, order, x):
    """Generalised Laguerre polynomial ``L_n^order(x)``."""
    return scaled_laguerre(n, order, x, 1.0)


def laguerre_sequence(n_max, order, x):
    """All of ``L_0^order(x) .. L_n_max^order(x)`` stacked on a new leading axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 + order - x
    for k in range(1, n_max):
        out[k + 1] = ((2 * k + 1 + order - x) * out[k] - (k + order) * out[k - 1]) / (k + 1)
    return out


def fock_wigner(n, alpha):
    """Wigner function of the number state ``|n>``."""
    r2 = np.abs(np.asarray(alpha)) ** 2
    return 2.0 * (-1) ** n / math.pi * np.exp(-2 * r2) * laguerre(n, 0.0, 4 * r2)


# -- characteristic function and joint Wigner --------------------------------

def _scalar_coeffs(coeffs):
    if not isinstance(coeffs, ModeCoefficients):
        raise InvalidInputError("coeffs must be ModeCoefficients")
    if coeffs.batched:
        raise InvalidInputError("phase-space functions take coefficients at a single time")
    return coeffs.rows


def _as_point(values):
    pts = [np.asarray(v, dtype=complex) for v in values]
    if len(pts) != 3:
        raise InvalidInputError("a phase point needs one amplitude per mode (use 0 for absent modes)")
    if not all(np.all(np.isfinite(p)) for p in pts):
        raise InvalidInputError("phase point amplitudes must be finite")
    return np.broadcast_arrays(*pts)


def transformed_arguments(coeffs, point):
    """Map ``(z_1, z_2, z_3)`` to ``(eta_1, eta_2, eta_3)`` with
    ``eta_m = sum_j (z_j R[j, a_m] - z_j* R[j, a_m+])``."""
    rows = _scalar_coeffs(coeffs)
    z = _as_point(point)
    out = []
    for m in range(3):
        eta = 0
        for j in range(3):
            eta = eta + z[j] * rows[j, 2 * m] - np.conj(z[j]) * rows[j, 2 * m + 1]
        out.append(eta)
    return out


def _check_state(state, fock_only=False):
    if not isinstance(state, InitialState):
        raise InvalidInputError("state must be an InitialState")
    if fock_only and state.kind != FOCK:
        raise InvalidInputError("this phase-space formula needs a Fock initial state")


def characteristic_function(coeffs, state, zetas, s=0):
    """s-ordered joint characteristic function (s = 1 normal, 0 symmetric, -1 antinormal)."""
    _check_state(state)
    if s not in (1, 0, -1):
        raise InvalidInputError(f"ordering parameter must be 1, 0 or -1, got {s!r}")
    etas = transformed_arguments(coeffs, zetas)
    value = 1.0
    for eta, occ in zip(etas, state.occupations):
        e2 = np.abs(eta) ** 2
        if state.kind == FOCK:
            value = value * np.exp(-e2 / 2) * laguerre(occ, 0.0, e2)
        else:
            value = value * np.exp(-(occ + 0.5) * e2)
    if s:
        value = value * np.exp(0.5 * s * sum(np.abs(z) ** 2 for z in _as_point(zetas)))
    return np.asarray(value, dtype=complex) if np.ndim(value) else complex(value)


def joint_wigner(coeffs, state, point):
    """Joint three-mode Wigner function at ``point = (alpha_1, alpha_2, alpha_3)``.

    The evolution is a linear canonical map, so the output Wigner function
    is the input one evaluated at the transformed amplitudes.
    """
    _check_state(state)
    eps = transformed_arguments(coeffs, point)
    value = 1.0
    for e, occ in zip(eps, state.occupations):
        e2 = np.abs(e) ** 2
        if state.kind == FOCK:
            value = value * 2.0 * (-1) ** occ / math.pi * np.exp(-2 * e2) * laguerre(occ, 0.0, 4 * e2)
        else:
            width = 2 * occ + 1
            value = value * 2.0 / (math.pi * width) * np.exp(-2 * e2 / width)
    return value


# -- single-mode Wigner function ------------------------------------------

@dataclass(frozen=True)
class WignerAux:
    """Quadratic-form data of a single-mode marginal with one excited input.

    ``A_pm`` sum the squared combinations ``(u_m +- v_m)^2`` of the selected
    output row over the three inputs; ``B_pm`` flip the sign of the two
    non-excited inputs.  ``z1``/``z2`` are the Laguerre arguments, ``h_pm``
    the exponent pieces.
    """

    A_plus: float
    A_minus: float
    B_plus: float
    B_minus: float
    h_plus: object
    h_minus: object
    z1: object
    z2: object


def _row_pairs(coeffs, mode):
    rows = _scalar_coeffs(coeffs)
    row = rows[mode - 1]
    return [(row[2 * m], row[2 * m + 1]) for m in range(3)]


def wigner_aux(coeffs, mode, alpha):
    """Auxiliary quantities of the closed single-mode form for output ``mode``,
    whose own input is the excited one."""
    if mode not in (1, 2, 3):
        raise InvalidInputError(f"mode must be 1, 2 or 3, got {mode!r}")
    pairs = _row_pairs(coeffs, mode)
    own = pairs[mode - 1]
    others = [p for i, p in enumerate(pairs) if i != mode - 1]
    a_plus = sum((u + v) ** 2 for u, v in pairs)
    a_minus = sum((u - v) ** 2 for u, v in pairs)
    b_plus = (own[0] + own[1]) ** 2 - sum((u + v) ** 2 for u, v in others)
    b_minus = (own[0] - own[1]) ** 2 - sum((u - v) ** 2 for u, v in others)
    alpha = np.asarray(alpha, dtype=complex)
    a, b = alpha.real, alpha.imag
    # h_+ = C_+ + D_+ and h_- = C_- + D_- reduce to these quadratic forms
    h_plus = -a * a * a_minus - b * b * a_plus
    h_minus = -a * a * b_minus - b * b * b_plus
    with np.errstate(divide="ignore", invalid="ignore"):
        z1 = 2 * b * b * (a_minus + b_minus) / (a_minus * b_minus)
        z2 = 2 * a * a * (a_plus + b_plus) / (a_plus * b_plus)
    return WignerAux(a_plus, a_minus, b_plus, b_minus, h_plus, h_minus, z1, z2)


def single_mode_wigner_closed(coeffs, n, mode, alpha):
    """Closed-form Wigner function of ``mode`` when that mode starts in ``|n>``
    and the other two in vacuum.

    ``W = 2(-1)^n / (pi sqrt(A_- A_+)) exp(2 h_+ / (A_- A_+))
    sum_l (B_-/A_-)^(n-l) (B_+/A_+)^l L_{n-l}^{-1/2}(z1) L_l^{-1/2}(z2)``.
    Each ratio-power times Laguerre factor is evaluated with
    :func:`scaled_laguerre`, which stays finite when ``B_pm -> 0``.
    """
    if int(n) != n or n < 0:
        raise InvalidInputError(f"occupation must be a non-negative integer, got {n!r}")
    n = int(n)
    aux = wigner_aux(coeffs, mode, alpha)
    ap, am, bp, bm = aux.A_plus, aux.A_minus, aux.B_plus, aux.B_minus
    if ap < DEGENERACY_FLOOR or am < DEGENERACY_FLOOR:
        raise UnsupportedRegimeError("degenerate quadratic form in the closed single-mode Wigner function")
    alpha = np.asarray(alpha, dtype=complex)
    a, b = alpha.real, alpha.imag
    # z1 * (B_-/A_-) and z2 * (B_+/A_+), finite for any B
    w_minus = 2 * b * b * (am + bm) / (am * am)
    w_plus = 2 * a * a * (ap + bp) / (ap * ap)
    total = 0.0
    for l in range(n + 1):
        total = total + (scaled_laguerre(n - l, -0.5, w_minus, bm / am)
                         * scaled_laguerre(l, -0.5, w_plus, bp / ap))
    pref = 2.0 * (-1) ** n / (math.pi * math.sqrt(am * ap))
    return pref * np.exp(2 * aux.h_plus / (am * ap)) * total


def _marginal_quadratic(coeffs, state, mode):
    """Per-input ``(p_m, q_m)`` with ``|eta_m|^2 = p_m x^2 + q_m y^2``."""
    pairs = _row_pairs(coeffs, mode)
    return [((u - v) ** 2, (u + v) ** 2) for u, v in pairs]


def _marginal_char(quad, state, s, x, y):
    """Single-mode characteristic function on the tensor grid ``x`` (rows) by ``y`` (cols)."""
    x2 = (x * x)[:, None]
    y2 = (y * y)[None, :]
    value = np.exp(0.5 * s * (x2 + y2))
    for (p, q), occ in zip(quad, state.occupations):
        e2 = p * x2 + q * y2
        if state.kind == FOCK:
            value = value * np.exp(-e2 / 2) * laguerre(occ, 0.0, e2)
        else:
            value = value * np.exp(-(occ + 0.5) * e2)
    return value


def _char_widths(quad, state, s):
    weights = [0.5] * 3 if state.kind == FOCK else [n + 0.5 for n in state.occupations]
    prec_x = sum(c * p for c, (p, _) in zip(weights, quad)) - 0.5 * s
    prec_y = sum(c * q for c, (_, q) in zip(weights, quad)) - 0.5 * s
    degree = sum(state.occupations) if state.kind == FOCK else 0
    growth = max(max(p, q) for p, q in quad)
    return prec_x, prec_y, degree, growth


def _zeta_grid(quad, state, s, alpha_extent, nodes):
    prec_x, prec_y, degree, growth = _char_widths(quad, state, s)
    if prec_x <= 0 or prec_y <= 0:
        raise UnsupportedRegimeError("characteristic function does not decay; quasiprobability is singular")
    rx = envelope_radius(prec_x, degree, growth)
    ry = envelope_radius(prec_y, degree, growth)
    # resolve cos(2 alpha x) over the box with several nodes per period
    needed = int(math.ceil(8.0 * alpha_extent * max(rx, ry) / math.pi)) + REFINE_NODES
    n = max(nodes, needed)
    x, wx = gauss_legendre(n, rx)
    y, wy = gauss_legendre(n, ry)
    weighted = wx[:, None] * _marginal_char(quad, state, s, x, y) * wy[None, :]
    return x, y, weighted


def _wigner_tensor(quad, state, s, a_vals, b_vals, nodes):
    """Quasiprobability on the tensor product of ``a_vals`` (Re alpha) and
    ``b_vals`` (Im alpha); returns an array indexed ``[b, a]``."""
    extent = max(np.max(np.abs(a_vals)), np.max(np.abs(b_vals)))
    x, y, weighted = _zeta_grid(quad, state, s, extent, nodes)
    cos_b = np.cos(2.0 * np.outer(b_vals, x))
    cos_a = np.cos(2.0 * np.outer(y, a_vals))
    return cos_b @ weighted @ cos_a / math.pi ** 2


def _wigner_points(quad, state, s, alpha, nodes):
    alpha = np.asarray(alpha, dtype=complex)
    flat = alpha.reshape(-1)
    extent = float(np.max(np.abs(flat.real).max(initial=0.0) + np.abs(flat.imag).max(initial=0.0)))
    x, y, weighted = _zeta_grid(quad, state, s, extent, nodes)
    cos_b = np.cos(2.0 * np.outer(flat.imag, x))
    cos_a = np.cos(2.0 * np.outer(flat.real, y))
    values = np.einsum("pi,ij,pj->p", cos_b, weighted, cos_a) / math.pi ** 2
    return values.reshape(alpha.shape) if alpha.ndim else float(values[0])


def single_mode_quasiprobability(coeffs, state, mode, alpha, s=0, nodes=DEFAULT_NODES, check=True):
    """s-ordered single-mode quasiprobability by 2-D quadrature over the zeta plane.

    ``s = 0`` is the Wigner function, ``s = -1`` the Husimi function.  The
    normally ordered (``s = 1``) function is singular for number states and
    is not evaluated.  With ``check`` the rule is repeated with
    ``REFINE_NODES`` more nodes and a disagreement above ``WIGNER_TOL`` is
    reported as a ConvergenceError.
    """
    _check_state(state)
    _scalar_coeffs(coeffs)
    if mode not in (1, 2, 3):
        raise InvalidInputError(f"mode must be 1, 2 or 3, got {mode!r}")
    if s == 1:
        raise UnsupportedRegimeError("the P function of a number state is not a regular function")
    if s not in (0, -1):
        raise InvalidInputError(f"ordering parameter must be 0 or -1, got {s!r}")
    quad = _marginal_quadratic(coeffs, state, mode)
    values = _wigner_points(quad, state, s, alpha, nodes)
    if check:
        finer = _wigner_points(quad, state, s, alpha, nodes + REFINE_NODES)
        err = float(np.max(np.abs(np.asarray(finer) - np.asarray(values))))
        if err > WIGNER_TOL:
            raise ConvergenceError(f"quadrature error estimate {err:.2e} above {WIGNER_TOL:.0e}", residual=err)
    return values


def single_mode_wigner_numeric(coeffs, state, mode, alpha, nodes=DEFAULT_NODES, check=True):
    """Single-mode Wigner function of any Fock or thermal input by quadrature."""
    return single_mode_quasiprobability(coeffs, state, mode, alpha, 0, nodes, check)


def husimi_q(coeffs, state, mode, alpha, nodes=DEFAULT_NODES, check=True):
    return single_mode_quasiprobability(coeffs, state, mode, alpha, -1, nodes, check)


def closed_form_applies(state, mode):
    """True when ``mode`` is the only excited input of a Fock state."""
    if state.kind != FOCK:
        return False
    return all(n == 0 for i, n in enumerate(state.occupations) if i != mode - 1)


def single_mode_wigner(coeffs, state, mode, alpha):
    """Single-mode Wigner function and the method used (``"closed"`` or ``"quadrature"``).

    The closed form is used when it applies and its quadratic form is
    non-degenerate; everything else goes through quadrature.
    """
    if closed_form_applies(state, mode):
        try:
            return single_mode_wigner_closed(coeffs, state.occupations[mode - 1], mode, alpha), "closed"
        except UnsupportedRegimeError:
            pass
    return single_mode_wigner_numeric(coeffs, state, mode, alpha), "quadrature"


# -- photon-number distribution ------------------------------------------

@dataclass(frozen=True)
class PhotonNumberDistribution:
    probabilities: np.ndarray
    tail: float
    error_estimate: float


def _kernel_radius(n_max, floor=1e-14):
    """Radius beyond which every ``exp(-2|a|^2) L_n(4|a|^2)``, n <= n_max, is below ``floor``."""
    u = 4.0 * n_max + 2.0
    log_floor = math.log(floor)
    while -u / 2 + n_max * math.log(u) - math.lgamma(n_max + 1) > log_floor:
        u *= 1.05
    return math.sqrt(u / 4.0)


def _pnd_raw(quad, state, n_max, nodes, refine=1.0):
    prec_x, prec_y, degree, growth = _char_widths(quad, state, 0)
    # the Wigner function decays like exp(-b^2/prec_x - a^2/prec_y)
    cut = _kernel_radius(n_max)
    ra = min(envelope_radius(1.0 / prec_y, degree, growth), cut)
    rb = min(envelope_radius(1.0 / prec_x, degree, growth), cut)
    count = max(nodes, int(math.ceil(3.0 * refine * max(ra, rb) * math.sqrt(4 * n_max + 2))))
    a, wa = gauss_legendre(count, ra)
    b, wb = gauss_legendre(count, rb)
    weighted = wb[:, None] * _wigner_tensor(quad, state, 0, a, b, nodes) * wa[None, :]
    u = 4.0 * ((b * b)[:, None] + (a * a)[None, :])
    gauss = np.exp(-u / 2)
    out = np.empty(n_max + 1)
    prev, cur = np.ones_like(u), 1.0 - u
    out[0] = 2.0 * np.sum(gauss * prev * weighted)
    for n in range(1, n_max + 1):
        out[n] = 2.0 * (-1) ** n * np.sum(gauss * cur * weighted)
        prev, cur = cur, ((2 * n + 1 - u) * cur - n * prev) / (n + 1)
    return out


def photon_number_distribution(coeffs, state, mode, n_max, nodes=None):
    """``P(n)`` for ``n = 0..n_max`` from the overlap of the single-mode Wigner
    function with the number-state Wigner functions.

    Raises NMaxTooSmallError when more than ``TAIL_LIMIT`` of the probability
    lies above ``n_max``.
    """
    _check_state(state)
    _scalar_coeffs(coeffs)
    if mode not in (1, 2, 3):
        raise InvalidInputError(f"mode must be 1, 2 or 3, got {mode!r}")
    if int(n_max) != n_max or not 0 <= n_max <= MAX_PND:
        raise InvalidInputError(f"n_max must be an integer in [0, {MAX_PND}], got {n_max!r}")
    n_max = int(n_max)
    quad = _marginal_quadratic(coeffs, state, mode)
    if nodes is None:
        nodes = DEFAULT_NODES
    raw = _pnd_raw(quad, state, n_max, nodes)
    finer = _pnd_raw(quad, state, n_max, nodes + REFINE_NODES, refine=1.25)
    err = float(np.max(np.abs(finer - raw)))
    if err > PROBABILITY_SLACK or np.any(raw < -PROBABILITY_SLACK) or np.any(raw > 1 + PROBABILITY_SLACK):
        raise ConvergenceError(
            f"photon-number quadrature unreliable (error estimate {err:.2e}, range "
            f"[{raw.min():.2e}, {raw.max():.2e}])",
            residual=err,
        )
    probs = np.clip(raw, 0.0, 1.0)
    tail = float(1.0 - probs.sum())
    if tail > TAIL_LIMIT:
        raise NMaxTooSmallError(f"probability {tail:.2e} lies above n_max={n_max}", tail=tail)
    return PhotonNumberDistribution(probs, tail, err)
