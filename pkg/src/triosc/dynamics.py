"""Heisenberg-picture solution of the three-mode linear coupler.

The slowly varying operators obey a closed, real, linear system for the
vector ``(A1, A1+, A2, A2+, A3, A3+)``::

    dA1/dt = -l1 A2+ - l2 A3
    dA2/dt = -l1 A1+ - l3 A3
    dA3/dt =  l2 A1  + l3 A2

so ``A_j(t)`` is a fixed linear combination of the initial-time ladder
operators.  The combination coefficients are stored in the f/g/h layout::

    A1 = f1 a1 + f2 a1+ - f3 a2 - f4 a2+ - f5 a3 - f6 a3+
    A2 = g1 a2 + g2 a2+ - g3 a1 - g4 a1+ - g5 a3 - g6 a3+
    A3 = h1 a3 + h2 a3+ + h3 a2 + h4 a2+ + h5 a1 + h6 a1+

Internally everything is also available as *canonical rows*: the signed
coefficient of each ``A_j`` on the fixed basis ``(a1, a1+, a2, a2+, a3, a3+)``.

Every function here accepts a scalar time or a 1-D array of times; in the
latter case coefficient arrays carry the time axis last, shape ``(6, T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm

from .errors import ConvergenceError, InvalidInputError, UnsupportedRegimeError

# maximum relative ||exp(Mt/2)^2 - exp(Mt)||_inf accepted from the exponential
EXPM_RESIDUAL_TOL = 1e-12
# |kbar^2 t^2| below which c(t), s(t) are taken from their Taylor series
SERIES_WINDOW = 1e-8

# canonical basis slot of a_m / a_m+ (mode index m = 1, 2, 3)
_ANN = {1: 0, 2: 2, 3: 4}
_CRE = {1: 1, 2: 3, 3: 5}
_DAGGER_SWAP = [1, 0, 3, 2, 5, 4]

# (slot, sign) giving each f/g/h entry from its canonical row
_F_LAYOUT = ((0, 1), (1, 1), (2, -1), (3, -1), (4, -1), (5, -1))
_G_LAYOUT = ((2, 1), (3, 1), (0, -1), (1, -1), (4, -1), (5, -1))
_H_LAYOUT = ((4, 1), (5, 1), (2, 1), (3, 1), (0, 1), (1, 1))
_LAYOUTS = (_F_LAYOUT, _G_LAYOUT, _H_LAYOUT)


@dataclass(frozen=True)
class CouplingParams:
    """Coupling rates of the amplifier (1-2) and the two converters (1-3, 2-3).

    ``omegas`` is carried as metadata only; the dynamics are written in the
    slowly varying frame and never use it.
    """

    lambda1: float
    lambda2: float
    lambda3: float
    omegas: Optional[tuple] = None

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)):
                raise InvalidInputError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value) or value < 0:
                raise InvalidInputError(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.omegas is not None:
            omegas = tuple(float(w) for w in self.omegas)
            if len(omegas) != 3 or not all(math.isfinite(w) for w in omegas):
                raise InvalidInputError("omegas must be three finite reals")
            object.__setattr__(self, "omegas", omegas)

    @property
    def rates(self):
        return (self.lambda1, self.lambda2, self.lambda3)

    @property
    def is_special_case(self):
        return self.lambda2 == self.lambda3

    def swapped(self):
        """Parameters after exchanging modes 1 and 2 (which swaps l2 and l3)."""
        return CouplingParams(self.lambda1, self.lambda3, self.lambda2, self.omegas)


@dataclass(frozen=True)
class ModeCoefficients:
    t: object
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    kbar_sq: Optional[float] = None
    _rows: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        arrays = []
        for name in ("f", "g", "h"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape[:1] != (6,):
                raise InvalidInputError(f"{name} must have leading dimension 6, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"non-finite entries in {name}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            arrays.append(arr)
        if not (arrays[0].shape == arrays[1].shape == arrays[2].shape):
            raise InvalidInputError("f, g and h must share a shape")
        t = self.t
        if np.ndim(t):
            t = np.asarray(t, dtype=float)
            t.setflags(write=False)
        else:
            t = float(t)
        object.__setattr__(self, "t", t)
        rows = np.zeros((3,) + arrays[0].shape)
        for j, (arr, layout) in enumerate(zip(arrays, _LAYOUTS)):
            for k, (slot, sign) in enumerate(layout):
                rows[j, slot] = sign * arr[k]
        rows.setflags(write=False)
        object.__setattr__(self, "_rows", rows)

    @classmethod
    def from_rows(cls, t, rows, kbar_sq=None):
        """Build from canonical rows of shape ``(3, 6, ...)``."""
        rows = np.asarray(rows, dtype=float)
        blocks = []
        for j, layout in enumerate(_LAYOUTS):
            blocks.append(np.stack([sign * rows[j, slot] for slot, sign in layout]))
        return cls(t, blocks[0], blocks[1], blocks[2], kbar_sq)

    @property
    def rows(self):
        """Signed coefficients of A1, A2, A3 on ``(a1, a1+, a2, a2+, a3, a3+)``."""
        return self._rows

    @property
    def batched(self):
        return self.f.ndim > 1

    def propagator(self):
        """Full 6x6 map taking ``(a1, a1+, ...)`` to ``(A1, A1+, ...)`` at time t.

        Batched coefficients give shape ``(T, 6, 6)``.
        """
        rows = self._rows
        full = np.empty((6,) + rows.shape[1:])
        for j in range(3):
            full[2 * j] = rows[j]
            full[2 * j + 1] = rows[j][_DAGGER_SWAP]
        if full.ndim == 3:
            full = np.moveaxis(full, -1, 0)
        return full

    def at(self, index):
        """Scalar coefficients for one entry of a batched time grid."""
        if not self.batched:
            raise InvalidInputError("coefficients are not batched")
        return ModeCoefficients(self.t[index], self.f[:, index], self.g[:, index],
                                self.h[:, index], self.kbar_sq)


def generator_matrix(params):
    """The constant real 6x6 matrix M with d/dt (A1, A1+, A2, A2+, A3, A3+) = M (...)."""
    l1, l2, l3 = params.rates
    m = np.zeros((6, 6))
    # dA1 = -l1 A2+ - l2 A3, and its conjugate
    m[0, 3], m[0, 4] = -l1, -l2
    m[1, 2], m[1, 5] = -l1, -l2
    # dA2 = -l1 A1+ - l3 A3
    m[2, 1], m[2, 4] = -l1, -l3
    m[3, 0], m[3, 5] = -l1, -l3
    # dA3 = l2 A1 + l3 A2
    m[4, 0], m[4, 2] = l2, l3
    m[5, 1], m[5, 3] = l2, l3
    return m


def _check_time(t):
    arr = np.asarray(t, dtype=float)
    if arr.ndim > 1:
        raise InvalidInputError("t must be a scalar or a 1-D array")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("t must be finite")
    return arr


def general_coefficients(params, t):
    """Coefficients for arbitrary couplings from the exponential of the linear system.

    Raises ConvergenceError if ``exp(Mt/2)^2`` and ``exp(Mt)`` differ by more
    than ``EXPM_RESIDUAL_TOL`` relative to ``||exp(Mt)||``.
    """
    if not isinstance(params, CouplingParams):
        raise InvalidInputError("params must be CouplingParams")
    times = _check_time(t)
    m = generator_matrix(params)
    mt = times[..., None, None] * m
    full = expm(mt)
    half = expm(0.5 * mt)
    scale = np.maximum(1.0, np.abs(full).sum(axis=-1).max(axis=-1))
    residual = np.abs(half @ half - full).sum(axis=-1).max(axis=-1) / scale
    worst = float(np.max(residual))
    if worst > EXPM_RESIDUAL_TOL:
        raise ConvergenceError(
            f"matrix exponential residual {worst:.3e} exceeds {EXPM_RESIDUAL_TOL:.0e}",
            residual=worst,
        )
    if full.ndim == 3:
        full = np.moveaxis(full, 0, -1)  # (6, 6, T)
    rows = full[[0, 2, 4]]
    kbar_sq = _kbar_sq(params) if params.is_special_case else None
    return ModeCoefficients.from_rows(t if np.ndim(t) else float(t), rows, kbar_sq)


def _kbar_sq(params):
    lam = params.lambda2
    return 2.0 * lam * lam - params.lambda1 ** 2 / 4.0


def oscillator_branches(kbar_sq, t):
    """Return ``c = cos(kbar t)`` and ``s = sin(kbar t)/kbar`` for signed kbar^2.

    Negative ``kbar_sq`` continues to cosh / sinh; inside the series window
    the Taylor expansions are used so that kbar -> 0 gives c -> 1, s -> t.
    """
    t = np.asarray(t, dtype=float)
    x = kbar_sq * t * t
    series = np.abs(x) < SERIES_WINDOW
    c_series = 1.0 - x / 2.0 + x * x / 24.0
    s_series = t * (1.0 - x / 6.0 + x * x / 120.0)
    if kbar_sq > 0:
        k = math.sqrt(kbar_sq)
        c_main, s_main = np.cos(k * t), np.sin(k * t) / k
    elif kbar_sq < 0:
        kappa = math.sqrt(-kbar_sq)
        c_main, s_main = np.cosh(kappa * t), np.sinh(kappa * t) / kappa
    else:
        c_main, s_main = c_series, s_series
    c = np.where(series, c_series, c_main)
    s = np.where(series, s_series, s_main)
    if c.ndim == 0:
        return float(c), float(s)
    return c, s


def special_case_coefficients(params, t):
    """Closed-form coefficients valid when the two converter rates coincide.

    In that case ``g_j = f_j``, and with ``kbar^2 = 2 l^2 - l1^2/4`` every
    coefficient is built from cosh/sinh(l1 t/2), cosh/sinh(l1 t) and the
    oscillator pair returned by :func:`oscillator_branches`.
    """
    if not isinstance(params, CouplingParams):
        raise InvalidInputError("params must be CouplingParams")
    if params.lambda2 != params.lambda3:
        raise UnsupportedRegimeError(
            "closed forms need lambda2 == lambda3; use general_coefficients instead"
        )
    times = _check_time(t)
    l1, lam = params.lambda1, params.lambda2
    kbar_sq = _kbar_sq(params)
    c, s = oscillator_branches(kbar_sq, times)
    ch, sh = np.cosh(l1 * times / 2), np.sinh(l1 * times / 2)
    ch2, sh2 = np.cosh(l1 * times), np.sinh(l1 * times)
    q = l1 / 2.0

    even = ch * c + q * sh * s
    odd = sh * c + q * ch * s
    f = np.stack([
        0.5 * (even + ch2),
        -0.5 * (odd - sh2),
        -0.5 * (even - ch2),
        0.5 * (odd + sh2),
        lam * ch * s,
        -lam * sh * s,
    ])
    h = np.stack([
        ch * c - q * sh * s,
        -sh * c + q * ch * s,
        lam * ch * s,
        -lam * sh * s,
        lam * ch * s,
        -lam * sh * s,
    ])
    t_out = t if np.ndim(t) else float(t)
    return ModeCoefficients(t_out, f, f.copy(), h, kbar_sq)


class IdentityResidual(NamedTuple):
    name: str
    residual: object
    scale: object

    @property
    def relative(self):
        return np.abs(self.residual) / self.scale


def _f_format(row):
    return np.stack([row[0], row[1], -row[2], -row[3], -row[4], -row[5]])


def _g_format(row):
    return np.stack([row[2], row[3], -row[0], -row[1], -row[4], -row[5]])


def _norm_relation(F):
    terms = [F[0] ** 2, -F[1] ** 2, F[2] ** 2, -F[3] ** 2, F[4] ** 2, -F[5] ** 2]
    return sum(terms) - 1.0, sum(np.abs(x) for x in terms)


def _cross_relations(F, G):
    t2 = [F[0] * G[3], -F[1] * G[2], F[2] * G[1], -F[3] * G[0], -F[4] * G[5], F[5] * G[4]]
    t3 = [F[0] * G[2], -F[1] * G[3], F[2] * G[0], -F[3] * G[1], -F[4] * G[4], F[5] * G[5]]
    return (sum(t2), sum(np.abs(x) for x in t2)), (sum(t3), sum(np.abs(x) for x in t3))


def verify_identities(coeffs):
    """Residuals of the bosonic commutation identities among the coefficients.

    The three base relations (normalisation of A1, ``[A1, A2] = 0`` and
    ``[A1, A2+] = 0`` written in f/g form) are evaluated for every mode and
    every pair by moving each row into the f- or g-layout, giving nine
    residuals.  ``scale`` is ``max(1, sum of |terms|)``: the size of the
    cancelling terms, which sets the floating-point floor of the residual.
    """
    rows = coeffs.rows
    out = []
    for j in range(3):
        res, scale = _norm_relation(_f_format(rows[j]))
        out.append(IdentityResidual(f"[A{j + 1},A{j + 1}+]-1", res, np.maximum(1.0, scale)))
    for i, j in ((0, 1), (0, 2), (1, 2)):
        (r2, s2), (r3, s3) = _cross_relations(_f_format(rows[i]), _g_format(rows[j]))
        out.append(IdentityResidual(f"[A{i + 1},A{j + 1}]", r2, np.maximum(1.0, s2)))
        out.append(IdentityResidual(f"[A{i + 1},A{j + 1}+]", r3, np.maximum(1.0, s3)))
    return out


def max_identity_residual(coeffs):
    """Largest scaled identity residual over all relations (and times)."""
    return float(max(np.max(r.relative) for r in verify_identities(coeffs)))


def swap_transform(coeffs, target):
    """Relabel the coefficient blocks so mode-1 formulas describe ``target``.

    For target 2 the new f-block is ``(-g3, -g4, -g1, -g2, g5, g6)`` and for
    target 3 it is ``(h5, h6, -h3, -h4, -h1, -h2)``; the displaced block moves
    into the vacated slot, so each transform is an involution.  The initial
    occupations keep their meaning (basis modes are not relabelled).
    """
    if target not in (1, 2, 3):
        raise InvalidInputError(f"target mode must be 1, 2 or 3, got {target!r}")
    if target == 1:
        return coeffs
    order = [1, 0, 2] if target == 2 else [2, 1, 0]
    return ModeCoefficients.from_rows(coeffs.t, coeffs.rows[order], coeffs.kbar_sq)


def compose(first, second):
    """6x6 propagator of evolving by ``first`` and then by ``second``.

    Both are generated by the same constant matrix, so the factors commute.
    """
    return first.propagator() @ second.propagator()


def slot_of(mode, dagger):
    """Canonical basis index of ``a_mode`` (or its adjoint)."""
    return (_CRE if dagger else _ANN)[mode]
