"""Tensor Gauss-Legendre rules on symmetric boxes."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

DEFAULT_NODES = 96
ENVELOPE_FLOOR = 1e-12
MIN_SIGMAS = 6.0


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, half_width):
    """Nodes and weights of the n-point rule on ``[-half_width, half_width]``."""
    x, w = _leggauss(int(n))
    return x * half_width, w * half_width


def envelope_radius(precision, degree=0, growth=1.0, floor=ENVELOPE_FLOOR):
    """Half-width beyond which ``exp(-precision r^2) (1 + growth r^2)^degree < floor``.

    Never less than ``MIN_SIGMAS`` standard deviations of the Gaussian.
    """
    if precision <= 0:
        raise ValueError("Gaussian precision must be positive")
    sigma = 1.0 / math.sqrt(2.0 * precision)
    radius = MIN_SIGMAS * sigma
    log_floor = math.log(floor)
    while -precision * radius ** 2 + degree * math.log1p(growth * radius ** 2) > log_floor:
        radius *= 1.02
    return radius
