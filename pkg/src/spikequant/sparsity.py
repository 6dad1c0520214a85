"""Sparsity bounds for LIF.

The l1 norm of ``LIF(f)`` is sandwiched between the l1 distance from the
origin to the Alexiewicz ball around ``f`` and ``||f||_1``.  The lower
bound is a polyhedral l1 problem,

    min_{|c_k| <= theta}  sum_k |f_k - beta * c_{k-1} + c_k|,

which a greedy forward recursion solves exactly: each ``c_k`` cancels as
much of the carried value ``f_k - beta * c_{k-1}`` as the threshold allows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .encoder import lif_discrete
from .signal import DiscreteSignal, EncoderParams, l1_norm

__all__ = ["SparsityReport", "closest_l1_point", "closest_l1_coefficients", "sparsity_bounds"]


def _greedy(samples, beta: float, theta: float, c0: float = 0.0):
    c = np.empty(len(samples))
    p = np.empty(len(samples))
    prev = c0
    for k, fk in enumerate(np.asarray(samples, dtype=np.float64).tolist()):
        a = fk - beta * prev
        prev = -math.copysign(min(abs(a), theta), a)
        c[k] = prev
        p[k] = a + prev
    return c, p


def closest_l1_coefficients(samples, beta: float, theta: float, c0: float = 0.0) -> np.ndarray:
    """Shear coefficients ``c*`` of the closest l1 point.

    ``c0`` seeds the recursion with a carried coefficient, which lets the
    search module bound the cost of a suffix given the state reached so far.
    """
    return _greedy(samples, beta, theta, c0)[0]


def closest_l1_point(f: DiscreteSignal, params: EncoderParams) -> tuple[DiscreteSignal, float]:
    """Point of the closed ball ``{g : ||f - g||_{A,alpha} <= theta}`` nearest 0 in l1.

    Unique for ``beta < 1``; at ``beta == 1`` this is one of possibly many
    minimizers.
    """
    p, value, _ = _closest(f, params)
    return p, value


def _closest(f: DiscreteSignal, params: EncoderParams):
    c, p = _greedy(f.samples, params.beta, params.theta)
    p = DiscreteSignal(p)
    return p, l1_norm(p), c


@dataclass(frozen=True)
class SparsityReport:
    """Where ``||LIF(f)||_1`` sits between its lower and upper bound.

    ``lam`` is ``(lif_l1 - lower) / (upper - lower)``, or ``None`` when the
    bounds coincide.  ``strictly_inside`` tells whether the closest point lies
    in the open ball (no coefficient saturated at the threshold); the bound is
    the same either way.
    """

    lower: float
    closest_point: DiscreteSignal
    lif_l1: float
    upper: float
    lam: float | None
    strictly_inside: bool

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "closest_point": self.closest_point.samples.tolist(),
            "lif_l1": self.lif_l1,
            "upper": self.upper,
            "lambda": self.lam,
            "strictly_inside": self.strictly_inside,
        }


def sparsity_bounds(f: DiscreteSignal, params: EncoderParams) -> SparsityReport:
    p, lower, c = _closest(f, params)
    lif_l1 = l1_norm(lif_discrete(f, params))
    upper = l1_norm(f)
    lam = (lif_l1 - lower) / (upper - lower) if upper > lower else None
    return SparsityReport(
        lower=lower,
        closest_point=p,
        lif_l1=lif_l1,
        upper=upper,
        lam=lam,
        strictly_inside=bool(np.all(np.abs(c) < params.theta)),
    )
