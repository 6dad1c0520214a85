"""Weighted Alexiewicz norm and the shear transform ``A_alpha``.

For a sequence the norm is the largest absolute leak-weighted prefix sum,

    ||f||_{A,alpha} = max_n | sum_{k<=n} beta**(n-k) f_k |,   beta = exp(-alpha),

and for a piecewise-constant signal with impulses it is the supremum over
horizons ``T`` of the leaky running integral.  ``A_alpha`` maps a sequence
to its running weighted sums, so the Alexiewicz ball around ``f`` is ``f``
plus the preimage of a max-norm ball under ``A_alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .signal import ContinuousSignal, DiscreteSignal, EncoderParams, SpikeTrain

__all__ = [
    "TransformedSignal",
    "weighted_prefix_sums",
    "alexiewicz_norm_discrete",
    "alexiewicz_norm_continuous",
    "alexiewicz_norm",
    "transform_A",
    "inverse_A",
    "ball_contains",
    "relax",
]


def _check_beta(beta: float) -> None:
    if not (0.0 <= beta <= 1.0):
        raise ValueError(f"beta must lie in [0, 1], got {beta}")


@dataclass(frozen=True, eq=False)
class TransformedSignal:
    """Running weighted sums ``(A_alpha f)_k`` of a discrete signal."""

    values: np.ndarray
    beta: float

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


def weighted_prefix_sums(values, beta: float) -> np.ndarray:
    """``w_n = beta * w_{n-1} + values_n`` with ``w_0 = 0``."""
    return np.fromiter(
        accumulate(np.asarray(values, dtype=np.float64).tolist(), lambda acc, v: beta * acc + v),
        dtype=np.float64,
    )


def alexiewicz_norm_discrete(f: DiscreteSignal, beta: float) -> float:
    _check_beta(beta)
    samples = f.samples if isinstance(f, DiscreteSignal) else np.asarray(f, dtype=np.float64)
    if samples.size == 0:
        return 0.0
    return float(np.max(np.abs(weighted_prefix_sums(samples, beta))))


def relax(u0: float, c: float, alpha: float, dt: float) -> float:
    """Leaky integral after ``dt`` under constant input ``c``, starting from ``u0``."""
    if alpha == 0.0:
        return u0 + c * dt
    return u0 * math.exp(-alpha * dt) - c * math.expm1(-alpha * dt) / alpha


def alexiewicz_norm_continuous(f: ContinuousSignal, alpha: float) -> float:
    """Exact supremum of the leaky running integral over ``T`` in ``[0, horizon]``.

    On a constant piece the running integral relaxes exponentially toward
    ``c / alpha`` (or moves linearly when ``alpha == 0``), so it is monotone
    and only piece endpoints can carry the supremum.  At an impulse both the
    left limit and the post-jump value are candidates.
    """
    if not (alpha >= 0.0) or math.isinf(alpha):
        raise ValueError("alpha must be finite and nonnegative")
    u = 0.0
    best = 0.0
    for item in f.sweep():
        if item[0] == "impulse":
            best = max(best, abs(u))
            u += item[2]
        else:
            _, t0, t1, c = item
            u = relax(u, c, alpha, t1 - t0)
        best = max(best, abs(u))
    return best


def alexiewicz_norm(f, params_or_beta) -> float:
    """Dispatch on the signal type; accepts ``EncoderParams`` or a bare ``beta``."""
    beta = params_or_beta.beta if isinstance(params_or_beta, EncoderParams) else params_or_beta
    if isinstance(f, ContinuousSignal):
        if beta == 0:
            raise ValueError("the continuous norm needs a finite leak (beta > 0)")
        return alexiewicz_norm_continuous(f, -math.log(beta))
    return alexiewicz_norm_discrete(f, beta)


def transform_A(f: DiscreteSignal, beta: float) -> TransformedSignal:
    _check_beta(beta)
    samples = f.samples if isinstance(f, DiscreteSignal) else np.asarray(f, dtype=np.float64)
    return TransformedSignal(weighted_prefix_sums(samples, beta), beta)


def inverse_A(h: TransformedSignal, beta: float) -> DiscreteSignal:
    values = h.values if isinstance(h, TransformedSignal) else np.asarray(h, dtype=np.float64)
    out = values.copy()
    out[1:] -= beta * values[:-1]
    return DiscreteSignal(out)


def ball_contains(center, g, params: EncoderParams, strict: bool = True) -> bool:
    """Is ``g`` within Alexiewicz distance ``theta`` of ``center``?

    Spike trains are placed on the center's time support: integer times
    ``1..N`` for a discrete center, impulses on ``[0, T]`` for a continuous
    one.  ``strict`` selects the open ball.
    """
    if isinstance(center, DiscreteSignal):
        if isinstance(g, SpikeTrain):
            g = g.to_discrete(len(center))
        elif not isinstance(g, DiscreteSignal) or len(g) != len(center):
            raise ValueError("incompatible supports")
    elif isinstance(center, ContinuousSignal):
        if isinstance(g, SpikeTrain):
            g = g.to_continuous(center.horizon)
        elif not isinstance(g, ContinuousSignal) or g.horizon != center.horizon:
            raise ValueError("incompatible supports")
    else:
        raise TypeError(f"unsupported center type {type(center).__name__}")
    dist = alexiewicz_norm(center - g, params)
    return dist < params.theta if strict else dist <= params.theta
