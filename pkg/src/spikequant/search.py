"""Exhaustive search over admissible spike trains.

A causal train stays in the open Alexiewicz ball around ``f`` iff at every
step the emitted multiple ``s_k`` satisfies ``|x_k - s_k| < theta``, where
``x_k = f_k + beta * (x_{k-1} - s_{k-1})`` is the carried potential.  That
leaves at most two choices per step: the truncation ``q(x_k)`` (what LIF
emits) and one grid step further out, ``q(x_k) + sgn(x_k) * theta``.  When
``x_k`` is itself a multiple of ``theta`` only the first survives.

Walking this binary tree enumerates every admissible train; LIF is its
leftmost leaf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .alexiewicz import alexiewicz_norm
from .encoder import lif_discrete, quantize, quantize_trunc
from .signal import INT_TOL, ContinuousSignal, DiscreteSignal, EncoderParams, SpikeTrain, l1_norm
from .sparsity import _greedy

__all__ = [
    "SearchError",
    "CapExceeded",
    "InfeasibleSearch",
    "admissible_options",
    "admissible_tree",
    "enumerate_admissible",
    "count_admissible",
    "min_l1_admissible",
    "Admissibility",
    "is_admissible",
    "GapDistribution",
    "sparsity_gap_distribution",
]

DEFAULT_CAP = 1 << 20
MAX_ORACLE_N = 24


class SearchError(Exception):
    """Base class for searches that cannot be carried out as asked."""


class CapExceeded(SearchError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"enumeration needs at least {count} trains, cap is {cap}")
        self.count = count
        self.cap = cap


class InfeasibleSearch(SearchError):
    pass


def _is_multiple(x, theta: float):
    ratio = np.asarray(x) / theta
    return np.abs(ratio - np.round(ratio)) <= INT_TOL


def admissible_options(x: float, theta: float) -> list[float]:
    """Multiples of ``theta`` that keep ``|x - s| < theta``."""
    q = quantize_trunc(x, theta)
    if _is_multiple(x, theta):
        return [q]
    n = round(q / theta)
    return [q, (n + math.copysign(1, x)) * theta]


def admissible_tree(f: DiscreteSignal, params: EncoderParams, cap: int = DEFAULT_CAP):
    """All admissible trains as rows of integer multiples, in depth-first order.

    Returns ``(multiples, residuals)``: an ``(M, N)`` integer array whose rows
    are trains in units of ``theta`` (truncation branch before the outer one)
    and the final carried residual of each.  Raises :class:`CapExceeded` as soon
    as the number of partial trains passes ``cap``.
    """
    theta, beta = params.theta, params.beta
    samples = f.samples
    mult = np.zeros((1, 0), dtype=np.int64)
    resid = np.zeros(1)
    for fk in samples:
        x = fk + beta * resid
        q = quantize(x, theta)
        n1 = np.round(q / theta).astype(np.int64)
        branching = ~_is_multiple(x, theta)
        children = 1 + branching.astype(np.int64)
        total = int(children.sum())
        if total > cap:
            raise CapExceeded(total, cap)
        parent = np.repeat(np.arange(x.size), children)
        outer = np.zeros(total, dtype=bool)
        outer[np.cumsum(children)[branching] - 1] = True
        step = np.where(outer, np.sign(x[parent]).astype(np.int64), 0)
        m = n1[parent] + step
        s = np.where(outer, m * theta, q[parent])
        resid = x[parent] - s
        mult = np.column_stack([mult[parent], m])
    return mult, resid


def _train(row, theta: float) -> SpikeTrain:
    return SpikeTrain.from_dense(row * theta, theta)


def enumerate_admissible(
    f: DiscreteSignal, params: EncoderParams, cap: int = DEFAULT_CAP
) -> Iterator[SpikeTrain]:
    """Yield every admissible train; the first one is ``LIF(f)``."""
    mult, _ = admissible_tree(f, params, cap)
    for row in mult:
        yield _train(row, params.theta)


def count_admissible(f: DiscreteSignal, params: EncoderParams, cap: int = DEFAULT_CAP) -> int:
    return admissible_tree(f, params, cap)[0].shape[0]


def min_l1_admissible(f: DiscreteSignal, params: EncoderParams) -> tuple[SpikeTrain, float]:
    """Sparsest admissible train by branch and bound.

    The incumbent starts at ``LIF(f)``, the leftmost leaf, and is replaced only
    by strictly sparser trains, so ties go to the earliest train in
    enumeration order.  A branch is cut when its cost so far plus the greedy
    real-valued lower bound for the remaining steps cannot beat the incumbent
    by a full grid step.
    """
    n = len(f)
    if n > MAX_ORACLE_N:
        raise InfeasibleSearch(f"exhaustive oracle limited to N <= {MAX_ORACLE_N}, got {n}")
    theta, beta = params.theta, params.beta
    x = f.samples.tolist()
    lif_train = lif_discrete(f, params)
    best_cost = l1_norm(lif_train)
    best_path: list[int] | None = None
    path = [0] * n
    margin = 0.5 * theta

    def suffix_bound(k: int, r: float) -> float:
        if k == n:
            return 0.0
        _, p = _greedy(x[k:], beta, theta, c0=-r)
        return float(np.sum(np.abs(p)))

    def dfs(k: int, r: float, cost: float) -> None:
        nonlocal best_cost, best_path
        if k == n:
            if cost < best_cost - margin:
                best_cost = cost
                best_path = path.copy()
            return
        if cost + suffix_bound(k, r) > best_cost - margin:
            return
        xk = x[k] + beta * r
        for s in admissible_options(xk, theta):
            path[k] = round(s / theta)
            dfs(k + 1, xk - s, cost + abs(s))

    dfs(0, 0.0, 0.0)
    if best_path is None:
        return lif_train, best_cost
    return _train(np.array(best_path), theta), best_cost


@dataclass(frozen=True)
class Admissibility:
    """Verdicts of the sparsity and accuracy conditions for a candidate train."""

    sparse: bool
    accurate: bool
    error_norm: float
    train_l1: float
    signal_l1: float

    @property
    def admissible(self) -> bool:
        return self.sparse and self.accurate

    def __bool__(self) -> bool:
        return self.admissible


def is_admissible(f, s: SpikeTrain, params: EncoderParams, strict: bool = True) -> Admissibility:
    """Check ``||s||_1 <= ||f||_1`` and ``||f - s||_{A,alpha} < theta``.

    ``f`` may be discrete (the train must live on ``1..N``) or continuous.
    Causality is not checked here; it holds by construction for everything
    this package produces.  The sparsity comparison allows ``INT_TOL * theta``
    of float slack.
    """
    if isinstance(f, ContinuousSignal):
        err = alexiewicz_norm(f - s, params)
    else:
        err = alexiewicz_norm(f - s.to_discrete(len(f)), params)
    train_l1, signal_l1 = l1_norm(s), l1_norm(f)
    return Admissibility(
        sparse=train_l1 <= signal_l1 + INT_TOL * params.theta,
        accurate=err < params.theta if strict else err <= params.theta,
        error_norm=err,
        train_l1=train_l1,
        signal_l1=signal_l1,
    )


@dataclass(frozen=True)
class GapDistribution:
    """``||Q(f)||_1 - ||LIF(f)||_1`` over every admissible output ``Q(f)``."""

    gaps: np.ndarray
    lif_l1: float

    @property
    def count(self) -> int:
        return self.gaps.size

    @property
    def frac_nonneg(self) -> float:
        return float(np.mean(self.gaps >= 0)) if self.gaps.size else 1.0

    @property
    def extremal(self) -> bool:
        """True when no admissible train is sparser than LIF."""
        return bool(np.all(self.gaps >= 0))

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min())


def sparsity_gap_distribution(
    f: DiscreteSignal, params: EncoderParams, cap: int = DEFAULT_CAP
) -> GapDistribution:
    """Gaps over trains meeting both the accuracy and the sparsity condition.

    Gaps are exact multiples of ``theta`` (computed from integer counts), in
    enumeration order.
    """
    theta = params.theta
    mult, _ = admissible_tree(f, params, cap)
    counts = np.abs(mult).sum(axis=1)
    keep = counts * theta <= l1_norm(f) + INT_TOL * theta
    lif_count = counts[0]
    gaps = (counts[keep] - lif_count) * theta
    return GapDistribution(gaps=gaps.astype(np.float64), lif_l1=float(lif_count * theta))
