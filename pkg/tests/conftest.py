"""Shared strategies and independent reference implementations.

The reference functions here are deliberately naive (explicit loops, exact
rationals where it matters) so that they can serve as oracles for the
vectorized code under test.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

BETAS = (0.0, 0.2, 0.5, 0.8, 1.0)
THETAS = (0.5, 1.0, 2.0)


def naive_weighted_norm(x, beta: float) -> float:
    """max_n |sum_{k<=n} beta^(n-k) x_k| by a double loop."""
    best = 0.0
    for n in range(len(x)):
        acc = 0.0
        for k in range(n + 1):
            acc += (beta ** (n - k)) * x[k]
        best = max(best, abs(acc))
    return best


def naive_lif(x, beta: float, theta: float) -> list[float]:
    """Discrete LIF with truncation done on exact rationals."""
    th = Fraction(theta)
    b = Fraction(beta)
    r = Fraction(0)
    out = []
    for fk in x:
        z = Fraction(fk) + b * r
        n = math.floor(abs(z) / th)
        s = math.copysign(1, z) * n * th if n else Fraction(0)
        s = Fraction(s)
        out.append(float(s))
        r = z - s
    return out


def brute_admissible(x, beta: float, theta: float, span: int = 2, sparse: bool = True):
    """Trains in {-span..span}^N * theta inside the open ball, optionally no larger in l1."""
    l1f = float(np.sum(np.abs(x)))
    found = []
    for combo in itertools.product(range(-span, span + 1), repeat=len(x)):
        s = np.array(combo, dtype=float) * theta
        if sparse and np.sum(np.abs(s)) > l1f + 1e-9 * theta:
            continue
        if naive_weighted_norm(np.asarray(x) - s, beta) < theta:
            found.append(tuple(combo))
    return found


def grid_closest_value(x, beta: float, theta: float, pitch_div: int = 200) -> float:
    """Exact min-plus DP over the shear coordinates restricted to a theta/pitch_div grid.

    With ``h = A(f - g)`` confined to ``[-theta, theta]^N``, the cost is
    ``sum_k |f_k - h_k + beta h_{k-1}|`` and couples only neighbours.
    """
    h = np.linspace(-theta, theta, 2 * pitch_div + 1)
    best = np.abs(x[0] - h)
    for fk in x[1:]:
        step = np.abs(fk - h[None, :] + beta * h[:, None])
        best = np.min(best[:, None] + step, axis=0)
    return float(best.min())


def random_signal(rng: np.random.Generator, n_max: int = 64, scale: float = 3.0) -> np.ndarray:
    n = int(rng.integers(1, n_max + 1))
    return rng.uniform(-scale, scale, size=n)


def random_piecewise_constant(rng: np.random.Generator, pieces_max: int = 12, impulses: bool = True):
    from spikequant.signal import ContinuousSignal

    m = int(rng.integers(1, pieces_max + 1))
    breaks = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 2.0, size=m))])
    values = rng.uniform(-3.0, 3.0, size=m)
    times = weights = np.zeros(0)
    if impulses:
        k = int(rng.integers(0, 4))
        times = np.sort(rng.choice(np.linspace(0.0, breaks[-1], 97)[1:-1], size=k, replace=False))
        weights = rng.uniform(-2.5, 2.5, size=k)
    return ContinuousSignal(breaks, values, times, weights)


samples_st = st.lists(
    st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=24,
)
beta_st = st.sampled_from(BETAS)
theta_st = st.sampled_from(THETAS)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
