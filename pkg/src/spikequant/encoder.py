"""Threshold-based encoders: truncation quantizer, LIF, IF and send-on-delta.

The discrete LIF recursion with reset-to-mod is

    z_1 = f_1,                 s_k = q(z_k),
    z_{k+1} = f_{k+1} + beta * (z_k - s_k),

where ``q`` truncates toward zero onto the threshold grid.  The continuous
encoder integrates piecewise-constant input with impulses event by event,
solving each threshold crossing in closed form.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .alexiewicz import relax
from .signal import (
    ContinuousSignal,
    DiscreteSignal,
    EncoderParams,
    SpikeTrain,
    validate_nodes,
)

__all__ = [
    "quantize_trunc",
    "quantize",
    "TracePoint",
    "lif_recursion",
    "lif_discrete",
    "if_encode",
    "lif_continuous",
    "lif",
    "sod_encode",
    "membrane_trace",
]

LEVEL_TOL = 1e-12
"""Relative slack for deciding that a bounded input has reached the threshold."""

TIME_TOL = 1e-12
"""Crossings this close to the end of a piece are snapped onto it."""


def quantize_trunc(z: float, theta: float) -> float:
    """Truncate ``z`` toward zero onto the grid ``theta * Z``.

    Returns ``sgn(z) * theta * max{n >= 0 : theta * n <= |z|}``, with the
    inequality checked on the float product so exact multiples map to
    themselves.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    a = abs(z)
    n = math.floor(a / theta)
    if n * theta > a:
        n -= 1
    elif (n + 1) * theta <= a:
        n += 1
    q = n * theta
    return -q if z < 0 else q


def quantize(z, theta: float) -> np.ndarray:
    """Element-wise :func:`quantize_trunc`, bit-identical to the scalar form."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    z = np.asarray(z, dtype=np.float64)
    a = np.abs(z)
    n = np.floor(a / theta)
    n = np.where(n * theta > a, n - 1, n)
    n = np.where((n + 1) * theta <= a, n + 1, n)
    q = n * theta
    return np.where(z < 0, -q, q)


class TracePoint(NamedTuple):
    """Membrane potential ``z`` at time ``t`` and the spike ``s`` emitted there.

    ``z`` is the pre-reset value; the residual after the spike is ``z - s``.
    ``touch`` marks a bounded-input crossing that was decided at the very end
    of a piece, i.e. the potential met the threshold exactly there.
    """

    t: float
    z: float
    s: float = 0.0
    touch: bool = False

    @property
    def residual(self) -> float:
        return self.z - self.s


def lif_recursion(samples, beta: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Run the discrete recursion; return pre-quantization potentials and spikes."""
    x = np.asarray(samples, dtype=np.float64).tolist()
    z = np.empty(len(x))
    s = np.empty(len(x))
    r = 0.0
    for k, fk in enumerate(x):
        zk = fk + beta * r
        sk = quantize_trunc(zk, theta)
        r = zk - sk
        z[k] = zk
        s[k] = sk
    return z, s


def lif_discrete(f: DiscreteSignal, params: EncoderParams) -> SpikeTrain:
    _, s = lif_recursion(f.samples, params.beta, params.theta)
    return SpikeTrain.from_dense(s, params.theta)


def if_encode(f, params: EncoderParams | float) -> SpikeTrain:
    """Integrate-and-fire: LIF without leak.

    ``params`` may be a bare threshold; a ``beta`` other than 1 is rejected.
    """
    if not isinstance(params, EncoderParams):
        params = EncoderParams(theta=params, beta=1.0)
    if params.beta != 1.0:
        raise ValueError("integrate-and-fire has beta = 1")
    return lif(f, params)


def _crossing(u0: float, c: float, alpha: float, theta: float, dt: float):
    """First time in ``(0, dt]`` at which ``|u|`` reaches ``theta``.

    Returns ``(tau, level, touch)`` or ``None``.  The potential is monotone on a
    constant piece, so a crossing exists iff the endpoint is at or over the
    threshold.
    """
    u_end = relax(u0, c, alpha, dt)
    if abs(u_end) < theta * (1.0 - LEVEL_TOL):
        return None
    level = math.copysign(theta, u_end)
    tau = math.nan
    if alpha == 0.0:
        if c != 0.0:
            tau = (level - u0) / c
    else:
        target = c / alpha
        denom = level - target
        if abs(denom) > 1e-14 * max(1.0, abs(target)):
            tau = math.log1p((u0 - level) / denom) / alpha
    if not (math.isfinite(tau) and 0.0 <= tau <= dt * (1.0 + TIME_TOL) + TIME_TOL):
        tau = _bisect_crossing(u0, c, alpha, level, dt)
    if tau >= dt - TIME_TOL * max(1.0, dt):
        return dt, level, True
    return max(tau, 0.0), level, False


def _bisect_crossing(u0: float, c: float, alpha: float, level: float, dt: float) -> float:
    sign = 1.0 if level > 0 else -1.0
    slack = abs(level) * LEVEL_TOL
    lo, hi = 0.0, dt
    while hi - lo > TIME_TOL:
        mid = 0.5 * (lo + hi)
        if sign * (relax(u0, c, alpha, mid) - level) >= -slack:
            hi = mid
        else:
            lo = mid
    return hi


def _run_continuous(f: ContinuousSignal, params: EncoderParams, trace: list | None = None):
    if params.beta == 0.0:
        raise ValueError("the continuous encoder needs a finite leak (beta > 0)")
    alpha = params.alpha
    theta = params.theta
    times: list[float] = []
    amps: list[float] = []

    def emit(t, a):
        if times and times[-1] == t:
            amps[-1] += a
            if amps[-1] == 0.0:
                times.pop()
                amps.pop()
        else:
            times.append(t)
            amps.append(a)

    u = 0.0
    for item in f.sweep():
        if item[0] == "impulse":
            _, t, w = item
            if trace is not None:
                trace.append(TracePoint(t, u))
            u += w
            s = quantize_trunc(u, theta)
            if trace is not None:
                trace.append(TracePoint(t, u, s))
            if s != 0.0:
                emit(t, s)
                u -= s
            continue
        _, t, t_end, c = item
        stalled = 0
        while t < t_end:
            hit = _crossing(u, c, alpha, theta, t_end - t)
            if hit is None:
                u = relax(u, c, alpha, t_end - t)
                t = t_end
                if trace is not None:
                    trace.append(TracePoint(t, u))
                break
            tau, level, touch = hit
            t_next = t_end if touch else t + tau
            stalled = stalled + 1 if t_next == t else 0
            if stalled > 1:
                raise ValueError(f"crossing times do not advance at t = {t}; input too steep")
            t = t_next
            if trace is not None:
                trace.append(TracePoint(t, level, level, touch))
            emit(t, level)
            u = 0.0
    return SpikeTrain(theta, times, amps)


def lif_continuous(f: ContinuousSignal, params: EncoderParams) -> SpikeTrain:
    """Event-driven LIF on a piecewise-constant signal with impulses.

    Bounded input hits the threshold exactly, so a crossing emits ``+-theta``
    and resets the potential to zero.  An impulse may overshoot; it emits the
    truncated multiple and keeps the remainder (reset-to-mod).
    """
    return _run_continuous(f, params)


def lif(f, params: EncoderParams) -> SpikeTrain:
    """LIF on either signal kind."""
    if isinstance(f, DiscreteSignal):
        return lif_discrete(f, params)
    if isinstance(f, ContinuousSignal):
        return lif_continuous(f, params)
    if isinstance(f, SpikeTrain):
        raise TypeError("embed the spike train first (to_discrete / to_continuous)")
    return lif_discrete(DiscreteSignal(f), params)


def sod_encode(nodes, theta: float) -> SpikeTrain:
    """Send-on-delta sampling of a piecewise-linear signal.

    An event fires at the earliest time the signal has moved by ``theta``
    from its value at the previous event (initially ``f(t_0)``), carrying
    the sign of the move.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    t, v = validate_nodes(nodes)
    times: list[float] = []
    amps: list[float] = []
    ref = v[0]
    for ta, tb, va, vb in zip(t[:-1], t[1:], v[:-1], v[1:]):
        slope = (vb - va) / (tb - ta)
        if slope == 0.0:
            continue
        sign = 1.0 if slope > 0 else -1.0
        while sign * (vb - ref) >= theta * (1.0 - LEVEL_TOL):
            level = ref + sign * theta
            tc = ta + (level - va) / slope
            if tc >= tb - TIME_TOL * max(1.0, tb):
                tc = tb
            tc = max(tc, ta)
            times.append(float(tc))
            amps.append(sign * theta)
            ref = level
    return SpikeTrain(theta, times, amps)


def membrane_trace(f, params: EncoderParams) -> list[TracePoint]:
    """Potential trajectory at every event-relevant instant.

    Discrete signals give one point per sample.  Continuous signals give a
    point at each piece end, at each crossing, and two at each impulse
    (before and after the jump).
    """
    if isinstance(f, ContinuousSignal):
        trace: list[TracePoint] = []
        _run_continuous(f, params, trace)
        return trace
    samples = f.samples if isinstance(f, DiscreteSignal) else np.asarray(f, dtype=np.float64)
    z, s = lif_recursion(samples, params.beta, params.theta)
    return [TracePoint(float(k + 1), float(zk), float(sk)) for k, (zk, sk) in enumerate(zip(z, s))]
