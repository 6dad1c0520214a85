"""Signal and spike-train data model.

Three value types are shared by every other module:

- :class:`DiscreteSignal` -- samples ``f_1..f_N`` at unit time steps.
- :class:`ContinuousSignal` -- a piecewise-constant function on ``[0, T]``
  with finitely many weighted Dirac impulses.
- :class:`SpikeTrain` -- events ``(t_k, s_k)`` with ``s_k`` a nonzero
  multiple of the threshold.

All three are immutable after construction; their arrays are flagged
read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

INT_TOL = 1e-9
"""Tolerance for deciding whether ``x / theta`` is an integer."""

__all__ = [
    "INT_TOL",
    "DiscreteSignal",
    "ContinuousSignal",
    "SpikeTrain",
    "EncoderParams",
    "l1_norm",
    "offset",
    "piecewise_linear_derivative",
    "validate_nodes",
    "signal_from_dict",
]


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteSignal:
    """Finite sequence of real samples at unit time steps, indexed from 1."""

    samples: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.samples, "samples")
        if arr.size == 0:
            raise ValueError("a discrete signal needs at least one sample")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, DiscreteSignal):
            return NotImplemented
        return np.array_equal(self.samples, other.samples)

    def __sub__(self, other: DiscreteSignal | SpikeTrain) -> DiscreteSignal:
        if isinstance(other, SpikeTrain):
            other = other.to_discrete(len(self))
        if len(other) != len(self):
            raise ValueError("signals have different lengths")
        return DiscreteSignal(self.samples - other.samples)

    def __add__(self, other: DiscreteSignal) -> DiscreteSignal:
        if len(other) != len(self):
            raise ValueError("signals have different lengths")
        return DiscreteSignal(self.samples + other.samples)

    def scale(self, factor: float) -> DiscreteSignal:
        return DiscreteSignal(self.samples * factor)

    def to_continuous(self) -> ContinuousSignal:
        """Embed as unit-weight-per-sample impulses at ``t = 1..N`` on ``[0, N]``."""
        n = len(self)
        return ContinuousSignal(
            breaks=np.array([0.0, float(n)]),
            values=np.zeros(1),
            impulse_times=np.arange(1, n + 1, dtype=np.float64),
            impulse_weights=self.samples,
        )

    def to_dict(self) -> dict:
        return {"samples": self.samples.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> DiscreteSignal:
        return cls(data["samples"])


@dataclass(frozen=True, eq=False)
class ContinuousSignal:
    """Piecewise-constant function on ``[0, T]`` plus Dirac impulses.

    The function takes ``values[i]`` on ``[breaks[i], breaks[i+1])``;
    ``breaks[0]`` is always 0 and ``breaks[-1]`` is the horizon ``T``.
    Use :meth:`from_segments` to build one from ``(t0, t1, v)`` triples.
    """

    breaks: np.ndarray
    values: np.ndarray
    impulse_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    impulse_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        breaks = _frozen(self.breaks, "segment times")
        values = _frozen(self.values, "segment values")
        times = _frozen(self.impulse_times, "impulse times")
        weights = _frozen(self.impulse_weights, "impulse weights")
        if breaks.size < 2 or values.size != breaks.size - 1:
            raise ValueError("need at least one segment and one value per segment")
        if breaks[0] != 0.0:
            raise ValueError("segments must start at t = 0")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("segment times must be strictly increasing")
        if times.size != weights.size:
            raise ValueError("impulse times and weights differ in length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("impulse times must be strictly increasing")
        if times.size and (times[0] < 0 or times[-1] > breaks[-1]):
            raise ValueError("impulse times must lie in [0, T]")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "impulse_times", times)
        object.__setattr__(self, "impulse_weights", weights)

    @classmethod
    def from_segments(cls, segments, impulses=()) -> ContinuousSignal:
        segments = list(segments)
        if not segments:
            raise ValueError("need at least one segment")
        for (_, end, _), (start, _, _) in zip(segments, segments[1:]):
            if start != end:
                raise ValueError("segments must be contiguous")
        breaks = [segments[0][0]] + [seg[1] for seg in segments]
        impulses = list(impulses)
        return cls(
            breaks=np.array(breaks, dtype=np.float64),
            values=np.array([seg[2] for seg in segments], dtype=np.float64),
            impulse_times=np.array([t for t, _ in impulses], dtype=np.float64),
            impulse_weights=np.array([w for _, w in impulses], dtype=np.float64),
        )

    @classmethod
    def zero(cls, horizon: float) -> ContinuousSignal:
        return cls(breaks=np.array([0.0, horizon]), values=np.zeros(1))

    @property
    def horizon(self) -> float:
        return float(self.breaks[-1])

    @property
    def segments(self) -> list[tuple[float, float, float]]:
        return [
            (float(a), float(b), float(v))
            for a, b, v in zip(self.breaks[:-1], self.breaks[1:], self.values)
        ]

    @property
    def impulses(self) -> list[tuple[float, float]]:
        return [(float(t), float(w)) for t, w in zip(self.impulse_times, self.impulse_weights)]

    def value_at(self, t: float) -> float:
        """Segment value at ``t`` (right-continuous; the last segment is closed)."""
        i = int(np.searchsorted(self.breaks, t, side="right")) - 1
        return float(self.values[min(max(i, 0), self.values.size - 1)])

    def sweep(self) -> Iterator[tuple]:
        """Walk the signal in time order.

        Yields ``("impulse", t, w)`` and ``("piece", t0, t1, value)`` items.
        An impulse sitting on a boundary comes after the piece ending there
        and before the piece starting there.
        """
        grid = np.union1d(self.breaks, self.impulse_times)
        weights = dict(zip(self.impulse_times.tolist(), self.impulse_weights.tolist()))
        if 0.0 in weights:
            yield ("impulse", 0.0, weights[0.0])
        for t0, t1 in zip(grid[:-1], grid[1:]):
            yield ("piece", float(t0), float(t1), self.value_at(t0))
            if float(t1) in weights:
                yield ("impulse", float(t1), weights[float(t1)])

    def _combine(self, other: ContinuousSignal, sign: float) -> ContinuousSignal:
        if self.horizon != other.horizon:
            raise ValueError("signals have different horizons")
        breaks = np.union1d(self.breaks, other.breaks)
        left = breaks[:-1]
        values = np.array([self.value_at(t) + sign * other.value_at(t) for t in left])
        times = np.union1d(self.impulse_times, other.impulse_times)
        mine = dict(zip(self.impulse_times.tolist(), self.impulse_weights.tolist()))
        theirs = dict(zip(other.impulse_times.tolist(), other.impulse_weights.tolist()))
        weights = np.array([mine.get(t, 0.0) + sign * theirs.get(t, 0.0) for t in times.tolist()])
        return ContinuousSignal(breaks, values, times, weights)

    def __add__(self, other: ContinuousSignal | SpikeTrain) -> ContinuousSignal:
        if isinstance(other, SpikeTrain):
            other = other.to_continuous(self.horizon)
        return self._combine(other, 1.0)

    def __sub__(self, other: ContinuousSignal | SpikeTrain) -> ContinuousSignal:
        if isinstance(other, SpikeTrain):
            other = other.to_continuous(self.horizon)
        return self._combine(other, -1.0)

    def __eq__(self, other):
        if not isinstance(other, ContinuousSignal):
            return NotImplemented
        return (
            np.array_equal(self.breaks, other.breaks)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.impulse_times, other.impulse_times)
            and np.array_equal(self.impulse_weights, other.impulse_weights)
        )

    def scale(self, factor: float) -> ContinuousSignal:
        return ContinuousSignal(
            self.breaks, self.values * factor, self.impulse_times, self.impulse_weights * factor
        )

    def to_dict(self) -> dict:
        return {
            "segments": [{"t0": a, "t1": b, "v": v} for a, b, v in self.segments],
            "impulses": [{"t": t, "w": w} for t, w in self.impulses],
        }

    @classmethod
    def from_dict(cls, data: dict) -> ContinuousSignal:
        return cls.from_segments(
            [(s["t0"], s["t1"], s["v"]) for s in data["segments"]],
            [(i["t"], i["w"]) for i in data.get("impulses", [])],
        )


@dataclass(frozen=True, eq=False)
class SpikeTrain:
    """Spike events with amplitudes in ``theta * Z \\ {0}``."""

    theta: float
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise ValueError("theta must be positive and finite")
        times = _frozen(self.times, "spike times")
        amps = _frozen(self.amplitudes, "spike amplitudes")
        if times.size != amps.size:
            raise ValueError("times and amplitudes differ in length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("spike times must be strictly increasing")
        ratio = amps / self.theta
        if np.any(np.abs(ratio - np.round(ratio)) > INT_TOL):
            raise ValueError("spike amplitudes must be integer multiples of theta")
        if np.any(np.round(ratio) == 0):
            raise ValueError("spike amplitudes must be nonzero")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_events(cls, theta: float, events: Sequence[tuple[float, float]]) -> SpikeTrain:
        events = list(events)
        return cls(theta, [t for t, _ in events], [a for _, a in events])

    @classmethod
    def from_dense(cls, amplitudes, theta: float) -> SpikeTrain:
        """Events at integer times ``k = 1..N`` for every nonzero amplitude."""
        amps = np.asarray(amplitudes, dtype=np.float64)
        (idx,) = np.nonzero(amps)
        return cls(theta, (idx + 1).astype(np.float64), amps[idx])

    @property
    def events(self) -> list[tuple[float, float]]:
        return [(float(t), float(a)) for t, a in zip(self.times, self.amplitudes)]

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return (
            self.theta == other.theta
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.amplitudes, other.amplitudes)
        )

    def __repr__(self):
        return f"SpikeTrain(theta={self.theta}, events={self.events})"

    def scale(self, factor: float) -> SpikeTrain:
        """Multiply amplitudes and threshold by ``factor``."""
        return SpikeTrain(self.theta * factor, self.times, self.amplitudes * factor)

    def to_dense(self, n: int) -> np.ndarray:
        """Amplitude vector of length ``n`` for a train living on times ``1..n``."""
        idx = np.round(self.times).astype(np.int64)
        if np.any(np.abs(self.times - idx) > 0) or np.any((idx < 1) | (idx > n)):
            raise ValueError("spike train does not live on the integer grid 1..n")
        out = np.zeros(n)
        out[idx - 1] = self.amplitudes
        return out

    def to_discrete(self, n: int) -> DiscreteSignal:
        return DiscreteSignal(self.to_dense(n))

    def to_continuous(self, horizon: float) -> ContinuousSignal:
        """Embed as an impulse-only signal on ``[0, horizon]``."""
        if self.times.size and (self.times[0] < 0 or self.times[-1] > horizon):
            raise ValueError("spike times fall outside [0, horizon]")
        return ContinuousSignal(
            breaks=np.array([0.0, horizon]),
            values=np.zeros(1),
            impulse_times=self.times,
            impulse_weights=self.amplitudes,
        )

    def to_dict(self) -> dict:
        return {"theta": self.theta, "events": [{"t": t, "a": a} for t, a in self.events]}

    @classmethod
    def from_dict(cls, data: dict) -> SpikeTrain:
        return cls.from_events(data["theta"], [(e["t"], e["a"]) for e in data["events"]])


@dataclass(frozen=True)
class EncoderParams:
    """Threshold ``theta > 0`` and leak factor ``beta = exp(-alpha)`` in ``[0, 1]``.

    The refractory time is always zero.
    """

    theta: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")

    @classmethod
    def from_alpha(cls, alpha: float, theta: float = 1.0) -> EncoderParams:
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        return cls(theta=theta, beta=math.exp(-alpha))

    @property
    def alpha(self) -> float:
        return math.inf if self.beta == 0 else -math.log(self.beta)


def l1_norm(f: DiscreteSignal | ContinuousSignal | SpikeTrain) -> float:
    """Sum of absolute values, integral of ``|f|`` plus impulse masses."""
    if isinstance(f, DiscreteSignal):
        return float(np.sum(np.abs(f.samples)))
    if isinstance(f, SpikeTrain):
        return float(np.sum(np.abs(f.amplitudes)))
    if isinstance(f, ContinuousSignal):
        return float(
            np.sum(np.abs(f.values) * np.diff(f.breaks)) + np.sum(np.abs(f.impulse_weights))
        )
    raise TypeError(f"unsupported signal type {type(f).__name__}")


def offset(f):
    """Subtract the initial value ``f(0)`` from the whole signal.

    Impulses of a continuous signal are left alone; only segment values move.
    """
    if isinstance(f, DiscreteSignal):
        return DiscreteSignal(f.samples - f.samples[0])
    if isinstance(f, ContinuousSignal):
        return ContinuousSignal(f.breaks, f.values - f.values[0], f.impulse_times, f.impulse_weights)
    arr = np.asarray(f, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot offset an empty signal")
    return arr - arr[0]


def validate_nodes(nodes) -> tuple[np.ndarray, np.ndarray]:
    """Split ``(t, value)`` nodes of a piecewise-linear function into arrays."""
    arr = np.asarray(nodes, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ValueError("need at least two (t, value) nodes")
    if not np.all(np.isfinite(arr)):
        raise ValueError("nodes must be finite")
    t, v = arr[:, 0].copy(), arr[:, 1].copy()
    if np.any(np.diff(t) <= 0):
        raise ValueError("node times must be strictly increasing")
    return t, v


def piecewise_linear_derivative(nodes) -> ContinuousSignal:
    """Slope function of a piecewise-linear signal given by its nodes."""
    t, v = validate_nodes(nodes)
    if t[0] != 0.0:
        raise ValueError("the first node must sit at t = 0")
    return ContinuousSignal(breaks=t, values=np.diff(v) / np.diff(t))


def signal_from_dict(data: dict):
    """Decode any of the three JSON shapes by looking at its keys."""
    if "samples" in data:
        return DiscreteSignal.from_dict(data)
    if "segments" in data:
        return ContinuousSignal.from_dict(data)
    if "events" in data:
        return SpikeTrain.from_dict(data)
    raise ValueError("unrecognised signal JSON; expected samples, segments or events")
