"""Signal generators and batch experiments.

Random signals come from three constraint families with threshold ``theta``
and bound ``K``:

- ``amplitude``: ``f_i`` i.i.d. uniform on ``[-K theta, K theta]``;
- ``first-diff``: a random walk from 0 with i.i.d. uniform increments on
  ``[-K theta, K theta]``;
- ``second-diff``: uniform second differences on ``[-K theta, K theta]``
  summed twice from 0.

Trial ``i`` of a run seeded with ``seed`` draws from a Philox stream keyed by
``SeedSequence(seed, spawn_key=(i,))``, so any subset of trials can be
regenerated, in any order or in parallel, and produces the same rows.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Iterable

import numpy as np

from .alexiewicz import alexiewicz_norm
from .encoder import lif, membrane_trace
from .search import is_admissible, min_l1_admissible, sparsity_gap_distribution
from .signal import ContinuousSignal, DiscreteSignal, EncoderParams, SpikeTrain, l1_norm
from .sparsity import sparsity_bounds

__all__ = [
    "CONSTRAINTS",
    "ExperimentConfig",
    "trial_rng",
    "gen_signal",
    "satisfies_constraint",
    "a_alpha",
    "gen_counterexample",
    "single_spike_alternative",
    "add_noise",
    "run_ratio_experiment",
    "run_gap_experiment",
    "run_counterexample_experiment",
    "ratio_summary",
    "gap_summary",
    "pooled_nonneg_summary",
    "csv_header",
    "write_csv",
]

SCHEMA = "spike-quant v1"
CONSTRAINTS = ("amplitude", "first-diff", "second-diff")


@dataclass(frozen=True)
class ExperimentConfig:
    constraint: str = "amplitude"
    K: float = 1.0
    N: int = 10
    theta: float = 1.0
    beta_grid: tuple[float, ...] = (0.2, 0.5, 0.8)
    trials: int = 200
    seed: int = 0
    sampling: str = field(default="uniform", init=False)

    def __post_init__(self):
        if self.constraint not in CONSTRAINTS:
            raise ValueError(f"constraint must be one of {CONSTRAINTS}, got {self.constraint!r}")
        if not self.K > 0:
            raise ValueError("K must be positive")
        if self.N < 1 or self.trials < 1:
            raise ValueError("N and trials must be at least 1")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        for beta in self.beta_grid:
            EncoderParams(self.theta, beta)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial_index,))))


def gen_signal(config: ExperimentConfig, trial_index: int) -> DiscreteSignal:
    rng = trial_rng(config.seed, trial_index)
    bound = config.K * config.theta
    draws = rng.uniform(-bound, bound, size=config.N)
    if config.constraint == "first-diff":
        draws = np.cumsum(draws)
    elif config.constraint == "second-diff":
        draws = np.cumsum(np.cumsum(draws))
    return DiscreteSignal(draws)


def satisfies_constraint(f: DiscreteSignal, config: ExperimentConfig, slack: float = 1e-12) -> bool:
    """Check the family bound, counting from an implicit ``f_0 = f_{-1} = 0``."""
    x = np.concatenate([[0.0, 0.0], f.samples])
    order = {"amplitude": 0, "first-diff": 1, "second-diff": 2}[config.constraint]
    d = np.diff(x, n=order)[2 - order :] if order else f.samples
    bound = config.K * config.theta
    return bool(np.all(np.abs(d) <= bound * (1 + slack) + slack))


def a_alpha(beta: float) -> float:
    """Step height whose unit-interval leaky integral is exactly 1."""
    if not 0 < beta < 1:
        raise ValueError("a_alpha needs 0 < beta < 1")
    alpha = -math.log(beta)
    return alpha / -math.expm1(-alpha)


def gen_counterexample(beta: float, n: int, discrete: bool = False, lead_in: float | None = None):
    """Alternating-sign signal on which LIF fires ``n`` times with threshold 1.

    Continuous form: ``+-a_alpha`` on ``[k-1, k)`` for ``k = 1..n``, so the
    leaky potential reaches exactly ``+-1`` at every integer time.

    Discrete form: the impulses ``(1, -1, 1, ...)``.  Every carried potential
    is an integer there, so LIF is the only admissible train.  With
    ``lead_in = x`` each unit step is split into ``(+-x, +-(1 - beta x))``
    instead; LIF still fires ``n`` times, but firing early at step 1 leaves a
    single spike admissible.  ``beta * x`` should lie in ``[0.5, 1)`` so that
    the split recombines to exactly 1 in floating point.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    if discrete:
        if not 0 <= beta <= 1:
            raise ValueError("beta must lie in [0, 1]")
        if lead_in is None:
            return DiscreteSignal(signs)
        if not 0 < lead_in < 1:
            raise ValueError("lead_in must lie in (0, 1)")
        pair = np.array([lead_in, 1.0 - beta * lead_in])
        return DiscreteSignal((signs[:, None] * pair).reshape(-1))
    a = a_alpha(beta)
    return ContinuousSignal(breaks=np.arange(n + 1, dtype=np.float64), values=signs * a)


def single_spike_alternative(t: float = 0.5) -> SpikeTrain:
    """One unit spike inside the first step of the counterexample.

    A spike at exactly ``t = 0`` would put the error on the sphere
    (``|0 - 1| = 1``); any time strictly inside ``(0, 1)`` keeps it inside.
    """
    return SpikeTrain(1.0, [t], [1.0])


def add_noise(f, sigma: float, seed: int):
    """Add i.i.d. ``N(0, sigma^2)`` to every sample or segment value."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    if isinstance(f, DiscreteSignal):
        return DiscreteSignal(f.samples + rng.normal(0.0, sigma, size=len(f)))
    if isinstance(f, ContinuousSignal):
        noise = rng.normal(0.0, sigma, size=f.values.size)
        return ContinuousSignal(f.breaks, f.values + noise, f.impulse_times, f.impulse_weights)
    raise TypeError(f"unsupported signal type {type(f).__name__}")


def _map_trials(fn: Callable[[int], list[dict]], trials: int, workers: int) -> list[dict]:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(fn, range(trials), chunksize=max(1, trials // (4 * workers))))
    else:
        chunks = [fn(i) for i in range(trials)]
    return [row for chunk in chunks for row in chunk]


def _ratio_trial(config: ExperimentConfig, trial: int) -> list[dict]:
    f = gen_signal(config, trial)
    assert satisfies_constraint(f, config)
    rows = []
    for beta in config.beta_grid:
        rep = sparsity_bounds(f, EncoderParams(config.theta, beta))
        rows.append(
            {
                "trial": trial,
                "beta": beta,
                "c": rep.lower,
                "lif_l1": rep.lif_l1,
                "upper": rep.upper,
                "lambda": rep.lam,
            }
        )
    return rows


def run_ratio_experiment(config: ExperimentConfig, workers: int = 1) -> list[dict]:
    """One row per (trial, beta) locating ``||LIF(f)||_1`` between its bounds."""
    return _map_trials(partial(_ratio_trial, config), config.trials, workers)


def ratio_summary(rows: Iterable[dict]) -> dict[float, float]:
    """Mean lambda per beta over the trials where it is defined."""
    by_beta: dict[float, list[float]] = {}
    for row in rows:
        if row["lambda"] is not None:
            by_beta.setdefault(row["beta"], []).append(row["lambda"])
    return {beta: float(np.mean(v)) for beta, v in by_beta.items()}


def _gap_trial(config: ExperimentConfig, cap: int, trial: int) -> list[dict]:
    f = gen_signal(config, trial)
    assert satisfies_constraint(f, config)
    rows = []
    for beta in config.beta_grid:
        dist = sparsity_gap_distribution(f, EncoderParams(config.theta, beta), cap=cap)
        rows.append(
            {
                "trial": trial,
                "beta": beta,
                "n_trains": dist.count,
                "min_gap": dist.min_gap,
                "frac_nonneg": dist.frac_nonneg,
                "extremal": dist.extremal,
                "gaps": dist.gaps.tolist(),
            }
        )
    return rows


def run_gap_experiment(config: ExperimentConfig, cap: int = 1 << 16, workers: int = 1) -> list[dict]:
    """Exhaustive sparsity-gap statistics, one row per (trial, beta)."""
    return _map_trials(partial(_gap_trial, config, cap), config.trials, workers)


def gap_summary(rows: Iterable[dict]) -> dict[float, float]:
    """Fraction of trials per beta in which LIF is the sparsest admissible train."""
    by_beta: dict[float, list[bool]] = {}
    for row in rows:
        by_beta.setdefault(row["beta"], []).append(row["extremal"])
    return {beta: float(np.mean(v)) for beta, v in by_beta.items()}


def pooled_nonneg_summary(rows: Iterable[dict]) -> dict[float, float]:
    """Fraction of all admissible outputs per beta, pooled over trials, with gap >= 0."""
    hits: dict[float, float] = {}
    total: dict[float, int] = {}
    for row in rows:
        hits[row["beta"]] = hits.get(row["beta"], 0) + sum(g >= 0 for g in row["gaps"])
        total[row["beta"]] = total.get(row["beta"], 0) + row["n_trains"]
    return {beta: hits[beta] / total[beta] for beta in total}


def _continuous_case(h: ContinuousSignal, params: EncoderParams, alternatives, with_trace: bool) -> dict:
    train = lif(h, params)
    closed = is_admissible(h, train, params, strict=False)
    empty = is_admissible(h, SpikeTrain(params.theta), params)
    checked = [(alt, is_admissible(h, alt, params)) for alt in alternatives]
    if empty.admissible:
        oracle = 0.0
    elif any(res.admissible and res.train_l1 == params.theta for _, res in checked):
        # any nonempty train costs at least theta
        oracle = params.theta
    else:
        oracle = None
    out = {
        "lif_l1": l1_norm(train),
        "lif_events": train.events,
        "lif_error_norm": closed.error_norm,
        "empty_admissible": empty.admissible,
        "alternatives": [
            {
                "events": alt.events,
                "admissible": res.admissible,
                "accurate": res.accurate,
                "sparse": res.sparse,
                "error_norm": res.error_norm,
            }
            for alt, res in checked
        ],
        "oracle_min_l1": oracle,
        "oracle_upper": min([l1_norm(train)] + [res.train_l1 for _, res in checked if res.admissible]),
    }
    if with_trace:
        out["trace"] = [list(p) for p in membrane_trace(h, params)]
    return out


def run_counterexample_experiment(
    beta: float,
    n: int,
    noise_sigma: float | None = None,
    seed: int = 0,
    spike_time: float = 0.5,
    with_trace: bool = True,
) -> dict:
    """LIF against the single-spike alternative on the alternating step signal.

    ``noise_sigma=None`` means ``a_alpha / 33``; pass 0 to skip the noisy run.
    The oracle value is exact whenever it is 0 or one threshold (the empty
    train is checked directly, one spike is the least any other train costs);
    otherwise it is reported as ``None`` with ``oracle_upper`` as a bound.
    """
    params = EncoderParams(theta=1.0, beta=beta)
    a = a_alpha(beta)
    sigma = a / 33 if noise_sigma is None else noise_sigma
    h = gen_counterexample(beta, n)
    alt = single_spike_alternative(spike_time)
    report = {
        "schema": SCHEMA,
        "beta": beta,
        "alpha": params.alpha,
        "n": n,
        "a_alpha": a,
        "noise_sigma": sigma,
        "noise_scale": "a_alpha/33" if noise_sigma is None else "user",
        "seed": seed,
        "clean": _continuous_case(h, params, [alt], with_trace),
    }
    d = gen_counterexample(beta, n, discrete=True)
    d_train, d_min = min_l1_admissible(d, params) if n <= 24 else (None, None)
    report["discrete"] = {
        "samples": d.samples.tolist(),
        "lif_l1": l1_norm(lif(d, params)),
        "oracle_min_l1": d_min,
        "single_spike_error_norm": alexiewicz_norm(d - SpikeTrain(1.0, [1.0], [1.0]), params),
    }
    if sigma > 0:
        noisy = add_noise(h, sigma, seed)
        report["noisy"] = _continuous_case(noisy, params, [alt], with_trace)
    return report


def csv_header(config: ExperimentConfig, **extra) -> str:
    """Comment line recording schema, seed, configuration and any extra fields."""
    parts = [SCHEMA, f"seed={config.seed}", f"config={config.to_json()}"]
    parts += [f"{k}={v}" for k, v in extra.items()]
    return "# " + "; ".join(parts)


def _cell(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_cell(v) for v in value)
    return str(value)


def write_csv(rows: list[dict], header: str | None = None, stream=None) -> str:
    """Write rows as CSV, preceded by an optional ``#`` comment line.

    Undefined values are written as ``undefined`` and list cells are joined
    with ``;``.  Returns the text when no stream is given.
    """
    out = stream if stream is not None else io.StringIO()
    if header:
        out.write(header + "\n")
    if rows:
        writer = csv.writer(out, lineterminator="\n")
        fields = list(rows[0])
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_cell(row[k]) for k in fields])
    return out.getvalue() if stream is None else ""
