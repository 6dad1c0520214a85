"""Command-line interface.

Signals are read as JSON from a file argument or stdin.  Exit status is 0
on success, 1 for invalid input and 2 when an exhaustive search is
infeasible (cap exceeded or signal too long).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments as ex
from .alexiewicz import alexiewicz_norm
from .encoder import lif, sod_encode
from .search import SearchError, enumerate_admissible, min_l1_admissible
from .signal import (
    ContinuousSignal,
    DiscreteSignal,
    EncoderParams,
    SpikeTrain,
    l1_norm,
    signal_from_dict,
)
from .sparsity import sparsity_bounds

EXIT_INVALID = 1
EXIT_INFEASIBLE = 2


def _read_json(path: str | None):
    if path in (None, "-"):
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_signal(args, continuous: bool | None = None):
    data = _read_json(args.input)
    sig = signal_from_dict(data)
    if isinstance(sig, SpikeTrain):
        raise ValueError("expected a signal, got a spike train")
    if continuous is True and not isinstance(sig, ContinuousSignal):
        raise ValueError("--continuous expects a {'segments': ..., 'impulses': ...} signal")
    if continuous is False and not isinstance(sig, DiscreteSignal):
        raise ValueError("expected a {'samples': [...]} signal")
    return sig


def _read_nodes(path: str | None):
    data = _read_json(path)
    nodes = data["nodes"] if isinstance(data, dict) else data
    return [(n["t"], n["v"]) if isinstance(n, dict) else tuple(n) for n in nodes]


def _params(args) -> EncoderParams:
    return EncoderParams(theta=args.theta, beta=args.beta)


def _emit(args, payload, rows: list[dict] | None = None, header: str | None = None) -> None:
    out = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        if args.format == "csv" and rows is not None:
            ex.write_csv(rows, header=header, stream=out)
        else:
            json.dump(payload, out, indent=2)
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _train_rows(train: SpikeTrain) -> list[dict]:
    return [{"t": t, "a": a} for t, a in train.events]


def cmd_encode(args) -> None:
    if args.mode == "sod":
        train = sod_encode(_read_nodes(args.input), args.theta)
    else:
        params = EncoderParams(args.theta, 1.0 if args.mode == "if" else args.beta)
        train = lif(_read_signal(args, continuous=args.continuous), params)
    _emit(args, train.to_dict(), _train_rows(train))


def cmd_norm(args) -> None:
    sig = _read_signal(args)
    value = alexiewicz_norm(sig, args.beta)
    _emit(args, {"beta": args.beta, "norm": value, "l1": l1_norm(sig)}, [{"beta": args.beta, "norm": value}])


def cmd_bounds(args) -> None:
    rep = sparsity_bounds(_read_signal(args, continuous=False), _params(args))
    row = {k: v for k, v in rep.to_dict().items() if k != "closest_point"}
    _emit(args, rep.to_dict(), [row])


def cmd_enumerate(args) -> None:
    f = _read_signal(args, continuous=False)
    trains = list(enumerate_admissible(f, _params(args), cap=args.cap))
    rows = [
        {"index": i, "l1": l1_norm(s), "amplitudes": s.to_dense(len(f)).tolist()}
        for i, s in enumerate(trains)
    ]
    _emit(args, {"count": len(trains), "trains": [s.to_dict() for s in trains]}, rows)


def cmd_oracle(args) -> None:
    f = _read_signal(args, continuous=False)
    train, value = min_l1_admissible(f, _params(args))
    _emit(args, {"l1": value, "train": train.to_dict()}, [{"l1": value, **r} for r in _train_rows(train)])


def _config(args) -> ex.ExperimentConfig:
    return ex.ExperimentConfig(
        constraint=args.constraint,
        K=args.K,
        N=args.N,
        theta=args.theta,
        beta_grid=tuple(float(b) for b in args.betas.split(",")),
        trials=args.trials,
        seed=args.seed,
    )


def cmd_gen(args) -> None:
    cfg = _config(args)
    signals = [ex.gen_signal(cfg, i) for i in range(cfg.trials)]
    rows = [
        {"trial": i, **{f"f{k + 1}": v for k, v in enumerate(s.samples.tolist())}}
        for i, s in enumerate(signals)
    ]
    _emit(args, {"config": json.loads(cfg.to_json()), "signals": [s.to_dict() for s in signals]},
          rows, ex.csv_header(cfg))


def cmd_ratio(args) -> None:
    cfg = _config(args)
    rows = ex.run_ratio_experiment(cfg, workers=args.workers)
    summary = ex.ratio_summary(rows)
    _emit(args, {"config": json.loads(cfg.to_json()), "rows": rows, "mean_lambda": summary},
          rows, ex.csv_header(cfg, mean_lambda=json.dumps(summary)))


def cmd_gap(args) -> None:
    cfg = _config(args)
    rows = ex.run_gap_experiment(cfg, cap=args.cap, workers=args.workers)
    summary = ex.gap_summary(rows)
    pooled = ex.pooled_nonneg_summary(rows)
    _emit(args, {"config": json.loads(cfg.to_json()), "rows": rows, "frac_extremal": summary,
                 "pooled_frac_nonneg": pooled},
          rows, ex.csv_header(cfg, frac_extremal=json.dumps(summary), pooled_frac_nonneg=json.dumps(pooled)))


def cmd_counterexample(args) -> None:
    report = ex.run_counterexample_experiment(
        args.beta, args.n, noise_sigma=args.noise, seed=args.seed,
        spike_time=args.spike_time, with_trace=not args.no_trace,
    )
    rows = [
        {"case": case, "lif_l1": report[case]["lif_l1"], "oracle_min_l1": report[case]["oracle_min_l1"]}
        for case in ("clean", "noisy") if case in report
    ]
    _emit(args, report, rows, f"# {ex.SCHEMA}; seed={args.seed}; beta={args.beta}; n={args.n}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spikequant", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, signal=True, params=True, fmt="json"):
        p = sub.add_parser(name, help=help)
        if signal:
            p.add_argument("input", nargs="?", help="JSON file (default: stdin)")
        if params:
            p.add_argument("--theta", type=float, default=1.0)
            p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--format", choices=("json", "csv"), default=fmt)
        p.add_argument("-o", "--output", help="write here instead of stdout")
        p.set_defaults(func=func)
        return p

    p = add("encode", cmd_encode, "encode a signal into a spike train")
    p.add_argument("--mode", choices=("lif", "if", "sod"), default="lif")
    p.add_argument("--continuous", action="store_true", help="input is a piecewise-constant signal")
    add("norm", cmd_norm, "weighted Alexiewicz norm")
    add("bounds", cmd_bounds, "sparsity bounds and lambda ratio")
    p = add("enumerate", cmd_enumerate, "all admissible spike trains")
    p.add_argument("--cap", type=int, default=1 << 16)
    add("oracle", cmd_oracle, "sparsest admissible spike train")

    def experiment(name, func, help, defaults):
        p = add(name, func, help, signal=False, params=False, fmt="csv")
        p.add_argument("--constraint", choices=ex.CONSTRAINTS, default=defaults.get("constraint", "amplitude"))
        p.add_argument("--K", type=float, default=defaults.get("K", 1.0))
        p.add_argument("--N", type=int, default=defaults.get("N", 10))
        p.add_argument("--theta", type=float, default=1.0)
        p.add_argument("--betas", default="0.2,0.5,0.8", help="comma-separated leak factors")
        p.add_argument("--trials", type=int, default=defaults.get("trials", 200))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        return p

    experiment("gen", cmd_gen, "generate constrained random signals", {"trials": 10})
    experiment("ratio", cmd_ratio, "lambda-ratio experiment", {"K": 5.0, "N": 32, "trials": 2000})
    p = experiment("gap", cmd_gap, "exhaustive sparsity-gap experiment", {})
    p.add_argument("--cap", type=int, default=1 << 16)

    p = add("counterexample", cmd_counterexample, "alternating-step counterexample", signal=False, params=False)
    p.add_argument("--beta", type=float, default=0.8)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--noise", type=float, default=None, help="noise sigma (default a_alpha/33, 0 to skip)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spike-time", type=float, default=0.5)
    p.add_argument("--no-trace", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; keep 2 reserved for infeasible searches
        return EXIT_INVALID if exc.code else 0
    try:
        args.func(args)
    except SearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
