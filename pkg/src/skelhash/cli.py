"""Command-line interface: train, predict, evaluate, benchmark, sweep.

Exit status: 0 success, 1 usage or configuration problem, 2 data
problem, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .classify import predict
from .config import build_config, parse_config_file
from .errors import ConfigError, DataError, NumericError, SkelHashError
from .evaluate import benchmark_model, run_protocol
from .model_io import load_model, save_model
from .pipeline import fit
from .skeleton import load_canonical, load_dataset, load_joint_map

SWEEP_PARAMS = {
    "lambda1": float,
    "lambda2": float,
    "lambda3": float,
    "epsilon": int,
    "atoms": int,
    "code_length": int,
}


class _Parser(argparse.ArgumentParser):
    # usage errors exit with status 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(parser, dataset_required=True):
    parser.add_argument("--dataset", required=False,
                        help="dataset directory" + ("" if dataset_required
                                                    else " (optional)"))
    parser.add_argument("--format", choices=("canonical", "msr-like"),
                        help="sequence file format (default canonical)")
    parser.add_argument("--joint-map", dest="joint_map",
                        help="joint-map config file for raw formats")
    parser.add_argument("--name-pattern", dest="name_pattern",
                        help="regex with action/subject/episode groups")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--json", dest="json_output", action="store_true",
                        default=None, help="emit machine-readable JSON")
    group = parser.add_argument_group("model parameters")
    group.add_argument("--clusters", type=int, help="codebook size (default 23)")
    group.add_argument("--kmeans-runs", dest="kmeans_runs", type=int,
                       help="clustering runs per family (default 5)")
    group.add_argument("--tau", type=int, help="interframe gap (default 2)")
    group.add_argument("--epsilon", type=int,
                       help="noisy-cluster threshold (default 30)")
    group.add_argument("--lambda1", type=float)
    group.add_argument("--lambda2", type=float)
    group.add_argument("--lambda3", type=float)
    group.add_argument("--code-length", dest="code_length", type=int,
                       help="hash code bits (default 32)")
    group.add_argument("--atoms", type=int,
                       help="dictionary atoms (default 64)")
    group.add_argument("--mu0", type=float)
    group.add_argument("--rho", type=float)
    group.add_argument("--mu-max", dest="mu_max", type=float)
    group.add_argument("--max-iter", dest="max_iter", type=int)
    group.add_argument("--tol", type=float)
    group.add_argument("--ridge", type=float)


_CONFIG_FLAGS = (
    "dataset", "format", "joint_map", "name_pattern", "seed", "json_output",
    "clusters", "kmeans_runs", "tau", "epsilon", "lambda1", "lambda2",
    "lambda3", "code_length", "atoms", "mu0", "rho", "mu_max", "max_iter",
    "tol", "ridge", "protocol", "split_by", "train_subjects", "model", "out",
)


def _config_from_args(args):
    file_overrides = parse_config_file(args.config) if getattr(
        args, "config", None) else {}
    flag_overrides = {}
    for name in _CONFIG_FLAGS:
        if hasattr(args, name):
            flag_overrides[name] = getattr(args, name)
    subjects = flag_overrides.get("train_subjects")
    if isinstance(subjects, str):
        flag_overrides["train_subjects"] = tuple(
            int(tok) for tok in subjects.replace(",", " ").split()
        )
    return build_config(file_overrides, flag_overrides)


def _load_configured_dataset(config):
    if not config.dataset:
        raise ConfigError("--dataset is required")
    joint_map = load_joint_map(config.joint_map) if config.joint_map else None
    dataset, problems = load_dataset(
        config.dataset, config.format, joint_map, config.name_pattern
    )
    for problem in problems:
        print(f"warning: {problem}", file=sys.stderr)
    if problems:
        print(f"warning: {len(problems)} files skipped", file=sys.stderr)
    return dataset


def cmd_train(args):
    config = _config_from_args(args)
    if not config.out:
        raise ConfigError("--out is required (model file to write)")
    dataset = _load_configured_dataset(config)
    model, state = fit(dataset, config)
    print("iter  objective      flipped")
    for i, (obj, flip) in enumerate(zip(state.objective_trace,
                                        state.flip_trace), 1):
        print(f"{i:4d}  {obj:13.6e}  {flip:.4f}")
    print(f"stopped after {state.iterations} iterations "
          f"(final flip fraction {state.flip_trace[-1]:.2e})")
    path = save_model(model, config.out)
    print(f"model written to {path}")
    return 0


def cmd_predict(args):
    config = _config_from_args(args)
    if not config.model:
        raise ConfigError("--model is required")
    model = load_model(config.model)
    seq = load_canonical(args.sequence)
    label = predict(seq, model)
    if model.class_names and label - 1 < len(model.class_names):
        print(f"{label}\t{model.class_names[label - 1]}")
    else:
        print(label)
    return 0


def cmd_evaluate(args):
    config = _config_from_args(args)
    dataset = _load_configured_dataset(config)
    model = load_model(config.model) if config.model else None
    report = run_protocol(dataset, config, model)
    if config.json_output:
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        print(report.to_text())
    return 0


def cmd_benchmark(args):
    config = _config_from_args(args)
    if not config.model:
        raise ConfigError("--model is required")
    model = load_model(config.model)
    dataset = _load_configured_dataset(config)
    report = benchmark_model(model, dataset.sequences)
    if config.json_output:
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        print(report.to_text())
    return 0


def cmd_sweep(args):
    config = _config_from_args(args)
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(
            f"unknown sweep parameter {args.param!r}; expected one of "
            f"{', '.join(sorted(SWEEP_PARAMS))}"
        )
    cast = SWEEP_PARAMS[args.param]
    try:
        values = [cast(tok) for tok in args.values.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad sweep value: {exc}") from None
    if not values:
        raise ConfigError("no sweep values given")
    dataset = _load_configured_dataset(config)
    rows = []
    for value in values:
        report = run_protocol(dataset, replace(config, **{args.param: value}))
        rows.append({"param": args.param, "value": value,
                     "accuracy": report.accuracy})
    if config.json_output:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{args.param}\taccuracy")
        for row in rows:
            print(f"{row['value']}\t{row['accuracy']:.2f}")
    return 0


def build_parser():
    parser = _Parser(
        prog="skelhash",
        description="Skeleton action recognition with aggregated offset "
                    "features and learned binary codes.",
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_train = sub.add_parser("train", help="train a model on a dataset")
    _add_common(p_train)
    p_train.add_argument("--out", help="model file to write")
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="classify one sequence file")
    p_predict.add_argument("sequence", help="canonical sequence file")
    p_predict.add_argument("--model", required=True)
    p_predict.add_argument("--config", help="flat key = value config file")
    p_predict.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="run an evaluation protocol")
    _add_common(p_eval)
    p_eval.add_argument("--model", help="evaluate an existing model "
                        "(cross-subject only)")
    p_eval.add_argument("--protocol",
                        choices=("cross-subject", "leave-one-subject-out"))
    p_eval.add_argument("--split-by", dest="split_by",
                        choices=("subject", "class-half"))
    p_eval.add_argument("--train-subjects", dest="train_subjects",
                        help="comma-separated subject ids for training")
    p_eval.set_defaults(func=cmd_evaluate)

    p_bench = sub.add_parser("benchmark", help="time the testing phases")
    _add_common(p_bench)
    p_bench.add_argument("--model", required=True)
    p_bench.set_defaults(func=cmd_benchmark)

    p_sweep = sub.add_parser("sweep", help="re-evaluate over parameter values")
    _add_common(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         help=f"one of {', '.join(sorted(SWEEP_PARAMS))}")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.add_argument("--protocol",
                         choices=("cross-subject", "leave-one-subject-out"))
    p_sweep.add_argument("--split-by", dest="split_by",
                         choices=("subject", "class-half"))
    p_sweep.add_argument("--train-subjects", dest="train_subjects")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SkelHashError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
