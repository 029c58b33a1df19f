"""Command-line surface: train, grid-eps, roc, gradcheck, dataset-info.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure (gradient check, non-finite values, shape faults).
"""

import argparse
import sys

from . import gradcheck as gradcheck_mod
from .data import dataset_info, load_dataset, load_split
from .errors import ConfigError, DataError, NumericalError, ShapeError
from .runner import (
    MODEL_NAMES,
    RunConfig,
    grid_eps_experiment,
    load_trained_model,
    roc_report,
    run_experiment,
)

AGGREGATION_FLAGS = {"weighted": "weighted", "concat-reduce": "concat_reduce", "mean": "mean", "sum": "sum"}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> _Parser:
    parser = _Parser(prog="cagnn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    train = sub.add_parser("train", help="train a model and write a metrics report")
    train.add_argument("--model", required=True, choices=MODEL_NAMES)
    train.add_argument("--dataset", required=True, metavar="DIR")
    train.add_argument("--split", required=True, choices=("supervised", "semi"))
    train.add_argument(
        "--self-loops",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="default: on for supervised, off for semi",
    )
    train.add_argument("--epsilon", type=float, default=0.5, metavar="F", help="content-graph threshold (augss)")
    train.add_argument("--fusion", choices=("concat", "sum", "max"), default="concat")
    train.add_argument("--aggregation", choices=tuple(AGGREGATION_FLAGS), default="weighted")
    train.add_argument("--seed", type=int, required=True, metavar="N")
    train.add_argument("--runs", type=int, default=1, metavar="N")
    train.add_argument("--epochs", type=int, default=200, metavar="N")
    train.add_argument("--out", required=True, metavar="FILE")
    train.add_argument("--save-model", metavar="FILE", help="also save the final run's weights")
    train.set_defaults(func=_cmd_train)

    grid = sub.add_parser("grid-eps", help="sweep the content-graph threshold (augss models)")
    grid.add_argument("--dataset", required=True, metavar="DIR")
    grid.add_argument("--model", required=True, metavar="M")
    grid.add_argument("--min", type=float, required=True, metavar="F")
    grid.add_argument("--max", type=float, required=True, metavar="F")
    grid.add_argument("--step", type=float, required=True, metavar="F")
    grid.add_argument("--seed", type=int, required=True, metavar="N")
    grid.add_argument("--epochs", type=int, default=200, metavar="N")
    grid.add_argument("--out", required=True, metavar="FILE")
    grid.set_defaults(func=_cmd_grid_eps)

    roc = sub.add_parser("roc", help="write per-class ROC curves of a saved model")
    roc.add_argument("--model-file", required=True, metavar="FILE")
    roc.add_argument("--dataset", required=True, metavar="DIR")
    roc.add_argument("--split-file", required=True, metavar="FILE")
    roc.add_argument("--out", required=True, metavar="FILE.csv")
    roc.set_defaults(func=_cmd_roc)

    grad = sub.add_parser("gradcheck", help="finite-difference checks of every backward pass")
    grad.add_argument("--module", choices=gradcheck_mod.MODULES + ("all",), default="all")
    grad.add_argument("--seeds", type=int, default=20, metavar="N")
    grad.set_defaults(func=_cmd_gradcheck)

    info = sub.add_parser("dataset-info", help="print dataset statistics")
    info.add_argument("directory", metavar="DIR")
    info.set_defaults(func=_cmd_dataset_info)

    return parser


def _cmd_train(args) -> int:
    config = RunConfig(
        model=args.model,
        dataset=args.dataset,
        split=args.split,
        self_loops=args.self_loops,
        seed=args.seed,
        runs=args.runs,
        epochs=args.epochs,
        epsilon=args.epsilon,
        fusion=args.fusion,
        aggregation=AGGREGATION_FLAGS[args.aggregation],
        out=args.out,
        save_model=args.save_model,
    )
    graph = load_dataset(args.dataset)
    report = run_experiment(graph, config)
    agg = report["aggregate"]["accuracy"]
    print(f"{args.model} on {report['dataset_name']} ({args.split}): "
          f"accuracy {agg['mean']:.2f} +- {agg['std']:.2f} over {config.runs} run(s)")
    print(f"report written to {args.out}")
    return 0


def _cmd_grid_eps(args) -> int:
    graph = load_dataset(args.dataset)
    report = grid_eps_experiment(
        graph,
        args.model,
        getattr(args, "min"),
        getattr(args, "max"),
        args.step,
        args.seed,
        epochs=args.epochs,
        out=args.out,
    )
    best = report["best"]
    print(f"best epsilon {best['epsilon']} (validation accuracy {best['best_val_accuracy']:.2f})")
    print(f"report written to {args.out}")
    return 0


def _cmd_roc(args) -> int:
    graph = load_dataset(args.dataset)
    split = load_split(args.split_file, graph.num_nodes)
    model = load_trained_model(args.model_file, graph)
    curves = roc_report(model, graph, split.test, args.out)
    print(f"wrote ROC curves for {len(curves)} class(es) to {args.out}")
    return 0


def _cmd_gradcheck(args) -> int:
    results = gradcheck_mod.run_suite(args.module, seeds=args.seeds)
    failures = 0
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"{status:4s} {r.name}: max relative error {r.max_error:.3e} (tolerance {r.tolerance:g})")
        failures += 0 if r.passed else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    if failures:
        raise NumericalError(f"{failures} gradient check(s) exceeded tolerance")
    return 0


def _cmd_dataset_info(args) -> int:
    info = dataset_info(load_dataset(args.directory))
    width = max(len(k) for k in info)
    for key, value in info.items():
        print(f"{key:<{width}}  {value}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"cagnn: error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"cagnn: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ShapeError) as exc:
        print(f"cagnn: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"cagnn: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
