"""Experiment orchestration: multi-run training, reports, model files.

A run configuration names one model and dataset; ``run_experiment``
executes ``runs`` independent trainings with seeds seed, seed+1, ... —
each run draws its own split from its seed — aggregates the per-run
metrics, and writes a JSON report. Reports are bitwise reproducible
apart from the wall-clock fields.
"""

import json
import os
import time
from dataclasses import dataclass

import numpy as np

from . import augs, augss
from .backbone import BackboneClassifier
from .data import make_split
from .errors import ConfigError, DataError
from .graph import Graph, build_content_graph
from .metrics import aggregate_runs, roc_csv, roc_curve
from .rng import STREAM_INIT, make_rng
from .serialize import (
    MAGIC_AUGS,
    MAGIC_AUGSS,
    MAGIC_AUTOENCODER,
    MAGIC_BACKBONE,
    assign_tensors,
    load_model_file,
    save_model_file,
)
from .trainer import evaluate, train_fullbatch, train_minibatch

MODEL_NAMES = (
    "gcn",
    "gat",
    "gatv2",
    "augs-gcn",
    "augs-gat",
    "augs-gatv2",
    "augss-gcn",
    "augss-gat",
    "augss-gatv2",
    "mlp",
    "skip-gcn",
    "skip-gat",
    "skip-gatv2",
    "linkx",
)

# Without an explicit flag, supervised runs add self-loops (they help there)
# and semi-supervised runs leave them off.
def resolve_self_loops(flag: bool | None, split_mode: str) -> bool:
    if flag is not None:
        return flag
    return split_mode == "supervised"


@dataclass
class RunConfig:
    model: str
    dataset: str = ""
    split: str = "supervised"
    self_loops: bool | None = None
    seed: int = 0
    runs: int = 1
    epochs: int = 200
    batch_size: int = 32
    epsilon: float = 0.5
    fusion: str = "concat"
    aggregation: str = "weighted"
    out: str | None = None
    save_model: str | None = None

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model '{self.model}' (choose from {', '.join(MODEL_NAMES)})")
        if self.split not in ("supervised", "semi"):
            raise ConfigError(f"unknown split mode '{self.split}'")
        if self.runs < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("runs, epochs, and batch_size must be at least 1")


BASELINE_DROPOUT = {"supervised": 0.05, "semi": 0.5}


def train_single(graph: Graph, config: RunConfig, seed: int):
    """One full training run at this seed; returns (model, metrics record)."""
    split = make_split(graph, config.split, seed)
    self_loops = resolve_self_loops(config.self_loops, config.split)
    name = config.model

    if name.startswith("augss-"):
        model_config = augss.AugssConfig(
            backbone=name.removeprefix("augss-"),
            epsilon=config.epsilon,
            aggregation=config.aggregation,
            epochs=config.epochs,
            seed=seed,
            self_loops=self_loops,
        )
        return augss.train_augss(graph, split, model_config)

    if name.startswith("augs-") or name == "mlp":
        model_config = augs.AugsConfig(
            backbone=name.removeprefix("augs-") if name != "mlp" else "gcn",
            self_loops=self_loops,
            fusion=config.fusion,
            epochs=config.epochs,
            batch_size=config.batch_size,
            seed=seed,
        )
        if name == "mlp":
            return augs.train_baseline_mlp(graph, split, model_config)
        return augs.train_augs(graph, split, model_config)

    # plain backbones: protocol follows the split mode
    model = BackboneClassifier(
        name,
        graph,
        make_rng(seed, STREAM_INIT),
        self_loops=self_loops,
        dropout_rate=BASELINE_DROPOUT[config.split],
    )
    if config.split == "semi":
        history = train_fullbatch(
            model, graph.labels, split.train, split.validation, epochs=config.epochs, seed=seed,
        )
    else:
        history = train_minibatch(
            model, graph.labels, split.train,
            epochs=config.epochs, batch_size=config.batch_size, seed=seed,
        )
    record = evaluate(model, graph.labels, split.test, graph.num_classes)
    record["train_loss_first"] = history["train_loss"][0]
    record["train_loss_last"] = history["train_loss"][-1]
    if "best_epoch" in history:
        record["best_epoch"] = history["best_epoch"]
    return model, record


def run_experiment(graph: Graph, config: RunConfig) -> dict:
    """Train ``config.runs`` times, aggregate, optionally write report/model."""
    records = []
    last_model = None
    total_start = time.perf_counter()
    for i in range(config.runs):
        seed = config.seed + i
        run_start = time.perf_counter()
        last_model, record = train_single(graph, config, seed)
        record = {"seed": seed, **record, "seconds": time.perf_counter() - run_start}
        records.append(record)
    aggregate_keys = ("accuracy", "macro_f1", "macro_auc")
    report_metrics = aggregate_runs([{k: r[k] for k in aggregate_keys} for r in records])
    report = {
        "config": {
            "model": config.model,
            "dataset": config.dataset,
            "split": config.split,
            "self_loops": resolve_self_loops(config.self_loops, config.split),
            "seed": config.seed,
            "runs": config.runs,
            "epochs": config.epochs,
            "batch_size": config.batch_size,
            "epsilon": config.epsilon,
            "fusion": config.fusion,
            "aggregation": config.aggregation,
        },
        "dataset_name": graph.name,
        "runs": records,
        "aggregate": {
            key: {"mean": report_metrics.mean[key], "std": report_metrics.std[key]}
            for key in aggregate_keys
        },
        "total_seconds": time.perf_counter() - total_start,
    }
    if config.out:
        write_report(report, config.out)
    if config.save_model and last_model is not None:
        save_trained_model(last_model, config.save_model)
    return report


def write_report(report: dict, path: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def strip_wall_clock(report: dict) -> dict:
    """Report with timing fields removed, for bitwise determinism checks."""
    out = json.loads(json.dumps(report))
    out.pop("total_seconds", None)
    for record in out.get("runs", []):
        record.pop("seconds", None)
    return out


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------


def save_trained_model(model, path: str) -> None:
    config = model.container()
    tensors = [p.value for p in model.params()]
    if config["family"] == "augs":
        magic = MAGIC_AUGS
        tensors = tensors + [p.value for p in model.autoencoder.params()]
    elif config["family"] == "augss":
        magic = MAGIC_AUGSS
    else:
        magic = MAGIC_BACKBONE
    save_model_file(path, magic, config, tensors)


def save_autoencoder(model, path: str) -> None:
    config = {"family": "autoencoder", "layer_sizes": list(model.spec.layer_sizes), "d_bot": model.spec.d_bot}
    save_model_file(path, MAGIC_AUTOENCODER, config, [p.value for p in model.params()])


def load_trained_model(path: str, graph: Graph):
    """Rebuild a serialized model against the given dataset."""
    from .autoencoder import AutoencoderModel, AutoencoderSpec

    magic, config, tensors = load_model_file(path)
    rng = make_rng(0, STREAM_INIT)  # values are overwritten below
    if magic == MAGIC_BACKBONE:
        if config["model"] == "mlp":
            model = augs.MlpClassifier(
                graph, rng, head_hidden=config["width"], dropout_rate=config["dropout"]
            )
        else:
            model = BackboneClassifier(
                config["model"],
                graph,
                rng,
                width=config["width"],
                self_loops=config["self_loops"],
                dropout_rate=config["dropout"],
            )
        assign_tensors(model.params(), tensors, path)
        return model
    if magic == MAGIC_AUGS:
        spec = AutoencoderSpec(layer_sizes=list(config["autoencoder_sizes"]), d_bot=config["bottleneck"])
        ae = AutoencoderModel(spec, rng)
        count = config["model_tensor_count"]
        assign_tensors(ae.params(), tensors[count:], path)
        model_config = augs.AugsConfig(
            backbone=config["backbone"],
            self_loops=config["self_loops"],
            fusion=config["fusion"],
            gnn_layers=config["gnn_layers"],
            hidden_width=config["hidden_width"],
            head_hidden=config["head_hidden"],
            bottleneck=config["bottleneck"],
            dropout_body=config["dropout_body"],
            dropout_head=config["dropout_head"],
        )
        model = augs.AugsModel(graph, model_config, ae, rng)
        assign_tensors(model.params(), tensors[:count], path)
        return model
    if magic == MAGIC_AUGSS:
        model_config = augss.AugssConfig(
            backbone=config["backbone"],
            epsilon=config["epsilon"],
            aggregation=config["aggregation"],
            hidden_width=config["hidden_width"],
            self_loops=config["self_loops"],
        )
        model = augss.AugssModel(graph, model_config, rng)
        assign_tensors(model.params(), tensors, path)
        return model
    if magic == MAGIC_AUTOENCODER:
        spec = AutoencoderSpec(layer_sizes=list(config["layer_sizes"]), d_bot=config["d_bot"])
        ae = AutoencoderModel(spec, rng)
        assign_tensors(ae.params(), tensors, path)
        return ae
    raise DataError(f"{path}: unsupported container magic {magic!r}")


# ---------------------------------------------------------------------------
# Threshold grid and ROC emission
# ---------------------------------------------------------------------------


def grid_eps_experiment(
    graph: Graph,
    model_name: str,
    eps_min: float,
    eps_max: float,
    step: float,
    seed: int,
    *,
    epochs: int = 200,
    self_loops: bool | None = None,
    out: str | None = None,
) -> dict:
    """Train once per threshold on the grid; best point by validation accuracy.

    Ties go to the smaller threshold. A grid point whose content graph
    fails (for example a zero-degree node without self-loops) is recorded
    with its error instead of aborting the sweep.
    """
    if not model_name.startswith("augss-"):
        raise ConfigError("grid-eps applies to the augss-* models (the content-graph threshold)")
    if step <= 0 or eps_max < eps_min:
        raise ConfigError("grid needs step > 0 and max >= min")
    values = []
    k = 0
    while True:
        eps = round(eps_min + k * step, 10)
        if eps > eps_max + 1e-12:
            break
        values.append(min(eps, 1.0))
        k += 1
    entries = []
    best = None
    for eps in values:
        split = make_split(graph, "semi", seed)
        config = augss.AugssConfig(
            backbone=model_name.removeprefix("augss-"),
            epsilon=eps,
            epochs=epochs,
            seed=seed,
            self_loops=resolve_self_loops(self_loops, "semi"),
        )
        start = time.perf_counter()
        try:
            _, record = augss.train_augss(graph, split, config)
        except DataError as exc:
            entries.append({"epsilon": eps, "error": str(exc)})
            continue
        entry = {"epsilon": eps, **record, "seconds": time.perf_counter() - start}
        entries.append(entry)
        if best is None or entry["best_val_accuracy"] > best["best_val_accuracy"]:
            best = entry
    report = {
        "config": {
            "model": model_name,
            "min": eps_min,
            "max": eps_max,
            "step": step,
            "seed": seed,
            "epochs": epochs,
        },
        "dataset_name": graph.name,
        "grid": entries,
        "best": best,
    }
    if out:
        write_report(report, out)
    return report


def roc_report(model, graph: Graph, test_idx: np.ndarray, out_path: str) -> dict[int, object]:
    """Per-class one-vs-rest ROC curves over the test rows, written as CSV."""
    probs = model.forward(training=False, rng=None)[test_idx]
    labels = graph.labels[test_idx]
    curves = {}
    for k in range(graph.num_classes):
        mask = labels == k
        if not mask.any() or mask.all():
            continue  # curve undefined without both positives and negatives
        curves[k] = roc_curve(probs[:, k], mask)
    if not curves:
        raise DataError("no class in the test split admits an ROC curve")
    tmp = out_path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(roc_csv(curves))
    os.replace(tmp, out_path)
    return curves
