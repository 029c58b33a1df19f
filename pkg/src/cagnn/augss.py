"""Semi-supervised content-augmented pipeline.

The same feature matrix feeds two parallel first-layer convolutions with
independent parameters: one over the input graph, one over a content
graph linking nodes whose feature cosine similarity exceeds a threshold.
The branch outputs are aggregated (trainable scalar weights, a reducing
linear layer over their concatenation, their mean, or their sum) and a
second convolution over the structural graph maps the result to class
scores. Training is full-batch; the epoch with the best validation
accuracy supplies the reported parameters.
"""

from dataclasses import dataclass, field

import numpy as np

from .backbone import make_propagation_layer, propagation_context
from .errors import ConfigError, check_shapes
from .graph import Graph, build_content_graph
from .nn import AdamConfig, Linear, Param, softmax_rows
from .rng import STREAM_INIT, make_rng
from .trainer import evaluate, train_fullbatch

AGGREGATION_MODES = ("weighted", "concat_reduce", "mean", "sum")


@dataclass
class AugssConfig:
    backbone: str = "gcn"
    epsilon: float = 0.5
    aggregation: str = "weighted"
    hidden_width: int = 64
    epochs: int = 200
    adam: AdamConfig = field(default_factory=AdamConfig)
    seed: int = 0
    self_loops: bool = False  # self-loops are optional in the semi-supervised setting

    def __post_init__(self):
        if self.backbone not in ("gcn", "gat", "gatv2"):
            raise ConfigError(f"unknown backbone '{self.backbone}'")
        if self.aggregation not in AGGREGATION_MODES:
            raise ConfigError(f"unknown aggregation mode '{self.aggregation}'")
        if not -1.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in [-1, 1], got {self.epsilon}")
        if self.hidden_width < 1 or self.epochs < 1:
            raise ConfigError("hidden_width and epochs must be at least 1")


def combine_weighted(h1: np.ndarray, h2: np.ndarray, w1: float, w2: float) -> np.ndarray:
    """Scalar-weighted branch combination w1*h1 + w2*h2."""
    check_shapes(h1.shape == h2.shape, f"branch shapes differ: {h1.shape} vs {h2.shape}")
    return w1 * h1 + w2 * h2


class AugssModel:
    """Parallel structural/content convolutions with trainable aggregation."""

    def __init__(self, graph: Graph, config: AugssConfig, rng, content: Graph | None = None):
        self.config = config
        self.features = graph.features
        self.num_classes = graph.num_classes
        if content is None:
            content = build_content_graph(graph, config.epsilon)
        self.content_graph = content
        kind = config.backbone
        self.struct_ctx = propagation_context(kind, graph.adjacency, config.self_loops)
        self.content_ctx = propagation_context(kind, content.adjacency, config.self_loops)

        d = graph.num_features
        w = config.hidden_width
        c = graph.num_classes
        self.conv1_struct = make_propagation_layer(kind, d, w, rng, "relu", "conv1_struct")
        self.conv1_content = make_propagation_layer(kind, d, w, rng, "relu", "conv1_content")
        self.w1 = self.w2 = None
        self.reduce = None
        if config.aggregation == "weighted":
            self.w1 = Param.of(np.array([[0.5]]), name="w1")
            self.w2 = Param.of(np.array([[0.5]]), name="w2")
        elif config.aggregation == "concat_reduce":
            self.reduce = Linear(2 * w, w, rng, name="reduce")
        self.conv2 = make_propagation_layer(kind, w, c, rng, "identity", "conv2")

    def params(self):
        out = self.conv1_struct.params() + self.conv1_content.params()
        if self.w1 is not None:
            out.extend([self.w1, self.w2])
        if self.reduce is not None:
            out.extend(self.reduce.params())
        out.extend(self.conv2.params())
        return out

    def forward(self, training: bool, rng) -> np.ndarray:
        self._c1, self._c2, self._c3 = {}, {}, {}
        h1 = self.conv1_struct.forward(self.struct_ctx, self.features, self._c1)
        h2 = self.conv1_content.forward(self.content_ctx, self.features, self._c2)
        self._h1, self._h2 = h1, h2
        mode = self.config.aggregation
        if mode == "weighted":
            h = combine_weighted(h1, h2, float(self.w1.value[0, 0]), float(self.w2.value[0, 0]))
        elif mode == "concat_reduce":
            self._reduce_cache = {}
            h = self.reduce.forward(np.concatenate([h1, h2], axis=1), self._reduce_cache)
        elif mode == "mean":
            h = 0.5 * (h1 + h2)
        else:
            h = h1 + h2
        logits = self.conv2.forward(self.struct_ctx, h, self._c3)
        return softmax_rows(logits)

    def backward(self, dlogits: np.ndarray) -> None:
        dh = self.conv2.backward(self._c3, dlogits)
        mode = self.config.aggregation
        if mode == "weighted":
            self.w1.grad[0, 0] += float(np.sum(dh * self._h1))
            self.w2.grad[0, 0] += float(np.sum(dh * self._h2))
            dh1 = float(self.w1.value[0, 0]) * dh
            dh2 = float(self.w2.value[0, 0]) * dh
        elif mode == "concat_reduce":
            dcat = self.reduce.backward(self._reduce_cache, dh)
            w = self.config.hidden_width
            dh1, dh2 = dcat[:, :w], dcat[:, w:]
        elif mode == "mean":
            dh1 = dh2 = 0.5 * dh
        else:
            dh1 = dh2 = dh
        self.conv1_struct.backward(self._c1, dh1, need_input_grad=False)
        self.conv1_content.backward(self._c2, dh2, need_input_grad=False)

    def container(self) -> dict:
        cfg = self.config
        return {
            "family": "augss",
            "model": f"augss-{cfg.backbone}",
            "backbone": cfg.backbone,
            "epsilon": cfg.epsilon,
            "aggregation": cfg.aggregation,
            "hidden_width": cfg.hidden_width,
            "self_loops": cfg.self_loops,
            "num_classes": self.num_classes,
        }


def train_augss(graph: Graph, split, config: AugssConfig):
    """Full-batch training with validation-epoch selection; returns (model, record)."""
    if split.train.size == 0:
        raise ConfigError("training split is empty")
    if split.validation.size == 0:
        raise ConfigError("the semi-supervised pipeline needs a validation split (use --split semi)")
    model = AugssModel(graph, config, make_rng(config.seed, STREAM_INIT))
    history = train_fullbatch(
        model,
        graph.labels,
        split.train,
        split.validation,
        epochs=config.epochs,
        seed=config.seed,
        adam=config.adam,
    )
    record = evaluate(model, graph.labels, split.test, graph.num_classes)
    record["train_loss_first"] = history["train_loss"][0]
    record["train_loss_last"] = history["train_loss"][-1]
    record["best_epoch"] = history["best_epoch"]
    record["best_val_accuracy"] = history["best_val_accuracy"]
    return model, record
