"""Supervised content-augmented pipeline and its MLP baseline.

Two training stages. Stage 1 fits the autoencoder on training-node
feature rows only, so no test information leaks into the content
embedding. Stage 2 freezes it and trains the structural branch, the
combination layer, and the prediction head jointly with mini-batch cross
entropy: every batch runs a full-graph forward (message passing needs
all nodes) and the loss covers just that batch's labeled nodes.

Fusion concatenates, sums, or maxes the structural and content
embeddings per node; a single ReLU linear layer then reduces the fused
vector back to the hidden width before the head. In the concat layout
the structural coordinates come first.
"""

from dataclasses import dataclass, field

import numpy as np

from .autoencoder import AutoencoderModel, train_autoencoder
from .backbone import make_propagation_layer, propagation_context
from .errors import ConfigError, check_shapes
from .graph import Graph
from .nn import AdamConfig, Linear, dropout_mask, relu, relu_grad, softmax_rows
from .rng import STREAM_AUTOENCODER, STREAM_INIT, make_rng
from .trainer import evaluate, train_fullbatch, train_minibatch

FUSION_MODES = ("concat", "sum", "max")


@dataclass
class AugsConfig:
    backbone: str = "gcn"
    self_loops: bool = True
    fusion: str = "concat"
    gnn_layers: int = 2
    hidden_width: int = 64
    head_hidden: int = 16
    bottleneck: int = 64
    epochs: int = 200
    batch_size: int = 32
    dropout_body: float = 0.05
    dropout_head: float = 0.2
    adam: AdamConfig = field(default_factory=AdamConfig)
    seed: int = 0

    def __post_init__(self):
        if self.backbone not in ("gcn", "gat", "gatv2"):
            raise ConfigError(f"unknown backbone '{self.backbone}'")
        if self.fusion not in FUSION_MODES:
            raise ConfigError(f"unknown fusion mode '{self.fusion}'")
        for name in ("gnn_layers", "hidden_width", "head_hidden", "bottleneck", "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        for name in ("dropout_body", "dropout_head"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1), got {rate}")


def fuse(h_struct: np.ndarray, h_content: np.ndarray, mode: str) -> np.ndarray:
    """Row-wise fusion of the two embeddings; sum/max need equal widths."""
    check_shapes(
        h_struct.shape[0] == h_content.shape[0],
        f"{h_struct.shape[0]} structural rows vs {h_content.shape[0]} content rows",
    )
    if mode == "concat":
        return np.concatenate([h_struct, h_content], axis=1)
    check_shapes(
        h_struct.shape[1] == h_content.shape[1],
        f"{mode} fusion needs equal widths, got {h_struct.shape[1]} and {h_content.shape[1]}",
    )
    if mode == "sum":
        return h_struct + h_content
    if mode == "max":
        return np.maximum(h_struct, h_content)
    raise ConfigError(f"unknown fusion mode '{mode}'")


class PredictionHead:
    """Two ReLU hidden layers and a linear output to class logits."""

    def __init__(self, d_in: int, hidden: int, num_classes: int, rng, dropout_rate: float = 0.2):
        self.hidden1 = Linear(d_in, hidden, rng, name="head1")
        self.hidden2 = Linear(hidden, hidden, rng, name="head2")
        self.out = Linear(hidden, num_classes, rng, name="head_out")
        self.dropout_rate = dropout_rate

    def params(self):
        return self.hidden1.params() + self.hidden2.params() + self.out.params()

    def forward(self, x, training: bool, rng) -> np.ndarray:
        self._caches = []
        h = x
        for layer in (self.hidden1, self.hidden2):
            c: dict = {}
            pre = layer.forward(h, c)
            c["pre"] = pre
            h = relu(pre)
            if training and self.dropout_rate > 0.0:
                c["mask"] = dropout_mask(h.shape, self.dropout_rate, rng)
                h = h * c["mask"]
            else:
                c["mask"] = None
            self._caches.append((layer, c))
        out_cache: dict = {}
        logits = self.out.forward(h, out_cache)
        self._caches.append((self.out, out_cache))
        return logits

    def backward(self, dlogits: np.ndarray, need_input_grad: bool = True):
        out_layer, out_cache = self._caches[-1]
        dh = out_layer.backward(out_cache, dlogits)
        for i, (layer, c) in enumerate(reversed(self._caches[:-1])):
            if c["mask"] is not None:
                dh = dh * c["mask"]
            dh = dh * relu_grad(c["pre"])
            last = i == len(self._caches) - 2
            dh = layer.backward(c, dh, need_input_grad=need_input_grad or not last)
        return dh


class AugsModel:
    """Structural GNN branch + frozen autoencoder content branch, fused."""

    def __init__(self, graph: Graph, config: AugsConfig, autoencoder: AutoencoderModel, rng):
        self.config = config
        self.autoencoder = autoencoder
        self.features = graph.features
        self.num_classes = graph.num_classes
        self.ctx = propagation_context(config.backbone, graph.adjacency, config.self_loops)

        w = config.hidden_width
        sizes = [graph.num_features] + [w] * config.gnn_layers
        self.body = [
            make_propagation_layer(config.backbone, sizes[i], sizes[i + 1], rng, "relu", f"body{i}")
            for i in range(config.gnn_layers)
        ]
        # content branch is frozen, so its embedding is a constant of the run
        self.content = autoencoder.encode(self.features)
        fused_width = w + self.content.shape[1] if config.fusion == "concat" else w
        self.combiner = Linear(fused_width, w, rng, name="combiner")
        self.head = PredictionHead(w, config.head_hidden, graph.num_classes, rng, config.dropout_head)

    def params(self):
        out = []
        for layer in self.body:
            out.extend(layer.params())
        out.extend(self.combiner.params())
        out.extend(self.head.params())
        return out  # autoencoder params excluded: frozen in stage 2

    def forward(self, training: bool, rng) -> np.ndarray:
        self._body_caches = []
        h = self.features
        for layer in self.body:
            c: dict = {}
            h = layer.forward(self.ctx, h, c)
            if training and self.config.dropout_body > 0.0:
                c["mask"] = dropout_mask(h.shape, self.config.dropout_body, rng)
                h = h * c["mask"]
            else:
                c["mask"] = None
            self._body_caches.append((layer, c))
        self._h_struct = h
        fused = fuse(h, self.content, self.config.fusion)
        self._combiner_cache = {}
        z_pre = self.combiner.forward(fused, self._combiner_cache)
        self._z_pre = z_pre
        logits = self.head.forward(relu(z_pre), training, rng)
        return softmax_rows(logits)

    def backward(self, dlogits: np.ndarray) -> None:
        dz = self.head.backward(dlogits)
        dz = dz * relu_grad(self._z_pre)
        dfused = self.combiner.backward(self._combiner_cache, dz)
        w = self.config.hidden_width
        if self.config.fusion == "concat":
            dh = dfused[:, :w]
        elif self.config.fusion == "sum":
            dh = dfused
        else:  # max: route to the structural side where it won (ties included)
            dh = dfused * (self._h_struct >= self.content)
        for i, (layer, c) in enumerate(reversed(self._body_caches)):
            if c["mask"] is not None:
                dh = dh * c["mask"]
            dh = layer.backward(c, dh, need_input_grad=i != len(self._body_caches) - 1)

    def container(self) -> dict:
        cfg = self.config
        return {
            "family": "augs",
            "model": f"augs-{cfg.backbone}",
            "backbone": cfg.backbone,
            "self_loops": cfg.self_loops,
            "fusion": cfg.fusion,
            "gnn_layers": cfg.gnn_layers,
            "hidden_width": cfg.hidden_width,
            "head_hidden": cfg.head_hidden,
            "bottleneck": cfg.bottleneck,
            "dropout_body": cfg.dropout_body,
            "dropout_head": cfg.dropout_head,
            "num_classes": self.num_classes,
            "autoencoder_sizes": list(self.autoencoder.spec.layer_sizes),
            "model_tensor_count": len(self.params()),
        }


def train_augs(graph: Graph, split, config: AugsConfig):
    """Two-stage supervised training; returns (model, run record)."""
    if split.train.size == 0:
        raise ConfigError("training split is empty")
    seed = config.seed
    ae = train_autoencoder(
        graph.features[split.train],
        make_rng(seed, STREAM_AUTOENCODER),
        epochs=config.epochs,
        batch_size=config.batch_size,
        adam=config.adam,
        d_bot=config.bottleneck,
    )
    model = AugsModel(graph, config, ae, make_rng(seed, STREAM_INIT))
    history = train_minibatch(
        model,
        graph.labels,
        split.train,
        epochs=config.epochs,
        batch_size=config.batch_size,
        seed=seed,
        adam=config.adam,
    )
    record = evaluate(model, graph.labels, split.test, graph.num_classes)
    record["train_loss_first"] = history["train_loss"][0]
    record["train_loss_last"] = history["train_loss"][-1]
    return model, record


class MlpClassifier:
    """Content-only baseline: raw features straight into the head."""

    def __init__(self, graph: Graph, rng, *, head_hidden: int = 16, dropout_rate: float = 0.2):
        self.features = graph.features
        self.num_classes = graph.num_classes
        self.head_hidden = head_hidden
        self.dropout_rate = dropout_rate
        self.head = PredictionHead(graph.num_features, head_hidden, graph.num_classes, rng, dropout_rate)

    def params(self):
        return self.head.params()

    def forward(self, training: bool, rng) -> np.ndarray:
        return softmax_rows(self.head.forward(self.features, training, rng))

    def backward(self, dlogits: np.ndarray) -> None:
        self.head.backward(dlogits, need_input_grad=False)

    def container(self) -> dict:
        return {
            "family": "backbone",
            "model": "mlp",
            "width": self.head_hidden,
            "self_loops": False,
            "dropout": self.dropout_rate,
            "num_classes": self.num_classes,
        }


def train_baseline_mlp(graph: Graph, split, config: AugsConfig):
    """Feature-only baseline under the same protocol as train_augs.

    In semi-supervised splits (validation present) it trains full-batch
    with validation selection so comparisons against the other
    semi-supervised models stay like for like.
    """
    if split.train.size == 0:
        raise ConfigError("training split is empty")
    seed = config.seed
    model = MlpClassifier(
        graph,
        make_rng(seed, STREAM_INIT),
        head_hidden=config.head_hidden,
        dropout_rate=config.dropout_head,
    )
    if split.validation.size:
        history = train_fullbatch(
            model, graph.labels, split.train, split.validation,
            epochs=config.epochs, seed=seed, adam=config.adam,
        )
    else:
        history = train_minibatch(
            model, graph.labels, split.train,
            epochs=config.epochs, batch_size=config.batch_size, seed=seed, adam=config.adam,
        )
    record = evaluate(model, graph.labels, split.test, graph.num_classes)
    record["train_loss_first"] = history["train_loss"][0]
    record["train_loss_last"] = history["train_loss"][-1]
    if "best_epoch" in history:
        record["best_epoch"] = history["best_epoch"]
    return model, record
