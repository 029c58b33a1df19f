"""Plain two-layer graph classifiers: gcn, gat, gatv2, their skip variants,
and the feature-projection (linkx) variant.

Skip variants start with a width-matching linear projection of the input
features so the residual addition is defined from the first propagation
layer on; the final layer changes width to the class count and stays
plain. LinkX layers add a trained projection of the raw features at
every layer.
"""

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .graph import Graph, neighbor_arrays, symmetric_normalize, with_self_loops
from .layers import GatLayer, GcnLayer, LinkxLayer, Residual
from .nn import Linear, dropout_mask, softmax_rows

GRAPH_KINDS = ("gcn", "gat", "gatv2")


def propagation_context(kind: str, adjacency: sp.csr_matrix, self_loops: bool):
    """What a propagation layer's forward consumes for this adjacency.

    GCN takes the symmetrically normalized matrix, honoring the self-loop
    flag. Attention layers take edge arrays and always self-loop so no
    softmax runs over an empty neighborhood.
    """
    if kind == "gcn":
        return symmetric_normalize(with_self_loops(adjacency) if self_loops else adjacency)
    if kind in ("gat", "gatv2"):
        return neighbor_arrays(with_self_loops(adjacency))
    raise ConfigError(f"unknown backbone '{kind}'")


def make_propagation_layer(kind: str, d_in: int, d_out: int, rng, activation: str, name: str):
    if kind == "gcn":
        return GcnLayer(d_in, d_out, rng, activation=activation, name=name)
    if kind in ("gat", "gatv2"):
        return GatLayer(d_in, d_out, rng, variant=kind, activation=activation, name=name)
    raise ConfigError(f"unknown backbone '{kind}'")


class BackboneClassifier:
    """Two propagation layers to class probabilities over a fixed graph."""

    KINDS = ("gcn", "gat", "gatv2", "skip-gcn", "skip-gat", "skip-gatv2", "linkx")

    def __init__(
        self,
        kind: str,
        graph: Graph,
        rng: np.random.Generator,
        *,
        width: int = 64,
        self_loops: bool = True,
        dropout_rate: float = 0.05,
    ):
        if kind not in self.KINDS:
            raise ConfigError(f"unknown model '{kind}'")
        self.kind = kind
        self.width = width
        self.self_loops = self_loops
        self.dropout_rate = dropout_rate
        self.is_skip = kind.startswith("skip-")
        self.is_linkx = kind == "linkx"
        base = "gcn" if self.is_linkx else kind.removeprefix("skip-")
        self.base = base

        self.features = graph.features
        self.labels = graph.labels
        self.num_classes = graph.num_classes
        self.ctx = propagation_context(base, graph.adjacency, self_loops)
        d = graph.num_features
        c = graph.num_classes

        self.proj = None
        if self.is_skip:
            self.proj = Linear(d, width, rng, name="proj")
            self.layer1 = Residual(make_propagation_layer(base, width, width, rng, "relu", "layer1"))
            self.layer2 = make_propagation_layer(base, width, c, rng, "identity", "layer2")
        elif self.is_linkx:
            self.layer1 = LinkxLayer(d, width, d, rng, activation="relu", name="layer1")
            self.layer2 = LinkxLayer(width, c, d, rng, activation="identity", name="layer2")
        else:
            self.layer1 = make_propagation_layer(base, d, width, rng, "relu", "layer1")
            self.layer2 = make_propagation_layer(base, width, c, rng, "identity", "layer2")

    def params(self):
        out = []
        if self.proj is not None:
            out.extend(self.proj.params())
        out.extend(self.layer1.params())
        out.extend(self.layer2.params())
        return out

    def forward(self, training: bool, rng) -> np.ndarray:
        self._caches = {"proj": {}, "layer1": {}, "layer2": {}, "mask": None}
        h = self.features
        if self.proj is not None:
            h = self.proj.forward(h, self._caches["proj"])
        if self.is_linkx:
            h = self.layer1.forward(self.ctx, h, self.features, self._caches["layer1"])
        else:
            h = self.layer1.forward(self.ctx, h, self._caches["layer1"])
        if training and self.dropout_rate > 0.0:
            mask = dropout_mask(h.shape, self.dropout_rate, rng)
            self._caches["mask"] = mask
            h = h * mask
        if self.is_linkx:
            logits = self.layer2.forward(self.ctx, h, self.features, self._caches["layer2"])
        else:
            logits = self.layer2.forward(self.ctx, h, self._caches["layer2"])
        return softmax_rows(logits)

    def backward(self, dlogits: np.ndarray) -> None:
        dh = self.layer2.backward(self._caches["layer2"], dlogits)
        if self._caches["mask"] is not None:
            dh = dh * self._caches["mask"]
        dh = self.layer1.backward(self._caches["layer1"], dh, need_input_grad=self.proj is not None)
        if self.proj is not None:
            self.proj.backward(self._caches["proj"], dh, need_input_grad=False)

    def container(self) -> dict:
        """Config JSON for the serialized model file."""
        return {
            "family": "backbone",
            "model": self.kind,
            "width": self.width,
            "self_loops": self.self_loops,
            "dropout": self.dropout_rate,
            "num_classes": self.num_classes,
        }
