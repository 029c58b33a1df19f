"""MLP autoencoder for content embeddings.

The encoder halves the width layer by layer (ceil rounding) down to a
64-unit bottleneck; the decoder mirrors it back. Hidden layers use ReLU;
the bottleneck and the reconstruction output stay linear so embeddings
keep negative coordinates and the L2 target is unbounded. The bottleneck
activations are the content embedding used by the fusion models.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import DataError, check_shapes
from .nn import Adam, AdamConfig, Linear, relu, relu_grad


@dataclass
class AutoencoderSpec:
    """Encoder widths from d_input down to d_bot; decoder is the reverse."""

    layer_sizes: list[int]
    d_bot: int


def build_architecture(d_input: int, d_bot: int = 64) -> AutoencoderSpec:
    """Widths by repeated ceil-halving of d_input, final entry clamped to d_bot.

    For d_input <= d_bot the result is the two-entry list [d_input, d_bot].
    The length works out to ceil(log2(d_input / d_bot)) + 1 whenever
    d_input > d_bot.
    """
    if d_input < 1:
        raise ValueError("d_input must be at least 1")
    sizes = [d_input]
    current = d_input
    while True:
        current = math.ceil(current / 2)
        if current <= d_bot:
            sizes.append(d_bot)
            break
        sizes.append(current)
    return AutoencoderSpec(layer_sizes=sizes, d_bot=d_bot)


class AutoencoderModel:
    """Mirrored encoder/decoder MLP with biases on every layer."""

    def __init__(self, spec: AutoencoderSpec, rng: np.random.Generator):
        self.spec = spec
        sizes = spec.layer_sizes
        self.encoder = [
            Linear(sizes[i], sizes[i + 1], rng, name=f"encoder{i}") for i in range(len(sizes) - 1)
        ]
        reverse = sizes[::-1]
        self.decoder = [
            Linear(reverse[i], reverse[i + 1], rng, name=f"decoder{i}") for i in range(len(reverse) - 1)
        ]

    @property
    def d_input(self) -> int:
        return self.spec.layer_sizes[0]

    def params(self):
        out = []
        for layer in self.encoder + self.decoder:
            out.extend(layer.params())
        return out

    def _run(self, layers: list[Linear], x, caches: list | None):
        h = x
        last = len(layers) - 1
        for i, layer in enumerate(layers):
            c: dict = {}
            pre = layer.forward(h, c)
            c["pre"] = pre
            c["relu"] = i != last  # bottleneck and reconstruction output stay linear
            h = relu(pre) if c["relu"] else pre
            if caches is not None:
                caches.append((layer, c))
        return h

    def encode(self, x, caches: list | None = None) -> np.ndarray:
        check_shapes(
            x.shape[1] == self.d_input,
            f"input width {x.shape[1]} vs expected {self.d_input}",
        )
        return self._run(self.encoder, x, caches)

    def forward(self, x, caches: list | None = None):
        """Returns (bottleneck, reconstruction)."""
        bottleneck = self.encode(x, caches)
        reconstruction = self._run(self.decoder, bottleneck, caches)
        return bottleneck, reconstruction

    def backward(self, caches: list, d_reconstruction: np.ndarray) -> None:
        """Accumulates parameter gradients from the reconstruction output."""
        dout = d_reconstruction
        for i, (layer, c) in enumerate(reversed(caches)):
            if c["relu"]:
                dout = dout * relu_grad(c["pre"])
            dout = layer.backward(c, dout, need_input_grad=i != len(caches) - 1)


def autoencoder_forward(model: AutoencoderModel, x):
    return model.forward(x)


def encode(model: AutoencoderModel, x) -> np.ndarray:
    return model.encode(x)


def reconstruction_loss(x, reconstruction: np.ndarray) -> float:
    """Sum over rows of the squared L2 reconstruction distance."""
    if sp.issparse(x):
        x = x.toarray()
    x = np.asarray(x, dtype=np.float64)
    check_shapes(
        x.shape == reconstruction.shape,
        f"input shape {x.shape} vs reconstruction shape {reconstruction.shape}",
    )
    diff = reconstruction - x
    return float(np.sum(diff * diff))


def train_autoencoder(
    x_train,
    rng: np.random.Generator,
    epochs: int = 200,
    batch_size: int = 32,
    adam: AdamConfig | None = None,
    d_bot: int = 64,
) -> AutoencoderModel:
    """Mini-batch Adam on the reconstruction loss over the given rows.

    Rows are reshuffled every epoch from ``rng``. The model from the final
    epoch is returned (no early selection); per-epoch total losses are
    recorded on ``model.loss_history``.
    """
    n = x_train.shape[0]
    if n == 0:
        raise DataError("autoencoder needs at least one training row")
    model = AutoencoderModel(build_architecture(x_train.shape[1], d_bot), rng)
    # copy the settings so a shared config cannot leak step counts between runs
    optimizer = Adam(model.params(), replace(adam, step_count=0) if adam is not None else AdamConfig())
    model.loss_history = []
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            rows = order[start : start + batch_size]
            xb = x_train[rows]
            if sp.issparse(xb):
                xb = xb.toarray()
            caches: list = []
            _, reconstruction = model.forward(xb, caches)
            epoch_loss += reconstruction_loss(xb, reconstruction)
            optimizer.zero_grad()
            model.backward(caches, 2.0 * (reconstruction - xb))
            optimizer.step()
        model.loss_history.append(epoch_loss)
    return model
