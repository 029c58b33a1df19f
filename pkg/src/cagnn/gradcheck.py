"""Finite-difference verification of every hand-written backward pass.

Each check builds a tiny random instance (at most 8 nodes), runs one
forward/backward, and compares every parameter gradient (and the input
gradient where the layer provides one) against central differences.

Instances whose ReLU or LeakyReLU pre-activations sit within a few
finite-difference steps of the kink are resampled: the two-sided
difference is not the derivative there, so a failure would say nothing
about the backward pass. The accepted instance is still random.
"""

from dataclasses import dataclass

import numpy as np

from . import augs, augss
from .autoencoder import AutoencoderModel, build_architecture, reconstruction_loss
from .errors import NumericalError
from .graph import Graph, build_adjacency, neighbor_arrays, symmetric_normalize, with_self_loops
from .layers import GatLayer, GcnLayer, LinkxLayer, Residual
from .nn import Param, cross_entropy_loss, finite_difference_check
from .rng import make_rng
from .trainer import logit_gradient

TOLERANCE = 1e-4
FD_STEP = 1e-5
# Attention score gradients contain exact structural zeros (softmax backward
# sums to zero per neighborhood), where the finite difference measures pure
# roundoff against the 1e-8 denominator floor. Layer checks therefore use a
# larger step and a small functional so that noise stays below floor * tol.
FD_STEP_LAYER = 1e-4
FUNCTIONAL_SCALE = 0.01
KINK_MARGIN = 1e-3
MODULES = ("layers", "autoencoder", "augs", "augss")


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance


def _random_graph(rng, n: int = 6, extra_feature_width: int | None = None) -> Graph:
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
    if not pairs:
        pairs = [(0, 1)]
    edges = np.array(pairs, dtype=np.int64)
    d = extra_feature_width if extra_feature_width is not None else 3
    features = rng.standard_normal((n, d))
    labels = rng.integers(0, 3, size=n).astype(np.int64)
    return Graph(
        adjacency=build_adjacency(edges, n),
        features=features,
        labels=labels,
        num_classes=3,
        name="gradcheck",
    )


def _away_from_kinks(arrays, margin: float = KINK_MARGIN) -> bool:
    for a in arrays:
        if a.size and np.min(np.abs(a)) <= margin:
            return False
    return True


def _attempt_seeds(seed: int):
    for attempt in range(40):
        yield seed + 7919 * attempt


def _check_single_layer(kind: str, seed: int) -> CheckResult:
    """One propagation layer under a random linear functional of its output."""
    for s in _attempt_seeds(seed):
        rng = make_rng(s, 61)
        n = int(rng.integers(4, 9))
        graph = _random_graph(rng, n)
        looped = with_self_loops(graph.adjacency)
        norm = symmetric_normalize(looped)
        neighbors = neighbor_arrays(looped)
        d_in, d_out = 3, 4
        h = Param.of(rng.standard_normal((n, d_in)), name="h")
        x_original = rng.standard_normal((n, d_in))

        if kind == "gcn":
            layer = GcnLayer(d_in, d_out, rng, activation="relu")
        elif kind == "skip":
            layer = Residual(GcnLayer(d_in, d_in, rng, activation="relu", name="skip"))
            d_out = d_in
        elif kind == "skip-gat":
            layer = Residual(GatLayer(d_in, d_in, rng, variant="gat", activation="relu", name="skip"))
            d_out = d_in
        elif kind == "linkx":
            layer = LinkxLayer(d_in, d_out, d_in, rng, activation="relu")
        elif kind in ("gat", "gatv2"):
            layer = GatLayer(d_in, d_out, rng, variant=kind, activation="relu")
        else:
            raise ValueError(f"unknown layer kind '{kind}'")
        functional = FUNCTIONAL_SCALE * rng.standard_normal((n, d_out))

        uses_attention = kind in ("gat", "gatv2", "skip-gat")
        ctx = neighbors if uses_attention else norm

        def run_forward(cache=None):
            if kind == "linkx":
                return layer.forward(ctx, h.value, x_original, cache)
            return layer.forward(ctx, h.value, cache)

        cache: dict = {}
        out = run_forward(cache)
        inner_cache = cache
        kink_tensors = [inner_cache["pre"]]
        if "m" in inner_cache:
            kink_tensors.append(inner_cache["m"])
        if not _away_from_kinks(kink_tensors):
            continue

        for p in layer.params() + [h]:
            p.zero_grad()
        dh = layer.backward(cache, functional, need_input_grad=True)
        params = layer.params() + [h]
        grads = [p.grad.copy() for p in layer.params()] + [dh]

        def loss_fn(_):
            return float(np.sum(run_forward() * functional))

        err = finite_difference_check(loss_fn, params, grads, h=FD_STEP_LAYER)
        return CheckResult(name=f"layer-{kind}[seed {seed}]", max_error=err, tolerance=TOLERANCE)
    raise NumericalError(f"could not sample a kink-free instance for layer '{kind}'")


def _check_autoencoder(seed: int) -> CheckResult:
    for s in _attempt_seeds(seed):
        rng = make_rng(s, 62)
        x = rng.standard_normal((5, 20))
        model = AutoencoderModel(build_architecture(20, 4), rng)
        caches: list = []
        _, reconstruction = model.forward(x, caches)
        if not _away_from_kinks([c["pre"] for _, c in caches if c["relu"]]):
            continue
        for p in model.params():
            p.zero_grad()
        model.backward(caches, 2.0 * (reconstruction - x))
        params = model.params()
        grads = [p.grad.copy() for p in params]

        def loss_fn(_):
            _, rec = model.forward(x)
            return reconstruction_loss(x, rec)

        err = finite_difference_check(loss_fn, params, grads, h=FD_STEP)
        return CheckResult(name=f"autoencoder[seed {seed}]", max_error=err, tolerance=TOLERANCE)
    raise NumericalError("could not sample a kink-free autoencoder instance")


def _augs_model(seed: int):
    rng = make_rng(seed, 63)
    graph = _random_graph(rng, n=6, extra_feature_width=5)
    config = augs.AugsConfig(
        backbone="gcn", hidden_width=5, head_hidden=4, bottleneck=4, dropout_body=0.05, dropout_head=0.2
    )
    ae = AutoencoderModel(build_architecture(5, 4), rng)
    model = augs.AugsModel(graph, config, ae, rng)
    return graph, model


def _check_augs(seed: int) -> CheckResult:
    """Stage-2 loss gradients: GNN body, combiner, and head, dropout active."""
    for s in _attempt_seeds(seed):
        graph, model = _augs_model(s)
        rows = np.arange(graph.num_nodes)

        def forward():
            return model.forward(training=True, rng=make_rng(s, 64))

        probs = forward()
        kink_tensors = [c["pre"] for _, c in model._body_caches]
        kink_tensors.append(model._z_pre)
        kink_tensors.extend(c["pre"] for _, c in model.head._caches[:-1])
        if not _away_from_kinks(kink_tensors):
            continue
        for p in model.params():
            p.zero_grad()
        model.backward(logit_gradient(probs, graph.labels, rows))
        params = model.params()
        grads = [p.grad.copy() for p in params]

        def loss_fn(_):
            return cross_entropy_loss(forward()[rows], graph.labels[rows])

        err = finite_difference_check(loss_fn, params, grads, h=FD_STEP)
        return CheckResult(name=f"augs-end-to-end[seed {seed}]", max_error=err, tolerance=TOLERANCE)
    raise NumericalError("could not sample a kink-free supervised-pipeline instance")


def _check_augss(seed: int, aggregation: str = "weighted") -> CheckResult:
    for s in _attempt_seeds(seed):
        rng = make_rng(s, 65)
        graph = _random_graph(rng, n=6, extra_feature_width=4)
        config = augss.AugssConfig(
            backbone="gcn", epsilon=0.2, aggregation=aggregation, hidden_width=5, self_loops=True
        )
        model = augss.AugssModel(graph, config, make_rng(s, 66))
        rows = np.arange(graph.num_nodes)

        probs = model.forward(training=False, rng=None)
        if not _away_from_kinks([model._c1["pre"], model._c2["pre"]]):
            continue
        for p in model.params():
            p.zero_grad()
        model.backward(logit_gradient(probs, graph.labels, rows))
        params = model.params()
        grads = [p.grad.copy() for p in params]

        def loss_fn(_):
            return cross_entropy_loss(model.forward(training=False, rng=None)[rows], graph.labels[rows])

        err = finite_difference_check(loss_fn, params, grads, h=FD_STEP)
        return CheckResult(
            name=f"augss-{aggregation}[seed {seed}]", max_error=err, tolerance=TOLERANCE
        )
    raise NumericalError("could not sample a kink-free semi-supervised-pipeline instance")


def run_suite(module: str = "all", seeds: int = 20) -> list[CheckResult]:
    """All finite-difference checks of the requested module over many seeds."""
    if module not in MODULES + ("all",):
        raise NumericalError(f"unknown gradcheck module '{module}' (choose from {', '.join(MODULES)} or all)")
    results: list[CheckResult] = []
    if module in ("layers", "all"):
        for kind in ("gcn", "gat", "gatv2", "skip", "skip-gat", "linkx"):
            for seed in range(seeds):
                results.append(_check_single_layer(kind, seed))
    if module in ("autoencoder", "all"):
        for seed in range(seeds):
            results.append(_check_autoencoder(seed))
    if module in ("augs", "all"):
        for seed in range(seeds):
            results.append(_check_augs(seed))
    if module in ("augss", "all"):
        for seed in range(seeds):
            results.append(_check_augss(seed, "weighted"))
        for aggregation in ("concat_reduce", "mean", "sum"):
            for seed in range(5):
                results.append(_check_augss(seed, aggregation))
    return results
