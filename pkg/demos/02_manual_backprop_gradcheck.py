"""Backpropagation by hand, then checked against finite differences.

The layers store their gradients themselves: forward fills a cache,
backward reads it and accumulates into each Param.grad. This script
walks one training step of a tiny two-layer network and verifies a
single weight's gradient numerically, then runs the packaged checker
over every layer kind.
"""

import numpy as np

from cagnn.gradcheck import run_suite
from cagnn.graph import build_adjacency, symmetric_normalize, with_self_loops
from cagnn.layers import GcnLayer
from cagnn.nn import cross_entropy_loss, softmax_rows
from cagnn.rng import STREAM_INIT, make_rng
from cagnn.trainer import logit_gradient


def forward_loss(operator, x, labels, rows, first, last, caches=None):
    c1, c2 = ({}, {}) if caches is None else caches
    hidden = first.forward(operator, x, c1)
    logits = last.forward(operator, hidden, c2)
    probs = softmax_rows(logits)
    return probs, cross_entropy_loss(probs[rows], labels[rows])


def main():
    rng = make_rng(0, STREAM_INIT)
    edges = np.array([[0, 1], [1, 2], [2, 3], [3, 4], [4, 0]])
    operator = symmetric_normalize(with_self_loops(build_adjacency(edges, 5)))
    x = rng.standard_normal((5, 3))
    labels = np.array([0, 1, 0, 1, 0])
    rows = np.arange(5)

    first = GcnLayer(3, 4, rng, activation="relu")
    last = GcnLayer(4, 2, rng, activation="identity")

    caches = ({}, {})
    probs, loss = forward_loss(operator, x, labels, rows, first, last, caches)
    print(f"loss at the starting weights: {loss:.6f}")

    # backward pass: softmax+cross-entropy collapse to probs - onehot
    dlogits = logit_gradient(probs, labels, rows)
    dhidden = last.backward(caches[1], dlogits)
    first.backward(caches[0], dhidden, need_input_grad=False)

    entry = first.weight.grad[0, 0]
    print(f"analytic d loss / d first.weight[0,0]: {entry:+.8f}")

    # the same derivative, measured by nudging the weight
    h = 1e-5
    original = first.weight.value[0, 0]
    first.weight.value[0, 0] = original + h
    _, loss_plus = forward_loss(operator, x, labels, rows, first, last)
    first.weight.value[0, 0] = original - h
    _, loss_minus = forward_loss(operator, x, labels, rows, first, last)
    first.weight.value[0, 0] = original
    numeric = (loss_plus - loss_minus) / (2.0 * h)
    print(f"numeric  d loss / d first.weight[0,0]: {numeric:+.8f}")
    print(f"relative error: {abs(entry - numeric) / max(abs(numeric), 1e-12):.2e}")

    print("\nthe packaged checker does this for every parameter of every layer:")
    results = run_suite("layers", seeds=3)
    worst: dict[str, float] = {}
    for r in results:
        kind = r.name.split("[")[0]
        worst[kind] = max(worst.get(kind, 0.0), r.max_error)
    for kind, err in sorted(worst.items()):
        print(f"  {kind:<16} worst relative error {err:.2e}")
    print(f"all {len(results)} checks passed: {all(r.passed for r in results)}")


if __name__ == "__main__":
    main()
