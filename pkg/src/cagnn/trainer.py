"""Training protocols shared by every classifier in the toolkit.

A trainable model exposes ``params()``, ``forward(training, rng) -> probs``
over all nodes, and ``backward(dlogits)`` accumulating gradients. Loss is
always softmax cross entropy, so the gradient at the logits is
probs - onehot on the rows in the loss and zero elsewhere.

Two protocols:

* mini-batch: per-epoch reshuffled batches of labeled nodes, one
  full-graph forward per batch with the loss on that batch's rows;
  final-epoch parameters are kept.
* full-batch: one step per epoch over all labeled nodes; the epoch with
  the best validation accuracy is selected and its parameters restored.

The batch order of epoch e is drawn from its own stream of (seed, e), so
it is a pure function of those two values.
"""

import dataclasses

import numpy as np

from .errors import ConfigError
from .metrics import accuracy, macro_auc, macro_f1
from .nn import Adam, AdamConfig, cross_entropy_loss
from .rng import STREAM_DROPOUT, STREAM_TRAIN, make_rng


def onehot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def logit_gradient(probs: np.ndarray, labels: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """d(total CE)/d(logits): probs - onehot on ``rows``, zero elsewhere."""
    grad = np.zeros_like(probs)
    grad[rows] = probs[rows] - onehot(labels[rows], probs.shape[1])
    return grad


def batch_order(seed: int, epoch: int, count: int) -> np.ndarray:
    return make_rng(seed, STREAM_TRAIN, epoch).permutation(count)


def _fresh_adam(params, adam: AdamConfig | None) -> Adam:
    config = dataclasses.replace(adam, step_count=0) if adam is not None else AdamConfig()
    return Adam(params, config)


def evaluate(model, labels: np.ndarray, rows: np.ndarray, num_classes: int) -> dict:
    """Test-time metrics of the model on the given rows."""
    probs = model.forward(training=False, rng=None)
    predictions = probs[rows].argmax(axis=1)
    return {
        "accuracy": accuracy(predictions, labels[rows]),
        "macro_f1": macro_f1(predictions, labels[rows], num_classes),
        "macro_auc": macro_auc(probs[rows], labels[rows], num_classes),
    }


def train_minibatch(
    model,
    labels: np.ndarray,
    train_idx: np.ndarray,
    *,
    epochs: int,
    batch_size: int,
    seed: int,
    adam: AdamConfig | None = None,
) -> dict:
    """Mini-batch cross-entropy training; returns per-epoch loss history."""
    if train_idx.size == 0:
        raise ConfigError("training split is empty")
    optimizer = _fresh_adam(model.params(), adam)
    rng_dropout = make_rng(seed, STREAM_DROPOUT)
    losses = []
    for epoch in range(epochs):
        order = batch_order(seed, epoch, train_idx.size)
        shuffled = train_idx[order]
        epoch_loss = 0.0
        for start in range(0, shuffled.size, batch_size):
            rows = shuffled[start : start + batch_size]
            probs = model.forward(training=True, rng=rng_dropout)
            epoch_loss += cross_entropy_loss(probs[rows], labels[rows])
            optimizer.zero_grad()
            model.backward(logit_gradient(probs, labels, rows))
            optimizer.step()
        losses.append(epoch_loss)
    return {"train_loss": losses}


def train_fullbatch(
    model,
    labels: np.ndarray,
    train_idx: np.ndarray,
    val_idx: np.ndarray,
    *,
    epochs: int,
    seed: int,
    adam: AdamConfig | None = None,
) -> dict:
    """Full-batch training with validation-accuracy epoch selection.

    After the last epoch, parameters are restored to the earliest epoch
    that achieved the best validation accuracy.
    """
    if train_idx.size == 0:
        raise ConfigError("training split is empty")
    if val_idx.size == 0:
        raise ConfigError("full-batch protocol needs a non-empty validation split")
    optimizer = _fresh_adam(model.params(), adam)
    rng_dropout = make_rng(seed, STREAM_DROPOUT)
    losses = []
    val_history = []
    best_acc = -1.0
    best_epoch = -1
    best_values: list[np.ndarray] = []
    for epoch in range(epochs):
        probs = model.forward(training=True, rng=rng_dropout)
        losses.append(cross_entropy_loss(probs[train_idx], labels[train_idx]))
        optimizer.zero_grad()
        model.backward(logit_gradient(probs, labels, train_idx))
        optimizer.step()

        eval_probs = model.forward(training=False, rng=None)
        val_acc = accuracy(eval_probs[val_idx].argmax(axis=1), labels[val_idx])
        val_history.append(val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_values = [p.value.copy() for p in model.params()]
    for p, v in zip(model.params(), best_values):
        p.value[...] = v
    return {
        "train_loss": losses,
        "val_accuracy": val_history,
        "best_epoch": best_epoch,
        "best_val_accuracy": best_acc,
    }
