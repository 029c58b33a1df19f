"""Dense numerical substrate: parameters, activations, losses, Adam, and
finite-difference gradient verification.

Everything runs in float64. Backward passes are written by hand; the
finite-difference checker is the independent referee for all of them.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import NumericalError, ShapeError, check_shapes


# ---------------------------------------------------------------------------
# Parameters and optimizer
# ---------------------------------------------------------------------------


@dataclass
class Param:
    """A trainable matrix with its gradient and Adam moment buffers."""

    value: np.ndarray
    grad: np.ndarray
    adam_m: np.ndarray
    adam_v: np.ndarray
    name: str = ""

    @classmethod
    def of(cls, value: np.ndarray, name: str = "") -> "Param":
        value = np.asarray(value, dtype=np.float64)
        return cls(
            value=value,
            grad=np.zeros_like(value),
            adam_m=np.zeros_like(value),
            adam_v=np.zeros_like(value),
            name=name,
        )

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0.0


@dataclass
class AdamConfig:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_stab: float = 1e-8
    step_count: int = 0


def adam_step(param: Param, config: AdamConfig) -> Param:
    """One bias-corrected Adam update of ``param`` in place.

    Uses ``config.step_count`` as the step number t; the caller increments
    it exactly once per optimizer step (see :class:`Adam`). The gradient is
    left intact for inspection; zeroing is a separate, explicit call.
    """
    g = param.grad
    if not np.all(np.isfinite(g)):
        raise NumericalError(f"non-finite gradient in parameter '{param.name}'")
    t = config.step_count
    if t < 1:
        raise ValueError("config.step_count must be >= 1 at update time")
    b1, b2 = config.beta1, config.beta2
    param.adam_m[...] = b1 * param.adam_m + (1.0 - b1) * g
    param.adam_v[...] = b2 * param.adam_v + (1.0 - b2) * g * g
    m_hat = param.adam_m / (1.0 - b1**t)
    v_hat = param.adam_v / (1.0 - b2**t)
    param.value[...] = param.value - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon_stab)
    return param


class Adam:
    """Adam over a list of parameters with one shared step counter."""

    def __init__(self, params: list[Param], config: AdamConfig | None = None):
        self.params = list(params)
        self.config = config if config is not None else AdamConfig()

    def step(self) -> None:
        self.config.step_count += 1
        for p in self.params:
            adam_step(p, self.config)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


# ---------------------------------------------------------------------------
# Elementwise activations and row softmax
# ---------------------------------------------------------------------------


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, x)


def relu_grad(x: np.ndarray) -> np.ndarray:
    return (x > 0.0).astype(np.float64)


def leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x >= 0.0, x, slope * x)


def leaky_relu_grad(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x >= 0.0, 1.0, slope)


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction for stability."""
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def apply_activation(name: str, x: np.ndarray) -> np.ndarray:
    if name == "relu":
        return relu(x)
    if name == "identity":
        return x
    raise ValueError(f"unknown activation '{name}'")


def activation_grad(name: str, pre: np.ndarray) -> np.ndarray:
    if name == "relu":
        return relu_grad(pre)
    if name == "identity":
        return np.ones_like(pre)
    raise ValueError(f"unknown activation '{name}'")


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------

PROB_FLOOR = 1e-12


def cross_entropy_loss(predicted: np.ndarray, true_labels: np.ndarray) -> float:
    """Total cross entropy, summed over examples.

    ``predicted`` holds per-row class probabilities (each row must sum to 1
    within 1e-6); probabilities are clamped to >= 1e-12 before the log so a
    confidently wrong row yields a large finite loss instead of infinity.
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    true_labels = np.asarray(true_labels)
    check_shapes(predicted.ndim == 2, f"predicted must be 2-D, got shape {predicted.shape}")
    check_shapes(
        predicted.shape[0] == true_labels.shape[0],
        f"{predicted.shape[0]} prediction rows vs {true_labels.shape[0]} labels",
    )
    row_sums = predicted.sum(axis=1)
    if predicted.shape[0] and np.max(np.abs(row_sums - 1.0)) > 1e-6:
        raise NumericalError("predicted rows must sum to 1 (are these probabilities?)")
    if true_labels.size and (true_labels.min() < 0 or true_labels.max() >= predicted.shape[1]):
        raise NumericalError(f"label index out of range for {predicted.shape[1]} classes")
    picked = predicted[np.arange(predicted.shape[0]), true_labels]
    return float(-np.log(np.maximum(picked, PROB_FLOOR)).sum())


# ---------------------------------------------------------------------------
# Dropout
# ---------------------------------------------------------------------------


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout multiplier: 0 with probability ``rate``, else 1/(1-rate)."""
    keep = rng.random(shape) >= rate
    return keep * (1.0 / (1.0 - rate))


def dropout(x: np.ndarray, rate: float, rng: np.random.Generator, training: bool) -> np.ndarray:
    """Inverted dropout; evaluation mode is the bitwise identity."""
    if not training or rate == 0.0:
        return x
    return x * dropout_mask(x.shape, rate, rng)


# ---------------------------------------------------------------------------
# Initialization and the plain linear map
# ---------------------------------------------------------------------------


def glorot_init(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform Glorot initialization in +-sqrt(6 / (rows + cols))."""
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def linear_forward(x, weight: Param) -> np.ndarray:
    """``x @ weight.value`` with an explicit shape check; ``x`` may be sparse."""
    check_shapes(
        x.shape[1] == weight.value.shape[0],
        f"inner dimensions differ: input {x.shape} vs weight {weight.value.shape}",
    )
    return matmul(x, weight.value)


def matmul(a, b: np.ndarray) -> np.ndarray:
    """Dense result of ``a @ b``; ``a`` may be a scipy sparse matrix."""
    out = a @ b
    return np.asarray(out)


class Linear:
    """Fully connected layer ``x @ W + b`` with hand-written backward."""

    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True, name: str = ""):
        self.weight = Param.of(glorot_init(d_in, d_out, rng), name=f"{name}.weight")
        self.bias = Param.of(np.zeros((1, d_out)), name=f"{name}.bias") if bias else None

    def params(self) -> list[Param]:
        return [self.weight] + ([self.bias] if self.bias is not None else [])

    def forward(self, x, cache: dict | None = None) -> np.ndarray:
        out = linear_forward(x, self.weight)
        if self.bias is not None:
            out = out + self.bias.value
        if cache is not None:
            cache["x"] = x
        return out

    def backward(self, cache: dict, dout: np.ndarray, need_input_grad: bool = True):
        x = cache["x"]
        self.weight.grad += matmul(x.T, dout) if sp.issparse(x) else x.T @ dout
        if self.bias is not None:
            self.bias.grad += dout.sum(axis=0, keepdims=True)
        if not need_input_grad:
            return None
        return dout @ self.weight.value.T


# ---------------------------------------------------------------------------
# Finite-difference verification
# ---------------------------------------------------------------------------


def finite_difference_check(loss_fn, params: list[Param], analytic_grads: list[np.ndarray], h: float = 1e-5) -> float:
    """Maximum relative error between analytic gradients and central differences.

    ``loss_fn(params)`` must be a deterministic scalar function of the
    parameter values; entries are perturbed in place. The relative error
    for each entry uses the denominator max(|numeric|, |analytic|, 1e-8).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    worst = 0.0
    for param, grad in zip(params, analytic_grads):
        v = param.value
        flat_v = v.reshape(-1)
        flat_g = np.asarray(grad).reshape(-1)
        for i in range(flat_v.size):
            orig = flat_v[i]
            flat_v[i] = orig + h
            f_plus = loss_fn(params)
            flat_v[i] = orig - h
            f_minus = loss_fn(params)
            flat_v[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            analytic = flat_g[i]
            denom = max(abs(numeric), abs(analytic), 1e-8)
            worst = max(worst, abs(numeric - analytic) / denom)
    return worst
