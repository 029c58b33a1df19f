"""Graph neural network layers with hand-written backward passes.

Five layer kinds: GCN, single-head GAT and GATv2, and two structural
variants of GCN (residual skip and an added input-feature projection).
Every backward pass is validated against central finite differences in
the test suite.

Attention layers take the neighborhood in edge-array form (see
``graph.neighbor_arrays``): edges sorted by target node so per-node
softmax reduces to segment operations. Neighborhoods must include the
node itself (add self-loops first); an empty neighborhood has no defined
softmax and raises.
"""

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataError, check_shapes
from .nn import (
    Param,
    activation_grad,
    apply_activation,
    glorot_init,
    leaky_relu,
    leaky_relu_grad,
    matmul,
)


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------


def segment_softmax(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Softmax within each segment [offsets[i], offsets[i+1]), max-subtracted.

    Segments are per-target-node edge groups; each must be non-empty.
    """
    sizes = np.diff(offsets)
    if np.any(sizes == 0):
        raise DataError("empty neighborhood in attention softmax; add self-loops first")
    maxes = np.maximum.reduceat(values, offsets[:-1])
    e = np.exp(values - np.repeat(maxes, sizes))
    sums = np.add.reduceat(e, offsets[:-1])
    return e / np.repeat(sums, sizes)


def _segment_sum(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Per-segment sums along axis 0; segments must be non-empty."""
    return np.add.reduceat(values, offsets[:-1], axis=0)


def _attention_matrix(alpha: np.ndarray, sources: np.ndarray, offsets: np.ndarray, n: int) -> sp.csr_matrix:
    """CSR matrix with alpha_vu at (target v, source u)."""
    return sp.csr_matrix((alpha, sources.astype(np.int32), offsets), shape=(n, n))


# ---------------------------------------------------------------------------
# GCN and its structural variants
# ---------------------------------------------------------------------------


class GcnLayer:
    """Spectral convolution: sigma(norm_adj @ h @ W)."""

    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, activation: str = "relu", name: str = "gcn"):
        self.weight = Param.of(glorot_init(d_in, d_out, rng), name=f"{name}.weight")
        self.activation = activation

    def params(self) -> list[Param]:
        return [self.weight]

    def forward(self, norm_adj: sp.csr_matrix, h, cache: dict | None = None) -> np.ndarray:
        check_shapes(
            h.shape[1] == self.weight.shape[0],
            f"input width {h.shape[1]} vs weight rows {self.weight.shape[0]}",
        )
        check_shapes(
            norm_adj.shape[1] == h.shape[0],
            f"adjacency {norm_adj.shape} vs {h.shape[0]} feature rows",
        )
        pre = matmul(norm_adj, matmul(h, self.weight.value))
        out = apply_activation(self.activation, pre)
        if cache is not None:
            cache.update(h=h, norm_adj=norm_adj, pre=pre)
        return out

    def backward(self, cache: dict, dout: np.ndarray, need_input_grad: bool = True):
        dpre = dout * activation_grad(self.activation, cache["pre"])
        # norm_adj is symmetric, so its transpose is itself
        dhw = matmul(cache["norm_adj"], dpre)
        h = cache["h"]
        self.weight.grad += matmul(h.T, dhw) if sp.issparse(h) else h.T @ dhw
        if not need_input_grad:
            return None
        return dhw @ self.weight.value.T


class Residual:
    """Skip connection around a propagation layer: layer(ctx, h) + h.

    The residual is added outside the layer's activation, so a zero weight
    under ReLU makes the whole block the identity on h. Works for any layer
    whose forward signature is (ctx, h, cache); widths must match.
    """

    def __init__(self, inner):
        d_in, d_out = inner.weight.shape
        if d_in != d_out:
            raise ConfigError(f"skip connection needs equal widths, got {d_in} -> {d_out}")
        self.inner = inner

    def params(self) -> list[Param]:
        return self.inner.params()

    def forward(self, ctx, h, cache: dict | None = None) -> np.ndarray:
        return self.inner.forward(ctx, h, cache) + h

    def backward(self, cache: dict, dout: np.ndarray, need_input_grad: bool = True):
        dh = self.inner.backward(cache, dout, need_input_grad)
        if not need_input_grad:
            return None
        return dh + dout


class LinkxLayer(GcnLayer):
    """GCN plus a trained projection of the original input features.

    Output is sigma(norm_adj @ h @ W) + x_original @ W0, so the raw
    features reach every layer directly.
    """

    def __init__(
        self,
        d_in: int,
        d_out: int,
        d_original: int,
        rng: np.random.Generator,
        activation: str = "relu",
        name: str = "linkx",
    ):
        super().__init__(d_in, d_out, rng, activation=activation, name=name)
        self.input_proj = Param.of(glorot_init(d_original, d_out, rng), name=f"{name}.input_proj")

    def params(self) -> list[Param]:
        return [self.weight, self.input_proj]

    def forward(self, norm_adj, h, x_original, cache: dict | None = None) -> np.ndarray:
        check_shapes(
            x_original.shape[0] == h.shape[0],
            f"{x_original.shape[0]} original-feature rows vs {h.shape[0]} hidden rows",
        )
        check_shapes(
            x_original.shape[1] == self.input_proj.shape[0],
            f"original width {x_original.shape[1]} vs projection rows {self.input_proj.shape[0]}",
        )
        gcn_part = super().forward(norm_adj, h, cache)
        if cache is not None:
            cache["x_original"] = x_original
        return gcn_part + matmul(x_original, self.input_proj.value)

    def backward(self, cache: dict, dout: np.ndarray, need_input_grad: bool = True):
        x = cache["x_original"]
        self.input_proj.grad += matmul(x.T, dout) if sp.issparse(x) else x.T @ dout
        return super().backward(cache, dout, need_input_grad)


# ---------------------------------------------------------------------------
# Attention layers
# ---------------------------------------------------------------------------


class GatLayer:
    """Single-head graph attention, original or v2 scoring.

    Both variants transform values with ``weight`` and aggregate them with
    per-neighborhood softmax coefficients. They differ in the score:

    * gat:   e_vu = LeakyReLU(a^T [W h_v || W h_u]), a of length 2*d_out
    * gatv2: e_vu = a^T LeakyReLU(Ws [h_v || h_u]), Ws of shape
      (2*d_in, d_out) and a of length d_out, with values under a
      separate W

    With slope 1.0 the scoring nonlinearity is the identity and the two
    variants can be configured to coincide exactly.
    """

    def __init__(
        self,
        d_in: int,
        d_out: int,
        rng: np.random.Generator,
        variant: str = "gat",
        activation: str = "relu",
        leaky_slope: float = 0.2,
        name: str = "gat",
    ):
        if variant not in ("gat", "gatv2"):
            raise ConfigError(f"unknown attention variant '{variant}'")
        self.variant = variant
        self.activation = activation
        self.leaky_slope = leaky_slope
        self.weight = Param.of(glorot_init(d_in, d_out, rng), name=f"{name}.weight")
        if variant == "gat":
            self.attn = Param.of(glorot_init(2 * d_out, 1, rng), name=f"{name}.attn")
            self.score_weight = None
        else:
            self.score_weight = Param.of(glorot_init(2 * d_in, d_out, rng), name=f"{name}.score_weight")
            self.attn = Param.of(glorot_init(d_out, 1, rng), name=f"{name}.attn")

    def params(self) -> list[Param]:
        ps = [self.weight, self.attn]
        if self.score_weight is not None:
            ps.append(self.score_weight)
        return ps

    def attention_logits(self, h, neighbors, cache: dict | None = None) -> np.ndarray:
        """Per-edge scores e_vu, ordered like the edge arrays."""
        offsets, targets, sources = neighbors
        if self.variant == "gat":
            z = matmul(h, self.weight.value)
            d_out = z.shape[1]
            a_top = self.attn.value[:d_out, 0]
            a_bot = self.attn.value[d_out:, 0]
            st = z @ a_top
            ss = z @ a_bot
            m = st[targets] + ss[sources]
            logits = leaky_relu(m, self.leaky_slope)
            if cache is not None:
                cache.update(z=z, m=m)
        else:
            d_in = h.shape[1]
            ws_top = self.score_weight.value[:d_in]
            ws_bot = self.score_weight.value[d_in:]
            p = matmul(h, ws_top)
            q = matmul(h, ws_bot)
            m = p[targets] + q[sources]
            logits = leaky_relu(m, self.leaky_slope) @ self.attn.value[:, 0]
            if cache is not None:
                cache.update(p=p, q=q, m=m)
        return logits

    def forward(self, neighbors, h, cache: dict | None = None) -> np.ndarray:
        offsets, targets, sources = neighbors
        check_shapes(
            h.shape[1] == self.weight.shape[0],
            f"input width {h.shape[1]} vs weight rows {self.weight.shape[0]}",
        )
        score_cache: dict = {}
        logits = self.attention_logits(h, neighbors, score_cache)
        alpha = segment_softmax(logits, offsets)
        n = h.shape[0]
        if self.variant == "gatv2":
            z = matmul(h, self.weight.value)
            score_cache["z"] = z
        else:
            z = score_cache["z"]
        attn = _attention_matrix(alpha, sources, offsets, n)
        pre = attn @ z
        out = apply_activation(self.activation, pre)
        if cache is not None:
            cache.update(score_cache, h=h, neighbors=neighbors, alpha=alpha, attn=attn, pre=pre)
        return out

    def backward(self, cache: dict, dout: np.ndarray, need_input_grad: bool = True):
        offsets, targets, sources = cache["neighbors"]
        h, z, alpha, attn = cache["h"], cache["z"], cache["alpha"], cache["attn"]
        n = h.shape[0]

        dpre = dout * activation_grad(self.activation, cache["pre"])
        dz = np.asarray((attn.T @ dpre))
        dalpha = np.einsum("ed,ed->e", dpre[targets], z[sources])
        # softmax over each neighborhood: de = alpha * (dalpha - sum(alpha*dalpha))
        weighted = alpha * dalpha
        per_node = _segment_sum(weighted, offsets)
        de = alpha * (dalpha - np.repeat(per_node, np.diff(offsets)))

        if self.variant == "gat":
            m = cache["m"]
            dm = de * leaky_relu_grad(m, self.leaky_slope)
            dst = _segment_sum(dm, offsets)
            dss = np.bincount(sources, weights=dm, minlength=n)
            d_out = z.shape[1]
            a_top = self.attn.value[:d_out, 0]
            a_bot = self.attn.value[d_out:, 0]
            self.attn.grad[:d_out, 0] += z.T @ dst
            self.attn.grad[d_out:, 0] += z.T @ dss
            dz += np.outer(dst, a_top) + np.outer(dss, a_bot)
            dh_score = None
        else:
            m = cache["m"]
            act_m = leaky_relu(m, self.leaky_slope)
            self.attn.grad[:, 0] += act_m.T @ de
            dm = de[:, None] * self.attn.value[:, 0][None, :] * leaky_relu_grad(m, self.leaky_slope)
            dp = _segment_sum(dm, offsets)
            # scatter-add by source via an incidence matmul (faster than ufunc.at)
            num_edges = sources.shape[0]
            incidence = sp.csr_matrix(
                (np.ones(num_edges), (sources, np.arange(num_edges))), shape=(n, num_edges)
            )
            dq = incidence @ dm
            d_in = h.shape[1]
            if sp.issparse(h):
                self.score_weight.grad[:d_in] += matmul(h.T, dp)
                self.score_weight.grad[d_in:] += matmul(h.T, dq)
            else:
                self.score_weight.grad[:d_in] += h.T @ dp
                self.score_weight.grad[d_in:] += h.T @ dq
            ws_top = self.score_weight.value[:d_in]
            ws_bot = self.score_weight.value[d_in:]
            dh_score = dp @ ws_top.T + dq @ ws_bot.T

        self.weight.grad += matmul(h.T, dz) if sp.issparse(h) else h.T @ dz
        if not need_input_grad:
            return None
        dh = dz @ self.weight.value.T
        if dh_score is not None:
            dh = dh + dh_score
        return dh


# ---------------------------------------------------------------------------
# Generic neighborhood update (forward only, for property tests)
# ---------------------------------------------------------------------------


def generic_message_pass(
    h_prev,
    adj_with_loops: sp.csr_matrix,
    weight: np.ndarray,
    activation: str,
    aggregator: str,
) -> np.ndarray:
    """h_v' = agg over u in N(v) of sigma(W h_u), agg in {mean, sum}.

    The transform and nonlinearity apply per neighbor before aggregation;
    the adjacency passed in defines N(v) and should carry self-loops.
    """
    if aggregator not in ("mean", "sum"):
        raise ConfigError(f"unknown aggregator '{aggregator}'")
    check_shapes(
        h_prev.shape[1] == weight.shape[0],
        f"input width {h_prev.shape[1]} vs weight rows {weight.shape[0]}",
    )
    transformed = apply_activation(activation, matmul(h_prev, np.asarray(weight)))
    out = matmul(adj_with_loops, transformed)
    if aggregator == "mean":
        deg = np.asarray(adj_with_loops.sum(axis=1)).reshape(-1)
        if np.any(deg == 0.0):
            raise DataError("mean aggregation over an empty neighborhood; add self-loops first")
        out = out / deg[:, None]
    return out
