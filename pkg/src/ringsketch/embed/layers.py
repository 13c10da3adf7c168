"""Neural building blocks: MLP head and a self-attention sequence encoder.

Everything here is plain numpy with explicit forward/backward pairs.  Each
``*_forward`` returns ``(output, cache)`` and the matching ``*_backward``
consumes the cache and returns ``(input_gradient, parameter_gradients)``
where parameter gradients are a flat ``{field_name: array}`` dict keyed the
same way as the parameter dataclass fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError

LAYER_NORM_EPS = 1e-5


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform init on [-a, a] with a = sqrt(6 / (fan_in + fan_out))."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def _check_matrix(name: str, value: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != shape:
        raise TrainingError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise TrainingError(f"{name} contains non-finite values")
    return arr


@dataclass
class MlpParams:
    """Two-layer perceptron: ``in -> hidden`` (ReLU, dropout) ``-> out``."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    dropout_rate: float = 0.0

    def __post_init__(self) -> None:
        self.w1 = np.asarray(self.w1, dtype=np.float64)
        if self.w1.ndim != 2:
            raise TrainingError("w1 must be a 2-D matrix")
        in_dim, hidden = self.w1.shape
        self.b1 = _check_matrix("b1", self.b1, (hidden,))
        self.w2 = _check_matrix("w2", self.w2, (hidden, np.asarray(self.w2).shape[1]))
        out_dim = self.w2.shape[1]
        self.b2 = _check_matrix("b2", self.b2, (out_dim,))
        self.w1 = _check_matrix("w1", self.w1, (in_dim, hidden))
        # Rates live in [0, 1); 1.0 is admitted as the degenerate limit that
        # silences the whole hidden layer.
        if not 0.0 <= self.dropout_rate <= 1.0:
            raise TrainingError("dropout_rate must lie in [0, 1]")

    @property
    def in_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def out_dim(self) -> int:
        return self.w2.shape[1]


def init_mlp(
    rng: np.random.Generator,
    in_dim: int,
    hidden_dim: int,
    out_dim: int,
    dropout_rate: float = 0.0,
) -> MlpParams:
    # Small positive biases keep fresh heads away from the all-zero output:
    # even if an input lands every hidden ReLU in its dead zone, the output
    # is then exactly b2, which must not be the zero vector or cosine
    # similarity (and the contrastive loss) would be undefined.
    return MlpParams(
        w1=xavier_uniform(rng, in_dim, hidden_dim),
        b1=np.full(hidden_dim, 0.01),
        w2=xavier_uniform(rng, hidden_dim, out_dim),
        b2=np.full(out_dim, 0.01),
        dropout_rate=dropout_rate,
    )


def mlp_forward(
    params: MlpParams,
    x: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
):
    """Apply the MLP to ``x`` (last axis = features).

    Dropout is the inverted kind: active units are scaled by 1/(1-rate) so
    evaluation needs no rescaling.  It only fires when ``train_mode`` is set
    and the rate is positive, and then requires an ``rng``.
    """
    x = np.asarray(x, dtype=np.float64)
    pre = x @ params.w1 + params.b1
    hidden = np.maximum(pre, 0.0)
    if train_mode and params.dropout_rate >= 1.0:
        mask = np.zeros_like(hidden)
    elif train_mode and params.dropout_rate > 0.0:
        if rng is None:
            raise TrainingError("dropout in train mode requires an rng")
        keep = 1.0 - params.dropout_rate
        mask = (rng.random(hidden.shape) < keep) / keep
    else:
        mask = np.ones_like(hidden)
    dropped = hidden * mask
    out = dropped @ params.w2 + params.b2
    cache = (x, pre, mask, dropped)
    return out, cache


def mlp_backward(params: MlpParams, d_out: np.ndarray, cache):
    x, pre, mask, dropped = cache
    d_out = np.asarray(d_out, dtype=np.float64)
    flat_out = d_out.reshape(-1, params.out_dim)
    flat_dropped = dropped.reshape(-1, params.w2.shape[0])
    grads = {
        "w2": flat_dropped.T @ flat_out,
        "b2": flat_out.sum(axis=0),
    }
    d_dropped = d_out @ params.w2.T
    d_hidden = d_dropped * mask
    d_pre = d_hidden * (pre > 0.0)
    flat_pre = d_pre.reshape(-1, params.w1.shape[1])
    flat_x = x.reshape(-1, params.in_dim)
    grads["w1"] = flat_x.T @ flat_pre
    grads["b1"] = flat_pre.sum(axis=0)
    d_x = d_pre @ params.w1.T
    return d_x, grads


@dataclass
class TransformerEncoderParams:
    """One pre-norm residual block: self-attention then a feed-forward net.

    ``wq/wk/wv/wo`` are the single-head attention projections (d x d).
    ``w1/b1/w2/b2`` form the position-wise feed-forward net (d -> 4d -> d).
    ``ln1_*`` normalizes the attention input, ``ln2_*`` the feed-forward
    input.  With ``wo`` and ``w2`` at zero the block is exactly the
    identity, which is how fresh blocks start out of ``init_transformer_encoder``.
    """

    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    ln1_gain: np.ndarray
    ln1_bias: np.ndarray
    ln2_gain: np.ndarray
    ln2_bias: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.wq).shape[0]
        for name in ("wq", "wk", "wv", "wo"):
            setattr(self, name, _check_matrix(name, getattr(self, name), (d, d)))
        ff = np.asarray(self.w1).shape[1]
        self.w1 = _check_matrix("w1", self.w1, (d, ff))
        self.b1 = _check_matrix("b1", self.b1, (ff,))
        self.w2 = _check_matrix("w2", self.w2, (ff, d))
        self.b2 = _check_matrix("b2", self.b2, (d,))
        for name in ("ln1_gain", "ln1_bias", "ln2_gain", "ln2_bias"):
            setattr(self, name, _check_matrix(name, getattr(self, name), (d,)))

    @property
    def dim(self) -> int:
        return self.wq.shape[0]


def init_transformer_encoder(rng: np.random.Generator, dim: int, ff_dim: int | None = None) -> TransformerEncoderParams:
    """Fresh block: Xavier-uniform weights, zero biases, unit norm gains."""
    ff = 4 * dim if ff_dim is None else ff_dim
    return TransformerEncoderParams(
        wq=xavier_uniform(rng, dim, dim),
        wk=xavier_uniform(rng, dim, dim),
        wv=xavier_uniform(rng, dim, dim),
        wo=xavier_uniform(rng, dim, dim),
        w1=xavier_uniform(rng, dim, ff),
        b1=np.zeros(ff),
        w2=xavier_uniform(rng, ff, dim),
        b2=np.zeros(dim),
        ln1_gain=np.ones(dim),
        ln1_bias=np.zeros(dim),
        ln2_gain=np.ones(dim),
        ln2_bias=np.zeros(dim),
    )


def layer_norm_forward(x: np.ndarray, gain: np.ndarray, bias: np.ndarray):
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    normed = (x - mean) * inv_std
    out = normed * gain + bias
    return out, (normed, inv_std)


def layer_norm_backward(d_out: np.ndarray, gain: np.ndarray, cache):
    normed, inv_std = cache
    d_gain = (d_out * normed).sum(axis=tuple(range(d_out.ndim - 1)))
    d_bias = d_out.sum(axis=tuple(range(d_out.ndim - 1)))
    d_normed = d_out * gain
    mean_dn = d_normed.mean(axis=-1, keepdims=True)
    mean_dn_n = (d_normed * normed).mean(axis=-1, keepdims=True)
    d_x = inv_std * (d_normed - mean_dn - normed * mean_dn_n)
    return d_x, d_gain, d_bias


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def transformer_encoder_forward(params: TransformerEncoderParams, x: np.ndarray):
    """Encode a sequence ``x`` of shape (n, d); output has the same shape.

    The block is permutation-equivariant: reordering input rows reorders
    output rows identically, so sequence position carries no meaning here.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise TrainingError(f"encoder input must be (n, {params.dim}), got {x.shape}")
    a, ln1_cache = layer_norm_forward(x, params.ln1_gain, params.ln1_bias)
    q = a @ params.wq
    k = a @ params.wk
    v = a @ params.wv
    scale = 1.0 / np.sqrt(params.dim)
    attn = _softmax_rows(q @ k.T * scale)
    context = attn @ v
    x1 = x + context @ params.wo
    b, ln2_cache = layer_norm_forward(x1, params.ln2_gain, params.ln2_bias)
    ff_pre = b @ params.w1 + params.b1
    ff_hidden = np.maximum(ff_pre, 0.0)
    out = x1 + (ff_hidden @ params.w2 + params.b2)
    cache = (x, a, ln1_cache, q, k, v, attn, context, x1, b, ln2_cache, ff_pre, ff_hidden)
    return out, cache


def transformer_encoder_backward(params: TransformerEncoderParams, d_out: np.ndarray, cache):
    (x, a, ln1_cache, q, k, v, attn, context, x1, b, ln2_cache, ff_pre, ff_hidden) = cache
    d_out = np.asarray(d_out, dtype=np.float64)
    grads = {}

    # Feed-forward branch: out = x1 + relu(b W1 + b1) W2 + b2.
    grads["w2"] = ff_hidden.T @ d_out
    grads["b2"] = d_out.sum(axis=0)
    d_hidden = d_out @ params.w2.T
    d_ff_pre = d_hidden * (ff_pre > 0.0)
    grads["w1"] = b.T @ d_ff_pre
    grads["b1"] = d_ff_pre.sum(axis=0)
    d_b = d_ff_pre @ params.w1.T
    d_x1_ln, grads["ln2_gain"], grads["ln2_bias"] = layer_norm_backward(
        d_b, params.ln2_gain, ln2_cache
    )
    d_x1 = d_out + d_x1_ln

    # Attention branch: x1 = x + (attn @ v) @ wo.
    grads["wo"] = context.T @ d_x1
    d_context = d_x1 @ params.wo.T
    d_attn = d_context @ v.T
    d_v = attn.T @ d_context
    # Row-wise softmax jacobian.
    d_logits = attn * (d_attn - (d_attn * attn).sum(axis=-1, keepdims=True))
    scale = 1.0 / np.sqrt(params.dim)
    d_q = d_logits @ k * scale
    d_k = d_logits.T @ q * scale
    grads["wq"] = a.T @ d_q
    grads["wk"] = a.T @ d_k
    grads["wv"] = a.T @ d_v
    d_a = d_q @ params.wq.T + d_k @ params.wk.T + d_v @ params.wv.T
    d_x_ln, grads["ln1_gain"], grads["ln1_bias"] = layer_norm_backward(
        d_a, params.ln1_gain, ln1_cache
    )
    d_x = d_x1 + d_x_ln
    return d_x, grads
