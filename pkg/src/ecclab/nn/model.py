"""Small pre-norm transformer over byte tokens, with hand-written backprop.

Sequence layout: the 33 public-key bytes become 33 embedded input tokens,
followed by 32 trainable query tokens. All 65 positions attend to each other
(no causal mask), and logits are read at the 32 query positions, each a
256-way classification over the corresponding private-key byte.

Forward/backward are explicit numpy; every layer's backward was checked
against central finite differences (see tests). Parameter count in closed
form, with H = hidden, F = ffn_mult*H, L = layers, Ti = 33, To = 32,
V = 256:

    V*H + (Ti+To)*H + To*H                      embeddings
  + L * (4*H*H + 4*H + 4*H + 2*H*F + F + H)     per block (attn, 2 LNs, ffn)
  + 2*H + H*V + V                               final LN and head
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

VOCAB = 256
INPUT_LEN = 33
OUTPUT_LEN = 32
_LN_EPS = 1e-5


class ConfigError(ValueError):
    pass


class NumericError(ArithmeticError):
    """Non-finite values encountered; carries the layer index when known."""

    def __init__(self, message: str, layer_index: int | None = None):
        super().__init__(message)
        self.layer_index = layer_index


@dataclass(frozen=True)
class ModelConfig:
    hidden_size: int
    num_layers: int
    num_heads: int
    vocab: int = VOCAB
    input_len: int = INPUT_LEN
    output_len: int = OUTPUT_LEN
    ffn_mult: int = 4
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        if self.vocab != VOCAB or self.input_len != INPUT_LEN or self.output_len != OUTPUT_LEN:
            raise ConfigError("vocab/input_len/output_len are fixed at 256/33/32")
        if self.hidden_size < 1 or self.num_layers < 1 or self.num_heads < 1:
            raise ConfigError("hidden_size, num_layers and num_heads must be positive")
        if self.hidden_size % self.num_heads != 0:
            raise ConfigError(
                f"hidden_size {self.hidden_size} not divisible by num_heads {self.num_heads}"
            )
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"unsupported dtype {self.dtype}")

    @property
    def seq_len(self) -> int:
        return self.input_len + self.output_len

    @property
    def ffn_size(self) -> int:
        return self.ffn_mult * self.hidden_size

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64


@dataclass
class ModelState:
    config: ModelConfig
    params: dict[str, np.ndarray] = field(default_factory=dict)


def param_names(config: ModelConfig) -> list[str]:
    """Canonical parameter order; serialization and init both follow it."""
    names = ["tok_emb", "pos_emb", "query_emb"]
    for i in range(config.num_layers):
        pre = f"layer{i}."
        names += [pre + k for k in (
            "ln1.g", "ln1.b",
            "attn.wq", "attn.bq", "attn.wk", "attn.bk",
            "attn.wv", "attn.bv", "attn.wo", "attn.bo",
            "ln2.g", "ln2.b",
            "ffn.w1", "ffn.b1", "ffn.w2", "ffn.b2",
        )]
    names += ["ln_f.g", "ln_f.b", "head.w", "head.b"]
    return names


def _param_shape(name: str, cfg: ModelConfig) -> tuple[int, ...]:
    H, F = cfg.hidden_size, cfg.ffn_size
    base = name.split(".", 1)[-1]
    if name == "tok_emb":
        return (cfg.vocab, H)
    if name == "pos_emb":
        return (cfg.seq_len, H)
    if name == "query_emb":
        return (cfg.output_len, H)
    if name == "head.w":
        return (H, cfg.vocab)
    if name == "head.b":
        return (cfg.vocab,)
    if base in ("ln1.g", "ln1.b", "ln2.g", "ln2.b") or name in ("ln_f.g", "ln_f.b"):
        return (H,)
    if base in ("attn.wq", "attn.wk", "attn.wv", "attn.wo"):
        return (H, H)
    if base in ("attn.bq", "attn.bk", "attn.bv", "attn.bo"):
        return (H,)
    if base == "ffn.w1":
        return (H, F)
    if base == "ffn.b1":
        return (F,)
    if base == "ffn.w2":
        return (F, H)
    if base == "ffn.b2":
        return (H,)
    raise KeyError(name)


def param_count(config: ModelConfig) -> int:
    H, F, L = config.hidden_size, config.ffn_size, config.num_layers
    V, Ti, To = config.vocab, config.input_len, config.output_len
    return (
        V * H + (Ti + To) * H + To * H
        + L * (4 * H * H + 4 * H + 4 * H + 2 * H * F + F + H)
        + 2 * H + H * V + V
    )


def model_init(config: ModelConfig) -> ModelState:
    """Seeded init: Xavier-uniform matrices, sqrt(3/H)-uniform embeddings,
    zero biases, unit LayerNorm gains. Same seed, same bits."""
    rng = np.random.default_rng(config.seed)
    dt = config.np_dtype
    params: dict[str, np.ndarray] = {}
    emb_lim = math.sqrt(3.0 / config.hidden_size)
    for name in param_names(config):
        shape = _param_shape(name, config)
        if name in ("tok_emb", "pos_emb", "query_emb"):
            arr = rng.uniform(-emb_lim, emb_lim, size=shape)
        elif name.endswith(".g"):
            arr = np.ones(shape)
        elif len(shape) == 1:
            arr = np.zeros(shape)
        else:
            lim = math.sqrt(6.0 / (shape[0] + shape[1]))
            arr = rng.uniform(-lim, lim, size=shape)
        params[name] = arr.astype(dt)
    state = ModelState(config, params)
    total = sum(p.size for p in params.values())
    if total != param_count(config):
        raise ConfigError(f"parameter count {total} != closed form {param_count(config)}")
    return state


def _layernorm_fwd(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = (x - mu) * inv
    return xhat * g + b, (xhat, inv)


def _layernorm_bwd(dout, cache, g):
    xhat, inv = cache
    dg = (dout * xhat).sum(axis=(0, 1))
    db = dout.sum(axis=(0, 1))
    dxhat = dout * g
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


def _relu_fwd(u):
    return np.maximum(u, 0.0)


def _relu_bwd(dout, u):
    # dout is always a fresh intermediate here, safe to consume in place.
    dout *= u > 0.0
    return dout


def _softmax_last(x):
    x = x - x.max(axis=-1, keepdims=True)
    e = np.exp(x)
    return e / e.sum(axis=-1, keepdims=True)


def _check_finite(arr, layer_index):
    if not np.all(np.isfinite(arr)):
        raise NumericError("non-finite activations", layer_index=layer_index)


def _forward(state: ModelState, batch: np.ndarray, keep_cache: bool):
    cfg = state.config
    P = state.params
    batch = np.asarray(batch)
    if batch.ndim != 2 or batch.shape[1] != cfg.input_len:
        raise ConfigError(f"batch must be [B, {cfg.input_len}], got {batch.shape}")
    if batch.min() < 0 or batch.max() > 255:
        raise ConfigError("batch bytes must lie in [0, 255]")
    batch = batch.astype(np.int64)
    B, T, H = batch.shape[0], cfg.seq_len, cfg.hidden_size
    nh, dh = cfg.num_heads, cfg.hidden_size // cfg.num_heads
    scale = 1.0 / math.sqrt(dh)

    x = np.empty((B, T, H), dtype=cfg.np_dtype)
    x[:, : cfg.input_len] = P["tok_emb"][batch]
    x[:, cfg.input_len :] = P["query_emb"]
    x += P["pos_emb"]

    caches = [] if keep_cache else None
    for i in range(cfg.num_layers):
        pre = f"layer{i}."
        h, ln1c = _layernorm_fwd(x, P[pre + "ln1.g"], P[pre + "ln1.b"])
        hf = h.reshape(B * T, H)
        q = (hf @ P[pre + "attn.wq"] + P[pre + "attn.bq"]).reshape(B, T, nh, dh).transpose(0, 2, 1, 3)
        k = (hf @ P[pre + "attn.wk"] + P[pre + "attn.bk"]).reshape(B, T, nh, dh).transpose(0, 2, 1, 3)
        v = (hf @ P[pre + "attn.wv"] + P[pre + "attn.bv"]).reshape(B, T, nh, dh).transpose(0, 2, 1, 3)
        scores = np.matmul(q, k.transpose(0, 1, 3, 2)) * scale
        attnw = _softmax_last(scores)
        ctx = np.matmul(attnw, v)  # [B, nh, T, dh]
        ctxf = ctx.transpose(0, 2, 1, 3).reshape(B * T, H)
        attn_out = (ctxf @ P[pre + "attn.wo"] + P[pre + "attn.bo"]).reshape(B, T, H)
        x_mid = x + attn_out
        h2, ln2c = _layernorm_fwd(x_mid, P[pre + "ln2.g"], P[pre + "ln2.b"])
        u1 = h2.reshape(B * T, H) @ P[pre + "ffn.w1"] + P[pre + "ffn.b1"]
        a1 = _relu_fwd(u1)
        ffn_out = (a1 @ P[pre + "ffn.w2"] + P[pre + "ffn.b2"]).reshape(B, T, H)
        x_out = x_mid + ffn_out
        _check_finite(x_out, i)
        if keep_cache:
            caches.append((h, ln1c, q, k, v, attnw, ctxf, x_mid, h2, ln2c, u1, a1))
        x = x_out

    xf, lnfc = _layernorm_fwd(x, P["ln_f.g"], P["ln_f.b"])
    queries = xf[:, cfg.input_len :, :]
    logits = queries @ P["head.w"] + P["head.b"]
    _check_finite(logits, cfg.num_layers)
    return logits, (batch, x, xf, lnfc, queries, caches)


def forward(state: ModelState, batch: np.ndarray) -> np.ndarray:
    """Logits [B, 32, 256] at the query positions."""
    logits, _ = _forward(state, batch, keep_cache=False)
    return logits


def loss_and_grads(state: ModelState, batch: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy over the B*32 byte positions and its exact gradient."""
    loss, grads, _ = loss_grads_logits(state, batch, labels)
    return loss, grads


def loss_grads_logits(state: ModelState, batch: np.ndarray, labels: np.ndarray):
    cfg = state.config
    P = state.params
    labels = np.asarray(labels, dtype=np.int64)
    logits, cache = _forward(state, batch, keep_cache=True)
    batch_i, x_last, xf, lnfc, queries, caches = cache
    B = logits.shape[0]
    if labels.shape != (B, cfg.output_len):
        raise ConfigError(f"labels must be [B, {cfg.output_len}], got {labels.shape}")

    probs = _softmax_last(logits)
    npos = B * cfg.output_len
    b_idx, t_idx = np.indices(labels.shape)
    picked = probs[b_idx, t_idx, labels]
    loss = float(-np.log(np.maximum(picked, np.finfo(np.float64).tiny)).mean())
    if not math.isfinite(loss):
        raise NumericError("non-finite loss", layer_index=cfg.num_layers)

    dlogits = probs.copy()
    dlogits[b_idx, t_idx, labels] -= 1.0
    dlogits /= npos
    dlogits = dlogits.astype(cfg.np_dtype)

    grads = {name: np.zeros_like(arr) for name, arr in P.items()}
    H = cfg.hidden_size
    nh = cfg.num_heads
    dh = H // nh
    T = cfg.seq_len
    scale = 1.0 / math.sqrt(dh)

    qf = queries.reshape(B * cfg.output_len, H)
    grads["head.w"] += qf.T @ dlogits.reshape(B * cfg.output_len, cfg.vocab)
    grads["head.b"] += dlogits.sum(axis=(0, 1))
    dxf = np.zeros_like(xf)
    dxf[:, cfg.input_len :, :] = dlogits @ P["head.w"].T
    dx, dg, db = _layernorm_bwd(dxf, lnfc, P["ln_f.g"])
    grads["ln_f.g"] += dg
    grads["ln_f.b"] += db

    for i in range(cfg.num_layers - 1, -1, -1):
        pre = f"layer{i}."
        h, ln1c, q, k, v, attnw, ctxf, x_mid, h2, ln2c, u1, a1 = caches[i]
        # ffn branch
        dffn = dx.reshape(B * T, H)
        grads[pre + "ffn.w2"] += a1.T @ dffn
        grads[pre + "ffn.b2"] += dffn.sum(axis=0)
        da1 = dffn @ P[pre + "ffn.w2"].T
        du1 = _relu_bwd(da1, u1)
        h2f = h2.reshape(B * T, H)
        grads[pre + "ffn.w1"] += h2f.T @ du1
        grads[pre + "ffn.b1"] += du1.sum(axis=0)
        dh2 = (du1 @ P[pre + "ffn.w1"].T).reshape(B, T, H)
        dx_mid_ln, dg2, db2 = _layernorm_bwd(dh2, ln2c, P[pre + "ln2.g"])
        grads[pre + "ln2.g"] += dg2
        grads[pre + "ln2.b"] += db2
        dx_mid = dx + dx_mid_ln
        # attention branch
        dao = dx_mid.reshape(B * T, H)
        grads[pre + "attn.wo"] += ctxf.T @ dao
        grads[pre + "attn.bo"] += dao.sum(axis=0)
        dctx = (dao @ P[pre + "attn.wo"].T).reshape(B, T, nh, dh).transpose(0, 2, 1, 3)
        dattnw = np.matmul(dctx, v.transpose(0, 1, 3, 2))
        dv = np.matmul(attnw.transpose(0, 1, 3, 2), dctx)
        dscores = attnw * (dattnw - (dattnw * attnw).sum(axis=-1, keepdims=True))
        dscores *= scale
        dq = np.matmul(dscores, k)
        dk = np.matmul(dscores.transpose(0, 1, 3, 2), q)
        dqf = dq.transpose(0, 2, 1, 3).reshape(B * T, H)
        dkf = dk.transpose(0, 2, 1, 3).reshape(B * T, H)
        dvf = dv.transpose(0, 2, 1, 3).reshape(B * T, H)
        hfl = h.reshape(B * T, H)
        grads[pre + "attn.wq"] += hfl.T @ dqf
        grads[pre + "attn.bq"] += dqf.sum(axis=0)
        grads[pre + "attn.wk"] += hfl.T @ dkf
        grads[pre + "attn.bk"] += dkf.sum(axis=0)
        grads[pre + "attn.wv"] += hfl.T @ dvf
        grads[pre + "attn.bv"] += dvf.sum(axis=0)
        dh_ = (dqf @ P[pre + "attn.wq"].T
               + dkf @ P[pre + "attn.wk"].T
               + dvf @ P[pre + "attn.wv"].T).reshape(B, T, H)
        dx_ln, dg1, db1 = _layernorm_bwd(dh_, ln1c, P[pre + "ln1.g"])
        grads[pre + "ln1.g"] += dg1
        grads[pre + "ln1.b"] += db1
        dx = dx_mid + dx_ln

    grads["pos_emb"] += dx.sum(axis=0)
    grads["query_emb"] += dx[:, cfg.input_len :, :].sum(axis=0)
    np.add.at(grads["tok_emb"], batch_i, dx[:, : cfg.input_len, :])
    return loss, grads, logits


def per_byte_accuracy(logits: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of positions where argmax(logits) equals the label byte.

    Ties break toward the lowest byte value (np.argmax picks the first
    maximal index), keeping the score identical across platforms.
    """
    pred = np.argmax(logits, axis=-1)
    return float((pred == np.asarray(labels)).mean())
