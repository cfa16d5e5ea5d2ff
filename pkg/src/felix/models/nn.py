"""Batched numpy transformer pieces with hand-written backward passes.

Parameters live in a flat ``dict[str, ndarray]``; every ``*_bwd`` adds into a
gradient dict with the same keys.  Activations are (batch, time, features) and
``mask`` is a (batch, time) bool array marking real (non-pad) tokens.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -1e9
_GELU_C = np.sqrt(2.0 / np.pi)


def sinusoid_table(max_len: int, d: int) -> np.ndarray:
    pos = np.arange(max_len)[:, None]
    i = np.arange(0, d, 2)[None, :]
    angle = pos / np.power(10000.0, i / d)
    table = np.zeros((max_len, d))
    table[:, 0::2] = np.sin(angle)
    table[:, 1::2] = np.cos(angle[:, : d // 2])
    return table


def _acc(grads, name, value):
    if name in grads:
        grads[name] += value
    else:
        grads[name] = value.copy()


def _outer(x, dy):
    # sum over all leading axes of x[..., i] * dy[..., j]
    return x.reshape(-1, x.shape[-1]).T @ dy.reshape(-1, dy.shape[-1])


def _lead_sum(dy):
    return dy.reshape(-1, dy.shape[-1]).sum(0)


def linear_fwd(x, p, name):
    return x @ p[name + ".w"] + p[name + ".b"]


def linear_bwd(dy, x, p, name, grads):
    _acc(grads, name + ".w", _outer(x, dy))
    _acc(grads, name + ".b", _lead_sum(dy))
    return dy @ p[name + ".w"].T


def layernorm_fwd(x, p, name, eps=1e-5):
    mu = x.mean(-1, keepdims=True)
    var = x.var(-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xh = (x - mu) * inv
    return xh * p[name + ".g"] + p[name + ".b"], (xh, inv)


def layernorm_bwd(dy, cache, p, name, grads):
    xh, inv = cache
    _acc(grads, name + ".g", _lead_sum(dy * xh))
    _acc(grads, name + ".b", _lead_sum(dy))
    dxh = dy * p[name + ".g"]
    d = xh.shape[-1]
    return inv / d * (d * dxh - dxh.sum(-1, keepdims=True) - xh * (dxh * xh).sum(-1, keepdims=True))


def gelu(u):
    return 0.5 * u * (1.0 + np.tanh(_GELU_C * (u + 0.044715 * u ** 3)))


def gelu_grad(u):
    t = np.tanh(_GELU_C * (u + 0.044715 * u ** 3))
    return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * _GELU_C * (1.0 + 3 * 0.044715 * u * u)


def softmax(s, axis=-1):
    s = s - s.max(axis=axis, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(s, axis=-1):
    s = s - s.max(axis=axis, keepdims=True)
    return s - np.log(np.exp(s).sum(axis=axis, keepdims=True))


def softmax_bwd(dp, pr):
    return pr * (dp - (dp * pr).sum(-1, keepdims=True))


# -- transformer layer ---------------------------------------------------------


def init_layer(rng, p, name, d, d_ff):
    for sub in ("ln1", "ln2"):
        p[f"{name}.{sub}.g"] = np.ones(d)
        p[f"{name}.{sub}.b"] = np.zeros(d)
    for proj in ("q", "k", "v", "o"):
        p[f"{name}.attn.{proj}.w"] = rng.normal(0.0, d ** -0.5, (d, d))
        p[f"{name}.attn.{proj}.b"] = np.zeros(d)
    p[f"{name}.ffn.1.w"] = rng.normal(0.0, d ** -0.5, (d, d_ff))
    p[f"{name}.ffn.1.b"] = np.zeros(d_ff)
    p[f"{name}.ffn.2.w"] = rng.normal(0.0, d_ff ** -0.5, (d_ff, d))
    p[f"{name}.ffn.2.b"] = np.zeros(d)


def _split(x, heads):
    b, t, d = x.shape
    return x.reshape(b, t, heads, d // heads).transpose(0, 2, 1, 3)


def _merge(x):
    b, h, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dh)


def layer_fwd(x, p, name, mask, heads):
    """Pre-LN self-attention + GELU feed-forward block."""
    a, c1 = layernorm_fwd(x, p, name + ".ln1")
    q = _split(linear_fwd(a, p, name + ".attn.q"), heads)
    k = _split(linear_fwd(a, p, name + ".attn.k"), heads)
    v = _split(linear_fwd(a, p, name + ".attn.v"), heads)
    scale = 1.0 / np.sqrt(q.shape[-1])
    s = (q @ k.transpose(0, 1, 3, 2)) * scale
    s = np.where(mask[:, None, None, :], s, NEG_INF)
    pr = softmax(s)
    o = _merge(pr @ v)
    x1 = x + linear_fwd(o, p, name + ".attn.o")
    b, c2 = layernorm_fwd(x1, p, name + ".ln2")
    u = linear_fwd(b, p, name + ".ffn.1")
    g = gelu(u)
    out = x1 + linear_fwd(g, p, name + ".ffn.2")
    return out, (a, c1, q, k, v, pr, o, b, c2, u, g, scale, heads)


def layer_bwd(dout, cache, p, name, grads):
    a, c1, q, k, v, pr, o, b, c2, u, g, scale, heads = cache
    dg = linear_bwd(dout, g, p, name + ".ffn.2", grads)
    du = dg * gelu_grad(u)
    db = linear_bwd(du, b, p, name + ".ffn.1", grads)
    dx1 = dout + layernorm_bwd(db, c2, p, name + ".ln2", grads)
    do = _split(linear_bwd(dx1, o, p, name + ".attn.o", grads), heads)
    dpr = do @ v.transpose(0, 1, 3, 2)
    dv = pr.transpose(0, 1, 3, 2) @ do
    ds = softmax_bwd(dpr, pr) * scale
    dq = ds @ k
    dk = ds.transpose(0, 1, 3, 2) @ q
    da = linear_bwd(_merge(dq), a, p, name + ".attn.q", grads)
    da += linear_bwd(_merge(dk), a, p, name + ".attn.k", grads)
    da += linear_bwd(_merge(dv), a, p, name + ".attn.v", grads)
    return dx1 + layernorm_bwd(da, c1, p, name + ".ln1", grads)


# -- encoder ---------------------------------------------------------------------


def init_encoder(rng, p, name, vocab_size, d, layers, d_ff):
    p[name + ".tok_emb"] = rng.normal(0.0, 1.0, (vocab_size, d))
    for i in range(layers):
        init_layer(rng, p, f"{name}.l{i}", d, d_ff)
    p[name + ".ln_f.g"] = np.ones(d)
    p[name + ".ln_f.b"] = np.zeros(d)


def encoder_fwd(ids, mask, p, name, layers, heads, pos_table):
    t = ids.shape[1]
    if t > pos_table.shape[0]:
        raise ValueError(f"sequence length {t} exceeds max_len {pos_table.shape[0]}")
    x = p[name + ".tok_emb"][ids] + pos_table[:t]
    caches = []
    for i in range(layers):
        x, c = layer_fwd(x, p, f"{name}.l{i}", mask, heads)
        caches.append(c)
    h, cf = layernorm_fwd(x, p, name + ".ln_f")
    return h, (ids, caches, cf)


def encoder_bwd(dh, cache, p, name, grads):
    ids, caches, cf = cache
    dx = layernorm_bwd(dh, cf, p, name + ".ln_f", grads)
    for i in reversed(range(len(caches))):
        dx = layer_bwd(dx, caches[i], p, f"{name}.l{i}", grads)
    demb = np.zeros_like(p[name + ".tok_emb"])
    np.add.at(demb, ids.reshape(-1), dx.reshape(-1, dx.shape[-1]))
    _acc(grads, name + ".tok_emb", demb)


def cross_entropy(logits, gold, weight):
    """Weighted CE and its gradient wrt logits.

    ``gold`` holds class ids (ignored where ``weight`` is 0); the loss is
    ``sum(weight * -log p[gold])``.
    """
    logp = log_softmax(logits)
    safe = np.where(weight > 0, gold, 0)
    picked = np.take_along_axis(logp, safe[..., None], axis=-1)[..., 0]
    loss = -(weight * picked).sum()
    grad = np.exp(logp)
    np.put_along_axis(grad, safe[..., None], np.take_along_axis(grad, safe[..., None], -1) - 1.0, -1)
    return loss, grad * weight[..., None]
