"""Forward pass of the shared-tower retrieval encoder.

Every sequence is padded to ``max_len`` before it enters the tower, so a
caller-padded sequence and its unpadded form produce identical arrays at
every step.
"""

from collections.abc import Sequence

import numpy as np

from skill_adapters.adapters.modules import apply_adapter
from skill_adapters.config.config import Pooling
from skill_adapters.encoder.model import (
    Attention,
    FeedForward,
    LayerNorm,
    RetrievalModel,
    TaskHead,
    TransformerBlock,
)
from skill_adapters.errors import VocabError
from skill_adapters.tensorcore import ops
from skill_adapters.tensorcore.errors import ContractError, DimensionError
from skill_adapters.tensorcore.tensor import Parameter, Tensor, constant

MASK_VALUE = -1e9

TokenSeq = Sequence[int]


def prepare_batch(
    model: RetrievalModel, seqs: Sequence[TokenSeq]
) -> tuple[np.ndarray, np.ndarray]:
    """Token ids padded to max_len and the matching real-token mask."""
    if len(seqs) == 0:
        raise ContractError("cannot encode an empty batch")
    cfg = model.config
    ids = np.full((len(seqs), cfg.max_len), model.pad_id, dtype=np.int64)
    for row, seq in enumerate(seqs):
        tokens = np.asarray(seq, dtype=np.int64)
        if tokens.size > cfg.max_len:
            raise ContractError(
                f"sequence of length {tokens.size} exceeds max_len {cfg.max_len}"
            )
        bad = tokens[(tokens < 0) | (tokens >= cfg.vocab_size)]
        if bad.size:
            raise VocabError(
                f"token {int(bad[0])} is outside the vocabulary [0, {cfg.vocab_size})"
            )
        ids[row, : tokens.size] = tokens
    mask = ids != model.pad_id
    empty = np.flatnonzero(~mask.any(axis=1))
    if empty.size:
        raise ContractError(f"sequence {int(empty[0])} has no non-padding tokens")
    return ids, mask


def _linear(x: Tensor, W: Parameter, b: Parameter) -> Tensor:
    return ops.add(ops.matmul(x, W.value), b.value)


def _attention(attn: Attention, h: Tensor, key_bias: Tensor) -> Tensor:
    batch, length, d = h.shape
    n_heads = attn.n_heads
    d_head = d // n_heads

    def split_heads(x: Tensor) -> Tensor:
        return ops.transpose(
            ops.reshape(x, (batch, length, n_heads, d_head)), (0, 2, 1, 3)
        )

    q = split_heads(_linear(h, attn.W_q, attn.b_q))
    k = split_heads(_linear(h, attn.W_k, attn.b_k))
    v = split_heads(_linear(h, attn.W_v, attn.b_v))
    logits = ops.scale(ops.matmul(q, ops.transpose(k)), 1.0 / np.sqrt(d_head))
    weights = ops.softmax(ops.add(logits, key_bias))
    ctx = ops.transpose(ops.matmul(weights, v), (0, 2, 1, 3))
    return _linear(ops.reshape(ctx, (batch, length, d)), attn.W_o, attn.b_o)


def _feed_forward(ffn: FeedForward, h: Tensor) -> Tensor:
    return _linear(ops.gelu(_linear(h, ffn.W_1, ffn.b_1)), ffn.W_2, ffn.b_2)


def _norm(norm: LayerNorm, x: Tensor) -> Tensor:
    return ops.layer_norm(x, norm.gamma.value, norm.beta.value, norm.eps)


def block_forward(block: TransformerBlock, h: Tensor, mask: np.ndarray) -> Tensor:
    """h <- LN(h + Ada(Attn(h))), then h <- LN(h + Ada(FFN(h))).

    Accepts ``[B, L, d]`` with a ``[B, L]`` mask or a single ``[L, d]``
    sequence with an ``[L]`` mask. Empty adapter slots are the identity.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != h.shape[:-1]:
        raise DimensionError(
            f"mask shape {list(mask.shape)} does not match sequence shape "
            f"{list(h.shape[:-1])}"
        )
    single = h.ndim == 2
    if single:
        h = ops.reshape(h, (1, *h.shape))
        mask = mask[None, :]
    key_bias = constant(
        np.where(mask, 0.0, MASK_VALUE).astype(h.dtype)[:, None, None, :]
    )

    a = _attention(block.attn, h, key_bias)
    if block.attn_adapter is not None:
        a = apply_adapter(block.attn_adapter, a)
    h = _norm(block.attn_norm, ops.add(h, a))

    f = _feed_forward(block.ffn, h)
    if block.ffn_adapter is not None:
        f = apply_adapter(block.ffn_adapter, f)
    h = _norm(block.ffn_norm, ops.add(h, f))

    if single:
        h = ops.reshape(h, h.shape[1:])
    return h


def encode_batch(
    model: RetrievalModel,
    seqs: Sequence[TokenSeq],
    task_head: TaskHead | None = None,
) -> Tensor:
    """Pooled encodings ``[B, d_model]``; uses `task_head`, else the model's head."""
    ids, mask = prepare_batch(model, seqs)
    length = ids.shape[1]
    h = ops.add(
        ops.embedding(model.tokens.value, ids),
        ops.embedding(model.positions.value, np.arange(length)),
    )
    for block in model.blocks:
        h = block_forward(block, h, mask)

    weights = mask[..., None].astype(h.dtype)
    pooled = ops.sum(ops.mul(h, constant(weights)), axis=1)
    if model.config.pooling is Pooling.MEAN:
        counts = mask.sum(axis=1, keepdims=True).astype(h.dtype)
        pooled = ops.mul(pooled, constant(1 / counts))

    head = task_head if task_head is not None else model.head
    if head is not None:
        pooled = _linear(pooled, head.W, head.b)
    return pooled


def encode(
    model: RetrievalModel, tokens: TokenSeq, task_head: TaskHead | None = None
) -> Tensor:
    pooled = encode_batch(model, [tokens], task_head)
    return ops.reshape(pooled, (model.config.d_model,))


def score(model: RetrievalModel, ctx: TokenSeq, cand: TokenSeq) -> Tensor:
    return ops.dot(encode(model, ctx), encode(model, cand))


def score_matrix(
    model: RetrievalModel,
    contexts: Sequence[TokenSeq],
    candidates: Sequence[TokenSeq],
) -> Tensor:
    """``[B, B']`` scores of every context against every candidate."""
    u = encode_batch(model, contexts)
    v = encode_batch(model, candidates)
    return ops.matmul(u, ops.transpose(v))
