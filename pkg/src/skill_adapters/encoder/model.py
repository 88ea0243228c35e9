import copy
import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from skill_adapters.adapters.modules import Adapter, HierAdapter
from skill_adapters.config.config import EncoderConfig
from skill_adapters.tensorcore.tensor import DEFAULT_DTYPE, Parameter

logger = logging.getLogger(__name__)


class SlotKind(Enum):
    ATTN = "attn"
    FFN = "ffn"


@dataclass(eq=False)
class Attention:
    W_q: Parameter
    b_q: Parameter
    W_k: Parameter
    b_k: Parameter
    W_v: Parameter
    b_v: Parameter
    W_o: Parameter
    b_o: Parameter
    n_heads: int

    def parameters(self) -> list[Parameter]:
        return [
            self.W_q,
            self.b_q,
            self.W_k,
            self.b_k,
            self.W_v,
            self.b_v,
            self.W_o,
            self.b_o,
        ]


@dataclass(eq=False)
class FeedForward:
    W_1: Parameter
    b_1: Parameter
    W_2: Parameter
    b_2: Parameter

    def parameters(self) -> list[Parameter]:
        return [self.W_1, self.b_1, self.W_2, self.b_2]


@dataclass(eq=False)
class LayerNorm:
    gamma: Parameter
    beta: Parameter
    eps: float = 1e-5

    def parameters(self) -> list[Parameter]:
        return [self.gamma, self.beta]


@dataclass(eq=False)
class TransformerBlock:
    index: int
    attn: Attention
    attn_norm: LayerNorm
    ffn: FeedForward
    ffn_norm: LayerNorm
    attn_adapter: Adapter | None = None
    ffn_adapter: Adapter | None = None

    def get_slot(self, kind: SlotKind) -> Adapter | None:
        return self.attn_adapter if kind is SlotKind.ATTN else self.ffn_adapter

    def set_slot(self, kind: SlotKind, adapter: Adapter | None) -> None:
        if kind is SlotKind.ATTN:
            self.attn_adapter = adapter
        else:
            self.ffn_adapter = adapter

    def slot_prefix(self, kind: SlotKind) -> str:
        return f"block{self.index}.{kind.value}.adapter"

    def adapters(self) -> list[Adapter]:
        return [a for a in (self.attn_adapter, self.ffn_adapter) if a is not None]

    def backbone_parameters(self) -> list[Parameter]:
        return [
            *self.attn.parameters(),
            *self.attn_norm.parameters(),
            *self.ffn.parameters(),
            *self.ffn_norm.parameters(),
        ]

    def layer_norm_parameters(self) -> list[Parameter]:
        return [*self.attn_norm.parameters(), *self.ffn_norm.parameters()]


@dataclass(eq=False)
class TaskHead:
    """Linear map on pooled vectors, applied to both sides."""

    W: Parameter
    b: Parameter

    def parameters(self) -> list[Parameter]:
        return [self.W, self.b]


@dataclass(eq=False)
class RetrievalModel:
    config: EncoderConfig
    pad_id: int
    tokens: Parameter
    positions: Parameter
    blocks: list[TransformerBlock]
    head: TaskHead | None = None
    name: str = field(default="backbone")

    def backbone_parameters(self) -> list[Parameter]:
        params = [self.tokens, self.positions]
        for block in self.blocks:
            params.extend(block.backbone_parameters())
        return params

    def adapters(self) -> Iterator[Adapter]:
        for block in self.blocks:
            yield from block.adapters()

    def adapter_parameters(self) -> list[Parameter]:
        return [p for a in self.adapters() for p in a.parameters()]

    def sub_adapter_parameters(self) -> list[Parameter]:
        return [
            p
            for a in self.adapters()
            if isinstance(a, HierAdapter)
            for p in a.sub_parameters()
        ]

    def head_parameters(self) -> list[Parameter]:
        return self.head.parameters() if self.head is not None else []

    def parameters(self) -> list[Parameter]:
        return [
            *self.backbone_parameters(),
            *self.adapter_parameters(),
            *self.head_parameters(),
        ]

    def named_parameters(self) -> dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def trainable_count(self) -> int:
        return sum(p.size for p in self.parameters() if p.trainable)

    def n_positions(self) -> int:
        return 2 * len(self.blocks)


def _normal(
    rng: np.random.Generator, std: float, shape: tuple[int, ...]
) -> np.ndarray:
    return rng.normal(0.0, std, size=shape).astype(DEFAULT_DTYPE)


def _zeros(*shape: int) -> np.ndarray:
    return np.zeros(shape, dtype=DEFAULT_DTYPE)


def _ones(*shape: int) -> np.ndarray:
    return np.ones(shape, dtype=DEFAULT_DTYPE)


def _layer_norm(prefix: str, d: int, eps: float) -> LayerNorm:
    return LayerNorm(
        gamma=Parameter.from_array(f"{prefix}.gamma", _ones(d)),
        beta=Parameter.from_array(f"{prefix}.beta", _zeros(d)),
        eps=eps,
    )


def _block(index: int, cfg: EncoderConfig, rng: np.random.Generator) -> TransformerBlock:
    d, f, std = cfg.d_model, cfg.d_ffn, cfg.init_std
    p = f"block{index}"

    def weight(name: str, shape: tuple[int, ...]) -> Parameter:
        return Parameter.from_array(name, _normal(rng, std, shape))

    attn = Attention(
        W_q=weight(f"{p}.attn.W_q", (d, d)),
        b_q=Parameter.from_array(f"{p}.attn.b_q", _zeros(d)),
        W_k=weight(f"{p}.attn.W_k", (d, d)),
        b_k=Parameter.from_array(f"{p}.attn.b_k", _zeros(d)),
        W_v=weight(f"{p}.attn.W_v", (d, d)),
        b_v=Parameter.from_array(f"{p}.attn.b_v", _zeros(d)),
        W_o=weight(f"{p}.attn.W_o", (d, d)),
        b_o=Parameter.from_array(f"{p}.attn.b_o", _zeros(d)),
        n_heads=cfg.n_heads,
    )
    ffn = FeedForward(
        W_1=weight(f"{p}.ffn.W_1", (d, f)),
        b_1=Parameter.from_array(f"{p}.ffn.b_1", _zeros(f)),
        W_2=weight(f"{p}.ffn.W_2", (f, d)),
        b_2=Parameter.from_array(f"{p}.ffn.b_2", _zeros(d)),
    )
    return TransformerBlock(
        index=index,
        attn=attn,
        attn_norm=_layer_norm(f"{p}.attn_norm", d, cfg.ln_eps),
        ffn=ffn,
        ffn_norm=_layer_norm(f"{p}.ffn_norm", d, cfg.ln_eps),
    )


def init_model(cfg: EncoderConfig, pad_id: int, rng: np.random.Generator) -> RetrievalModel:
    """Randomly initialized backbone with empty adapter slots and no head."""
    tokens = Parameter.from_array(
        "embed.tokens", _normal(rng, cfg.init_std, (cfg.vocab_size, cfg.d_model))
    )
    positions = Parameter.from_array(
        "embed.positions", _normal(rng, cfg.init_std, (cfg.max_len, cfg.d_model))
    )
    blocks = [_block(i, cfg, rng) for i in range(cfg.n_layers)]
    return RetrievalModel(
        config=cfg, pad_id=pad_id, tokens=tokens, positions=positions, blocks=blocks
    )


def init_head(d_model: int) -> TaskHead:
    return TaskHead(
        W=Parameter.from_array("head.W", np.eye(d_model, dtype=DEFAULT_DTYPE)),
        b=Parameter.from_array("head.b", _zeros(d_model)),
    )


def clone_model(model: RetrievalModel, name: str | None = None) -> RetrievalModel:
    """Deep copy with fresh node ids and no gradient buffers."""
    twin = copy.deepcopy(model)
    for p in twin.parameters():
        p.grad = None
        p.refresh()
    if name is not None:
        twin.name = name
    return twin


def same_weights(a: RetrievalModel, b: RetrievalModel) -> bool:
    pa, pb = a.named_parameters(), b.named_parameters()
    if pa.keys() != pb.keys():
        return False
    return all(
        pa[k].data.shape == pb[k].data.shape
        and pa[k].data.tobytes() == pb[k].data.tobytes()
        for k in pa
    )
