"""Bottleneck adapters with a skip connection, plain and hierarchical."""

from dataclasses import dataclass

import numpy as np

from skill_adapters.config.config import Activation, AdapterConfig
from skill_adapters.tensorcore import ops
from skill_adapters.tensorcore.errors import DimensionError
from skill_adapters.tensorcore.tensor import DEFAULT_DTYPE, Parameter, Tensor


@dataclass(eq=False)
class VanillaAdapter:
    W_down: Parameter
    W_up: Parameter
    b_down: Parameter | None = None
    b_up: Parameter | None = None
    activation: Activation = Activation.RELU

    @property
    def d_o(self) -> int:
        return self.W_down.shape[0]

    @property
    def d_a(self) -> int:
        return self.W_down.shape[1]

    def parameters(self) -> list[Parameter]:
        params = [self.W_down, self.b_down, self.W_up, self.b_up]
        return [p for p in params if p is not None]

    def rename(self, prefix: str) -> None:
        for p in self.parameters():
            p.name = f"{prefix}.{p.name.rsplit('.', 1)[-1]}"


@dataclass(eq=False)
class HierAdapter:
    """A trained base adapter with two task-specific sub-adapters nested in it.

    `ts_pre` runs on the adapter input (width d_o) before the down-projection,
    `ts_mid` runs on the bottleneck activations (width d_a) before the
    up-projection.
    """

    base: VanillaAdapter
    ts_pre: VanillaAdapter
    ts_mid: VanillaAdapter
    task_id: str | None = None

    @property
    def d_o(self) -> int:
        return self.base.d_o

    def base_parameters(self) -> list[Parameter]:
        return self.base.parameters()

    def sub_parameters(self) -> list[Parameter]:
        return [*self.ts_pre.parameters(), *self.ts_mid.parameters()]

    def parameters(self) -> list[Parameter]:
        return [*self.base_parameters(), *self.sub_parameters()]


Adapter = VanillaAdapter | HierAdapter


def _check_width(o: Tensor, d_o: int) -> None:
    if o.ndim == 0 or o.shape[-1] != d_o:
        raise DimensionError(
            f"adapter expects last dimension {d_o}, got shape {list(o.shape)}"
        )


def _bottleneck(a: VanillaAdapter, o: Tensor) -> Tensor:
    z = ops.matmul(o, a.W_down.value)
    if a.b_down is not None:
        z = ops.add(z, a.b_down.value)
    return ops.activation(z, a.activation.value)


def _project_up(a: VanillaAdapter, z: Tensor) -> Tensor:
    up = ops.matmul(z, a.W_up.value)
    if a.b_up is not None:
        up = ops.add(up, a.b_up.value)
    return up


def adapter_forward(a: VanillaAdapter, o: Tensor) -> Tensor:
    _check_width(o, a.d_o)
    return ops.add(o, _project_up(a, _bottleneck(a, o)))


def hier_forward(h: HierAdapter, o: Tensor) -> Tensor:
    _check_width(o, h.d_o)
    z = _bottleneck(h.base, adapter_forward(h.ts_pre, o))
    return ops.add(o, _project_up(h.base, adapter_forward(h.ts_mid, z)))


def apply_adapter(adapter: Adapter, o: Tensor) -> Tensor:
    if isinstance(adapter, HierAdapter):
        return hier_forward(adapter, o)
    return adapter_forward(adapter, o)


def _sub_adapter(
    prefix: str,
    d_outer: int,
    d_bottleneck: int,
    cfg: AdapterConfig,
    rng: np.random.Generator,
) -> VanillaAdapter:
    w_down = rng.normal(0.0, cfg.init_std, size=(d_outer, d_bottleneck))
    adapter = VanillaAdapter(
        W_down=Parameter.from_array(f"{prefix}.W_down", w_down.astype(DEFAULT_DTYPE)),
        W_up=Parameter.from_array(
            f"{prefix}.W_up", np.zeros((d_bottleneck, d_outer), dtype=DEFAULT_DTYPE)
        ),
        activation=cfg.activation,
    )
    if cfg.use_bias:
        adapter.b_down = Parameter.from_array(
            f"{prefix}.b_down", np.zeros(d_bottleneck, dtype=DEFAULT_DTYPE)
        )
        adapter.b_up = Parameter.from_array(
            f"{prefix}.b_up", np.zeros(d_outer, dtype=DEFAULT_DTYPE)
        )
    return adapter


def init_adapter(
    cfg: AdapterConfig, rng: np.random.Generator, prefix: str = "adapter"
) -> VanillaAdapter:
    """Fresh adapter that is exactly the identity map (zero up-projection)."""
    return _sub_adapter(prefix, cfg.d_o, cfg.d_a, cfg, rng)


def wrap_hierarchical(
    base: VanillaAdapter,
    cfg: AdapterConfig,
    rng: np.random.Generator,
    prefix: str = "adapter",
    task_id: str | None = None,
) -> HierAdapter:
    """Nests fresh sub-adapters inside a trained base; the base is reused as is."""
    base.rename(f"{prefix}.base")
    return HierAdapter(
        base=base,
        ts_pre=_sub_adapter(
            f"{prefix}.ts_pre", base.d_o, cfg.sub_bottleneck, cfg, rng
        ),
        ts_mid=_sub_adapter(
            f"{prefix}.ts_mid", base.d_a, cfg.mid_bottleneck, cfg, rng
        ),
        task_id=task_id,
    )


def _bottleneck_size(d_outer: int, d_bottleneck: int, use_bias: bool) -> int:
    size = 2 * d_outer * d_bottleneck
    if use_bias:
        size += d_bottleneck + d_outer
    return size


def count_sub_adapter_params(cfg: AdapterConfig, n_insertion_points: int) -> int:
    per_point = _bottleneck_size(
        cfg.d_o, cfg.sub_bottleneck, cfg.use_bias
    ) + _bottleneck_size(cfg.d_a, cfg.mid_bottleneck, cfg.use_bias)
    return n_insertion_points * per_point


def count_adapter_params(
    cfg: AdapterConfig, n_insertion_points: int, hierarchical: bool = False
) -> int:
    if n_insertion_points < 0:
        raise ValueError(
            f"n_insertion_points must be non-negative, got {n_insertion_points}"
        )
    total = n_insertion_points * _bottleneck_size(cfg.d_o, cfg.d_a, cfg.use_bias)
    if hierarchical:
        total += count_sub_adapter_params(cfg, n_insertion_points)
    return total
