from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from skill_adapters.tensorcore.errors import DimensionError, NumericsError

DEFAULT_DTYPE = np.float32
CHECK_DTYPE = np.float64

_node_ids = itertools.count(1)
_debug_numerics = False


def set_debug_numerics(enabled: bool) -> None:
    global _debug_numerics
    _debug_numerics = enabled


def next_node_id() -> int:
    return next(_node_ids)


class Tensor:
    """A dense row-major array plus its node identity on the tape.

    `requires_grad` is derived: a parameter leaf follows its parameter's
    trainable flag, an op output requires grad iff one of its inputs did.
    """

    __slots__ = ("data", "id", "_requires_grad", "param")

    def __init__(
        self,
        data: np.ndarray,
        *,
        requires_grad: bool = False,
        param: Parameter | None = None,
    ) -> None:
        self.data = data
        self.id = next_node_id()
        self._requires_grad = requires_grad
        self.param = param

    @property
    def requires_grad(self) -> bool:
        if self.param is not None:
            return self.param.trainable
        return self._requires_grad

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(id={self.id}, shape={list(self.shape)}, dtype={self.dtype})"


def tensor(values: object, dtype: type = DEFAULT_DTYPE) -> Tensor:
    return Tensor(np.array(values, dtype=dtype))


def constant(values: np.ndarray) -> Tensor:
    """Wraps an array that never receives a gradient (masks, biases)."""
    return Tensor(np.asarray(values))


@dataclass(eq=False)
class Parameter:
    name: str
    value: Tensor
    trainable: bool = True
    grad: Tensor | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.value.param = self

    @classmethod
    def from_array(
        cls, name: str, data: np.ndarray, *, trainable: bool = True
    ) -> Parameter:
        return cls(name=name, value=Tensor(np.array(data)), trainable=trainable)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return int(self.value.data.size)

    @property
    def data(self) -> np.ndarray:
        return self.value.data

    def set_trainable(self, trainable: bool) -> None:
        self.trainable = trainable
        if not trainable:
            self.grad = None

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: np.ndarray) -> None:
        if not self.trainable:
            return
        if grad.shape != self.value.data.shape:
            raise DimensionError(
                f"gradient for {self.name} has shape {list(grad.shape)}, "
                f"expected {list(self.value.data.shape)}"
            )
        if self.grad is None:
            self.grad = Tensor(grad.astype(self.value.data.dtype, copy=True))
        else:
            self.grad.data = self.grad.data + grad

    def assign(self, data: np.ndarray) -> None:
        if data.shape != self.value.data.shape:
            raise DimensionError(
                f"cannot assign shape {list(data.shape)} to {self.name} "
                f"of shape {list(self.value.data.shape)}"
            )
        self.value.data = np.array(data, dtype=self.value.data.dtype)

    def refresh(self) -> None:
        """Issues a fresh node id, used after copying a parameter tree."""
        self.value = Tensor(self.value.data, param=self)

    def astype(self, dtype: type) -> None:
        self.value.data = self.value.data.astype(dtype)
        self.grad = None


def check_finite(op: str, inputs: tuple[Tensor, ...], out: np.ndarray) -> None:
    if not _debug_numerics:
        return
    if np.isfinite(out).all():
        return
    if all(np.isfinite(t.data).all() for t in inputs):
        raise NumericsError(f"{op} produced non-finite values from finite inputs")
