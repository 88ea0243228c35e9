from __future__ import annotations

import logging
from collections.abc import Callable, Iterator
from contextvars import ContextVar, Token
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from skill_adapters.tensorcore.errors import ContractError, StaleTapeError
from skill_adapters.tensorcore.tensor import Parameter, Tensor, check_finite

logger = logging.getLogger(__name__)

# Receives the output gradient and, per input, whether its gradient is wanted.
# Returns one gradient (or None) per input.
BackwardFn = Callable[[np.ndarray, tuple[bool, ...]], tuple[np.ndarray | None, ...]]


class OpKind(Enum):
    MATMUL = "matmul"
    ADD = "add"
    MUL = "mul"
    SCALE = "scale"
    RELU = "relu"
    GELU = "gelu"
    LAYER_NORM = "layer_norm"
    SOFTMAX = "softmax"
    EMBEDDING = "embedding"
    RESHAPE = "reshape"
    TRANSPOSE = "transpose"
    SUM = "sum"
    CROSS_ENTROPY = "cross_entropy"


@dataclass
class OpCounter:
    forward: int = 0
    backward: int = 0


@dataclass
class TapeOp:
    kind: OpKind
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn

    @property
    def input_ids(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.inputs)

    @property
    def output_id(self) -> int:
        return self.output.id


_current_tape: ContextVar[Tape | None] = ContextVar("current_tape", default=None)


def current_tape() -> Tape | None:
    return _current_tape.get()


@dataclass
class Tape:
    """Define-by-run record of one forward pass."""

    ops: list[TapeOp] = field(default_factory=list)
    op_counters: dict[OpKind, OpCounter] = field(default_factory=dict)
    _outputs: set[int] = field(default_factory=set, repr=False)
    _token: Token | None = field(default=None, repr=False)

    def __enter__(self) -> Tape:
        self._token = _current_tape.set(self)
        return self

    def __exit__(self, *exc: object) -> None:
        if self._token is not None:
            _current_tape.reset(self._token)
            self._token = None

    def record(self, op: TapeOp) -> None:
        self.ops.append(op)
        self._outputs.add(op.output.id)
        self.counter(op.kind).forward += 1

    def counter(self, kind: OpKind) -> OpCounter:
        if kind not in self.op_counters:
            self.op_counters[kind] = OpCounter()
        return self.op_counters[kind]

    def contains(self, node: Tensor) -> bool:
        return node.id in self._outputs

    def backward_count(self, kind: OpKind | None = None) -> int:
        if kind is not None:
            return self.counter(kind).backward
        return sum(c.backward for c in self.op_counters.values())

    def forward_count(self, kind: OpKind | None = None) -> int:
        if kind is not None:
            return self.counter(kind).forward
        return sum(c.forward for c in self.op_counters.values())

    def parameters(self) -> Iterator[Parameter]:
        seen: set[int] = set()
        for op in self.ops:
            for t in op.inputs:
                if t.param is not None and t.id not in seen:
                    seen.add(t.id)
                    yield t.param


def emit(
    kind: OpKind,
    inputs: tuple[Tensor, ...],
    out: np.ndarray,
    backward: BackwardFn,
) -> Tensor:
    check_finite(kind.value, inputs, out)
    result = Tensor(out, requires_grad=any(t.requires_grad for t in inputs))
    tape = _current_tape.get()
    if tape is not None:
        tape.record(TapeOp(kind=kind, inputs=inputs, output=result, backward=backward))
    return result


def _propagate(tape: Tape, loss: Tensor, *, truncate: bool) -> dict[int, np.ndarray]:
    if not tape.contains(loss):
        raise StaleTapeError(f"loss node {loss.id} was not recorded on this tape")
    if loss.data.size != 1:
        raise ContractError(
            f"backward needs a scalar loss, got shape {list(loss.shape)}"
        )
    if truncate and not loss.requires_grad:
        return {}
    grads: dict[int, np.ndarray] = {loss.id: np.ones_like(loss.data)}
    for op in reversed(tape.ops):
        g = grads.get(op.output.id)
        if g is None:
            continue
        if truncate and not op.output.requires_grad:
            continue
        wanted = tuple((not truncate) or t.requires_grad for t in op.inputs)
        input_grads = op.backward(g, wanted)
        counter = tape.counter(op.kind)
        for t, gi in zip(op.inputs, input_grads, strict=True):
            if gi is None:
                continue
            counter.backward += 1
            if t.id in grads:
                grads[t.id] = grads[t.id] + gi
            else:
                grads[t.id] = gi
    return grads


def backward(tape: Tape, loss: Tensor) -> None:
    """Reverse pass that stops below the lowest trainable parameter.

    Only trainable parameters get a gradient buffer; frozen parameters
    and sub-graphs without a trainable leaf never run a backward kernel.
    """
    grads = _propagate(tape, loss, truncate=True)
    if not grads:
        logger.debug("backward skipped: nothing trainable reaches the loss")
        return
    for param in tape.parameters():
        if param.trainable and param.value.id in grads:
            param.accumulate_grad(grads[param.value.id])


def reference_gradients(tape: Tape, loss: Tensor) -> dict[str, np.ndarray]:
    """Untruncated reverse pass over every reachable op; writes nothing."""
    grads = _propagate(tape, loss, truncate=False)
    return {
        param.name: grads[param.value.id]
        for param in tape.parameters()
        if param.value.id in grads
    }
