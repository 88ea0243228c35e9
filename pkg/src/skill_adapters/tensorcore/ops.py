"""Differentiable kernels.

Every reduction goes through `seq_sum`, which accumulates in ascending index
order, so results do not depend on numpy's pairwise-summation blocking.
"""

from collections.abc import Sequence

import numpy as np

from skill_adapters.tensorcore.errors import (
    ContractError,
    DimensionError,
    shape_mismatch,
)
from skill_adapters.tensorcore.tape import OpKind, emit
from skill_adapters.tensorcore.tensor import Tensor

_GELU_C = np.sqrt(2.0 / np.pi)
_GELU_K = 0.044715


def seq_sum(x: np.ndarray, axis: int, keepdims: bool = False) -> np.ndarray:
    out = np.cumsum(x, axis=axis).take(-1, axis=axis)
    if keepdims:
        out = np.expand_dims(out, axis)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = seq_sum(grad.reshape(-1, *grad.shape[extra:]), axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = seq_sum(grad, axis=axis, keepdims=True)
    return grad


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise shape_mismatch("matmul", a.shape, b.shape)
    if b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
        raise shape_mismatch("matmul", a.shape, b.shape)
    k, n = b.shape[-2], b.shape[-1]
    a_data, b_data = a.data, b.data

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        ga = np.matmul(g, np.swapaxes(b_data, -1, -2)) if wanted[0] else None
        gb = None
        if wanted[1]:
            if b_data.ndim == 2:
                gb = np.matmul(a_data.reshape(-1, k).T, g.reshape(-1, n))
            else:
                gb = np.matmul(np.swapaxes(a_data, -1, -2), g)
        return ga, gb

    return emit(OpKind.MATMUL, (a, b), np.matmul(a_data, b_data), grad_fn)


def add(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = a.data + b.data
    except ValueError as e:
        raise shape_mismatch("add", a.shape, b.shape) from e
    a_shape, b_shape = a.shape, b.shape

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        return (
            _unbroadcast(g, a_shape) if wanted[0] else None,
            _unbroadcast(g, b_shape) if wanted[1] else None,
        )

    return emit(OpKind.ADD, (a, b), out, grad_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = a.data * b.data
    except ValueError as e:
        raise shape_mismatch("mul", a.shape, b.shape) from e
    a_data, b_data = a.data, b.data

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        return (
            _unbroadcast(g * b_data, a_data.shape) if wanted[0] else None,
            _unbroadcast(g * a_data, b_data.shape) if wanted[1] else None,
        )

    return emit(OpKind.MUL, (a, b), out, grad_fn)


def scale(a: Tensor, factor: float) -> Tensor:
    c = a.dtype.type(factor)

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        return (g * c if wanted[0] else None,)

    return emit(OpKind.SCALE, (a,), a.data * c, grad_fn)


def relu(a: Tensor) -> Tensor:
    positive = a.data > 0

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        return (g * positive if wanted[0] else None,)

    return emit(OpKind.RELU, (a,), np.where(positive, a.data, 0).astype(a.dtype), grad_fn)


def gelu(a: Tensor) -> Tensor:
    x = a.data
    inner = x.dtype.type(_GELU_C) * (x + x.dtype.type(_GELU_K) * x**3)
    t = np.tanh(inner)
    out = 0.5 * x * (1 + t)

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        if not wanted[0]:
            return (None,)
        d_inner = x.dtype.type(_GELU_C) * (1 + 3 * x.dtype.type(_GELU_K) * x**2)
        local = 0.5 * (1 + t) + 0.5 * x * (1 - t * t) * d_inner
        return (g * local,)

    return emit(OpKind.GELU, (a,), out.astype(x.dtype), grad_fn)


def activation(a: Tensor, kind: str) -> Tensor:
    if kind == "relu":
        return relu(a)
    if kind == "gelu":
        return gelu(a)
    raise ContractError(f"unknown activation: {kind}")


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    d = x.shape[-1] if x.ndim else 0
    if d == 0:
        raise DimensionError("layer_norm: last dimension must be non-empty")
    if gamma.shape != (d,) or beta.shape != (d,):
        raise shape_mismatch("layer_norm", x.shape, gamma.shape, beta.shape)
    if eps <= 0:
        raise ContractError(f"layer_norm: eps must be positive, got {eps}")
    xv, gv = x.data, gamma.data
    mean = seq_sum(xv, axis=-1, keepdims=True) / d
    centered = xv - mean
    var = seq_sum(centered * centered, axis=-1, keepdims=True) / d
    inv_std = 1 / np.sqrt(var + xv.dtype.type(eps))
    x_hat = centered * inv_std
    out = x_hat * gv + beta.data

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        gx = ggamma = gbeta = None
        if wanted[0]:
            g_hat = g * gv
            m1 = seq_sum(g_hat, axis=-1, keepdims=True) / d
            m2 = seq_sum(g_hat * x_hat, axis=-1, keepdims=True) / d
            gx = inv_std * (g_hat - m1 - x_hat * m2)
        if wanted[1]:
            ggamma = seq_sum((g * x_hat).reshape(-1, d), axis=0)
        if wanted[2]:
            gbeta = seq_sum(g.reshape(-1, d), axis=0)
        return gx, ggamma, gbeta

    return emit(OpKind.LAYER_NORM, (x, gamma, beta), out, grad_fn)


def softmax(a: Tensor) -> Tensor:
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / seq_sum(e, axis=-1, keepdims=True)

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        if not wanted[0]:
            return (None,)
        return (y * (g - seq_sum(g * y, axis=-1, keepdims=True)),)

    return emit(OpKind.SOFTMAX, (a,), y, grad_fn)


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    if table.ndim != 2:
        raise DimensionError(f"embedding table must be 2-D, got {list(table.shape)}")
    ids = np.asarray(ids, dtype=np.int64)
    rows, width = table.shape

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        if not wanted[0]:
            return (None,)
        gt = np.zeros((rows, width), dtype=g.dtype)
        np.add.at(gt, ids.reshape(-1), g.reshape(-1, width))
        return (gt,)

    return emit(OpKind.EMBEDDING, (table,), table.data[ids], grad_fn)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    original = a.shape
    try:
        out = a.data.reshape(tuple(shape))
    except ValueError as e:
        raise DimensionError(
            f"reshape: cannot view {list(original)} as {list(shape)}"
        ) from e

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        return (g.reshape(original) if wanted[0] else None,)

    return emit(OpKind.RESHAPE, (a,), out, grad_fn)


def transpose(a: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    if axes is None:
        if a.ndim < 2:
            raise DimensionError(f"transpose needs 2 or more dims, got {list(a.shape)}")
        perm = list(range(a.ndim))
        perm[-1], perm[-2] = perm[-2], perm[-1]
    else:
        perm = list(axes)
    inverse = list(np.argsort(perm))

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        return (np.transpose(g, inverse) if wanted[0] else None,)

    return emit(OpKind.TRANSPOSE, (a,), np.transpose(a.data, perm), grad_fn)


def sum(a: Tensor, axis: int | None = None) -> Tensor:  # noqa: A001
    shape = a.shape
    if axis is None:
        out = seq_sum(a.data.reshape(-1), axis=0)
    else:
        out = seq_sum(a.data, axis=axis)

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        if not wanted[0]:
            return (None,)
        expanded = g if axis is None else np.expand_dims(g, axis)
        return (np.broadcast_to(expanded, shape).copy(),)

    return emit(OpKind.SUM, (a,), np.asarray(out), grad_fn)


def dot(u: Tensor, v: Tensor) -> Tensor:
    if u.shape != v.shape:
        raise shape_mismatch("dot", u.shape, v.shape)
    return sum(mul(u, v))


def cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean softmax cross-entropy of each row against its integer target."""
    if logits.ndim != 2:
        raise DimensionError(f"cross_entropy expects [B, C], got {list(logits.shape)}")
    rows = logits.shape[0]
    targets = np.asarray(targets, dtype=np.int64)
    if targets.shape != (rows,):
        raise shape_mismatch("cross_entropy", logits.shape, targets.shape)
    z = logits.data - logits.data.max(axis=-1, keepdims=True)
    log_norm = np.log(seq_sum(np.exp(z), axis=-1, keepdims=True))
    log_probs = z - log_norm
    picked = log_probs[np.arange(rows), targets]
    loss = -seq_sum(picked, axis=0) / rows

    def grad_fn(g: np.ndarray, wanted: tuple[bool, ...]):
        if not wanted[0]:
            return (None,)
        probs = np.exp(log_probs)
        probs[np.arange(rows), targets] -= 1
        return (probs * (g / rows),)

    return emit(OpKind.CROSS_ENTROPY, (logits,), np.asarray(loss), grad_fn)
