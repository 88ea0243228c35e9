from collections.abc import Callable

import numpy as np

from skill_adapters.tensorcore.errors import ContractError
from skill_adapters.tensorcore.tensor import CHECK_DTYPE, Parameter, Tensor


def finite_difference_grad(
    f: Callable[[], Tensor], p: Parameter, h: float = 1e-5
) -> Tensor:
    """Central-difference gradient of scalar `f` with respect to `p`.

    `f` is re-evaluated with each element of `p` nudged by ±h. Only
    meaningful in 64-bit mode.
    """
    if p.value.data.dtype != CHECK_DTYPE:
        raise ContractError(
            f"finite differences need {np.dtype(CHECK_DTYPE).name} parameters, "
            f"{p.name} is {p.value.data.dtype}"
        )
    if h <= 0:
        raise ContractError(f"step h must be positive, got {h}")
    data = p.value.data
    grad = np.zeros_like(data)
    flat = data.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = _scalar(f())
        flat[i] = original - h
        minus = _scalar(f())
        flat[i] = original
        grad.reshape(-1)[i] = (plus - minus) / (2 * h)
    return Tensor(grad)


def _scalar(out: Tensor) -> float:
    if out.data.size != 1:
        raise ContractError(
            f"finite differences need a scalar function, got shape {list(out.shape)}"
        )
    return float(out.data.reshape(()))


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)
