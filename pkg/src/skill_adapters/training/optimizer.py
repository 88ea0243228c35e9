from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from skill_adapters.tensorcore.errors import ContractError
from skill_adapters.tensorcore.tensor import Parameter


@dataclass
class AdaMaxState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    u: dict[str, np.ndarray] = field(default_factory=dict, repr=False)


def adamax_step(state: AdaMaxState, params: Iterable[Parameter], lr_t: float) -> None:
    """One AdaMax update of every trainable parameter; frozen ones are skipped.

    m <- b1*m + (1-b1)*g;  u <- max(b2*u, |g|);
    theta <- theta - (lr / (1 - b1^t)) * m / (u + eps)
    """
    trainable = [p for p in params if p.trainable]
    missing = [p.name for p in trainable if p.grad is None]
    if missing:
        raise ContractError(f"no gradient for trainable parameter(s): {', '.join(missing)}")
    state.t += 1
    for p in trainable:
        assert p.grad is not None
        g = p.grad.data
        dtype = p.data.dtype.type
        m = state.m.get(p.name)
        u = state.u.get(p.name)
        if m is None or u is None:
            m = np.zeros_like(p.data)
            u = np.zeros_like(p.data)
        m = dtype(state.beta1) * m + dtype(1 - state.beta1) * g
        u = np.maximum(dtype(state.beta2) * u, np.abs(g))
        step = dtype(lr_t / (1 - state.beta1**state.t))
        p.assign(p.data - step * m / (u + dtype(state.eps)))
        state.m[p.name] = m
        state.u[p.name] = u
