import numpy as np

from skill_adapters.tensorcore import ops
from skill_adapters.tensorcore.errors import ContractError
from skill_adapters.tensorcore.tensor import Tensor


def in_batch_loss(scores: Tensor) -> Tensor:
    """Softmax cross-entropy of each row against its own column.

    Row i scores context i against every gold in the batch, so the other
    golds act as negatives.
    """
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
        raise ContractError(
            f"in-batch loss needs a square score matrix, got {list(scores.shape)}"
        )
    batch = scores.shape[0]
    if batch < 2:
        raise ContractError(f"in-batch loss needs at least 2 examples, got {batch}")
    return ops.cross_entropy(scores, np.arange(batch))
