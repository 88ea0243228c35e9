from skill_adapters.tensorcore import ops
from skill_adapters.tensorcore.errors import (
    ContractError,
    DimensionError,
    NumericsError,
    StaleTapeError,
)
from skill_adapters.tensorcore.gradcheck import finite_difference_grad, relative_error
from skill_adapters.tensorcore.tape import (
    OpCounter,
    OpKind,
    Tape,
    TapeOp,
    backward,
    current_tape,
    reference_gradients,
)
from skill_adapters.tensorcore.tensor import (
    CHECK_DTYPE,
    DEFAULT_DTYPE,
    Parameter,
    Tensor,
    constant,
    set_debug_numerics,
    tensor,
)

__all__ = [
    "CHECK_DTYPE",
    "DEFAULT_DTYPE",
    "ContractError",
    "DimensionError",
    "NumericsError",
    "OpCounter",
    "OpKind",
    "Parameter",
    "StaleTapeError",
    "Tape",
    "TapeOp",
    "Tensor",
    "backward",
    "constant",
    "current_tape",
    "finite_difference_grad",
    "ops",
    "reference_gradients",
    "relative_error",
    "set_debug_numerics",
    "tensor",
]
