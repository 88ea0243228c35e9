import math

from skill_adapters.tensorcore.errors import ContractError


def warmup_steps(total_steps: int, warmup_fraction: float) -> int:
    # round first so 0.1 * 30 is 3 steps, not 4
    return math.ceil(round(warmup_fraction * total_steps, 9))


def lr_at(step: int, total_steps: int, peak: float, warmup_fraction: float) -> float:
    """Linear warm-up from 0 to `peak`, then linear decay back to 0 at `total_steps`."""
    if total_steps == 0:
        raise ContractError("learning-rate schedule needs at least one step")
    if not 0 <= step <= total_steps:
        raise ContractError(f"step {step} is outside [0, {total_steps}]")
    warm = warmup_steps(total_steps, warmup_fraction)
    if warm > 0 and step <= warm:
        return peak * step / warm
    return peak * (total_steps - step) / (total_steps - warm)


def phase_lr(update: int, total_updates: int, peak: float, warmup_fraction: float) -> float:
    """Rate of update `update` (1-based) of a phase with `total_updates` updates.

    The schedule is laid over ``total_updates + 1`` points so that the zero at
    each end falls outside the updates actually taken.
    """
    if not 1 <= update <= total_updates:
        raise ContractError(f"update {update} is outside [1, {total_updates}]")
    return lr_at(update, total_updates + 1, peak, warmup_fraction)
