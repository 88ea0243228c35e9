class DimensionError(ValueError):
    pass


class ContractError(ValueError):
    pass


class StaleTapeError(RuntimeError):
    pass


class NumericsError(FloatingPointError):
    pass


def shape_mismatch(op: str, *shapes: tuple[int, ...]) -> DimensionError:
    rendered = " and ".join(str(list(shape)) for shape in shapes)
    return DimensionError(f"{op}: incompatible shapes {rendered}")
