class ConfigError(ValueError):
    pass


class VocabError(ValueError):
    pass


class PoolError(ValueError):
    pass


class AdapterPositionError(IndexError):
    pass


class ScopeError(ValueError):
    pass


class CheckpointIntegrityError(ValueError):
    pass


class CheckpointMismatchError(ValueError):
    pass
