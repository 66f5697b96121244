from pathlib import Path


class PlacementError(Exception):
    pass


class InvalidParameterError(PlacementError, ValueError):
    pass


class GridIndexError(PlacementError, IndexError):
    pass


class DemandParseError(PlacementError, ValueError):
    def __init__(self, path: Path | str, line: int, message: str):
        super().__init__(f'{path}:{line}: {message}')
        self.path = path
        self.line = line


class InfeasibleLoadError(PlacementError, ValueError):
    pass


class UnstableQueueError(InfeasibleLoadError):
    pass


class OracleLimitError(PlacementError, ValueError):
    pass


class ConfigError(PlacementError, ValueError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(f'{field}: {message}' if field else message)
        self.field = field
