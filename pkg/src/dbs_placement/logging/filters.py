import logging
from typing import Callable


def _level_number(level: str | int) -> int:
    if isinstance(level, int):
        return level

    number = logging.getLevelName(level.upper())

    if not isinstance(number, int):
        raise ValueError(f'Unknown logging level: {level}')

    return number


def filter_maker(max_level: str | int, min_level: str | int = logging.NOTSET) -> Callable[[logging.LogRecord], bool]:
    """
    Builds a record filter passing levels in ``[min_level, max_level]``.
    """
    upper = _level_number(max_level)
    lower = _level_number(min_level)

    def record_filter(record: logging.LogRecord) -> bool:
        return lower <= record.levelno <= upper

    return record_filter
