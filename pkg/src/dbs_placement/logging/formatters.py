import json
import logging
import traceback
from contextvars import ContextVar

from dbs_placement.serializers.json import CustomJSONEncoder

run_context: ContextVar[dict | None] = ContextVar('run_context', default=None)


class JSONFormatter(logging.Formatter):
    @staticmethod
    def format_exception(exc_info) -> str:
        return ''.join(traceback.format_exception(*exc_info))

    def format(self, record: logging.LogRecord) -> str:
        if context := run_context.get():
            for key, value in context.items():
                setattr(record, key, value)

        if record.exc_info:
            record.exc_text = self.format_exception(record.exc_info)
        else:
            record.exc_text = None

        record.message = record.getMessage()

        return json.dumps(record.__dict__, cls=CustomJSONEncoder)


class ContextFormatter(logging.Formatter):
    """
    Plain-text formatter that prefixes messages with the active run context.
    """
    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)

        if context := run_context.get():
            prefix = ' '.join(f'{key}={value}' for key, value in context.items())
            text = f'[{prefix}] {text}'

        return text
