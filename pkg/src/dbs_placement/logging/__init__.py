import logging.config

from dbs_placement.conf import CommonSettings


def setup_logging(settings: CommonSettings):
    formatter = 'json' if settings.logging_formatter == 'json' else 'default'

    logging.config.dictConfig({
        'version': 1,
        'disable_existing_loggers': False,
        'filters': {
            'below_warning': {
                '()': 'dbs_placement.logging.filters.filter_maker',
                'max_level': 'INFO',
            },
        },
        'formatters': {
            'default': {
                '()': 'dbs_placement.logging.formatters.ContextFormatter',
                'format': settings.logging_format,
            },
            'json': {
                '()': 'dbs_placement.logging.formatters.JSONFormatter',
            },
        },
        'handlers': {
            'stdout': {
                'class': 'logging.StreamHandler',
                'stream': 'ext://sys.stdout',
                'formatter': formatter,
                'filters': ['below_warning'],
            },
            'stderr': {
                'class': 'logging.StreamHandler',
                'stream': 'ext://sys.stderr',
                'formatter': formatter,
                'level': 'WARNING',
            },
        },
        'root': {
            'level': settings.logging_level,
            'handlers': ['stdout', 'stderr'],
        },
    })
