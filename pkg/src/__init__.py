"""
Gibbs-type prior toolkit: partition laws, posterior samplers and verification suites
"""
import logging
import logging.config

__version__ = "1.0.0"

LOGGING_CONFIG = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "standard": {
            "format": "[%(asctime)s] [%(levelname)-8s] %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "standard",
            "stream": "ext://sys.stderr",
        },
    },
    "loggers": {
        "src": {
            "handlers": ["console"],
            "level": "INFO",
            "propagate": False,
        },
    },
}


def setup_logging(config=None, level=None):
    """Apply a dictConfig logging setup and return the package logger.

    Args:
        config: logging dictionary, defaults to LOGGING_CONFIG
        level: optional level name overriding the package logger level
    """
    if config is None:
        config = LOGGING_CONFIG
    logging.config.dictConfig(config)
    logger = logging.getLogger("src")
    if level is not None:
        logger.setLevel(level.upper())
    return logger
