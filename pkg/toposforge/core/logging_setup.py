"""Logging configuration for the CLI and the API"""
import logging
import sys

from toposforge.core.errors import ConfigError

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "WARNING") -> None:
    """Send library logs to stderr so that reports on stdout stay clean"""
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level: {level}")
    logging.basicConfig(stream=sys.stderr, level=numeric, format=LOG_FORMAT, force=True)
