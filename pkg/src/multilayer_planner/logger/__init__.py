"""Import package modules for direct import from package."""

from .logger import LoggerMixin
