"""Exception types raised across the package.

Every error inherits from :class:`FeatDumpError` so callers can catch the
whole family with one clause.
"""


class FeatDumpError(Exception):
    """Base class for all featdump errors."""


class ConfigError(FeatDumpError):
    """Invocation is invalid: unknown layer, bad input size, duplicate stems."""


class ModelLoadFailure(FeatDumpError):
    """The backbone or its weights could not be loaded, or produced wrong shapes."""


class DecodeFailure(FeatDumpError):
    """An input image could not be decoded."""
