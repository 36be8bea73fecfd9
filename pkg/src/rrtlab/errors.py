"""Error types shared across the package.

Everything subclasses ValueError so callers that do not care about the
distinction can catch the builtin.
"""


class RrtlabError(ValueError):
    """Base class for errors raised by this package."""


class InvalidStructureError(RrtlabError):
    """A tree, degree vector, or event sequence violates a structural invariant."""


class ResourceGuardError(RrtlabError):
    """An exact enumeration or replay was requested beyond its size guard."""


class ConfigurationError(RrtlabError):
    """An experiment configuration is inconsistent or unsupported."""
