"""Errors raised by pyseqpt

ConfigError subclasses map to CLI exit code 2, InvariantError subclasses to exit code 3.
"""


class SeqptError(Exception):
    """Base class"""


class ConfigError(SeqptError, ValueError):
    """Invalid parameters or parameter combination"""


class NotPrimePower(ConfigError):
    """Dimension has two or more distinct prime factors"""


class DimensionTooSmall(ConfigError):
    """Dimension below 2"""


class DimensionOrder(ConfigError):
    """Embedding dimension does not exceed the target dimension"""


class FieldMismatch(ConfigError):
    """Operands belong to different finite fields"""


class UnknownIdentity(ConfigError):
    """Identity name not recognized by the oracle"""


class InvariantError(SeqptError, ValueError):
    """Input data violates a structural invariant"""


class MUBConstructionError(InvariantError):
    """A constructed basis set failed its unbiasedness check"""


class ChannelInvariantError(InvariantError):
    """Kraus set or chi matrix violates a channel invariant"""
