from typing import List, Sequence


class IdlcError(Exception):
    """Base class for every error raised by the library."""


class LengthMismatch(IdlcError):
    pass


class EmptyInput(IdlcError):
    pass


class EmptyReference(IdlcError):
    pass


class InvalidParameter(IdlcError):
    pass


class MessageTooLong(IdlcError):
    pass


class OracleLengthMismatch(IdlcError):
    pass


class InsufficientEntropy(IdlcError):
    pass


class DecodeFailure(IdlcError):
    """Block decoder saw more errors than it can correct."""


class InnerDecodeFailure(DecodeFailure):
    """An inner window did not decode; callers usually move on to another window."""


class TooManyBlocks(IdlcError):
    pass


class BudgetExceeded(IdlcError):
    """An adversary ran past one of the limits of its CostBudget."""

    def __init__(self, counter: str, limit: int, value: int):
        super().__init__(f"{counter} budget exceeded: {value} > {limit}")
        self.counter = counter
        self.limit = limit
        self.value = value


class BudgetTooSmall(IdlcError):
    pass


class RegistryUnavailable(IdlcError):
    pass


class DepthViolation(IdlcError):
    """A metered party holds a digest deeper than the rounds it paid for."""


class UnknownChannel(IdlcError):
    pass


class ContainerFormatError(IdlcError):
    pass


class KeyMismatch(IdlcError):
    pass


class ConfigValidationError(IdlcError):
    def __init__(self, problems: Sequence[str]):
        self.problems: List[str] = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


class ChannelBoundViolation(IdlcError):
    """A channel returned a word farther than its advertised distance bound."""
