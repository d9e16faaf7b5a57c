"""Exception hierarchy shared across the package."""


class RankOptError(Exception):
    """Base class for all errors raised by rankopt."""


class DomainError(RankOptError, ValueError):
    """An input lies outside the domain of a function (e.g. a non-finite score)."""


class UndefinedMetricError(RankOptError, ValueError):
    """A metric has no defined value, typically because a class is missing."""


class EmptyClassError(RankOptError, ValueError):
    """A pairwise loss was asked for a batch lacking positives or negatives."""


class ConfigError(RankOptError, ValueError):
    pass


class ContractViolation(RankOptError, ValueError):
    """A precondition of the caller was broken (e.g. an unsorted batch)."""


class DimensionError(RankOptError, ValueError):
    pass


class TrainingAborted(RankOptError, FloatingPointError):
    """Raised when a loss or gradient goes non-finite during training."""

    def __init__(self, message, epoch=None, step=None):
        super().__init__(message)
        self.epoch = epoch
        self.step = step
