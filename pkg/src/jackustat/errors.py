"""Exception types raised across the package."""

from __future__ import annotations


class JackUStatError(Exception):
    """Base class for all package errors."""


class InvalidOrderError(JackUStatError, ValueError):
    """Kernel or subset order outside ``0 <= s <= n``."""


class BudgetExceededError(JackUStatError, RuntimeError):
    """An enumeration would exceed the configured budget."""


class EnumerationTooLargeError(BudgetExceededError):
    """Exhaustive ordering count above the hard cap."""


class EmptySelectionError(JackUStatError, RuntimeError):
    """Bernoulli sampling selected no subsample (N-hat = 0)."""


class DegenerateKernelError(JackUStatError, ValueError):
    """First-order projection variance is not positive."""


class DatasetTooSmallError(JackUStatError, ValueError):
    """Dataset has fewer rows than the estimator needs."""


class DimensionMismatchError(JackUStatError, ValueError):
    """Query point and design matrix disagree in dimension."""


class ConfigError(JackUStatError, ValueError):
    """Invalid experiment or CLI configuration."""


class EqualScalesError(InvalidOrderError):
    """Two-scale weights are undefined when both scales coincide."""


class InvalidLevelError(JackUStatError, ValueError):
    """Confidence level outside (0, 1) or negative variance."""
