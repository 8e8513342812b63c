"""Exception hierarchy shared by all modules.

Everything derives from :class:`LabError` so callers can catch library
failures distinctly from programming errors.  The CLI maps usage/domain
errors to exit code 1 and consistency violations to exit code 2.
"""


class LabError(Exception):
    """Base class for all library errors."""


class ScaleOrderError(LabError, ValueError):
    """Requested a finer scale than the data carries (target level > stored level)."""


class ZeroMassEventError(LabError, ValueError):
    """Conditioning event has zero mass."""


class DomainError(LabError, ValueError):
    """Input violates a documented domain restriction (support window, parameter range)."""


class SeparationError(LabError, ValueError):
    """Base point and planar support are closer than the required unit separation."""


class DeterminationError(LabError, ValueError):
    """A claimed cell-determination witness is inconsistent with the joint table."""


class BudgetError(LabError, RuntimeError):
    """A computation would exceed the configured cell/pair budget."""


class ConsistencyError(LabError, RuntimeError):
    """An internal invariant that should hold by theorem was violated numerically."""


class ConfigError(LabError, ValueError):
    """Malformed experiment configuration (file or flags)."""
