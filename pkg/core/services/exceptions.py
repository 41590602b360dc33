"""
Error types raised by the Ground War services.

Planners never see OrderError in practice: they go through issue_or_wait(),
which swaps any rejected order for a Wait.
"""


class GroundWarError(Exception):
    """Base class for every error raised by core.services."""


class MapError(GroundWarError):
    """Map graph or map JSON document is invalid."""


class StateError(GroundWarError):
    """A game state cannot be built from the given arguments."""


class OrderError(GroundWarError):
    """An order was rejected by the engine."""

    C2_VIOLATION = 'C2_VIOLATION'
    UNOWNED_SOURCE = 'UNOWNED_SOURCE'
    INSUFFICIENT_FORCE = 'INSUFFICIENT_FORCE'
    NOT_ADJACENT = 'NOT_ADJACENT'
    INVALID_ORDER = 'INVALID_ORDER'

    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code


class AgentSpecError(GroundWarError):
    """Agent specification string could not be parsed."""


class ConfigError(GroundWarError):
    """Experiment or tuning config is malformed."""


class RunInterrupted(GroundWarError):
    """A tournament or sweep was stopped early; `records` holds the finished games."""

    def __init__(self, records):
        super().__init__(f"interrupted after {len(records)} games")
        self.records = records
