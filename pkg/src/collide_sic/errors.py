"""Exception types shared across the toolkit.

Every error raised by this package derives from ToolkitError so callers
(and the CLI exit-code mapping) can distinguish toolkit failures from bugs.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all errors raised by collide_sic."""


class SequenceFormatError(ToolkitError):
    """A sequence file or sequence literal is malformed."""


class PeriodMismatchError(ToolkitError):
    """Sequences of differing periods were combined without expansion."""


class InvalidQueryError(ToolkitError):
    """A correlation query references users out of range or has
    mismatched subset/marks/shifts lengths."""


class BoundaryViolationError(ToolkitError):
    """A rate vector does not lie on the unit-sum boundary required
    for exact duty-factor planning."""


class ParameterError(ToolkitError):
    """Invalid numeric parameters (coding sizes, packet sizes, ...)."""


class FieldCapacityError(ParameterError):
    """Requested code length exceeds what the byte field supports."""


class InsufficientPacketsError(ToolkitError):
    """Fewer distinct coded packet positions than needed to decode."""


class LayoutError(ToolkitError):
    """A construction fill matrix violates its row-weight contract."""


class ConfigurationError(ToolkitError):
    """Inconsistent channel/user configuration (e.g. code length does
    not match sequence weight, trace too short for the window)."""


class InternalConsistencyError(ToolkitError):
    """The toolkit detected disagreement between two internal routes
    that must agree; indicates a bug, raised rather than hidden."""


class TraceMismatchError(ToolkitError):
    """No candidate shift vector reproduces the observed slot pattern."""


class AmbiguousIdentificationError(ToolkitError):
    """Blind shift identification found more than one candidate."""

    def __init__(self, candidates: list[tuple[int, ...]]):
        self.candidates = candidates
        preview = ", ".join(map(str, candidates[:4]))
        if len(candidates) > 4:
            preview += ", ..."
        super().__init__(
            f"shift identification is ambiguous: {len(candidates)} candidates ({preview})"
        )


class BudgetExceededError(ToolkitError):
    """Estimated work exceeds the configured budget and no sampling or
    override was requested."""

    def __init__(self, what: str, estimate: int, budget: int, hint: str = ""):
        self.estimate = estimate
        self.budget = budget
        msg = (
            f"{what} needs ~{estimate} work units but the budget is {budget}; "
            f"raise the budget (COLLIDE_SIC_BUDGET or --budget)"
        )
        if hint:
            msg += f" or {hint}"
        super().__init__(msg)
