"""Work-budget accounting for exhaustive enumerations.

Sweeps and searches enumerate shift-vector or candidate spaces whose size
is known up front. Before starting, each caller estimates its work in
abstract units (one unit = one shift tuple visited, or one steady-state
evaluation for channel sweeps) and refuses to run past the budget unless
the caller explicitly opted into sampling or raised the limit.
"""

from __future__ import annotations

import os

from .errors import BudgetExceededError

DEFAULT_WORK_BUDGET = 10_000_000
ENV_VAR = "COLLIDE_SIC_BUDGET"


def resolve_budget(budget: int | None = None) -> int:
    """Effective budget: explicit argument, else COLLIDE_SIC_BUDGET, else default."""
    if budget is not None:
        if budget <= 0:
            raise ValueError("budget must be positive")
        return budget
    raw = os.environ.get(ENV_VAR)
    if raw is not None:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from exc
        if value <= 0:
            raise ValueError(f"{ENV_VAR} must be positive, got {value}")
        return value
    return DEFAULT_WORK_BUDGET


def check_work(what: str, estimate: int, budget: int | None = None, hint: str = "") -> int:
    """Raise BudgetExceededError if estimate exceeds the effective budget.

    Returns the estimate so callers can log it.
    """
    limit = resolve_budget(budget)
    if estimate > limit:
        raise BudgetExceededError(what, estimate, limit, hint)
    return estimate
