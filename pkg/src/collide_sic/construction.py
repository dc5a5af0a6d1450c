"""Duty-factor planning and shift-invariant set construction.

Planning: a rate vector summing to one is turned into per-user duty
factors by fixing a decode order q and allocating each user the fraction
of the channel left over by the users decoded after it:

    p(q_k) = R(q_k) / (R(q_1) + ... + R(q_k))

so the first user in the order always gets duty 1. Zero-rate users get
duty 0, sit out the period product, and are appended to the order.

Construction: duty factors r_i/d_i (reduced) become one sequence each via
a recursive fill. User i is described by a matrix with one row per slot
pattern of the previous users' periods (prod of d_j for j < i rows) and
d_i columns, each row holding exactly r_i ones; reading the matrix column
by column and tiling to the full period (prod of all d_j) yields a set
whose generalized correlations are constant in the shifts, with exact
duty factors. Which columns hold the ones is free: the canonical fill
packs them left, the seeded fill draws them per row.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .budget import resolve_budget
from .errors import (
    BoundaryViolationError,
    BudgetExceededError,
    InternalConsistencyError,
    LayoutError,
    ParameterError,
)
from .sequences import BinarySequence, SequenceSet

MAX_PLAN_USERS = 10


def parse_rate(text: str) -> Fraction:
    """Parse a rate literal like "1/3" or "0" into an exact fraction."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"invalid rational {text!r}") from exc
    if not 0 <= value <= 1:
        raise ParameterError(f"rate {text!r} outside [0, 1]")
    return value


def _validate_rates(rates: Sequence[Fraction]) -> tuple[Fraction, ...]:
    rates = tuple(Fraction(r) for r in rates)
    if not rates:
        raise ParameterError("need at least one rate")
    for r in rates:
        if not 0 <= r <= 1:
            raise ParameterError(f"rate {r} outside [0, 1]")
    if sum(rates) != 1:
        raise BoundaryViolationError(
            f"rates must sum to exactly 1, got {sum(rates)}"
        )
    return rates


@dataclass(frozen=True)
class DutyFactorPlan:
    """A decode order plus the per-user duty factors it induces."""

    permutation: tuple[int, ...]
    duty_factors: tuple[Fraction, ...]
    period: int

    def to_obj(self) -> dict:
        return {
            "permutation": list(self.permutation),
            "duty_factors": [str(p) for p in self.duty_factors],
            "period": self.period,
        }


def plan_duty_factors(
    rates: Sequence[Fraction],
    permutation: Sequence[int],
) -> DutyFactorPlan:
    """Duty factors for one decode order over a unit-sum rate vector.

    permutation lists user ids (1-based) in decode order and must cover
    every user exactly once. The induced duty factors telescope back to
    the rates: p(q_k) times the product of (1 - p(q_j)) over j > k (the
    users decoded after q_k) equals R(q_k) exactly.
    """
    rates = _validate_rates(rates)
    M = len(rates)
    perm = tuple(permutation)
    if sorted(perm) != list(range(1, M + 1)):
        raise ParameterError(f"permutation {perm} is not a permutation of 1..{M}")
    duties = [Fraction(0)] * M
    prefix = Fraction(0)
    for user in perm:
        r = rates[user - 1]
        prefix += r
        duties[user - 1] = r / prefix if r > 0 else Fraction(0)
    period = 1
    for user, p in enumerate(duties, start=1):
        if rates[user - 1] > 0:
            period *= p.denominator
    return DutyFactorPlan(perm, tuple(duties), period)


def enumerate_plans(
    rates: Sequence[Fraction],
    allow_large: bool = False,
) -> list[DutyFactorPlan]:
    """All decode orders, shortest period first.

    Only users with positive rate are permuted; zero-rate users follow in
    index order. Ties on period break toward the lexicographically
    smallest permutation. Refuses factorial blowup past 10 positive users
    unless allow_large is set.
    """
    rates = _validate_rates(rates)
    positive = [i for i, r in enumerate(rates, start=1) if r > 0]
    silent = [i for i, r in enumerate(rates, start=1) if r == 0]
    if len(positive) > MAX_PLAN_USERS and not allow_large:
        raise BudgetExceededError(
            "plan enumeration",
            math.factorial(len(positive)),
            math.factorial(MAX_PLAN_USERS),
            hint="pass allow_large=True",
        )
    plans = []
    for perm in itertools.permutations(positive):
        plans.append(plan_duty_factors(rates, perm + tuple(silent)))
    plans.sort(key=lambda pl: (pl.period, pl.permutation))
    seen: set[tuple[Fraction, ...]] = set()
    unique = []
    for pl in plans:
        if pl.duty_factors not in seen:
            seen.add(pl.duty_factors)
            unique.append(pl)
    return unique


def min_period_bound(duty_factors: Sequence[Fraction]) -> int:
    """Every SI set with these duty factors has a period divisible by this."""
    bound = 1
    for p in duty_factors:
        p = Fraction(p)
        if not 0 <= p <= 1:
            raise ParameterError(f"duty factor {p} outside [0, 1]")
        bound *= p.denominator
    return bound


@dataclass(frozen=True)
class ConstructionLayout:
    """Fill policy for the per-user construction matrices.

    canonical-left packs each row's ones into the leftmost columns;
    seeded-random draws the one-columns per row from a seeded generator.
    Explicit matrices can be supplied instead (one per user, row-major),
    in which case they are validated against the required shape and row
    weight.
    """

    fill_policy: str = "canonical-left"
    seed: int | None = None
    arrays: tuple[tuple[tuple[int, ...], ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.fill_policy not in ("canonical-left", "seeded-random"):
            raise LayoutError(f"unknown fill policy {self.fill_policy!r}")
        if self.fill_policy == "seeded-random" and self.seed is None:
            raise LayoutError("seeded-random fill needs a seed")


def _fill_matrix(
    layout: ConstructionLayout,
    user_index: int,
    num_rows: int,
    d: int,
    r: int,
    rng: random.Random | None,
) -> list[tuple[int, ...]]:
    if layout.arrays is not None:
        if user_index - 1 >= len(layout.arrays):
            raise LayoutError(f"no explicit matrix for user {user_index}")
        matrix = [tuple(row) for row in layout.arrays[user_index - 1]]
        if len(matrix) != num_rows:
            raise LayoutError(
                f"user {user_index}: expected {num_rows} rows, got {len(matrix)}"
            )
        for row in matrix:
            if len(row) != d or any(b not in (0, 1) for b in row):
                raise LayoutError(f"user {user_index}: rows must be 0/1 of width {d}")
            if sum(row) != r:
                raise LayoutError(
                    f"user {user_index}: every row must hold exactly {r} ones"
                )
        return matrix
    if layout.fill_policy == "canonical-left":
        row = tuple(1 if c < r else 0 for c in range(d))
        return [row] * num_rows
    matrix = []
    for _ in range(num_rows):
        cols = set(rng.sample(range(d), r))
        matrix.append(tuple(1 if c in cols else 0 for c in range(d)))
    return matrix


def build_si_set(
    duty_factors: Sequence[Fraction],
    layout: ConstructionLayout | None = None,
    verify: bool = True,
    budget: int | None = None,
) -> SequenceSet:
    """Build one sequence per duty factor with constant cross-correlations.

    Works for any duty vector in [0, 1]^M (boundary rates not required);
    duty 0 yields an all-silent sequence, duty 1 an all-ones one. The
    period is the product of the reduced denominators. When verify is set
    and the exhaustive check fits the budget, the result is re-checked for
    shift invariance and an internal error raised on disagreement.
    """
    duties = [Fraction(p) for p in duty_factors]
    for p in duties:
        if not 0 <= p <= 1:
            raise ParameterError(f"duty factor {p} outside [0, 1]")
    if layout is None:
        layout = ConstructionLayout()
    rng = random.Random(layout.seed) if layout.fill_policy == "seeded-random" else None
    period = 1
    for p in duties:
        period *= p.denominator
    sequences = []
    rows_so_far = 1
    for idx, p in enumerate(duties, start=1):
        d, r = p.denominator, p.numerator
        matrix = _fill_matrix(layout, idx, rows_so_far, d, r, rng)
        core = []
        for col in range(d):
            for row in range(rows_so_far):
                core.append(matrix[row][col])
        reps = period // (rows_so_far * d)
        sequences.append(BinarySequence(tuple(core) * reps))
        rows_so_far *= d
    sset = SequenceSet(tuple(sequences))
    for seq, p in zip(sset, duties):
        if seq.duty_factor != p:
            raise InternalConsistencyError(
                f"built sequence has duty {seq.duty_factor}, wanted {p}"
            )
    if verify:
        from .correlation import find_si_violation

        M = sset.size
        L = sset.period
        work = sum(
            math.comb(M, k) * L**k for k in range(2, M + 1)
        )
        if work <= resolve_budget(budget):
            violation = find_si_violation(sset, budget=budget)
            if violation is not None:
                raise InternalConsistencyError(
                    f"construction produced a non-invariant set: {violation}"
                )
    return sset
