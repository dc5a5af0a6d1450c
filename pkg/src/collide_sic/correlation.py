"""Generalized cross-correlations of protocol sequence sets.

The central quantity: given a subset of users, a 0/1 mark per chosen user,
and a shift per chosen user, count the slots n in one period where every
chosen user's shifted sequence equals its mark. Mark 1 selects slots where
the user transmits, mark 0 slots where it is silent, so the count for
marks (1, 0, ..., 0) is exactly the number of collision-free slots the
first chosen user gets per period.

A set is shift-invariant (SI) when the all-ones-marks count is constant in
the shifts for every nonempty subset; it is throughput-invariant (TI) when
the one-hot-marks counts on the full set are constant. Exhaustive checks
enumerate all L^k shift tuples of a subset, so they are guarded by the
work budget; a sampling override exists and can only falsify, never
certify.

Two independent routes compute the same number: a direct slot-count loop
(one shift tuple) and a vectorized tensor over all shift tuples. Tests
hold them against each other; neither is ever expressed via the other.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .budget import check_work
from .errors import InvalidQueryError
from .sequences import SequenceSet, reduce_shifts

_EINSUM_LETTERS = "abcdefghijklmnop"


@dataclass(frozen=True)
class CorrelationQuery:
    """A (subset, marks, shifts) triple; users are 1-based indices."""

    subset: tuple[int, ...]
    marks: tuple[int, ...]
    shifts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.subset) == 0:
            raise InvalidQueryError("query subset must be nonempty")
        if len(set(self.subset)) != len(self.subset):
            raise InvalidQueryError(f"query subset has repeats: {self.subset}")
        if len(self.marks) != len(self.subset) or len(self.shifts) != len(self.subset):
            raise InvalidQueryError("subset, marks and shifts must have equal length")
        for b in self.marks:
            if b not in (0, 1):
                raise InvalidQueryError(f"marks must be 0 or 1, got {b!r}")


def _validate_subset(sset: SequenceSet, subset: Sequence[int]) -> None:
    for i in subset:
        if not 1 <= i <= sset.size:
            raise InvalidQueryError(f"user index {i} out of range 1..{sset.size}")


def cross_correlation(sset: SequenceSet, query: CorrelationQuery) -> int:
    """Direct slot count for one query. Shifts are reduced mod the period."""
    _validate_subset(sset, query.subset)
    L = sset.period
    shifts = reduce_shifts(query.shifts, L)
    rows = [sset[i - 1].bits for i in query.subset]
    count = 0
    for n in range(L):
        for bits, b, t in zip(rows, query.marks, shifts):
            if bits[(n - t) % L] != b:
                break
        else:
            count += 1
    return count


def correlation_at(
    sset: SequenceSet,
    subset: Sequence[int],
    marks: Sequence[int],
    shifts: Sequence[int],
) -> int:
    return cross_correlation(
        sset, CorrelationQuery(tuple(subset), tuple(marks), tuple(shifts))
    )


def correlation_tensor(
    sset: SequenceSet,
    subset: Sequence[int],
    marks: Sequence[int],
    budget: int | None = None,
) -> np.ndarray:
    """Counts for every shift tuple of the subset, shape (L,)*len(subset).

    Entry [t1, ..., tk] is the count at shifts (t1, ..., tk). Work is one
    unit per shift tuple, L^k total, checked against the budget.
    """
    subset = tuple(subset)
    marks = tuple(marks)
    if len(subset) != len(marks):
        raise InvalidQueryError("subset and marks must have equal length")
    if not subset:
        raise InvalidQueryError("query subset must be nonempty")
    if len(set(subset)) != len(subset):
        raise InvalidQueryError(f"query subset has repeats: {subset}")
    _validate_subset(sset, subset)
    k = len(subset)
    if k > len(_EINSUM_LETTERS):
        raise InvalidQueryError(f"subsets above {len(_EINSUM_LETTERS)} users unsupported")
    L = sset.period
    check_work("correlation tensor", L**k, budget, hint="use the sampling override")
    idx = (np.arange(L)[None, :] - np.arange(L)[:, None]) % L
    operands = []
    for i, b in zip(subset, marks):
        x = np.asarray(sset[i - 1].bits, dtype=np.int64)
        if b == 0:
            x = 1 - x
        operands.append(x[idx])
    script = ",".join(f"{_EINSUM_LETTERS[j]}n" for j in range(k))
    script += "->" + _EINSUM_LETTERS[:k]
    return np.einsum(script, *operands)


@dataclass(frozen=True)
class SiViolation:
    """Witness that a constancy check failed: the offending query and values."""

    subset: tuple[int, ...]
    marks: tuple[int, ...]
    shifts: tuple[int, ...]
    value: int
    expected: int


def _constancy_violation(
    sset: SequenceSet,
    subset: tuple[int, ...],
    marks: tuple[int, ...],
    budget: int | None,
    samples: int | None,
    seed: int,
) -> SiViolation | None:
    """First shift tuple where the count differs from the zero-shift value.

    Exhaustive via the tensor when within budget; with samples set, falls
    back to seeded random shift tuples (falsification only) once the
    exhaustive route refuses.
    """
    from .budget import resolve_budget

    L = sset.period
    k = len(subset)
    expected = correlation_at(sset, subset, marks, (0,) * k)
    # sampling is a fallback, not a replacement: stay exhaustive when cheap
    if samples is None or L**k <= resolve_budget(budget):
        tensor = correlation_tensor(sset, subset, marks, budget=budget)
        if np.all(tensor == expected):
            return None
        flat = int(np.argmin(tensor == expected))
        shifts = tuple(int(v) for v in np.unravel_index(flat, tensor.shape))
        return SiViolation(subset, marks, shifts, int(tensor[shifts]), expected)
    rng = random.Random(seed)
    for _ in range(samples):
        shifts = tuple(rng.randrange(L) for _ in range(k))
        value = correlation_at(sset, subset, marks, shifts)
        if value != expected:
            return SiViolation(subset, marks, shifts, value, expected)
    return None


def is_si_for(
    sset: SequenceSet,
    subset: Sequence[int],
    marks: Sequence[int],
    budget: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> bool:
    """Constancy of the count over all shift tuples of one (subset, marks).

    With samples given, an over-budget check degrades to seeded sampling;
    True from a sampled run means only that no violation was found.
    """
    subset = tuple(subset)
    marks = tuple(marks)
    _validate_subset(sset, subset)
    return (
        _constancy_violation(sset, subset, marks, budget, samples, seed) is None
    )


def find_si_violation(
    sset: SequenceSet,
    budget: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> SiViolation | None:
    """First all-ones-marks constancy violation over subsets of growing size.

    Singleton subsets are constant by counting (the value is the weight), so
    enumeration starts at pairs. Returns None when the set is SI.
    """
    M = sset.size
    L = sset.period
    if samples is None:
        total = sum(
            len(list(itertools.combinations(range(M), k))) * L**k
            for k in range(2, M + 1)
        )
        check_work("shift-invariance check", total, budget, hint="pass samples=N")
    for k in range(2, M + 1):
        for subset in itertools.combinations(range(1, M + 1), k):
            marks = (1,) * k
            violation = _constancy_violation(sset, subset, marks, budget, samples, seed)
            if violation is not None:
                return violation
    return None


def is_si_set(
    sset: SequenceSet,
    budget: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> bool:
    """Shift invariance of the whole set (all subsets, all-ones marks)."""
    return find_si_violation(sset, budget, samples, seed) is None


def is_ti_set(
    sset: SequenceSet,
    budget: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> bool:
    """Throughput invariance: one-hot marks on the full set, all users.

    The count with a single 1 at user h is the number of collision-free
    slots user h gets per period, so constancy here says every user's
    uncoded throughput ignores the shifts.
    """
    M = sset.size
    if samples is None:
        check_work("throughput-invariance check", M * sset.period**M, budget,
                   hint="pass samples=N")
    full = tuple(range(1, M + 1))
    for h in range(M):
        marks = tuple(1 if j == h else 0 for j in range(M))
        if _constancy_violation(sset, full, marks, budget, samples, seed) is not None:
            return False
    return True


def verify_shift_sum_identity(
    sset: SequenceSet,
    subset: Sequence[int],
    marks: Sequence[int],
    budget: int | None = None,
) -> bool:
    """Summing the count over all shift tuples factorizes.

    The total over all L^k shift tuples equals L times the product of the
    single-user totals (weight for mark 1, period minus weight for mark 0).
    Holds for every set, SI or not; a False here means a bug.
    """
    subset = tuple(subset)
    marks = tuple(marks)
    _validate_subset(sset, subset)
    tensor = correlation_tensor(sset, subset, marks, budget=budget)
    L = sset.period
    product = 1
    for i, b in zip(subset, marks):
        w = sset[i - 1].weight
        product *= w if b == 1 else L - w
    return int(tensor.sum()) == L * product


def verify_complement_identity(
    sset: SequenceSet,
    subset: Sequence[int],
    marks: Sequence[int],
    flip_user: int,
    budget: int | None = None,
) -> bool:
    """Flipping one mark and summing both counts drops that user.

    For every shift tuple, count(marks) + count(marks with user's mark
    flipped) equals the count over the subset without that user (with the
    remaining marks and shifts); for a singleton subset the right side is
    the period itself. Checked exhaustively over all shift tuples.
    """
    subset = tuple(subset)
    marks = tuple(marks)
    _validate_subset(sset, subset)
    if flip_user not in subset:
        raise InvalidQueryError(f"flip user {flip_user} not in subset {subset}")
    pos = subset.index(flip_user)
    flipped = tuple(1 - b if j == pos else b for j, b in enumerate(marks))
    t_orig = correlation_tensor(sset, subset, marks, budget=budget)
    t_flip = correlation_tensor(sset, subset, flipped, budget=budget)
    total = t_orig + t_flip
    if len(subset) == 1:
        return bool(np.all(total == sset.period))
    rest_subset = subset[:pos] + subset[pos + 1:]
    rest_marks = marks[:pos] + marks[pos + 1:]
    t_rest = correlation_tensor(sset, rest_subset, rest_marks, budget=budget)
    return bool(np.all(total == np.expand_dims(t_rest, axis=pos)))


@dataclass(frozen=True)
class SiWitnessReport:
    """Outcome of the positive-witness / full-invariance comparison."""

    witness_marks: tuple[int, ...] | None
    fully_invariant: bool
    first_violation: SiViolation | None
    consistent: bool


def check_si_witness_equivalence(
    sset: SequenceSet,
    budget: int | None = None,
) -> SiWitnessReport:
    """Compare two characterizations of shift invariance.

    Searches all 2^M mark vectors for one whose full-set count is strictly
    positive at every shift tuple and constant (the witness); independently
    checks constancy for every subset and every mark vector. Reports both
    results plus whether witness existence implied full invariance, which
    the theory predicts and tests assert on construction-built sets.

    Full-set tensors are shared between the two passes, so total work is
    one tensor per (subset, marks) pair.
    """
    M = sset.size
    L = sset.period
    full = tuple(range(1, M + 1))
    subset_work = sum(
        math.comb(M, k) * (2**k) * L**k for k in range(1, M + 1)
    )
    check_work("witness-equivalence check", subset_work, budget)

    full_results: dict[tuple[int, ...], tuple[bool, int, SiViolation | None]] = {}

    def full_summary(marks: tuple[int, ...]) -> tuple[bool, int, SiViolation | None]:
        if marks not in full_results:
            tensor = correlation_tensor(sset, full, marks, budget=budget)
            first = int(tensor.flat[0])
            if np.all(tensor == first):
                full_results[marks] = (True, first, None)
            else:
                flat = int(np.argmin(tensor == first))
                shifts = tuple(int(v) for v in np.unravel_index(flat, tensor.shape))
                full_results[marks] = (
                    False,
                    first,
                    SiViolation(full, marks, shifts, int(tensor[shifts]), first),
                )
        return full_results[marks]

    violation: SiViolation | None = None
    for k in range(1, M + 1):
        for subset in itertools.combinations(range(1, M + 1), k):
            for marks in itertools.product((0, 1), repeat=k):
                if k == M:
                    constant, _, viol = full_summary(marks)
                    violation = viol
                else:
                    violation = _constancy_violation(
                        sset, subset, marks, budget, None, 0
                    )
                if violation is not None:
                    break
            if violation is not None:
                break
        if violation is not None:
            break

    witness: tuple[int, ...] | None = None
    for marks in itertools.product((0, 1), repeat=M):
        constant, value, _ = full_summary(marks)
        if constant and value > 0:
            witness = marks
            break

    fully = violation is None
    consistent = witness is None or fully
    return SiWitnessReport(witness, fully, violation, consistent)


def marks_partition_total(
    sset: SequenceSet,
    subset: Sequence[int],
    shifts: Sequence[int],
) -> int:
    """Sum of counts over all mark vectors at fixed shifts (equals the period)."""
    subset = tuple(subset)
    total = 0
    for marks in itertools.product((0, 1), repeat=len(subset)):
        total += correlation_at(sset, subset, marks, shifts)
    return total
