"""Periodic binary protocol sequences and sets of them.

A protocol sequence is one period of a 0/1 schedule: user i transmits in
local slot n of every period iff bits[n] == 1. The duty factor is the
fraction of ones. Sets bundle one sequence per user at a common period;
combining different periods requires an explicit expansion step so that
accidental mixing is caught early.

The on-disk format is a single JSON object:

    {"period": L, "sequences": [[0,1,...], ...]}

parsed strictly: every row must have exactly L entries, each 0 or 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PeriodMismatchError, SequenceFormatError


@dataclass(frozen=True)
class BinarySequence:
    """One period of a periodic 0/1 transmission schedule."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) == 0:
            raise SequenceFormatError("sequence period must be at least 1")
        for b in self.bits:
            if b not in (0, 1):
                raise SequenceFormatError(f"sequence entries must be 0 or 1, got {b!r}")

    @property
    def period(self) -> int:
        return len(self.bits)

    @property
    def weight(self) -> int:
        return sum(self.bits)

    @property
    def duty_factor(self) -> Fraction:
        return Fraction(self.weight, self.period)

    def value_at(self, n: int) -> int:
        """Sequence value at (possibly negative) absolute slot n."""
        return self.bits[n % len(self.bits)]

    def cyclic_shift(self, tau: int) -> "BinarySequence":
        """Sequence delayed by tau slots: result(n) = self(n - tau)."""
        L = len(self.bits)
        tau %= L
        return BinarySequence(tuple(self.bits[(n - tau) % L] for n in range(L)))

    def ones(self) -> tuple[int, ...]:
        """Slot offsets of the ones within one period, ascending."""
        return tuple(n for n, b in enumerate(self.bits) if b)

    def as_mask(self) -> int:
        """Integer mask with bit n set iff bits[n] == 1."""
        mask = 0
        for n, b in enumerate(self.bits):
            if b:
                mask |= 1 << n
        return mask

    def repeat(self, times: int) -> "BinarySequence":
        if times < 1:
            raise SequenceFormatError("repeat count must be >= 1")
        return BinarySequence(self.bits * times)


@dataclass(frozen=True)
class SequenceSet:
    """One sequence per user, all at the same period.

    Users are numbered 1..M in list order throughout the toolkit.
    """

    sequences: tuple[BinarySequence, ...]

    def __post_init__(self) -> None:
        if len(self.sequences) == 0:
            raise SequenceFormatError("a sequence set needs at least one sequence")
        periods = {s.period for s in self.sequences}
        if len(periods) > 1:
            raise PeriodMismatchError(
                f"sequences have differing periods {sorted(periods)}; "
                "use expand_to_common_period first"
            )

    @property
    def period(self) -> int:
        return self.sequences[0].period

    @property
    def size(self) -> int:
        return len(self.sequences)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(s.weight for s in self.sequences)

    @property
    def duty_factors(self) -> tuple[Fraction, ...]:
        return tuple(s.duty_factor for s in self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def __getitem__(self, index: int) -> BinarySequence:
        return self.sequences[index]


def expand_to_common_period(sequences: Iterable[BinarySequence]) -> SequenceSet:
    """Repeat each sequence up to the least common multiple of the periods."""
    seqs = tuple(sequences)
    if not seqs:
        raise SequenceFormatError("a sequence set needs at least one sequence")
    lcm = 1
    for s in seqs:
        lcm = math.lcm(lcm, s.period)
    return SequenceSet(tuple(s.repeat(lcm // s.period) for s in seqs))


def sequence_set_from_rows(rows: Sequence[Sequence[int]]) -> SequenceSet:
    """Build a set from raw 0/1 rows of equal length."""
    return SequenceSet(tuple(BinarySequence(tuple(row)) for row in rows))


def reduce_shifts(shifts: Sequence[int], period: int) -> tuple[int, ...]:
    """Normalize a shift vector into [0, period)."""
    return tuple(t % period for t in shifts)


def load_sequence_file(path: str) -> SequenceSet:
    """Parse a sequence-set JSON file, strictly."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SequenceFormatError(f"cannot read sequence file {path}: {exc}") from exc
    return parse_sequence_obj(data)


def parse_sequence_obj(data: object) -> SequenceSet:
    if not isinstance(data, dict):
        raise SequenceFormatError("sequence file must contain a JSON object")
    unknown = set(data) - {"period", "sequences"}
    if unknown:
        raise SequenceFormatError(f"unknown keys in sequence file: {sorted(unknown)}")
    if "period" not in data or "sequences" not in data:
        raise SequenceFormatError('sequence file needs "period" and "sequences" keys')
    period = data["period"]
    rows = data["sequences"]
    if not isinstance(period, int) or isinstance(period, bool) or period < 1:
        raise SequenceFormatError(f"period must be a positive integer, got {period!r}")
    if not isinstance(rows, list) or not rows:
        raise SequenceFormatError("sequences must be a non-empty list of rows")
    parsed = []
    for idx, row in enumerate(rows):
        if not isinstance(row, list):
            raise SequenceFormatError(f"sequence {idx + 1} is not a list")
        if len(row) != period:
            raise SequenceFormatError(
                f"sequence {idx + 1} has {len(row)} entries, expected period {period}"
            )
        for b in row:
            if not isinstance(b, int) or isinstance(b, bool) or b not in (0, 1):
                raise SequenceFormatError(
                    f"sequence {idx + 1} contains {b!r}; entries must be 0 or 1"
                )
        parsed.append(BinarySequence(tuple(row)))
    return SequenceSet(tuple(parsed))


def sequence_set_to_obj(sset: SequenceSet) -> dict:
    return {
        "period": sset.period,
        "sequences": [list(s.bits) for s in sset.sequences],
    }


def save_sequence_file(path: str, sset: SequenceSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sequence_set_to_obj(sset), fh, indent=2, sort_keys=True)
        fh.write("\n")
