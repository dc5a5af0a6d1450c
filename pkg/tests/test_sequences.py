"""Sequence container semantics and the strict file format."""

import json
from fractions import Fraction

import pytest

from collide_sic import (
    BinarySequence,
    PeriodMismatchError,
    SequenceFormatError,
    SequenceSet,
    expand_to_common_period,
    load_sequence_file,
    parse_sequence_obj,
    reduce_shifts,
    save_sequence_file,
    sequence_set_from_rows,
    sequence_set_to_obj,
)

from conftest import WORKED_ROWS


def test_basic_properties():
    seq = BinarySequence((1, 1, 0, 1, 0, 0))
    assert seq.period == 6
    assert seq.weight == 3
    assert seq.duty_factor == Fraction(1, 2)
    assert seq.ones() == (0, 1, 3)
    assert seq.as_mask() == 0b001011


def test_entries_validated():
    with pytest.raises(SequenceFormatError):
        BinarySequence(())
    with pytest.raises(SequenceFormatError):
        BinarySequence((0, 2, 1))


def test_value_at_wraps_both_directions():
    seq = BinarySequence((1, 0, 0, 1))
    assert [seq.value_at(n) for n in range(4)] == [1, 0, 0, 1]
    assert seq.value_at(4) == 1
    assert seq.value_at(-1) == 1
    assert seq.value_at(-3) == 0


def test_cyclic_shift_is_a_delay():
    seq = BinarySequence((1, 1, 0, 0, 0))
    shifted = seq.cyclic_shift(2)
    # result(n) = self(n - tau): the ones move tau slots later.
    assert shifted.bits == (0, 0, 1, 1, 0)
    for n in range(5):
        assert shifted.value_at(n) == seq.value_at(n - 2)
    assert seq.cyclic_shift(5).bits == seq.bits
    assert seq.cyclic_shift(-1).bits == seq.cyclic_shift(4).bits


def test_repeat_preserves_duty():
    seq = BinarySequence((1, 0, 0))
    rep = seq.repeat(4)
    assert rep.period == 12
    assert rep.duty_factor == seq.duty_factor
    with pytest.raises(SequenceFormatError):
        seq.repeat(0)


def test_set_requires_common_period():
    with pytest.raises(PeriodMismatchError):
        SequenceSet((BinarySequence((1, 0)), BinarySequence((1, 0, 0))))
    with pytest.raises(SequenceFormatError):
        SequenceSet(())


def test_set_accessors(worked_set):
    assert worked_set.period == 6
    assert worked_set.size == 3
    assert worked_set.weights == (6, 4, 3)
    assert worked_set.duty_factors == (
        Fraction(1),
        Fraction(2, 3),
        Fraction(1, 2),
    )
    assert worked_set[1].bits == WORKED_ROWS[1]
    assert [s.period for s in worked_set] == [6, 6, 6]


def test_expand_to_common_period():
    sset = expand_to_common_period(
        [BinarySequence((1, 0)), BinarySequence((1, 0, 0))]
    )
    assert sset.period == 6
    assert sset[0].bits == (1, 0, 1, 0, 1, 0)
    assert sset[1].bits == (1, 0, 0, 1, 0, 0)


def test_reduce_shifts():
    assert reduce_shifts((7, -1, 0), 6) == (1, 5, 0)


def test_file_round_trip(tmp_path, worked_set):
    path = tmp_path / "set.json"
    save_sequence_file(str(path), worked_set)
    loaded = load_sequence_file(str(path))
    assert loaded == worked_set
    obj = json.loads(path.read_text())
    assert set(obj) == {"period", "sequences"}


@pytest.mark.parametrize(
    "data",
    [
        [],
        {"period": 2},
        {"sequences": [[1, 0]]},
        {"period": 2, "sequences": [[1, 0]], "extra": 1},
        {"period": 0, "sequences": []},
        {"period": "2", "sequences": [[1, 0]]},
        {"period": 2, "sequences": [[1, 0, 1]]},
        {"period": 2, "sequences": [[1, 2]]},
        {"period": 2, "sequences": [[True, False]]},
        {"period": 2, "sequences": []},
        {"period": 2, "sequences": "10"},
    ],
)
def test_parse_rejects_malformed(data):
    with pytest.raises(SequenceFormatError):
        parse_sequence_obj(data)


def test_to_obj_round_trips(worked_set):
    obj = sequence_set_to_obj(worked_set)
    assert parse_sequence_obj(obj) == worked_set
