"""Shared fixtures and an engine-independent counting oracle."""

from fractions import Fraction

import pytest

from collide_sic import sequence_set_from_rows

# Three-user running example used across the suite: an always-on user, a
# weight-4 user, and the alternating sequence, at period 6.
WORKED_ROWS = (
    (1, 1, 1, 1, 1, 1),
    (1, 1, 0, 1, 1, 0),
    (1, 0, 1, 0, 1, 0),
)
WORKED_RATES = (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2))


@pytest.fixture
def worked_set():
    return sequence_set_from_rows(WORKED_ROWS)


def ref_hit_count(rows, subset, marks, shifts):
    """Count slots where every chosen user's shifted value equals its mark.

    Direct slot loop over one period, written without any library calls so
    the fast engines have something independent to be checked against.
    A sequence shifted by tau has value row[(t - tau) % L] at slot t.
    """
    L = len(rows[0])
    count = 0
    for t in range(L):
        hit = True
        for user, mark, tau in zip(subset, marks, shifts):
            if rows[user - 1][(t - tau) % L] != mark:
                hit = False
                break
        if hit:
            count += 1
    return count


def random_instance(rng, max_users=3, max_period=10):
    """Random (rows, subset, marks) triple for identity property suites."""
    num_users = rng.randint(1, max_users)
    period = rng.randint(2, max_period)
    rows = [
        [rng.randint(0, 1) for _ in range(period)] for _ in range(num_users)
    ]
    size = rng.randint(1, num_users)
    subset = tuple(sorted(rng.sample(range(1, num_users + 1), size)))
    marks = tuple(rng.randint(0, 1) for _ in range(size))
    return rows, subset, marks
