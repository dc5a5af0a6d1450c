"""Acceptance gate: ten end-to-end criteria, one PASS/FAIL line each.

Every test prints "[acceptance] <name>: PASS|FAIL" to the real stdout
(past the capture), computes its verdict as a plain boolean, and only
then asserts, so a full run always shows exactly ten lines.
"""

import itertools
import random
import time
import traceback
from fractions import Fraction

import pytest

from collide_sic import (
    CodingParams,
    SourceBlock,
    UserConfig,
    achievability_check,
    baseline_throughput,
    build_si_set,
    check_si_witness_equivalence,
    codings_for_rates,
    correlation_tensor,
    decode,
    default_horizon,
    encode,
    enumerate_plans,
    identify_shifts,
    can_decode,
    min_period_search,
    necessity_falsifier,
    sequence_set_from_rows,
    sic_receive,
    simulate_trace,
    steady_state_receive,
    sweep_all_shifts,
    verify_complement_identity,
)
from collide_sic.errors import InsufficientPacketsError
from collide_sic.construction import ConstructionLayout

from conftest import random_instance, ref_hit_count

# Running example: always-on user, weight-4 user, alternating user.
EXAMPLE_ROWS = (
    (1, 1, 1, 1, 1, 1),
    (1, 1, 0, 1, 1, 0),
    (1, 0, 1, 0, 1, 0),
)
EXAMPLE_RATES = (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2))
QUARTER_RATES = (Fraction(1, 4),) * 4


def report(capsys, name, ok, notes):
    with capsys.disabled():
        print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'}", flush=True)
    assert ok, f"{name}: " + "; ".join(notes)


def guarded(fn):
    """Run fn() -> (ok, notes); convert exceptions into a FAIL verdict."""
    try:
        return fn()
    except Exception:
        return False, [traceback.format_exc(limit=3)]


@pytest.fixture(scope="module")
def example_set():
    return sequence_set_from_rows(EXAMPLE_ROWS)


@pytest.fixture(scope="module")
def example_sweep(example_set):
    codings = codings_for_rates(example_set, EXAMPLE_RATES)
    start = time.perf_counter()
    sweep = sweep_all_shifts(example_set, codings, EXAMPLE_RATES)
    elapsed = time.perf_counter() - start
    return sweep, elapsed


@pytest.fixture(scope="module")
def four_user_sweep():
    plan = enumerate_plans(QUARTER_RATES)[0]
    sset = build_si_set(plan.duty_factors)
    codings = codings_for_rates(sset, QUARTER_RATES)
    sweep = sweep_all_shifts(sset, codings, QUARTER_RATES, jobs=2)
    return plan, sset, sweep


def test_c01_worked_example_sweep(capsys, example_set, example_sweep):
    def body():
        sweep, elapsed = example_sweep
        notes = []
        codings = codings_for_rates(example_set, EXAMPLE_RATES)
        if [(c.n, c.m) for c in codings] != [(6, 1), (4, 2), (3, 3)]:
            notes.append(f"codings {[(c.n, c.m) for c in codings]}")
        if sweep.verdict is not True:
            notes.append(f"verdict {sweep.verdict}: {sweep.counterexample}")
        if sum(o.class_size for o in sweep.outcomes) != 216:
            notes.append("class sizes do not cover all 216 vectors")
        for o in sweep.outcomes:
            if not o.success:
                notes.append(f"failure at shifts {o.shifts}")
                break
            if o.rounds != ((1,), (2,), (3,)):
                notes.append(f"iteration order {o.rounds} at {o.shifts}")
                break
            if o.t_counts != (1, 2, 3):
                notes.append(f"packet counts {o.t_counts} at {o.shifts}")
                break
        if not (sweep.first_iteration_user == 1
                and sweep.first_iteration_count == 1):
            notes.append("first iteration is not user 1 with one packet")
        if elapsed >= 1.0:
            notes.append(f"sweep took {elapsed:.3f}s")
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "worked-example-sweep", ok, notes)


def test_c02_equal_rates_min_period(capsys):
    def body():
        notes = []
        rates = (Fraction(1, 3),) * 3
        achieved = achievability_check(rates)
        if achieved.verdict is not True:
            notes.append(f"equal-rate verdict {achieved.verdict}")
        if achieved.sequence_set.period != 6:
            notes.append(f"achiever period {achieved.sequence_set.period}")
        search = min_period_search(rates, l_max=6)
        if search.found_period != 6:
            notes.append(f"pruned search found {search.found_period}")
        for entry in search.per_length:
            if entry["period"] < 6 and entry.get("achiever_found"):
                notes.append(f"achiever below 6 at {entry['period']}")
        pair = min_period_search(
            (Fraction(1, 2), Fraction(1, 2)), l_max=2, prune=False
        )
        if pair.found_period != 2:
            notes.append(f"unpruned two-user search found {pair.found_period}")
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "equal-rates-min-period", ok, notes)


def test_c03_four_user_quarter_rates(capsys, four_user_sweep):
    def body():
        plan, sset, sweep = four_user_sweep
        notes = []
        if sorted(plan.duty_factors) != [
            Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(1),
        ]:
            notes.append(f"duty factors {plan.duty_factors}")
        if plan.period != 24 or sset.period != 24:
            notes.append(f"period {plan.period}/{sset.period}")
        if sweep.total_vectors != 331776:
            notes.append(f"total vectors {sweep.total_vectors}")
        if sum(o.class_size for o in sweep.outcomes) != 331776:
            notes.append("class sizes do not cover all vectors")
        if sweep.verdict is not True:
            notes.append(f"verdict {sweep.verdict}: {sweep.counterexample}")
        if not sweep.checks.get("exact_rates"):
            notes.append("rates are not exactly 1/4 each")
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "four-user-quarter-rates", ok, notes)


def test_c04_shift_sum_identity(capsys):
    def body():
        notes = []
        rng = random.Random(41)
        for trial in range(1000):
            rows, subset, marks = random_instance(rng)
            sset = sequence_set_from_rows(rows)
            L = sset.period
            tensor = correlation_tensor(sset, subset, marks)
            product = 1
            for user, mark in zip(subset, marks):
                w = sum(rows[user - 1])
                product *= w if mark else L - w
            if int(tensor.sum()) != L * product:
                notes.append(f"identity failed on trial {trial}")
                break
            shifts = tuple(rng.randrange(L) for _ in subset)
            if tensor[shifts] != ref_hit_count(rows, subset, marks, shifts):
                notes.append(f"tensor disagrees with slot loop on {trial}")
                break
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "shift-sum-identity", ok, notes)


def test_c05_witness_equivalence_and_complement(capsys):
    def body():
        notes = []
        # construction outputs with period <= 24: every duty vector the
        # planner yields for these rate targets, one representative per
        # duty multiset (user relabeling cannot change the checks), plus
        # the two-user half-duty baseline vector
        rate_targets = [
            EXAMPLE_RATES,
            (Fraction(1, 3),) * 3,
            QUARTER_RATES,
            (Fraction(1, 2),) * 2,
        ]
        duty_vectors = {}
        for rates in rate_targets:
            for plan in enumerate_plans(rates):
                if plan.period <= 24:
                    key = tuple(sorted(plan.duty_factors))
                    duty_vectors.setdefault(key, plan.duty_factors)
        duty_vectors.setdefault(
            (Fraction(1, 2), Fraction(1, 2)),
            (Fraction(1, 2), Fraction(1, 2)),
        )
        layouts = [
            ConstructionLayout(),
            ConstructionLayout("seeded-random", seed=0),
        ]
        checked = 0
        for duties in duty_vectors.values():
            for layout in layouts:
                sset = build_si_set(duties, layout)
                eq = check_si_witness_equivalence(sset)
                checked += 1
                if eq.witness_marks is None:
                    notes.append(f"no witness for duties {duties}")
                if not eq.fully_invariant or not eq.consistent:
                    notes.append(f"invariance broken for duties {duties}")
        if checked < 2 * len(duty_vectors) or not duty_vectors:
            notes.append("set family came out empty")
        rng = random.Random(43)
        for trial in range(1000):
            rows, subset, marks = random_instance(rng)
            sset = sequence_set_from_rows(rows)
            flip = rng.choice(subset)
            if not verify_complement_identity(sset, subset, marks, flip):
                notes.append(f"complement identity failed on trial {trial}")
                break
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "witness-equivalence-and-complement", ok, notes)


def test_c06_single_bit_necessity(capsys, example_set):
    def body():
        notes = []
        per_period = (1, 2, 3)
        flips = [(u, pos) for u in range(3) for pos in range(6)]
        rng = random.Random(47)
        mutants = flips + [rng.choice(flips) for _ in range(100 - len(flips))]
        achievers = 0
        for u, pos in mutants:
            rows = [list(r) for r in EXAMPLE_ROWS]
            rows[u][pos] ^= 1
            mutant = sequence_set_from_rows(rows)
            witness = necessity_falsifier(mutant, EXAMPLE_RATES)
            if witness is None:
                achievers += 1
                continue
            starved = [
                i for i, (seq, m) in enumerate(zip(mutant, per_period))
                if seq.weight < m
            ]
            if starved:
                if witness != (0, 0, 0):
                    notes.append(f"flip {(u, pos)}: starved but witness {witness}")
                continue
            codings = tuple(
                CodingParams(seq.weight, m)
                for seq, m in zip(mutant, per_period)
            )
            if steady_state_receive(mutant, witness, codings).success:
                notes.append(f"flip {(u, pos)}: witness {witness} not failing")
        # the specific flip of the second sequence's first slot must fail
        rows = [list(r) for r in EXAMPLE_ROWS]
        rows[1][0] = 0
        if necessity_falsifier(
            sequence_set_from_rows(rows), EXAMPLE_RATES
        ) is None:
            notes.append("the flagged second-sequence mutant still achieves")
        tdma = sequence_set_from_rows([[1, 0], [0, 1]])
        witness = necessity_falsifier(
            tdma, (Fraction(1, 2), Fraction(1, 2))
        )
        if witness != (0, 1):
            notes.append(f"slot-partition witness {witness}")
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "single-bit-necessity", ok, notes)


def test_c07_no_cancellation_baseline(capsys):
    def body():
        notes = []
        for M, expected_period in ((2, 4), (3, 27)):
            duties = (Fraction(1, M),) * M
            sset = build_si_set(duties)
            if sset.period != expected_period:
                notes.append(f"M={M}: period {sset.period}")
            base = baseline_throughput(sset)
            target = Fraction(M - 1, M) ** (M - 1)
            if base.sum_average != target:
                notes.append(f"M={M}: aggregate {base.sum_average} != {target}")
            if not base.constant:
                notes.append(f"M={M}: throughput varies with the shifts")
            per_user = target / M
            if base.average != (per_user,) * M:
                notes.append(f"M={M}: per-user averages {base.average}")
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "no-cancellation-baseline", ok, notes)


def test_c08_erasure_mds(capsys):
    def body():
        notes = []
        rng = random.Random(53)
        for n in range(1, 11):
            for m in range(0, n + 1):
                params = CodingParams(n, m, packet_size=2)
                source = SourceBlock(
                    tuple(rng.randbytes(2) for _ in range(m))
                )
                coded = encode(params, source)
                for pattern in itertools.combinations(range(n), m):
                    pairs = [(p, coded.packets[p]) for p in pattern]
                    if decode(params, pairs).packets != source.packets:
                        notes.append(f"({n},{m}) pattern {pattern} corrupted")
                        return False, notes
        for trial in range(10_000):
            n = rng.randint(1, 10)
            m = rng.randint(0, n)
            params = CodingParams(n, m, packet_size=1)
            source = SourceBlock(
                tuple(rng.randbytes(1) for _ in range(m))
            )
            coded = encode(params, source)
            positions = [rng.randrange(n) for _ in range(rng.randint(0, n))]
            pairs = [(p, coded.packets[p]) for p in positions]
            predicted = can_decode(params, positions)
            try:
                got = decode(params, pairs)
                actual = True
            except InsufficientPacketsError:
                actual = False
            if predicted != actual:
                notes.append(f"trial {trial}: bookkeeping {predicted}, "
                             f"bytes {actual}")
                break
            if actual and got.packets != source.packets:
                notes.append(f"trial {trial}: decoded bytes differ")
                break
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "erasure-mds", ok, notes)


def test_c09_delay_bound(capsys, example_set, example_sweep, four_user_sweep):
    def body():
        notes = []
        example, _ = example_sweep
        _, four_set, four = four_user_sweep
        for label, sweep in (("three-user", example), ("four-user", four)):
            L = sweep.period
            for o in sweep.outcomes:
                iteration = {}
                for k, rnd in enumerate(o.rounds, start=1):
                    for u in rnd:
                        iteration[u] = k
                for u, d in enumerate(o.delays, start=1):
                    if d is not None and d > iteration[u] * L:
                        notes.append(
                            f"{label} shifts {o.shifts}: user {u} delay {d} "
                            f"over {iteration[u]}*{L}"
                        )
                        return False, notes
        # the trace receiver never beats the bound either (spot check)
        rng = random.Random(59)
        for sset, rates in (
            (example_set, EXAMPLE_RATES),
            (four_set, QUARTER_RATES),
        ):
            L, M = sset.period, sset.size
            codings = codings_for_rates(sset, rates)
            horizon = default_horizon(M, L)[1]
            for _ in range(5):
                shifts = tuple(rng.randrange(L) for _ in range(M))
                users = [
                    UserConfig(seq, cod, tau)
                    for seq, cod, tau in zip(sset, codings, shifts)
                ]
                run = sic_receive(simulate_trace(users, horizon), users)
                steady = steady_state_receive(sset, shifts, codings)
                for u, k in steady.iteration_of.items():
                    d = run.decode_delays[u]
                    if d is None or d > k * L:
                        notes.append(
                            f"trace delay {d} for user {u} at {shifts}"
                        )
                        return False, notes
                    if d > steady.delays[u]:
                        notes.append(
                            f"trace slower than steady for user {u} at {shifts}"
                        )
                        return False, notes
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "delay-bound", ok, notes)


def test_c10_blind_consistency(capsys, example_set):
    def body():
        notes = []
        codings = codings_for_rates(example_set, EXAMPLE_RATES)
        horizon = default_horizon(3, 6)[1]
        unique = 0
        counts = set()
        for shifts in itertools.product(range(6), repeat=3):
            users = [
                UserConfig(seq, cod, tau)
                for seq, cod, tau in zip(example_set, codings, shifts)
            ]
            trace = simulate_trace(users, horizon)
            candidates = identify_shifts(trace.steady_kinds(), example_set)
            counts.add(len(candidates))
            if tuple(shifts) not in candidates:
                notes.append(f"true shifts {shifts} not identified")
                return False, notes
            if len(candidates) == 1:
                unique += 1
                blind = sic_receive(trace, users, mode="blind")
                genie = sic_receive(trace, users, mode="genie")
                if (blind.success, blind.t_counts, blind.decode_delays) != (
                    genie.success, genie.t_counts, genie.decode_delays
                ):
                    notes.append(f"blind differs from genie at {shifts}")
                    return False, notes
        # regression fixture from the first exhaustive run: the always-on
        # user hides every shift, so no vector is uniquely identifiable
        # and each observation matches exactly 36 candidates
        if unique != 0:
            notes.append(f"unique identifications {unique}/216, fixture is 0")
        if counts != {36}:
            notes.append(f"candidate counts {sorted(counts)}, fixture is 36")
        return not notes, notes

    ok, notes = guarded(body)
    report(capsys, "blind-consistency", ok, notes)
