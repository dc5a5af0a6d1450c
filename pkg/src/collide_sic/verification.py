"""Exhaustive verification of zero-error claims over all shifts.

Everything here reduces to the steady-state receiver evaluated at many
shift vectors. Two exact size cuts keep that tractable:

* Translation classes. Adding a common offset to every shift translates
  the whole slot pattern, so success, iteration structure, counts and
  delays are unchanged. Sweeps evaluate the L^(M-1) representatives with
  first shift 0 and account each with multiplicity L; the first failing
  representative in lexicographic order is also the lexicographically
  first failing vector overall.
* Early exit. Searches that only need achieves-everywhere/fails-somewhere
  stop at the first failing representative.

Budgets: one work unit is one steady-state evaluation. Estimates are
checked up front and refused with the estimate in the message; sampling
overrides evaluate seeded random vectors and can only falsify, never
certify (a clean sampled run reports verdict null, not true).
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .budget import check_work
from .channel import steady_state_receive
from .construction import (
    ConstructionLayout,
    DutyFactorPlan,
    build_si_set,
    enumerate_plans,
)
from .erasure import CodingParams
from .errors import ParameterError
from .sequences import SequenceSet, sequence_set_from_rows


def codings_for_rates(
    sset: SequenceSet, rates: Sequence[Fraction], packet_size: int = 1
) -> tuple[CodingParams, ...]:
    """Per-user (n, m): n is the sequence weight, m the rate's packets
    per period. The rate must yield an integer packet count."""
    if len(rates) != sset.size:
        raise ParameterError("need one rate per user")
    L = sset.period
    codings = []
    for seq, r in zip(sset, rates):
        r = Fraction(r)
        m = L * r
        if m.denominator != 1:
            raise ParameterError(
                f"rate {r} gives non-integer packets per period at period {L}"
            )
        codings.append(CodingParams(seq.weight, int(m)))
    return tuple(codings)


@dataclass(frozen=True)
class ShiftOutcome:
    """Steady-state result for one translation class of shift vectors."""

    shifts: tuple[int, ...]
    class_size: int
    success: bool
    rounds: tuple[tuple[int, ...], ...]
    t_counts: tuple[int, ...]
    delays: tuple[int | None, ...]
    undecoded: tuple[int, ...]

    @property
    def iteration_order(self) -> tuple[int, ...]:
        return tuple(u for rnd in self.rounds for u in rnd)


def _class_representatives(period: int, num_users: int):
    if num_users == 1:
        yield (0,)
        return
    for rest in itertools.product(range(period), repeat=num_users - 1):
        yield (0,) + rest


def _evaluate_one(
    sset: SequenceSet,
    codings: Sequence[CodingParams],
    shifts: tuple[int, ...],
    class_size: int,
) -> ShiftOutcome:
    M = sset.size
    steady = steady_state_receive(sset, shifts, codings)
    return ShiftOutcome(
        shifts=shifts,
        class_size=class_size,
        success=steady.success,
        rounds=steady.rounds,
        t_counts=tuple(steady.t_counts.get(i, 0) for i in range(1, M + 1)),
        delays=tuple(steady.delays.get(i) for i in range(1, M + 1)),
        undecoded=steady.undecoded,
    )


def _evaluate_chunk(args) -> list[tuple]:
    rows, ns, ms, chunk, class_size = args
    sset = sequence_set_from_rows(rows)
    codings = [CodingParams(n, m) for n, m in zip(ns, ms)]
    out = []
    for shifts in chunk:
        o = _evaluate_one(sset, codings, shifts, class_size)
        out.append((o.shifts, o.class_size, o.success, o.rounds, o.t_counts,
                    o.delays, o.undecoded))
    return out


@dataclass(frozen=True)
class VerificationReport:
    """Aggregate sweep result over every shift vector (or a sample)."""

    period: int
    num_users: int
    rates: tuple[Fraction, ...] | None
    total_vectors: int
    classes: int
    evaluated: int
    sampled: bool
    verdict: bool | None
    checks: dict[str, bool]
    counterexample: dict | None
    iteration_orders: tuple[tuple[int, ...], ...]
    first_iteration_user: int | None
    first_iteration_count: int | None
    max_delays: tuple[int | None, ...]
    outcomes: tuple[ShiftOutcome, ...] | None
    work_units: int

    def to_obj(self, include_outcomes: bool | None = None) -> dict:
        if include_outcomes is None:
            include_outcomes = self.outcomes is not None and len(self.outcomes) <= 4096
        obj = {
            "period": self.period,
            "num_users": self.num_users,
            "rates": [str(r) for r in self.rates] if self.rates else None,
            "total_vectors": self.total_vectors,
            "classes": self.classes,
            "evaluated": self.evaluated,
            "sampled": self.sampled,
            "verdict": self.verdict,
            "checks": dict(self.checks),
            "counterexample": self.counterexample,
            "iteration_orders": [list(o) for o in self.iteration_orders],
            "first_iteration_user": self.first_iteration_user,
            "first_iteration_count": self.first_iteration_count,
            "max_delays": list(self.max_delays),
            "work_units": self.work_units,
        }
        if include_outcomes and self.outcomes is not None:
            obj["outcomes"] = [
                {
                    "shifts": list(o.shifts),
                    "class_size": o.class_size,
                    "success": o.success,
                    "rounds": [list(r) for r in o.rounds],
                    "t_counts": list(o.t_counts),
                    "delays": list(o.delays),
                }
                for o in self.outcomes
            ]
        return obj


def _aggregate(
    sset: SequenceSet,
    codings: Sequence[CodingParams],
    rates: Sequence[Fraction] | None,
    outcomes: list[ShiftOutcome],
    sampled: bool,
    total_vectors: int,
    classes: int,
    work: int,
) -> VerificationReport:
    M = sset.size
    L = sset.period
    checks: dict[str, bool] = {}
    counterexample: dict | None = None

    def note_failure(outcome: ShiftOutcome, which: str, detail: str) -> None:
        nonlocal counterexample
        if counterexample is None:
            counterexample = {
                "shifts": list(outcome.shifts),
                "failed_check": which,
                "detail": detail,
            }

    checks["success_everywhere"] = True
    for o in outcomes:
        if not o.success:
            checks["success_everywhere"] = False
            note_failure(o, "success_everywhere",
                         f"users {list(o.undecoded)} cannot decode")
            break

    if rates is not None:
        ok = True
        for i, (c, r) in enumerate(zip(codings, rates), start=1):
            if Fraction(c.m, L) != Fraction(r):
                ok = False
                if counterexample is None:
                    counterexample = {
                        "shifts": None,
                        "failed_check": "exact_rates",
                        "detail": f"user {i} decodes {c.m} packets per period, "
                                  f"rate needs {Fraction(r) * L}",
                    }
                break
        checks["exact_rates"] = ok and checks["success_everywhere"]

    first_user: int | None = None
    first_count: int | None = None
    constancy = True
    for o in outcomes:
        if not o.rounds:
            constancy = False
            note_failure(o, "first_iteration_constancy", "no user decodes")
            break
        rnd = o.rounds[0]
        if len(rnd) != 1:
            constancy = False
            note_failure(o, "first_iteration_constancy",
                         f"first iteration decodes {list(rnd)}")
            break
        u = rnd[0]
        cnt = o.t_counts[u - 1]
        if first_user is None:
            first_user, first_count = u, cnt
        elif (u, cnt) != (first_user, first_count):
            constancy = False
            note_failure(o, "first_iteration_constancy",
                         f"user {u} count {cnt} != user {first_user} count {first_count}")
            break
    checks["first_iteration_constancy"] = constancy
    if rates is not None and constancy and first_user is not None:
        checks["first_iteration_matches_rate"] = (
            Fraction(first_count, L) == Fraction(rates[first_user - 1])
        )
        if not checks["first_iteration_matches_rate"] and counterexample is None:
            counterexample = {
                "shifts": None,
                "failed_check": "first_iteration_matches_rate",
                "detail": f"user {first_user} first-iteration count {first_count}, "
                          f"rate needs {Fraction(rates[first_user - 1]) * L}",
            }

    delay_ok = True
    for o in outcomes:
        iter_of: dict[int, int] = {}
        for k, rnd in enumerate(o.rounds, start=1):
            for u in rnd:
                iter_of[u] = k
        for u, d in enumerate(o.delays, start=1):
            if d is not None and u in iter_of and d > iter_of[u] * L:
                delay_ok = False
                note_failure(o, "delay_bound",
                             f"user {u} delay {d} exceeds {iter_of[u]} * {L}")
                break
        if not delay_ok:
            break
    checks["delay_bound"] = delay_ok

    all_ok = all(checks.values())
    verdict: bool | None
    if sampled:
        verdict = False if not all_ok else None
    else:
        verdict = all_ok

    max_delays: list[int | None] = []
    for i in range(M):
        vals = [o.delays[i] for o in outcomes if o.delays[i] is not None]
        max_delays.append(max(vals) if vals else None)
    orders = tuple(sorted({o.iteration_order for o in outcomes}))

    return VerificationReport(
        period=L,
        num_users=M,
        rates=tuple(Fraction(r) for r in rates) if rates is not None else None,
        total_vectors=total_vectors,
        classes=classes,
        evaluated=len(outcomes),
        sampled=sampled,
        verdict=verdict,
        checks=checks,
        counterexample=counterexample,
        iteration_orders=orders,
        first_iteration_user=first_user,
        first_iteration_count=first_count,
        max_delays=tuple(max_delays),
        outcomes=tuple(outcomes),
        work_units=work,
    )


def sweep_all_shifts(
    sset: SequenceSet,
    codings: Sequence[CodingParams],
    rates: Sequence[Fraction] | None = None,
    budget: int | None = None,
    jobs: int = 1,
    sample: int | None = None,
    seed: int = 0,
) -> VerificationReport:
    """Steady-state receiver at every shift vector, with aggregate checks.

    Evaluates one representative per translation class (multiplicity
    recorded) unless sampling. Checks: decode success everywhere, decoded
    packets per period equal to the rates, a constant single first-
    iteration user with the count its rate demands, and every user's
    stationary delay within iteration-index periods.
    """
    M = sset.size
    L = sset.period
    codings = tuple(codings)
    if len(codings) != M:
        raise ParameterError("need one coding per user")
    total = L**M
    classes = L ** (M - 1)
    if sample is not None:
        if sample < 1:
            raise ParameterError("sample size must be >= 1")
        check_work("sampled shift sweep", sample, budget)
        rng = random.Random(seed)
        vectors = [tuple(rng.randrange(L) for _ in range(M)) for _ in range(sample)]
        outcomes = [_evaluate_one(sset, codings, v, 1) for v in vectors]
        return _aggregate(sset, codings, rates, outcomes, True, total, classes,
                          len(vectors))

    check_work("shift sweep", classes, budget, hint="pass a sample size")
    reps = list(_class_representatives(L, M))
    if jobs > 1 and len(reps) > 64:
        rows = [list(s.bits) for s in sset]
        ns = [c.n for c in codings]
        ms = [c.m for c in codings]
        chunk_size = max(1, math.ceil(len(reps) / (jobs * 8)))
        chunks = [reps[i: i + chunk_size] for i in range(0, len(reps), chunk_size)]
        outcomes = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for result in pool.map(
                _evaluate_chunk,
                [(rows, ns, ms, chunk, L) for chunk in chunks],
            ):
                for shifts, size, success, rounds, t_counts, delays, undec in result:
                    outcomes.append(ShiftOutcome(
                        shifts, size, success, rounds, t_counts, delays, undec
                    ))
    else:
        outcomes = [_evaluate_one(sset, codings, rep, L) for rep in reps]
    return _aggregate(sset, codings, rates, outcomes, False, total, classes,
                      len(outcomes))


def necessity_falsifier(
    sset: SequenceSet,
    rates: Sequence[Fraction],
    codings: Sequence[CodingParams] | None = None,
    budget: int | None = None,
) -> tuple[int, ...] | None:
    """First shift vector (lexicographic) where zero-error decoding fails.

    Codings default to n = actual weight, m = rate packets per period. A
    user whose weight cannot carry its packet count fails at every shift,
    so the all-zero vector is returned outright. Returns None when the
    set decodes everywhere (an achiever).
    """
    M = sset.size
    L = sset.period
    rates = tuple(Fraction(r) for r in rates)
    if codings is None:
        per_period = []
        for r in rates:
            m = L * r
            if m.denominator != 1:
                return (0,) * M
            per_period.append(int(m))
        if any(m > seq.weight for m, seq in zip(per_period, sset)):
            return (0,) * M
        codings = tuple(
            CodingParams(seq.weight, m) for seq, m in zip(sset, per_period)
        )
    check_work("necessity search", L ** (M - 1), budget)
    for rep in _class_representatives(L, M):
        steady = steady_state_receive(sset, rep, codings)
        if not steady.success:
            return rep
    return None


@dataclass(frozen=True)
class AchievabilityReport:
    plan: DutyFactorPlan
    sequence_set: SequenceSet
    codings: tuple[CodingParams, ...]
    sweep: VerificationReport

    @property
    def verdict(self) -> bool | None:
        return self.sweep.verdict

    def to_obj(self) -> dict:
        return {
            "plan": self.plan.to_obj(),
            "period": self.sequence_set.period,
            "sequences": [list(s.bits) for s in self.sequence_set],
            "codings": [[c.n, c.m] for c in self.codings],
            "sweep": self.sweep.to_obj(include_outcomes=False),
            "verdict": self.verdict,
        }


def achievability_check(
    rates: Sequence[Fraction],
    layout: ConstructionLayout | None = None,
    budget: int | None = None,
    jobs: int = 1,
) -> AchievabilityReport:
    """Plan, build, and exhaustively verify one rate vector end to end.

    Uses the shortest-period plan, builds its set, derives the codings,
    and sweeps every shift vector. A True verdict is a zero-error
    achievability certificate for the rates at this period.
    """
    plans = enumerate_plans(rates)
    plan = plans[0]
    sset = build_si_set(plan.duty_factors, layout, budget=budget)
    codings = codings_for_rates(sset, rates)
    sweep = sweep_all_shifts(sset, codings, rates, budget=budget, jobs=jobs)
    return AchievabilityReport(plan, sset, codings, sweep)


@dataclass(frozen=True)
class MinPeriodSearchReport:
    rates: tuple[Fraction, ...]
    l_max: int
    pruned: bool
    found_period: int | None
    achiever: SequenceSet | None
    per_length: tuple[dict, ...]
    work_units: int

    def to_obj(self) -> dict:
        return {
            "rates": [str(r) for r in self.rates],
            "l_max": self.l_max,
            "pruned": self.pruned,
            "found_period": self.found_period,
            "achiever": [list(s.bits) for s in self.achiever] if self.achiever else None,
            "per_length": list(self.per_length),
            "work_units": self.work_units,
        }


def _pruned_weight_vectors(
    rates: Sequence[Fraction], L: int
) -> list[tuple[int, ...]]:
    """Weight vectors every period-L achiever must have: L times the duty
    factors of some decode order, when those are integers."""
    vectors: list[tuple[int, ...]] = []
    seen = set()
    for plan in enumerate_plans(rates):
        ws = [L * p for p in plan.duty_factors]
        if any(w.denominator != 1 for w in ws):
            continue
        tup = tuple(int(w) for w in ws)
        if tup not in seen:
            seen.add(tup)
            vectors.append(tup)
    return vectors


def min_period_search(
    rates: Sequence[Fraction],
    l_max: int,
    prune: bool = True,
    budget: int | None = None,
) -> MinPeriodSearchReport:
    """Smallest period admitting a set that decodes at every shift.

    Periods 1..l_max in order; per period, candidate sets are swept with
    early exit and the first full pass wins. Pruned mode only places ones
    for the weight vectors a valid decode order dictates (and skips
    periods where the rates do not give whole packets); unpruned mode
    enumerates every M-tuple of period-L sequences, which is only
    feasible for tiny L and exists to validate the pruning.
    """
    rates = tuple(Fraction(r) for r in rates)
    if sum(rates) != 1:
        raise ParameterError(f"rates must sum to 1, got {sum(rates)}")
    if l_max < 1:
        raise ParameterError("l_max must be >= 1")
    M = len(rates)

    plan_work: list[tuple[int, int, int]] = []  # (L, candidates, work)
    for L in range(1, l_max + 1):
        ms = [L * r for r in rates]
        if any(m.denominator != 1 for m in ms):
            plan_work.append((L, 0, 0))
            continue
        if prune:
            count = 0
            for ws in _pruned_weight_vectors(rates, L):
                per = 1
                for w in ws:
                    per *= math.comb(L, w)
                count += per
        else:
            count = (2**L) ** M
        plan_work.append((L, count, count * L ** (M - 1)))
    estimate = sum(w for _, _, w in plan_work)
    check_work("minimum-period search", estimate, budget,
               hint="lower l_max or use pruned mode")

    work_done = 0
    per_length: list[dict] = []
    for L, count, _ in plan_work:
        ms = [L * r for r in rates]
        if any(m.denominator != 1 for m in ms):
            per_length.append({
                "period": L, "candidates": 0,
                "skipped": "rates give fractional packets per period",
            })
            continue
        per_period = [int(m) for m in ms]

        def candidates():
            if prune:
                for ws in _pruned_weight_vectors(rates, L):
                    if any(w < m for w, m in zip(ws, per_period)):
                        continue
                    pools = [
                        list(itertools.combinations(range(L), w)) for w in ws
                    ]
                    for placement in itertools.product(*pools):
                        yield tuple(
                            tuple(1 if n in cols else 0 for n in range(L))
                            for cols in placement
                        )
            else:
                for masks in itertools.product(range(2**L), repeat=M):
                    yield tuple(
                        tuple((mask >> n) & 1 for n in range(L))
                        for mask in masks
                    )

        found: SequenceSet | None = None
        enumerated = 0
        for rows in candidates():
            enumerated += 1
            if any(sum(row) < m for row, m in zip(rows, per_period)):
                continue
            cand = sequence_set_from_rows(rows)
            codings = tuple(
                CodingParams(seq.weight, m) for seq, m in zip(cand, per_period)
            )
            achieved = True
            for rep in _class_representatives(L, M):
                work_done += 1
                if not steady_state_receive(cand, rep, codings).success:
                    achieved = False
                    break
            if achieved:
                found = cand
                break
        per_length.append({
            "period": L, "candidates": enumerated,
            "achiever_found": found is not None,
        })
        if found is not None:
            return MinPeriodSearchReport(
                rates, l_max, prune, L, found, tuple(per_length), work_done
            )
    return MinPeriodSearchReport(
        rates, l_max, prune, None, None, tuple(per_length), work_done
    )


@dataclass(frozen=True)
class BaselineReport:
    """Per-user throughput of the no-cancellation receiver over all shifts."""

    period: int
    num_users: int
    average: tuple[Fraction, ...]
    minimum: tuple[Fraction, ...]
    maximum: tuple[Fraction, ...]
    constant: bool
    sum_average: Fraction
    classes: int

    def to_obj(self) -> dict:
        return {
            "period": self.period,
            "num_users": self.num_users,
            "average": [str(x) for x in self.average],
            "minimum": [str(x) for x in self.minimum],
            "maximum": [str(x) for x in self.maximum],
            "constant": self.constant,
            "sum_average": str(self.sum_average),
            "classes": self.classes,
        }

    def csv_rows(self) -> list[list]:
        header = ["metric"] + [f"user_{i}" for i in range(1, self.num_users + 1)] + ["sum"]
        rows = [header]
        for name, vals in (
            ("average", self.average),
            ("minimum", self.minimum),
            ("maximum", self.maximum),
        ):
            rows.append([name] + [float(v) for v in vals] + [float(sum(vals))])
        return rows


def baseline_throughput(
    sset: SequenceSet, budget: int | None = None
) -> BaselineReport:
    """Collision-free slots per user per slot, without cancellation,
    averaged (exactly) and extremized over every shift vector."""
    M = sset.size
    L = sset.period
    check_work("baseline sweep", L ** (M - 1), budget)
    from .channel import _rotate_mask

    base = [seq.as_mask() for seq in sset]
    totals = [0] * M
    mins = [None] * M
    maxs = [None] * M
    classes = 0
    for rep in _class_representatives(L, M):
        classes += 1
        occ = [_rotate_mask(base[i], rep[i], L) for i in range(M)]
        for i in range(M):
            others = 0
            for j in range(M):
                if j != i:
                    others |= occ[j]
            count = (occ[i] & ~others).bit_count()
            totals[i] += count
            mins[i] = count if mins[i] is None else min(mins[i], count)
            maxs[i] = count if maxs[i] is None else max(maxs[i], count)
    average = tuple(Fraction(t, classes * L) for t in totals)
    minimum = tuple(Fraction(m, L) for m in mins)
    maximum = tuple(Fraction(m, L) for m in maxs)
    return BaselineReport(
        period=L,
        num_users=M,
        average=average,
        minimum=minimum,
        maximum=maximum,
        constant=minimum == maximum,
        sum_average=sum(average, Fraction(0)),
        classes=classes,
    )


@dataclass(frozen=True)
class RegionData:
    """Boundary points of the two capacity regions."""

    num_users: int
    resolution: int | None
    curve: tuple[dict, ...]
    vertices: tuple[tuple[Fraction, ...], ...]

    def csv_rows(self) -> list[list]:
        if self.num_users == 2:
            rows = [["p", "sic_c1", "sic_c2", "basic_c1", "basic_c2"]]
            for pt in self.curve:
                rows.append([
                    float(pt["p"]),
                    float(pt["sic"][0]), float(pt["sic"][1]),
                    float(pt["basic"][0]), float(pt["basic"][1]),
                ])
            return rows
        rows = [[f"c{i}" for i in range(1, self.num_users + 1)]]
        for v in self.vertices:
            rows.append([float(x) for x in v])
        return rows

    def to_obj(self) -> dict:
        return {
            "num_users": self.num_users,
            "resolution": self.resolution,
            "curve": [
                {
                    "p": str(pt["p"]),
                    "sic": [str(x) for x in pt["sic"]],
                    "basic": [str(x) for x in pt["basic"]],
                }
                for pt in self.curve
            ],
            "vertices": [[str(x) for x in v] for v in self.vertices],
        }


def region_boundary(num_users: int, resolution: int = 100) -> RegionData:
    """Rate-region boundaries: with cancellation the user rates sum to 1;
    without, user i tops out at its duty times everyone else's silence.

    For two users the full curves are emitted at the given resolution
    (duty p for user 1, 1-p for user 2). For more users only the simplex
    vertices of the cancellation region are listed.
    """
    if num_users < 1:
        raise ParameterError("need at least one user")
    vertices = tuple(
        tuple(Fraction(1) if j == i else Fraction(0) for j in range(num_users))
        for i in range(num_users)
    )
    curve: list[dict] = []
    if num_users == 2:
        if resolution < 1:
            raise ParameterError("resolution must be >= 1")
        for k in range(resolution + 1):
            p = Fraction(k, resolution)
            q = 1 - p
            curve.append({
                "p": p,
                "sic": (p, q),
                "basic": (p * (1 - q), q * (1 - p)),
            })
    return RegionData(num_users, resolution if num_users == 2 else None,
                      tuple(curve), vertices)
