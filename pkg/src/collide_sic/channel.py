"""Slot-synchronous collision channel with interference cancellation.

Model: M users share a slotted channel without feedback. User i starts
its periodic schedule at receiver slot shift_i, transmitting in slot t
whenever its sequence has a one at local offset (t - shift_i) mod L.
Local period j is block j: the user splits m_i source packets into n_i
coded packets (n_i = sequence weight) and sends them at the period's one
slots, position 0..n_i-1 in offset order. A slot with no transmission is
idle, exactly one is a success (that packet is received perfectly), two
or more collide and nothing is received from the slot as observed.

The receiver keeps the raw slot history. Whenever some m_i packets of a
block are available its source decodes; re-encoding then reproduces the
user's exact transmissions, which the receiver subtracts from every slot
it appeared in, past and future. A slot left with a single remaining
contributor yields that packet retroactively, so one decode can cascade.

Two engines implement this:

* sic_receive walks a finite trace slot by slot with the full cascade,
  measuring real decode times against a measurement window.
* steady_state_receive works on the L-periodic slot pattern directly:
  per iteration, every undecoded user with at least m_i interference-free
  slots per period decodes and is cancelled. It also computes each user's
  stationary decode delay under the canonical schedule (packets taken
  from the clean slots of its own iteration; a receiver using later
  cancellations could only be faster). Sweeps use this engine; the trace
  engine cross-checks it.

Blind operation: the receiver that knows the sequence set but not the
shifts matches the observed idle/success/collision pattern of one steady
period against all L^M candidate shift vectors. Ambiguity is surfaced,
never guessed away: any set containing an always-on sequence is
pattern-blind in that user's shift, so unique identification is the
exception, not the rule.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import NamedTuple, Sequence

from .budget import check_work
from .erasure import CodedBlock, CodingParams, SourceBlock, decode, encode
from .errors import (
    AmbiguousIdentificationError,
    ConfigurationError,
    InternalConsistencyError,
    TraceMismatchError,
)
from .sequences import BinarySequence, SequenceSet


class SlotKind(str, Enum):
    IDLE = "idle"
    SUCCESS = "success"
    COLLISION = "collision"


class Contributor(NamedTuple):
    user: int
    block: int
    position: int


@dataclass(frozen=True)
class SlotObservation:
    """Ground truth for one slot.

    contributors (and payloads, when concrete) are the genie's view; the
    receiver paths only ever read the kind and, on reveals, the payload
    of the single remaining contributor.
    """

    kind: SlotKind
    contributors: tuple[Contributor, ...]
    payloads: tuple[bytes, ...] | None = None


@dataclass(frozen=True)
class UserConfig:
    """One user: schedule, code shape, and start slot."""

    sequence: BinarySequence
    coding: CodingParams
    shift: int = 0

    def __post_init__(self) -> None:
        if self.coding.n != self.sequence.weight:
            raise ConfigurationError(
                f"code length {self.coding.n} != sequence weight "
                f"{self.sequence.weight}; one block must fill one period"
            )
        object.__setattr__(self, "shift", self.shift % self.sequence.period)


@dataclass(frozen=True)
class ChannelTrace:
    slots: tuple[SlotObservation, ...]
    period: int
    num_users: int
    concrete: bool = False

    def __len__(self) -> int:
        return len(self.slots)

    def kinds(self) -> list[SlotKind]:
        return [s.kind for s in self.slots]

    def steady_kinds(self) -> list[SlotKind]:
        """Kind pattern of the second period, where every user is active.

        Entry r is the steady kind of receiver slots congruent to r mod
        the period.
        """
        if len(self.slots) < 2 * self.period:
            raise ConfigurationError(
                "trace too short for a steady period; need at least 2 periods"
            )
        return [s.kind for s in self.slots[self.period: 2 * self.period]]

    def to_jsonl_rows(self, genie: bool = False) -> list[dict]:
        rows = []
        for t, slot in enumerate(self.slots):
            row: dict = {"t": t, "kind": slot.kind.value}
            if genie:
                row["truth"] = [list(c) for c in slot.contributors]
            rows.append(row)
        return rows


def generate_source_block(
    params: CodingParams, user: int, block_id: int, seed: int
) -> SourceBlock:
    """Deterministic payload generator shared by sender and test oracle."""
    rng = random.Random(f"{seed}:{user}:{block_id}")
    return SourceBlock(
        tuple(rng.randbytes(params.packet_size) for _ in range(params.m)),
        block_id,
    )


def _require_common_period(users: Sequence[UserConfig]) -> int:
    periods = {u.sequence.period for u in users}
    if len(periods) != 1:
        raise ConfigurationError(
            f"users have differing periods {sorted(periods)}; expand first"
        )
    return periods.pop()


def default_horizon(num_users: int, period: int, measure_periods: int | None = None) -> tuple[int, int]:
    """(window periods W, trace slots N) so every window block can finish.

    The window spans periods 1..W-2 (slots [L, (W-1)L)). A block ending
    at slot E decodes by E + (num_users - 1)(period - 1) in the worst
    cancellation chain, so (W + num_users - 2) periods of trace always
    contain the full cascade.
    """
    W = measure_periods if measure_periods is not None else max(4, num_users + 2)
    if W < 3:
        raise ConfigurationError("need at least 3 periods to have a window")
    return W, (W + num_users - 2) * period


def simulate_trace(
    users: Sequence[UserConfig],
    horizon_slots: int,
    concrete: bool = False,
    payload_seed: int = 0,
) -> ChannelTrace:
    """Ground-truth slot history for the configured users.

    Symbolic by default (no payloads); with concrete=True every
    contribution carries the coded packet produced by the deterministic
    payload generator, so end-to-end byte equality can be checked.
    """
    if not users:
        raise ConfigurationError("need at least one user")
    L = _require_common_period(users)
    if horizon_slots < 1:
        raise ConfigurationError("horizon must be at least 1 slot")
    ones = [u.sequence.ones() for u in users]
    rank = [{off: p for p, off in enumerate(o)} for o in ones]
    coded_cache: dict[tuple[int, int], CodedBlock] = {}

    def coded_packet(i: int, block: int, pos: int) -> bytes:
        key = (i, block)
        if key not in coded_cache:
            source = generate_source_block(users[i - 1].coding, i, block, payload_seed)
            coded_cache[key] = encode(users[i - 1].coding, source)
        return coded_cache[key].packets[pos]

    slots = []
    for t in range(horizon_slots):
        contribs = []
        for i, u in enumerate(users, start=1):
            n_loc = t - u.shift
            if n_loc < 0:
                continue
            off = n_loc % L
            if u.sequence.bits[off] == 0:
                continue
            contribs.append(Contributor(i, n_loc // L, rank[i - 1][off]))
        if len(contribs) == 0:
            kind = SlotKind.IDLE
        elif len(contribs) == 1:
            kind = SlotKind.SUCCESS
        else:
            kind = SlotKind.COLLISION
        payloads = None
        if concrete:
            payloads = tuple(coded_packet(c.user, c.block, c.position) for c in contribs)
        slots.append(SlotObservation(kind, tuple(contribs), payloads))
    return ChannelTrace(tuple(slots), L, len(users), concrete)


def _rotate_mask(mask: int, tau: int, L: int) -> int:
    tau %= L
    full = (1 << L) - 1
    return ((mask << tau) | (mask >> (L - tau))) & full if tau else mask


def _mask_bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class SteadyReport:
    """Fixpoint of per-period cancellation on the periodic slot pattern."""

    success: bool
    rounds: tuple[tuple[int, ...], ...]
    pre_decoded: tuple[int, ...]
    t_counts: dict[int, int]
    clean_positions: dict[int, tuple[int, ...]]
    delays: dict[int, int]
    iteration_of: dict[int, int]
    undecoded: tuple[int, ...]

    @property
    def iteration_order(self) -> tuple[int, ...]:
        return tuple(u for rnd in self.rounds for u in rnd)


def steady_state_receive(
    sset: SequenceSet,
    shifts: Sequence[int],
    codings: Sequence[CodingParams],
) -> SteadyReport:
    """Iterated cancellation on one period of the steady slot pattern.

    Per iteration every undecoded user whose per-period count of
    interference-free slots reaches m decodes; its occupancy is removed
    for the next iteration. t_counts holds each user's clean count at its
    decode iteration (at the final fixpoint for users that never decode).
    delays maps decoded users to the stationary slots-from-first-
    transmission until block decode under the canonical schedule.
    """
    M = sset.size
    L = sset.period
    if len(shifts) != M or len(codings) != M:
        raise ConfigurationError("need one shift and one coding per user")
    for seq, c in zip(sset, codings):
        if c.n != seq.weight:
            raise ConfigurationError(
                f"code length {c.n} != sequence weight {seq.weight}"
            )
    shifts = [t % L for t in shifts]
    occ = {}
    for i in range(1, M + 1):
        occ[i] = _rotate_mask(sset[i - 1].as_mask(), shifts[i - 1], L)
    pre = tuple(i for i in range(1, M + 1) if codings[i - 1].m == 0)
    undecoded = set(range(1, M + 1)) - set(pre)
    rounds: list[tuple[int, ...]] = []
    t_counts: dict[int, int] = {}
    clean_positions: dict[int, tuple[int, ...]] = {}
    clean_masks: dict[int, int] = {}
    iteration_of: dict[int, int] = {i: 0 for i in pre}
    ones = {i: sset[i - 1].ones() for i in range(1, M + 1)}
    rank = {i: {off: p for p, off in enumerate(ones[i])} for i in range(1, M + 1)}

    k = 0
    while undecoded:
        k += 1
        decodable = []
        for i in undecoded:
            others = 0
            for j in undecoded:
                if j != i:
                    others |= occ[j]
            clean = occ[i] & ~others
            count = clean.bit_count()
            if count >= codings[i - 1].m:
                decodable.append((i, clean, count))
        if not decodable:
            break
        rounds.append(tuple(sorted(i for i, _, _ in decodable)))
        for i, clean, count in decodable:
            undecoded.discard(i)
            t_counts[i] = count
            clean_masks[i] = clean
            iteration_of[i] = k
            offs = sorted((t - shifts[i - 1]) % L for t in _mask_bits(clean))
            clean_positions[i] = tuple(rank[i][o] for o in offs)

    # clean counts at the final fixpoint for whoever is left
    for i in undecoded:
        others = 0
        for j in undecoded:
            if j != i:
                others |= occ[j]
        t_counts[i] = (occ[i] & ~others).bit_count()
    for i in pre:
        t_counts.setdefault(i, 0)

    # stationary completion offsets, in iteration order (dependencies of a
    # clean slot were all decoded in strictly earlier iterations)
    completion: dict[int, int] = {}
    delays: dict[int, int] = {}
    for rnd in rounds:
        for i in rnd:
            tau = shifts[i - 1]
            readiness = []
            for t in _mask_bits(clean_masks[i]):
                o = (t - tau) % L
                ready = o
                for c in range(1, M + 1):
                    if c == i or c in pre or not (occ[c] >> t) & 1:
                        continue
                    o_c = (t - shifts[c - 1]) % L
                    ready = max(ready, o - o_c + completion[c])
                readiness.append(ready)
            readiness.sort()
            completion[i] = readiness[codings[i - 1].m - 1]
            delays[i] = completion[i] - ones[i][0] + 1
    for i in pre:
        delays[i] = 0

    return SteadyReport(
        success=not undecoded,
        rounds=tuple(rounds),
        pre_decoded=pre,
        t_counts=t_counts,
        clean_positions=clean_positions,
        delays=delays,
        iteration_of=iteration_of,
        undecoded=tuple(sorted(undecoded)),
    )


def identify_shifts(
    kinds: Sequence[SlotKind],
    sset: SequenceSet,
    budget: int | None = None,
) -> list[tuple[int, ...]]:
    """All shift vectors whose steady pattern matches the observed kinds.

    kinds[r] must be the steady kind of receiver slots congruent to r mod
    the period (ChannelTrace.steady_kinds provides exactly that). Returns
    candidates in lexicographic order; empty means the pattern is not
    producible by this set at any shifts and raises instead.
    """
    L = sset.period
    M = sset.size
    if len(kinds) < L:
        raise ConfigurationError(f"need at least {L} steady kinds, got {len(kinds)}")
    check_work("shift identification", L**M, budget)
    target_seen = 0
    target_twice = 0
    for r in range(L):
        k = kinds[r]
        if k == SlotKind.SUCCESS:
            target_seen |= 1 << r
        elif k == SlotKind.COLLISION:
            target_seen |= 1 << r
            target_twice |= 1 << r
    rotations = [
        [_rotate_mask(seq.as_mask(), tau, L) for tau in range(L)] for seq in sset
    ]
    matches = []
    for cand in product(range(L), repeat=M):
        seen = 0
        twice = 0
        for i in range(M):
            m = rotations[i][cand[i]]
            twice |= seen & m
            seen |= m
        if seen == target_seen and twice == target_twice:
            matches.append(cand)
    if not matches:
        raise TraceMismatchError(
            "no shift vector of this set reproduces the observed pattern"
        )
    return matches


@dataclass(frozen=True)
class IterationEntry:
    index: int
    user: int
    clean_count: int
    positions: tuple[int, ...]


@dataclass(frozen=True)
class SicReport:
    """Joint outcome of the trace cascade and the steady-state engine."""

    success: bool
    mode: str
    period: int
    num_users: int
    window: tuple[int, int]
    iterations: tuple[IterationEntry, ...]
    iteration_order: tuple[int, ...]
    t_counts: dict[int, int]
    decode_delays: dict[int, int | None]
    per_user_decoded_blocks: dict[int, tuple[int, ...]]
    required_blocks: dict[int, tuple[int, ...]]
    undecoded_required: tuple[tuple[int, int], ...]
    steady: SteadyReport
    identified_candidates: int | None = None
    decoded_sources: dict[tuple[int, int], tuple[bytes, ...]] | None = None

    def to_obj(self) -> dict:
        return {
            "success": self.success,
            "mode": self.mode,
            "period": self.period,
            "num_users": self.num_users,
            "window": list(self.window),
            "iterations": [
                {
                    "iteration": e.index,
                    "user": e.user,
                    "clean_count": e.clean_count,
                    "positions": list(e.positions),
                }
                for e in self.iterations
            ],
            "iteration_order": list(self.iteration_order),
            "t_counts": {str(u): c for u, c in sorted(self.t_counts.items())},
            "decode_delays": {str(u): d for u, d in sorted(self.decode_delays.items())},
            "decoded_blocks": {
                str(u): list(bs) for u, bs in sorted(self.per_user_decoded_blocks.items())
            },
            "required_blocks": {
                str(u): list(bs) for u, bs in sorted(self.required_blocks.items())
            },
            "undecoded_required": [list(x) for x in self.undecoded_required],
            "identified_candidates": self.identified_candidates,
        }


def sic_receive(
    trace: ChannelTrace,
    users: Sequence[UserConfig],
    mode: str = "genie",
    measure_periods: int | None = None,
) -> SicReport:
    """Run the cancellation receiver over a trace.

    genie mode takes the shifts from the user configs; blind mode
    identifies them from the steady pattern first and refuses on
    ambiguity. Success means every block lying fully inside the
    measurement window (periods 1..W-2 of each user's local clock)
    decoded; decode_delays holds each user's worst slots-from-first-
    transmission over those blocks.

    Iteration structure and per-period counts come from the steady-state
    engine on the same shifts; decode times come from the trace cascade.
    """
    if mode not in ("genie", "blind"):
        raise ConfigurationError(f"unknown mode {mode!r}")
    if len(users) != trace.num_users:
        raise ConfigurationError("user count does not match the trace")
    L = _require_common_period(users)
    if L != trace.period:
        raise ConfigurationError("user period does not match the trace")
    M = len(users)
    N = len(trace.slots)
    W, _ = default_horizon(M, L, measure_periods)
    if N < (W - 1) * L:
        raise ConfigurationError(
            f"trace has {N} slots but the window needs {(W - 1) * L}"
        )

    identified: int | None = None
    if mode == "blind":
        candidates = identify_shifts(trace.steady_kinds(), SequenceSet(
            tuple(u.sequence for u in users)
        ))
        identified = len(candidates)
        if len(candidates) > 1:
            raise AmbiguousIdentificationError(candidates)
        shifts = list(candidates[0])
    else:
        shifts = [u.shift for u in users]

    sset = SequenceSet(tuple(u.sequence for u in users))
    codings = [u.coding for u in users]
    steady = steady_state_receive(sset, shifts, codings)

    ones = {i: users[i - 1].sequence.ones() for i in range(1, M + 1)}

    # schedule per slot from the resolved shifts; must agree with the
    # trace's ground truth (it does for genie shifts and for a uniquely
    # identified candidate, which is necessarily the true one)
    slot_entry: list[dict[int, tuple[int, int]]] = [dict() for _ in range(N)]
    block_slots: dict[tuple[int, int], list[int]] = {}
    for i in range(1, M + 1):
        tau = shifts[i - 1]
        j = 0
        while tau + j * L < N:
            for pos, off in enumerate(ones[i]):
                t = tau + j * L + off
                if t < N:
                    slot_entry[t][i] = (j, pos)
                    block_slots.setdefault((i, j), []).append(t)
            j += 1
    for t in range(N):
        truth = {(c.user, c.block, c.position) for c in trace.slots[t].contributors}
        sched = {(u, b, p) for u, (b, p) in slot_entry[t].items()}
        if truth != sched:
            raise InternalConsistencyError(
                f"slot {t}: resolved schedule disagrees with the trace"
            )

    payload_at: list[dict[int, bytes]] = [dict() for _ in range(N)]
    if trace.concrete:
        for t, slot in enumerate(trace.slots):
            for c, pkt in zip(slot.contributors, slot.payloads or ()):
                payload_at[t][c.user] = pkt

    uncancelled: list[set[int]] = [set(slot_entry[t]) for t in range(N)]
    revealed = [False] * N
    received: dict[tuple[int, int], dict[int, bytes | None]] = {}
    decode_time: dict[tuple[int, int], int] = {}
    decoded_sources: dict[tuple[int, int], tuple[bytes, ...]] = {}
    m_of = {i: users[i - 1].coding.m for i in range(1, M + 1)}

    def try_decode(i: int, j: int, now: int, queue: list[tuple[int, int]]) -> None:
        key = (i, j)
        if key in decode_time:
            return
        got = received.get(key, {})
        if len(got) < m_of[i]:
            return
        decode_time[key] = now
        if trace.concrete:
            pairs = [(pos, pkt) for pos, pkt in got.items() if pkt is not None]
            source = decode(users[i - 1].coding, pairs, block_id=j)
            reenc = encode(users[i - 1].coding, source)
            for t in block_slots.get(key, []):
                truth_pkt = payload_at[t].get(i)
                _, pos = slot_entry[t][i]
                if truth_pkt is not None and reenc.packets[pos] != truth_pkt:
                    raise InternalConsistencyError(
                        f"re-encoded packet differs from the channel at slot {t}"
                    )
            decoded_sources[key] = source.packets
        for t in block_slots.get(key, []):
            uncancelled[t].discard(i)
            if t <= now:
                reveal(t, now, queue)

    def reveal(t: int, now: int, queue: list[tuple[int, int]]) -> None:
        if revealed[t] or len(uncancelled[t]) != 1:
            return
        u = next(iter(uncancelled[t]))
        j, pos = slot_entry[t][u]
        revealed[t] = True
        received.setdefault((u, j), {})[pos] = payload_at[t].get(u)
        queue.append((u, j))

    for now in range(N):
        queue: list[tuple[int, int]] = []
        for i in range(1, M + 1):
            if m_of[i] == 0 and (now - shifts[i - 1]) % L == 0 and now >= shifts[i - 1]:
                j = (now - shifts[i - 1]) // L
                if (i, j) not in decode_time and (i, j) in block_slots:
                    received.setdefault((i, j), {})
                    try_decode(i, j, now, queue)
        reveal(now, now, queue)
        while queue:
            i, j = queue.pop()
            try_decode(i, j, now, queue)

    window = (L, (W - 1) * L)
    required: dict[int, tuple[int, ...]] = {}
    for i in range(1, M + 1):
        tau = shifts[i - 1]
        if users[i - 1].sequence.weight == 0:
            required[i] = ()
            continue
        blocks = []
        j = 1
        while tau + (j + 1) * L <= window[1]:
            if tau + j * L >= window[0]:
                blocks.append(j)
            j += 1
        required[i] = tuple(blocks)
    undecoded_required = tuple(
        (i, j)
        for i in range(1, M + 1)
        for j in required[i]
        if (i, j) not in decode_time
    )
    success = not undecoded_required

    decode_delays: dict[int, int | None] = {}
    for i in range(1, M + 1):
        worst: int | None = None
        for j in required[i]:
            if (i, j) not in decode_time:
                continue
            first_tx = shifts[i - 1] + j * L + ones[i][0]
            d = decode_time[(i, j)] - first_tx + 1
            worst = d if worst is None else max(worst, d)
        decode_delays[i] = worst

    per_user_blocks = {
        i: tuple(sorted(j for (u, j) in decode_time if u == i))
        for i in range(1, M + 1)
    }
    iterations = []
    for k, rnd in enumerate(steady.rounds, start=1):
        for u in rnd:
            iterations.append(
                IterationEntry(k, u, steady.t_counts[u], steady.clean_positions[u])
            )

    return SicReport(
        success=success,
        mode=mode,
        period=L,
        num_users=M,
        window=window,
        iterations=tuple(iterations),
        iteration_order=steady.iteration_order,
        t_counts=dict(steady.t_counts),
        decode_delays=decode_delays,
        per_user_decoded_blocks=per_user_blocks,
        required_blocks=required,
        undecoded_required=undecoded_required,
        steady=steady,
        identified_candidates=identified,
        decoded_sources=decoded_sources if trace.concrete else None,
    )


@dataclass(frozen=True)
class BasicReport:
    """Per-period success counts without any cancellation."""

    per_user_counts: dict[int, int]
    per_user_rates: dict[int, Fraction]
    window: tuple[int, int]

    def to_obj(self) -> dict:
        return {
            "counts": {str(u): c for u, c in sorted(self.per_user_counts.items())},
            "rates": {str(u): str(r) for u, r in sorted(self.per_user_rates.items())},
            "window": list(self.window),
        }


def basic_receive(trace: ChannelTrace, users: Sequence[UserConfig]) -> BasicReport:
    """Count each user's collision-free slots over one steady period.

    The pattern repeats with the period once every user is active, so the
    second period is measured; counts are exact per-period values.
    """
    if len(users) != trace.num_users:
        raise ConfigurationError("user count does not match the trace")
    L = _require_common_period(users)
    if len(trace.slots) < 2 * L:
        raise ConfigurationError("trace too short; need at least 2 periods")
    counts = {i: 0 for i in range(1, len(users) + 1)}
    for t in range(L, 2 * L):
        slot = trace.slots[t]
        if slot.kind == SlotKind.SUCCESS:
            counts[slot.contributors[0].user] += 1
    rates = {i: Fraction(c, L) for i, c in counts.items()}
    return BasicReport(counts, rates, (L, 2 * L))
