"""Systematic (n, m) erasure codes decodable from any m of n packets.

A block of m source packets becomes n coded packets such that any m of
them, with their positions, recover the source exactly. Realized over the
byte field GF(256) (primitive polynomial 0x11d): the generator matrix is
G = V · inv(V_top) for the n x m Vandermonde matrix V on evaluation
points 0..n-1, so the first m coded packets are the source itself and
every m x m row submatrix of G is invertible because the corresponding
rows of V form a Vandermonde system on distinct points. Code length is
capped at 255 positions.

Packets are byte strings of one fixed size per code. Encoding and
decoding are deterministic with no randomness anywhere, which is what
lets a receiver regenerate a user's exact transmitted packets from the
decoded source (the cancellation hook, reencode_from_source).

The bookkeeping-only success rule lives here too: can_decode says whether
a set of positions suffices, and it agrees with concrete decode success
by construction (any m distinct positions work, fewer never do).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    FieldCapacityError,
    InsufficientPacketsError,
    ParameterError,
)

_PRIM_POLY = 0x11D

_EXP = [0] * 512
_LOG = [0] * 256


def _build_tables() -> None:
    x = 1
    for i in range(255):
        _EXP[i] = x
        _LOG[x] = i
        x <<= 1
        if x & 0x100:
            x ^= _PRIM_POLY
    for i in range(255, 512):
        _EXP[i] = _EXP[i - 255]


_build_tables()


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("no inverse of 0 in GF(256)")
    return _EXP[255 - _LOG[a]]


def gf_pow(a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    return _EXP[(_LOG[a] * e) % 255]


def _mat_inv(matrix: list[list[int]]) -> list[list[int]]:
    """Gauss-Jordan inverse over GF(256)."""
    size = len(matrix)
    aug = [row[:] + [1 if i == j else 0 for j in range(size)]
           for i, row in enumerate(matrix)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise ParameterError("matrix is singular over GF(256)")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = gf_inv(aug[col][col])
        aug[col] = [gf_mul(v, inv_p) for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v ^ gf_mul(factor, p) for v, p in zip(aug[r], aug[col])]
    return [row[size:] for row in aug]


@dataclass(frozen=True)
class CodingParams:
    """(n, m) code shape: n coded packets, any m recover the block."""

    n: int
    m: int
    packet_size: int = 1

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0:
            raise ParameterError(f"code sizes must be nonnegative, got ({self.n}, {self.m})")
        if self.m > self.n:
            raise ParameterError(f"need m <= n, got ({self.n}, {self.m})")
        if self.packet_size < 1:
            raise ParameterError(f"packet size must be >= 1, got {self.packet_size}")


@dataclass(frozen=True)
class SourceBlock:
    """m source packets for one block id."""

    packets: tuple[bytes, ...]
    block_id: int = 0


@dataclass(frozen=True)
class CodedBlock:
    """n coded packets, index in the tuple = packet position."""

    packets: tuple[bytes, ...]
    block_id: int = 0


def _generator_rows(n: int, m: int) -> list[list[int]]:
    """Rows of G = V · inv(V_top); the first m rows are the identity."""
    if n > 255:
        raise FieldCapacityError(f"code length {n} exceeds the field cap of 255")
    if m == 0:
        return [[] for _ in range(n)]
    vander = [[gf_pow(point, c) for c in range(m)] for point in range(n)]
    top_inv = _mat_inv([row[:] for row in vander[:m]])
    rows = []
    for i in range(n):
        if i < m:
            rows.append([1 if j == i else 0 for j in range(m)])
            continue
        rows.append([
            _xor_dot(vander[i], [top_inv[k][j] for k in range(m)])
            for j in range(m)
        ])
    return rows


def _xor_dot(a: Sequence[int], b: Sequence[int]) -> int:
    acc = 0
    for x, y in zip(a, b):
        acc ^= gf_mul(x, y)
    return acc


def _combine(rows: list[list[int]], packets: Sequence[bytes], size: int) -> list[bytes]:
    out = []
    for row in rows:
        buf = bytearray(size)
        for coeff, pkt in zip(row, packets):
            if coeff == 0:
                continue
            if coeff == 1:
                for t in range(size):
                    buf[t] ^= pkt[t]
            else:
                log_c = _LOG[coeff]
                for t in range(size):
                    v = pkt[t]
                    if v:
                        buf[t] ^= _EXP[log_c + _LOG[v]]
        out.append(bytes(buf))
    return out


def encode(params: CodingParams, source: SourceBlock) -> CodedBlock:
    """Systematic encode: output position i < m is source packet i."""
    if len(source.packets) != params.m:
        raise ParameterError(
            f"block has {len(source.packets)} packets, code expects {params.m}"
        )
    for pkt in source.packets:
        if len(pkt) != params.packet_size:
            raise ParameterError(
                f"packet size {len(pkt)} != configured {params.packet_size}"
            )
    if params.m == 0:
        zeros = bytes(params.packet_size)
        return CodedBlock((zeros,) * params.n, source.block_id)
    rows = _generator_rows(params.n, params.m)
    coded = list(source.packets) + _combine(
        rows[params.m:], source.packets, params.packet_size
    )
    return CodedBlock(tuple(coded), source.block_id)


def reencode_from_source(params: CodingParams, source: SourceBlock) -> CodedBlock:
    """Regenerate the exact transmitted packets of a decoded block.

    Deterministic encoding makes this the interference-cancellation hook:
    a receiver that decoded the source can reproduce every coded packet
    the sender put on the channel, at every position.
    """
    return encode(params, source)


def can_decode(params: CodingParams, positions: Iterable[int]) -> bool:
    """Bookkeeping success rule: at least m distinct valid positions."""
    distinct = {p for p in positions if 0 <= p < params.n}
    return len(distinct) >= params.m


def decode(
    params: CodingParams,
    received: Sequence[tuple[int, bytes]],
    block_id: int = 0,
) -> SourceBlock:
    """Recover the source from any m received (position, packet) pairs.

    Duplicates by position are collapsed; positions out of range raise.
    Uses the first m distinct positions in ascending order, so the result
    does not depend on arrival order.
    """
    by_pos: dict[int, bytes] = {}
    for pos, pkt in received:
        if not 0 <= pos < params.n:
            raise ParameterError(f"position {pos} out of range for n={params.n}")
        if len(pkt) != params.packet_size:
            raise ParameterError(
                f"packet size {len(pkt)} != configured {params.packet_size}"
            )
        by_pos.setdefault(pos, pkt)
    if len(by_pos) < params.m:
        raise InsufficientPacketsError(
            f"have {len(by_pos)} distinct positions, need {params.m}"
        )
    if params.m == 0:
        return SourceBlock((), block_id)
    use = sorted(by_pos)[: params.m]
    if use[-1] < params.m:
        # all chosen packets are systematic: direct readoff
        return SourceBlock(tuple(by_pos[p] for p in use), block_id)
    rows = _generator_rows(params.n, params.m)
    sub = [rows[p] for p in use]
    inv = _mat_inv(sub)
    packets = _combine(inv, [by_pos[p] for p in use], params.packet_size)
    return SourceBlock(tuple(packets), block_id)
