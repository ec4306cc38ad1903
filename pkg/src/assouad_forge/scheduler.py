"""Dense direction sequences with a rate guarantee, and the schedule pairing.

Block k of the sequence holds one graph point (theta, phi(theta)) for every
cell of side 1/k in [0, pi] x [0, 1] that the sampled graph of phi visits.
Concatenating the blocks gives a sequence in which every direction theta has,
for each k, an entry n_k of block k within sup-distance 1/k of
(theta, phi(theta)).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from .profile import Profile, angle_distance, evaluate
from .scalar import Scalar, pi, scalar, to_decimal

DEFAULT_SUBSAMPLE = 16


@dataclass(frozen=True)
class Entry:
    n: int
    theta: Scalar
    value: Scalar
    block: int
    col: int
    row: int


@dataclass(frozen=True)
class DirectionSequence:
    profile: Profile
    entries: tuple[Entry, ...]
    blocks: dict = field(default_factory=dict)  # k -> (first n, last n), complete blocks only
    subsample: int = DEFAULT_SUBSAMPLE

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, n: int) -> Entry:
        """1-based access: ``seq[n]`` is q_n."""
        if n < 1:
            raise IndexError(n)
        return self.entries[n - 1]

    def theta(self, k: int) -> Scalar:
        return self[k].theta

    def block(self, k: int) -> list[Entry]:
        first, last = self.blocks[k]
        return list(self.entries[first - 1:last])

    @property
    def complete_blocks(self) -> int:
        return max(self.blocks, default=0)


@dataclass(frozen=True)
class Approximant:
    k: int
    n: int
    theta: Scalar
    value: Scalar
    distance: Scalar
    value_error: Scalar


@dataclass
class ApproximantResult:
    rows: list[Approximant]
    missing: list[int]  # blocks whose sampled cover missed (theta, phi(theta))
    truncated: bool  # the sequence ran out of complete blocks before K

    @property
    def ok(self) -> bool:
        return not self.missing and not self.truncated


def _cell_row(value: Scalar, k: int) -> int:
    return min(int(gmpy2.floor(value * k)), k - 1)


def graph_cover(profile: Profile, k: int, subsample: int = DEFAULT_SUBSAMPLE) -> list[tuple[Scalar, Scalar, int, int]]:
    """Representatives (theta, phi(theta), col, row) of the side-1/k cells hit by
    the graph, detected by sampling ``subsample`` angles per cell column.

    The representative of a cell is its lowest sampled angle, so column edges
    i/k (in particular the integers) recur in every block.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if subsample < 2:
        raise ValueError("subsample must be >= 2")
    p = pi()
    ncols = int(gmpy2.ceil(p * k))
    out = []
    for col in range(ncols):
        lo = mpfr(col) / k
        hi = mpfr(col + 1) / k
        if hi > p:
            hi = p
        width = hi - lo
        ts = range(1, subsample + 1) if col == 0 else range(subsample)
        seen = {}
        for t in ts:
            theta = lo + width * t / subsample
            if not (0 < theta <= p):
                continue
            value = evaluate(profile, theta)
            row = _cell_row(value, k)
            if row not in seen:
                seen[row] = (theta, value, col, row)
        out.extend(sorted(seen.values(), key=lambda e: (e[0], e[1])))
    return out


def enumerate_directions(profile: Profile, N: int, subsample: int = DEFAULT_SUBSAMPLE) -> DirectionSequence:
    """Concatenate graph-cover blocks k = 1, 2, ... until N entries exist; truncate to N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    entries: list[Entry] = []
    blocks = {}
    k = 0
    while len(entries) < N:
        k += 1
        first = len(entries) + 1
        for theta, value, col, row in graph_cover(profile, k, subsample):
            entries.append(Entry(len(entries) + 1, theta, value, k, col, row))
        blocks[k] = (first, len(entries))
    entries = entries[:N]
    if blocks[k][1] > N:
        del blocks[k]
    return DirectionSequence(profile, tuple(entries), blocks, subsample)


def sequence_for_blocks(profile: Profile, K: int, subsample: int = DEFAULT_SUBSAMPLE) -> DirectionSequence:
    """A sequence holding exactly the complete blocks 1..K."""
    entries: list[Entry] = []
    blocks = {}
    for k in range(1, K + 1):
        first = len(entries) + 1
        for theta, value, col, row in graph_cover(profile, k, subsample):
            entries.append(Entry(len(entries) + 1, theta, value, k, col, row))
        blocks[k] = (first, len(entries))
    return DirectionSequence(profile, tuple(entries), blocks, subsample)


def approximants(seq: DirectionSequence, theta, K: int) -> ApproximantResult:
    """For k = 1..K, the entry of block k closest to theta among those within
    sup-distance 1/k of (theta, phi(theta))."""
    theta = theta if isinstance(theta, Scalar) else scalar(theta)
    target = evaluate(seq.profile, theta)
    rows, missing = [], []
    truncated = False
    for k in range(1, K + 1):
        if k not in seq.blocks:
            truncated = True
            break
        best = None
        radius = mpfr(1) / k
        for e in seq.block(k):
            d = angle_distance(e.theta, theta)
            dv = abs(e.value - target)
            if d > radius or dv > radius:
                continue
            key = (d, dv, e.n)
            if best is None or key < best[0]:
                best = (key, e)
        if best is None:
            missing.append(k)
            continue
        (d, dv, _), e = best
        rows.append(Approximant(k, e.n, e.theta, e.value, d, dv))
    return ApproximantResult(rows, missing, truncated)


def pair_index(k: int, n: int) -> int:
    """Schedule index g(k, n): pairs with max{k, n} = m fill ((m-1)^2, m^2]
    in lexicographic (k, n) order, so n <= g <= max{k, n}^2."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    m = max(k, n)
    base = (m - 1) ** 2
    if k < m:
        return base + k
    return base + (m - 1) + n


def unpair(g: int) -> tuple[int, int]:
    if g < 1:
        raise ValueError("g must be >= 1")
    m = math.isqrt(g - 1) + 1
    pos = g - (m - 1) ** 2
    if pos <= m - 1:
        return pos, m
    return m, pos - (m - 1)


def directions_csv(seq: DirectionSequence) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "theta", "value", "block"])
    for e in seq.entries:
        w.writerow([e.n, to_decimal(e.theta), to_decimal(e.value), e.block])
    return buf.getvalue()
