"""Integer combinatorics: partitions, signatures, interlacing, skew plane
partitions and Gelfand-Tsetlin patterns.

Partitions are plain tuples of positive integers (trailing zeros stripped),
signatures are tuples of fixed length whose entries may be negative.  Slice
numbers ``k`` and back-wall labels are 1-based to match the usual plane
partition conventions; everything stored in containers is 0-based, so slice
``k`` lives at index ``k - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

Partition = tuple[int, ...]
Signature = tuple[int, ...]
GTPattern = tuple[Signature, ...]

EMPTY: Partition = ()


def partition(parts: Sequence[int] = ()) -> Partition:
    """Canonical partition from a weakly decreasing nonnegative sequence."""
    parts = tuple(int(p) for p in parts)
    for i, p in enumerate(parts):
        if p < 0:
            raise ValueError(f"negative part in partition {parts}")
        if i and p > parts[i - 1]:
            raise ValueError(f"parts not weakly decreasing: {parts}")
    end = len(parts)
    while end and parts[end - 1] == 0:
        end -= 1
    return parts[:end]


def signature(parts: Sequence[int]) -> Signature:
    parts = tuple(int(p) for p in parts)
    for i in range(1, len(parts)):
        if parts[i] > parts[i - 1]:
            raise ValueError(f"signature not weakly decreasing: {parts}")
    return parts


def part(lam: Sequence[int], i: int) -> int:
    """0-based part access with implicit trailing zeros."""
    return lam[i] if i < len(lam) else 0


def size(lam: Sequence[int]) -> int:
    return sum(lam)


def pad(lam: Sequence[int], n: int) -> tuple[int, ...]:
    if len(lam) > n:
        raise ValueError(f"{tuple(lam)} has more than {n} parts")
    return tuple(lam) + (0,) * (n - len(lam))


def contains(mu: Sequence[int], lam: Sequence[int]) -> bool:
    """True iff the diagram of ``mu`` sits inside the diagram of ``lam``."""
    if len(mu) > len(lam):
        return False
    return all(m <= l for m, l in zip(mu, lam))


def interlaces(mu: Sequence[int], nu: Sequence[int]) -> bool:
    """``mu < nu`` in the branching sense: nu_1 >= mu_1 >= nu_2 >= mu_2 >= ..."""
    n = max(len(mu), len(nu))
    for i in range(n):
        if not part(nu, i) >= part(mu, i) >= part(nu, i + 1):
            return False
    return True


def signature_interlaces(lam: Sequence[int], nu: Sequence[int]) -> bool:
    """Branching of a length-n signature into a length-(n+1) signature:
    nu_1 >= lam_1 >= nu_2 >= ... >= lam_n >= nu_{n+1}."""
    if len(nu) != len(lam) + 1:
        raise ValueError(f"length mismatch: {len(lam)} vs {len(nu)}")
    signature(lam)
    signature(nu)
    return all(nu[i] >= lam[i] >= nu[i + 1] for i in range(len(lam)))


def conjugate(lam: Sequence[int]) -> Partition:
    if not lam:
        return EMPTY
    return tuple(sum(1 for p in lam if p > j) for j in range(lam[0]))


def partitions_in_box(rows: int, cols: int) -> Iterator[Partition]:
    """All partitions with at most ``rows`` parts, each at most ``cols``."""

    def rec(prefix: list[int], cap: int) -> Iterator[Partition]:
        yield partition(prefix)
        if len(prefix) == rows:
            return
        for p in range(1, cap + 1):
            prefix.append(p)
            yield from rec(prefix, p)
            prefix.pop()

    yield from rec([], cols)


def sub_partitions(lam: Partition) -> Iterator[Partition]:
    """All partitions contained in ``lam``."""
    lam = tuple(lam)

    def rec(i: int, cap: int, prefix: tuple):
        if i == len(lam) or cap == 0:
            yield prefix
            return
        for v in range(min(cap, lam[i]), 0, -1):
            yield from rec(i + 1, v, prefix + (v,))
        yield prefix

    yield from rec(0, lam[0] if lam else 0, ())


def partitions_containing(outer: Partition, total: int, max_len: float = math.inf,
                          max_first: float = math.inf) -> Iterator[Partition]:
    """Partitions nu of size ``total`` containing ``outer``, optionally with
    at most ``max_len`` rows and first part at most ``max_first``."""
    need = size(outer)
    if total < need or len(outer) > max_len:
        return
    suffix = [sum(outer[i:]) for i in range(len(outer) + 1)]

    def rec(i: int, prefix: list[int], remaining: int, cap: int):
        if remaining == 0:
            if i >= len(outer):
                yield tuple(prefix)
            return
        if i >= max_len:
            return
        rest = suffix[i + 1] if i + 1 < len(suffix) else 0
        for v in range(min(cap, remaining - rest), max(part(outer, i), 1) - 1, -1):
            prefix.append(v)
            yield from rec(i + 1, prefix, remaining - v, v)
            prefix.pop()

    yield from rec(0, [], total, int(min(total, max_first)))


def interlacing_below(nu: Sequence[int]) -> Iterator[Partition]:
    """All partitions ``mu`` with ``mu < nu``."""
    ranges = [range(part(nu, i + 1), nu[i] + 1) for i in range(len(nu))]
    for parts in product(*ranges):
        yield partition(parts)


def signatures_interlacing_below(nu: Signature) -> Iterator[Signature]:
    """All length-(n-1) signatures ``lam`` with ``lam < nu``."""
    ranges = [range(nu[i + 1], nu[i] + 1) for i in range(len(nu) - 1)]
    for parts in product(*ranges):
        yield tuple(parts)


def signatures_in_range(n: int, lo: int, hi: int) -> Iterator[Signature]:
    """All length-n signatures with entries in [lo, hi]."""

    def rec(prefix: list[int], cap: int) -> Iterator[Signature]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for p in range(cap, lo - 1, -1):
            prefix.append(p)
            yield from rec(prefix, p)
            prefix.pop()

    yield from rec([], hi)


# ---------------------------------------------------------------- plane partitions


@dataclass(frozen=True)
class PlanePartitionShape:
    """Back wall ``pi`` inside an A x B box; the support is the complement."""

    A: int
    B: int
    pi: Partition = EMPTY

    def __post_init__(self):
        if self.A < 1 or self.B < 1:
            raise ValueError("box dimensions must be positive")
        object.__setattr__(self, "pi", partition(self.pi))
        if len(self.pi) > self.A or part(self.pi, 0) > self.B:
            raise ValueError(f"pi={self.pi} does not fit in the {self.A}x{self.B} box")

    def row_start(self, i: int) -> int:
        """First supported column (0-based) in row i (0-based)."""
        return part(self.pi, i)

    def boxes(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.A) for j in range(self.row_start(i), self.B)]

    def diagonal(self, k: int) -> list[tuple[int, int]]:
        """Supported boxes (0-based) on slice k (1-based), top row first.

        Slice k collects boxes with 1-based column - row = k - A - 1.
        """
        d = k - self.A - 1
        return [(i, i + d) for i in range(self.A)
                if 0 <= i + d < self.B and i + d >= self.row_start(i)]


def up_steps(shape: PlanePartitionShape) -> frozenset[int]:
    """The back-wall up-step labels {A + pi_i - i + 1 : i = 1..A} (1-based)."""
    return frozenset(shape.A + part(shape.pi, i) - (i + 1) + 1 for i in range(shape.A))


@dataclass(frozen=True)
class PlanePartition:
    """A monotone filling of the skew support of ``shape``.

    ``entries[i]`` holds row i (0-based) for columns ``pi_i .. B-1``.
    """

    shape: PlanePartitionShape
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sh = self.shape
        rows = tuple(tuple(int(x) for x in r) for r in self.entries)
        object.__setattr__(self, "entries", rows)
        if len(rows) != sh.A:
            raise ValueError("wrong number of rows")
        for i, r in enumerate(rows):
            if len(r) != sh.B - sh.row_start(i):
                raise ValueError(f"row {i} has {len(r)} entries, expected {sh.B - sh.row_start(i)}")
            if any(x < 0 for x in r):
                raise ValueError("negative entry")
        for i, j in sh.boxes():
            v = self[i, j]
            if j + 1 < sh.B and v < self[i, j + 1]:
                raise ValueError(f"row monotonicity fails at {(i, j)}")
            if i + 1 < sh.A and j >= sh.row_start(i + 1) and v < self[i + 1, j]:
                raise ValueError(f"column monotonicity fails at {(i, j)}")

    def __getitem__(self, box: tuple[int, int]) -> int:
        i, j = box
        return self.entries[i][j - self.shape.row_start(i)]

    @classmethod
    def from_grid(cls, shape: PlanePartitionShape, grid) -> "PlanePartition":
        """Build from a full A x B grid; cells inside ``pi`` are ignored."""
        rows = [tuple(grid[i][shape.row_start(i):shape.B]) for i in range(shape.A)]
        return cls(shape, tuple(rows))

    @classmethod
    def zero(cls, shape: PlanePartitionShape) -> "PlanePartition":
        return cls(shape, tuple((0,) * (shape.B - shape.row_start(i)) for i in range(shape.A)))

    def grid(self) -> list[list[int | None]]:
        """Full A x B grid with ``None`` on the back wall."""
        sh = self.shape
        return [[None] * sh.row_start(i) + list(self.entries[i]) for i in range(sh.A)]


def diagonal_slices(pp: PlanePartition) -> tuple[Partition, ...]:
    """The A+B+1 diagonal slices; index k-1 holds slice k."""
    sh = pp.shape
    return tuple(partition([pp[b] for b in sh.diagonal(k)]) for k in range(1, sh.A + sh.B + 2))


def from_slices(slices: Sequence[Sequence[int]], shape: PlanePartitionShape) -> PlanePartition:
    """Inverse of :func:`diagonal_slices`; validates the interlacing pattern."""
    n = shape.A + shape.B + 1
    if len(slices) != n:
        raise ValueError(f"expected {n} slices, got {len(slices)}")
    slices = [partition(s) for s in slices]
    if slices[0] or slices[-1]:
        raise ValueError("first and last slices must be empty")
    ups = up_steps(shape)
    for k in range(1, n):
        lo, hi = slices[k - 1], slices[k]
        ok = interlaces(lo, hi) if k in ups else interlaces(hi, lo)
        if not ok:
            rel = "<" if k in ups else ">"
            raise ValueError(f"slices {k} and {k + 1} violate {lo} {rel} {hi}")
    grid = [[0] * shape.B for _ in range(shape.A)]
    for k in range(1, n + 1):
        boxes = shape.diagonal(k)
        lam = slices[k - 1]
        if len(lam) > len(boxes):
            raise ValueError(f"slice {k}={lam} longer than its diagonal ({len(boxes)} boxes)")
        for (i, j), v in zip(boxes, pad(lam, len(boxes))):
            grid[i][j] = v
    return PlanePartition.from_grid(shape, grid)


def volume(pp: PlanePartition) -> int:
    return sum(sum(r) for r in pp.entries)


# ---------------------------------------------------------------- GT patterns


def count_gt_patterns(lam: Sequence[int]) -> int:
    """Number of GT patterns with top row ``lam`` (Weyl dimension formula)."""
    lam = signature(lam)
    n = len(lam)
    num = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            num *= Fraction(lam[i] - i - lam[j] + j, j - i)
    assert num.denominator == 1
    return int(num)


def gt_patterns(top: Signature) -> Iterator[GTPattern]:
    """Exhaustive enumeration of GT patterns (t_1, ..., t_n) with t_n = top."""
    top = signature(top)
    if len(top) == 1:
        yield (top,)
        return
    for below in signatures_interlacing_below(top):
        for pat in gt_patterns(below):
            yield pat + (top,)


def is_gt_pattern(levels: Sequence[Sequence[int]]) -> bool:
    for k, lev in enumerate(levels):
        if len(lev) != k + 1:
            return False
    try:
        return all(signature_interlaces(levels[k], levels[k + 1]) for k in range(len(levels) - 1))
    except ValueError:
        return False
