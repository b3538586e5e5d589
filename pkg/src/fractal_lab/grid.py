"""Finite base-b grid approximations of compact subsets of [0,1].

A :class:`GridSet` records which cells of the regular base-b grid at a
fixed depth are occupied.  Cells are stored as a strictly increasing
int64 index sequence rather than a bitset so that deep, sparse sets
(depth 40+ at base 2) stay representable.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError

# Indices must fit int64; cell materialization is additionally capped so a
# runaway full-grid request fails fast instead of exhausting memory.
MAX_GRID_SIZE = 1 << 63
MAX_MATERIALIZED_CELLS = 1 << 26

_BINARY_HEADER = struct.Struct("<IIQ")


@dataclass(frozen=True)
class GridSpec:
    """Base and depth of a regular grid over [0,1]; cell width base**-depth."""

    base: int
    depth: int

    def __post_init__(self) -> None:
        if self.base < 2:
            raise DomainError(f"grid base must be >= 2, got {self.base}")
        if self.depth < 0:
            raise DomainError(f"grid depth must be >= 0, got {self.depth}")
        if self.base**self.depth > MAX_GRID_SIZE:
            raise CapacityError(
                f"base**depth = {self.base}**{self.depth} exceeds the 63-bit index range"
            )

    @property
    def size(self) -> int:
        """Number of cells at the finest level (python int, exact)."""
        return self.base**self.depth

    @property
    def cell_width(self) -> float:
        return float(self.base) ** (-self.depth)


@dataclass(frozen=True, eq=False)
class CantorSpec:
    """Digit-restricted self-similar set: keep indices whose base-b digits
    all lie in ``kept_digits``.  Similarity dimension log|kept|/log base."""

    base: int
    kept_digits: tuple[int, ...]
    depth: int

    def __post_init__(self) -> None:
        GridSpec(self.base, self.depth)  # validates base/depth/capacity
        kept = tuple(sorted(set(int(d) for d in self.kept_digits)))
        if not kept:
            raise DomainError("kept_digits must be nonempty")
        if kept[0] < 0 or kept[-1] >= self.base:
            raise DomainError(
                f"kept_digits {kept} not a subset of 0..{self.base - 1}"
            )
        object.__setattr__(self, "kept_digits", kept)

    @property
    def dimension(self) -> float:
        """Self-similar dimension log|kept|/log base (1.0 for the full digit set)."""
        return math.log(len(self.kept_digits)) / math.log(self.base)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CantorSpec):
            return NotImplemented
        return (self.base, self.kept_digits, self.depth) == (
            other.base,
            other.kept_digits,
            other.depth,
        )

    def __hash__(self) -> int:
        return hash((self.base, self.kept_digits, self.depth))


@dataclass(frozen=True, eq=False)
class GridSet:
    """Occupied cells of a base-b depth-m grid, as a sorted index array.

    Immutable after construction; every operation on grid sets is a pure
    function, so values are safe to share between concurrent tasks.
    """

    spec: GridSpec
    cells: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.int64)
        if cells.ndim != 1:
            raise DomainError("cells must be a one-dimensional index sequence")
        if cells.size:
            if cells[0] < 0 or int(cells[-1]) >= self.spec.size:
                raise DomainError("cell index out of range for grid size")
            if cells.size > 1 and not (np.diff(cells) > 0).all():
                raise DomainError("cell indices must be strictly increasing")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def base(self) -> int:
        return self.spec.base

    @property
    def depth(self) -> int:
        return self.spec.depth

    @property
    def count(self) -> int:
        return int(self.cells.size)

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridSet):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.cells, other.cells)

    def __hash__(self) -> int:
        return hash((self.spec, self.cells.tobytes()))

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "base": self.base,
            "depth": self.depth,
            "cells": [int(c) for c in self.cells],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, obj: dict) -> "GridSet":
        return cls(GridSpec(int(obj["base"]), int(obj["depth"])), np.asarray(obj["cells"], dtype=np.int64))

    @classmethod
    def from_json(cls, text: str) -> "GridSet":
        return cls.from_json_dict(json.loads(text))

    def to_binary(self) -> bytes:
        """Compact form: base u32, depth u32, count u64, then delta-coded
        LEB128 varints (first index raw, then strictly positive gaps)."""
        buf = bytearray(_BINARY_HEADER.pack(self.base, self.depth, self.count))
        prev = 0
        first = True
        for c in self.cells:
            delta = int(c) if first else int(c) - prev
            first = False
            prev = int(c)
            while True:
                byte = delta & 0x7F
                delta >>= 7
                if delta:
                    buf.append(byte | 0x80)
                else:
                    buf.append(byte)
                    break
        return bytes(buf)

    @classmethod
    def from_binary(cls, blob: bytes) -> "GridSet":
        base, depth, count = _BINARY_HEADER.unpack_from(blob, 0)
        pos = _BINARY_HEADER.size
        cells = np.empty(count, dtype=np.int64)
        acc = 0
        for i in range(count):
            value = 0
            shift = 0
            while True:
                byte = blob[pos]
                pos += 1
                value |= (byte & 0x7F) << shift
                if not byte & 0x80:
                    break
                shift += 7
            acc = value if i == 0 else acc + value
            cells[i] = acc
        if pos != len(blob):
            raise DomainError("trailing bytes after grid set payload")
        return cls(GridSpec(base, depth), cells)


def cantor_set(spec: CantorSpec) -> GridSet:
    """Materialize the depth-m digit-restricted set; |cells| = |kept|**depth."""
    n_cells = len(spec.kept_digits) ** spec.depth
    if n_cells > MAX_MATERIALIZED_CELLS:
        raise CapacityError(
            f"cantor set would occupy {n_cells} cells "
            f"(cap {MAX_MATERIALIZED_CELLS})"
        )
    digits = np.asarray(spec.kept_digits, dtype=np.int64)
    cells = np.zeros(1, dtype=np.int64)
    for _ in range(spec.depth):
        # kept digits are sorted and < base, so the flattened result stays sorted
        cells = (cells[:, None] * spec.base + digits[None, :]).ravel()
    return GridSet(GridSpec(spec.base, spec.depth), cells)


def coarsen(gs: GridSet, target_depth: int) -> GridSet:
    """Project occupied leaves onto their depth-``target_depth`` ancestors."""
    if not 0 <= target_depth <= gs.depth:
        raise DomainError(
            f"target depth {target_depth} outside [0, {gs.depth}]"
        )
    if target_depth == gs.depth:
        return gs
    shrink = gs.base ** (gs.depth - target_depth)
    parents = gs.cells // shrink
    return GridSet(GridSpec(gs.base, target_depth), _dedupe_sorted(parents))


def _dedupe_sorted(arr: np.ndarray) -> np.ndarray:
    if arr.size <= 1:
        return arr
    keep = np.empty(arr.size, dtype=bool)
    keep[0] = True
    np.not_equal(arr[1:], arr[:-1], out=keep[1:])
    return arr[keep]


def scale_counts(gs: GridSet) -> list[int]:
    """Occupied-cell counts at every level 0..depth (counts[m] = |coarsen(gs, m)|)."""
    counts = [gs.count]
    cur = gs.cells
    for _ in range(gs.depth):
        cur = _dedupe_sorted(cur // gs.base)
        counts.append(int(cur.size))
    counts.reverse()
    return counts


def hausdorff_sum(gs: GridSet, beta: float, level: int) -> float:
    """Equal-width-cover sum count(level) * base**(-level*beta).

    Evaluated as exp(ln count - level*beta*ln base) so deep levels cannot
    underflow through the power before the count multiplies back up.
    """
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0,1], got {beta}")
    if not 0 <= level <= gs.depth:
        raise DomainError(f"level {level} outside [0, {gs.depth}]")
    n = coarsen(gs, level).count
    if n == 0:
        return 0.0
    return math.exp(math.log(n) - level * beta * math.log(gs.base))
