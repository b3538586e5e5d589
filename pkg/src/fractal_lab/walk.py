"""Lattice random walks and their level sets, local time and images.

A walk takes N = 2**m unit steps on the integer lattice; position k
models the value at time k*dt in units of sqrt(dt), dt = 2**-m.  Time
cells align with the base-2 grid of depth m, so level sets come back as
:class:`~fractal_lab.grid.GridSet` values and compose with the counting
and measure machinery.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UndefinedRatioError
from .grid import GridSet, GridSpec
from .rng import bit_stream

MIN_STEPS_LOG2 = 1
MAX_STEPS_LOG2 = 30  # 2**30 positions ~ 4 GiB of int32; hard memory cap

# Normalizer in the occupation-density comparison: lambda * delta**-0.5
# is compared against 2*sqrt(2/pi) times the local time.
PERKINS_NORMALIZER = 2.0 * math.sqrt(2.0 / math.pi)

_BINARY_HEADER = struct.Struct("<IQ")
_VALIDATE_CHUNK = 1 << 22


@dataclass(frozen=True)
class LatticePoint:
    """A lattice level x = units * sqrt(dt)."""

    units: int


def _units(x) -> int:
    return int(x.units) if isinstance(x, LatticePoint) else int(x)


@dataclass(frozen=True, eq=False)
class WalkPath:
    """Positions p_0..p_N of an N-step +-1 lattice walk, p_0 = 0."""

    steps_log2: int
    seed: int
    positions: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not MIN_STEPS_LOG2 <= self.steps_log2 <= MAX_STEPS_LOG2:
            raise DomainError(
                f"steps_log2 must lie in [{MIN_STEPS_LOG2}, {MAX_STEPS_LOG2}]"
            )
        pos = np.asarray(self.positions, dtype=np.int32)
        n = 1 << self.steps_log2
        if pos.shape != (n + 1,):
            raise DomainError(f"expected {n + 1} positions, got {pos.shape}")
        if pos[0] != 0:
            raise DomainError("walk must start at the origin")
        for start in range(0, n, _VALIDATE_CHUNK):
            chunk = pos[start : min(start + _VALIDATE_CHUNK, n) + 1]
            if not (np.abs(np.diff(chunk)) == 1).all():
                raise DomainError("every increment must be +-1")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_steps(self) -> int:
        return 1 << self.steps_log2

    @property
    def dt(self) -> float:
        return 2.0 ** (-self.steps_log2)

    @property
    def sqrt_dt(self) -> float:
        return 2.0 ** (-self.steps_log2 / 2.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WalkPath):
            return NotImplemented
        return (
            self.steps_log2 == other.steps_log2
            and self.seed == other.seed
            and np.array_equal(self.positions, other.positions)
        )

    @classmethod
    def from_increments(cls, increments, seed: int = 0) -> "WalkPath":
        """Build a path from an explicit +-1 sequence (test hook)."""
        steps = np.asarray(increments, dtype=np.int32)
        m = int(steps.size).bit_length() - 1
        if steps.size != 1 << m:
            raise DomainError("increment count must be a power of two")
        positions = np.empty(steps.size + 1, dtype=np.int32)
        positions[0] = 0
        np.cumsum(steps, out=positions[1:])
        return cls(steps_log2=m, seed=seed, positions=positions)

    def to_binary(self) -> bytes:
        """Header (steps_log2 u32, seed u64) then 1-bit increments, LSB first."""
        bits = ((np.diff(self.positions) + 1) // 2).astype(np.uint8)
        return _BINARY_HEADER.pack(self.steps_log2, self.seed) + np.packbits(
            bits, bitorder="little"
        ).tobytes()

    @classmethod
    def from_binary(cls, blob: bytes) -> "WalkPath":
        m, seed = _BINARY_HEADER.unpack_from(blob, 0)
        n = 1 << m
        payload = np.frombuffer(blob, dtype=np.uint8, offset=_BINARY_HEADER.size)
        bits = np.unpackbits(payload, bitorder="little")[:n]
        return cls.from_increments(bits.astype(np.int32) * 2 - 1, seed=seed)


def sample_walk(steps_log2: int, seed: int) -> WalkPath:
    """Sample the N-step walk driven by the versioned counter-based PRNG.

    Identical (steps_log2, seed) give identical paths on every platform.
    """
    if not MIN_STEPS_LOG2 <= steps_log2 <= MAX_STEPS_LOG2:
        raise DomainError(
            f"steps_log2 must lie in [{MIN_STEPS_LOG2}, {MAX_STEPS_LOG2}]"
        )
    n = 1 << steps_log2
    steps = bit_stream(seed, n).astype(np.int32)
    steps *= 2
    steps -= 1
    positions = np.empty(n + 1, dtype=np.int32)
    positions[0] = 0
    np.cumsum(steps, out=positions[1:])
    return WalkPath(steps_log2=steps_log2, seed=seed, positions=positions)


def level_set(path: WalkPath, x) -> GridSet:
    """Time cells k < N with p_k equal to the lattice level x."""
    units = _units(x)
    n = path.n_steps
    cells = np.flatnonzero(path.positions[:n] == units).astype(np.int64)
    return GridSet(GridSpec(2, path.steps_log2), cells)


def local_time(path: WalkPath, t_cells: int, x) -> float:
    """Visit count at x before time cell t_cells, scaled by sqrt(dt)."""
    if not 0 <= t_cells <= path.n_steps:
        raise DomainError(f"t_cells {t_cells} outside [0, {path.n_steps}]")
    units = _units(x)
    visits = int(np.count_nonzero(path.positions[:t_cells] == units))
    return visits * path.sqrt_dt


def interval_union_measure(times: np.ndarray, delta: float, t_max: float) -> float:
    """Length of the union of [s - delta/2, s + delta/2] over sorted times s,
    clipped to [0, t_max].  One vectorized sweep over the sorted sequence."""
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        return 0.0
    half = delta / 2.0
    total = float(np.minimum(np.diff(times), delta).sum()) + delta
    total -= max(0.0, half - float(times[0]))
    total -= max(0.0, float(times[-1]) + half - t_max)
    return total


def occupation_lambda(path: WalkPath, t_cells: int, x, delta: float) -> float:
    """Lebesgue measure of the delta/2-neighbourhood of the visit times of x,
    intersected with [0, t_cells * dt]."""
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    if not 0 <= t_cells <= path.n_steps:
        raise DomainError(f"t_cells {t_cells} outside [0, {path.n_steps}]")
    units = _units(x)
    visits = np.flatnonzero(path.positions[:t_cells] == units)
    return interval_union_measure(visits * path.dt, delta, t_cells * path.dt)


def perkins_ratio(path: WalkPath, t_cells: int, x, delta: float) -> float:
    """occupation * delta**-1/2 over 2*sqrt(2/pi) * local time; tends to 1
    in the mean as delta shrinks and the walk refines."""
    lt = local_time(path, t_cells, x)
    if lt == 0.0:
        raise UndefinedRatioError("local time is zero; ratio undefined")
    lam = occupation_lambda(path, t_cells, x, delta)
    return lam / math.sqrt(delta) / (PERKINS_NORMALIZER * lt)


def running_max(path: WalkPath) -> np.ndarray:
    """M_k = max_{j<=k} p_j, length N+1, nondecreasing, M_0 = 0."""
    return np.maximum.accumulate(path.positions)


def record_times(path: WalkPath) -> GridSet:
    """Time cells k < N where the walk sits at its running maximum.

    Equals the zero level set of the reflected walk M - p.
    """
    n = path.n_steps
    m = np.maximum.accumulate(path.positions[:n])
    cells = np.flatnonzero(path.positions[:n] == m).astype(np.int64)
    return GridSet(GridSpec(2, path.steps_log2), cells)


def image_depth(steps_log2: int) -> int:
    """Depth of the value grid for walk images: ceil(m/2)."""
    return (steps_log2 + 1) // 2


def image_set(path: WalkPath, times: GridSet) -> GridSet:
    """Distinct walk values over the given time cells, binned on the value grid.

    The value line is rescaled by sqrt(dt): the window [-1, 1] (i.e.
    [-sqrt(N), +sqrt(N)] lattice units) maps affinely onto [0, 1] at depth
    ceil(m/2), value cell index floor((units + sqrt(N)) / 2).  Values do
    stray outside the window on a sizable minority of paths (the walk can
    reach +-N units); those are clamped into the two edge cells.
    """
    if times.base != 2 or times.depth != path.steps_log2:
        raise DomainError(
            f"times grid (base {times.base}, depth {times.depth}) does not match "
            f"a base-2 depth-{path.steps_log2} walk"
        )
    depth = image_depth(path.steps_log2)
    sqrt_n = 2.0 ** (path.steps_log2 / 2.0)
    values = path.positions[times.cells]
    idx = np.floor((values + sqrt_n) / 2.0).astype(np.int64)
    np.clip(idx, 0, (1 << depth) - 1, out=idx)
    idx = np.unique(idx)
    return GridSet(GridSpec(2, depth), idx)


def stream_walk_stats(steps_log2: int, seed: int, x=0, t_cells: int | None = None) -> dict:
    """Visit count at x, running max and endpoint without materializing the path.

    Matches level_set/local_time/running_max on the same (steps_log2, seed)
    but works in fixed-size chunks, for step counts too large to store.
    """
    if not MIN_STEPS_LOG2 <= steps_log2 <= MAX_STEPS_LOG2:
        raise DomainError(
            f"steps_log2 must lie in [{MIN_STEPS_LOG2}, {MAX_STEPS_LOG2}]"
        )
    n = 1 << steps_log2
    horizon = n if t_cells is None else t_cells
    if not 0 <= horizon <= n:
        raise DomainError(f"t_cells {t_cells} outside [0, {n}]")
    units = _units(x)
    chunk = 1 << 22  # bits per chunk; multiple of 64 keeps word boundaries aligned
    generator = np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF)
    visits = 1 if units == 0 and horizon > 0 else 0  # p_0 = 0
    max_units = 0
    position = 0
    for start in range(0, n, chunk):
        n_bits = min(chunk, n - start)
        words = generator.random_raw((n_bits + 63) // 64)
        octets = words.astype("<u8").view(np.uint8)
        steps = np.unpackbits(octets, bitorder="little")[:n_bits].astype(np.int32)
        steps *= 2
        steps -= 1
        partial = np.cumsum(steps, dtype=np.int32)
        partial += position
        position = int(partial[-1])
        max_units = max(max_units, int(partial.max()))
        # partial[i] is p_{start+1+i}; only indices k < horizon are counted
        upto = min(horizon - 1, start + n_bits)
        if upto >= start + 1:
            visits += int(np.count_nonzero(partial[: upto - start] == units))
    return {"visits": visits, "max_units": max_units, "final_units": position}
