"""Deterministic, counter-based random bit generation.

All randomness in the toolkit flows through this module.  Walk increments
are drawn from a Philox 4x64-10 counter-based generator keyed by a 64-bit
seed: word ``i`` of the stream is a pure function of ``(seed, i)``, so
replicas can be generated independently and in parallel with no sequential
generator state.  Replica seeds are derived from a master seed with the
splitmix64 finalizer, which is a bijection on 64-bit words; distinct
replica ids therefore can never collide for a fixed master seed.

The version string below is recorded in every experiment report.  Bump it
if the bit-stream derivation ever changes.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "philox4x64-10"
PRNG_VERSION = "philox4x64-10/step-bits-le/v1"

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 step: add the golden gamma, then finalize (bijective)."""
    z = (x + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_replica_seed(master_seed: int, replica_id: int) -> int:
    """Seed for one replica; injective in replica_id for a fixed master."""
    if replica_id < 0:
        raise ValueError("replica_id must be nonnegative")
    return splitmix64((master_seed + (replica_id + 1) * _GOLDEN_GAMMA) & _MASK64)


def bit_stream(seed: int, n_bits: int) -> np.ndarray:
    """First ``n_bits`` bits of the Philox stream keyed by ``seed``.

    Bit k is bit (k mod 64) of raw word k//64, little-endian within the
    word, so prefixes of the stream agree for any requested length.
    Returns a uint8 array of 0/1 values.
    """
    if n_bits < 0:
        raise ValueError("n_bits must be nonnegative")
    if n_bits == 0:
        return np.zeros(0, dtype=np.uint8)
    n_words = (n_bits + 63) // 64
    words = np.random.Philox(key=seed & _MASK64).random_raw(n_words)
    octets = words.astype("<u8").view(np.uint8)
    return np.unpackbits(octets, bitorder="little")[:n_bits]
