"""Counter-based random streams.

Every draw is a pure function of (seed, run_index, channel, index).  Distinct
(run_index, channel) pairs give statistically independent streams, draws can
be generated out of order or in bulk, and the scalar and vectorized consumers
in the engine produce bit-identical values.  Because the arrival channel
yields unit-rate exponentials that callers scale by 1/lambda, changing the
arrival intensity rescales calendar time without perturbing any event
sequence.
"""

from __future__ import annotations

import enum

import numpy as np

MASK64 = (1 << 64) - 1

_SEED_GAMMA = 0x9E3779B97F4A7C15
_MIX_M1 = 0xBF58476D1CE4E5B9
_MIX_M2 = 0x94D049BB133111EB

# 2**-53: top 53 bits of a uint64 map to a uniform double in [0, 1)
_U53 = 1.0 / 9007199254740992.0


class Channel(enum.IntEnum):
    """Independent per-run random channels consumed by the engine."""

    ARRIVAL = 0
    VISIT = 1
    SIGNAL = 2
    TIE = 3
    REVIEW = 4
    RESET = 5
    STATE = 6


def _mix(x: int) -> int:
    """64-bit finalizer (splitmix64): bijective with full avalanche."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MIX_M1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX_M2) & MASK64
    return (x ^ (x >> 31)) & MASK64


def draw_u64(seed: int, run_index: int, channel: int, index: int) -> int:
    """The `index`-th raw 64-bit word of stream (seed, run_index, channel)."""
    h = _mix((seed & MASK64) ^ _SEED_GAMMA)
    h = _mix(h ^ (run_index & MASK64))
    h = _mix(h ^ (channel & MASK64))
    return _mix(h ^ (index & MASK64))


def uniform(seed: int, run_index: int, channel: int, index: int) -> float:
    """Uniform double in [0, 1)."""
    return (draw_u64(seed, run_index, channel, index) >> 11) * _U53


def unit_exponential(seed: int, run_index: int, channel: int, index: int) -> float:
    """Unit-rate exponential; callers divide by the event rate."""
    u = uniform(seed, run_index, channel, index)
    return float(-np.log1p(-u))


def _mix_vec(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX_M1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX_M2)
    return x ^ (x >> np.uint64(31))


def draw_u64_vec(seed: int, run_index: np.ndarray, channel: int, index) -> np.ndarray:
    """Vectorized `draw_u64` over arrays of run indices (and/or indices)."""
    runs = np.asarray(run_index, dtype=np.uint64)
    h0 = _mix((seed & MASK64) ^ _SEED_GAMMA)
    with np.errstate(over="ignore"):
        h = _mix_vec(np.uint64(h0) ^ runs)
        h = _mix_vec(h ^ np.uint64(channel))
        h = _mix_vec(h ^ np.asarray(index, dtype=np.uint64))
    return h


def uniform_vec(seed: int, run_index: np.ndarray, channel: int, index) -> np.ndarray:
    return (draw_u64_vec(seed, run_index, channel, index) >> np.uint64(11)) * _U53


def unit_exponential_vec(seed: int, run_index: np.ndarray, channel: int, index) -> np.ndarray:
    return -np.log1p(-uniform_vec(seed, run_index, channel, index))


class CounterStream:
    """Indexed view of one (seed, run_index, channel) stream.

    Values are addressed by position, so a stream never carries mutable
    cursor state and two consumers can read the same draw.
    """

    __slots__ = ("seed", "run_index", "channel")

    def __init__(self, seed: int, run_index: int, channel: Channel):
        self.seed = int(seed)
        self.run_index = int(run_index)
        self.channel = Channel(channel)

    def uniform(self, index: int) -> float:
        return uniform(self.seed, self.run_index, self.channel, index)

    def unit_exponential(self, index: int) -> float:
        return unit_exponential(self.seed, self.run_index, self.channel, index)

    def uniforms(self, n: int, start: int = 0) -> np.ndarray:
        idx = np.arange(start, start + n, dtype=np.uint64)
        runs = np.full(n, self.run_index, dtype=np.uint64)
        return uniform_vec(self.seed, runs, self.channel, idx)


def rng_stream(seed: int, run_index: int, channel: Channel) -> CounterStream:
    """Deterministic random stream for one (run, channel) pair."""
    return CounterStream(seed, run_index, channel)


def derive_seed(master: int, *words: int) -> int:
    """Stable sub-seed from a master seed and integer context words."""
    h = _mix((master & MASK64) ^ _SEED_GAMMA)
    for w in words:
        h = _mix(h ^ (w & MASK64))
    return h
