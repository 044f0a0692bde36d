"""Pseudo-noise and hopping sequence generation.

m-sequences come from a Fibonacci LFSR driven by a primitive polynomial,
Gold codes from the chip-wise product of a preferred pair, and hop
sequences from regrouped PN bits.  All generators are pure functions of
their arguments; sequences are bipolar (+1/-1) with the global bit
mapping 0 -> +1, 1 -> -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class CodeKind(Enum):
    MSEQUENCE = "msequence"
    GOLD = "gold"
    MANUAL = "manual"


# Known primitive polynomials, degrees 2..24, as exponent sets.
# One standard maximal-length tap set per degree plus the preferred
# pairs used for Gold code generation.
_PRIMITIVE_TAPS: dict[int, tuple[frozenset[int], ...]] = {
    2: (frozenset({2, 1, 0}),),
    3: (frozenset({3, 1, 0}),),
    4: (frozenset({4, 1, 0}),),
    5: (frozenset({5, 2, 0}), frozenset({5, 4, 3, 2, 0}), frozenset({5, 3, 0})),
    6: (frozenset({6, 1, 0}), frozenset({6, 5, 2, 1, 0})),
    7: (frozenset({7, 1, 0}), frozenset({7, 3, 0}), frozenset({7, 3, 2, 1, 0})),
    8: (frozenset({8, 4, 3, 2, 0}), frozenset({8, 6, 5, 3, 0})),
    9: (frozenset({9, 4, 0}), frozenset({9, 6, 4, 3, 0})),
    10: (frozenset({10, 3, 0}), frozenset({10, 8, 3, 2, 0})),
    11: (frozenset({11, 2, 0}), frozenset({11, 8, 5, 2, 0})),
    12: (frozenset({12, 6, 4, 1, 0}),),
    13: (frozenset({13, 4, 3, 1, 0}),),
    14: (frozenset({14, 10, 6, 1, 0}),),
    15: (frozenset({15, 1, 0}),),
    16: (frozenset({16, 12, 3, 1, 0}),),
    17: (frozenset({17, 3, 0}),),
    18: (frozenset({18, 7, 0}),),
    19: (frozenset({19, 5, 2, 1, 0}),),
    20: (frozenset({20, 3, 0}),),
    21: (frozenset({21, 2, 0}),),
    22: (frozenset({22, 1, 0}),),
    23: (frozenset({23, 5, 0}),),
    24: (frozenset({24, 7, 2, 1, 0}),),
}

# Preferred polynomial pairs for three-valued Gold cross-correlation.
PREFERRED_PAIRS: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {
    5: ((5, 2, 0), (5, 4, 3, 2, 0)),
    6: ((6, 1, 0), (6, 5, 2, 1, 0)),
    7: ((7, 3, 0), (7, 3, 2, 1, 0)),
    9: ((9, 4, 0), (9, 6, 4, 3, 0)),
    10: ((10, 3, 0), (10, 8, 3, 2, 0)),
    11: ((11, 2, 0), (11, 8, 5, 2, 0)),
}

MIN_DEGREE = 2
MAX_DEGREE = 24


@dataclass(frozen=True)
class PnSequence:
    """Bipolar chip sequence plus the generator that produced it.

    ``chips`` is a read-only int8 array of +1/-1 values.  ``generator``
    records taps/seeds for reproducibility; ``verified_primitive`` is
    False when the tap set is not in the built-in table (the sequence is
    still generated, but maximal length is not guaranteed).
    """

    chips: np.ndarray
    kind: CodeKind
    generator: dict = field(default_factory=dict)
    verified_primitive: bool = True

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=np.int8)
        if chips.ndim != 1 or chips.size == 0:
            raise ValueError("chips must be a nonempty 1-D sequence")
        if not np.all(np.abs(chips) == 1):
            raise ValueError("chips must be bipolar (+1/-1)")
        chips.flags.writeable = False
        object.__setattr__(self, "chips", chips)

    def __len__(self) -> int:
        return int(self.chips.size)

    @property
    def length(self) -> int:
        return int(self.chips.size)

    @property
    def bits(self) -> np.ndarray:
        """Binary view of the chips under the 0 -> +1, 1 -> -1 mapping."""
        return ((1 - self.chips.astype(np.int64)) // 2).astype(np.uint8)


@dataclass(frozen=True)
class HopSequence:
    """Channel index schedule for frequency hopping."""

    channel_indices: np.ndarray
    num_channels: int
    dwell_chips: int

    def __post_init__(self):
        idx = np.asarray(self.channel_indices, dtype=np.int64)
        if self.num_channels < 2:
            raise ValueError("num_channels must be >= 2")
        if self.dwell_chips < 1:
            raise ValueError("dwell_chips must be >= 1")
        if idx.size and (idx.min() < 0 or idx.max() >= self.num_channels):
            raise ValueError("channel index out of [0, num_channels)")
        idx.flags.writeable = False
        object.__setattr__(self, "channel_indices", idx)

    def __len__(self) -> int:
        return int(self.channel_indices.size)


def _normalize_taps(taps) -> tuple[int, ...]:
    exps = sorted({int(e) for e in taps}, reverse=True)
    if len(exps) < 2 or exps[-1] != 0:
        raise ValueError(f"taps {list(taps)} must include the constant term 0 "
                         "and at least one higher exponent")
    if any(e < 0 for e in exps):
        raise ValueError("tap exponents must be non-negative")
    return tuple(exps)


def _lfsr_bits(taps: tuple[int, ...], seed: int, n_out: int) -> np.ndarray:
    """Run a Fibonacci LFSR for ``n_out`` steps.

    The register holds bits (x_t .. x_{t+n-1}); the recurrence is
    x_{t+n} = XOR of x_{t+e} over feedback exponents e < n, and the
    output is the oldest bit.  Seed bit i (LSB first) initializes x_i.
    """
    degree = taps[0]
    feedback = [e for e in taps if e < degree]
    reg = [(seed >> i) & 1 for i in range(degree)]
    out = np.empty(n_out, dtype=np.uint8)
    for i in range(n_out):
        out[i] = reg[0]
        new = 0
        for e in feedback:
            new ^= reg[e]
        reg = reg[1:] + [new]
    return out


def bits_to_bipolar(bits) -> np.ndarray:
    """Map bits to chips with the global convention 0 -> +1, 1 -> -1."""
    return (1 - 2 * np.asarray(bits, dtype=np.int64)).astype(np.int8)


def gen_mseq(taps, seed: int = 1) -> PnSequence:
    """Generate one full period (2^n - 1 chips) of an m-sequence.

    ``taps`` is an exponent list such as [3, 1, 0] for x^3 + x + 1;
    ``seed`` is the nonzero initial register state.
    """
    exps = _normalize_taps(taps)
    degree = exps[0]
    if not (MIN_DEGREE <= degree <= MAX_DEGREE):
        raise ValueError(f"degree {degree} outside supported range "
                         f"[{MIN_DEGREE}, {MAX_DEGREE}]")
    seed = int(seed)
    if not (0 < seed < 2 ** degree):
        raise ValueError(f"seed must be a nonzero {degree}-bit state, got {seed}")
    verified = frozenset(exps) in _PRIMITIVE_TAPS.get(degree, ())
    bits = _lfsr_bits(exps, seed, 2 ** degree - 1)
    return PnSequence(
        chips=bits_to_bipolar(bits),
        kind=CodeKind.MSEQUENCE,
        generator={"taps": list(exps), "seed": seed},
        verified_primitive=verified,
    )


def gen_gold(taps_a, taps_b, shift: int = 0) -> PnSequence:
    """Generate a Gold code: product of two m-sequences, the second
    circularly shifted by ``shift`` chips."""
    exps_a = _normalize_taps(taps_a)
    exps_b = _normalize_taps(taps_b)
    if exps_a[0] != exps_b[0]:
        raise ValueError(f"preferred pair degrees differ: {exps_a[0]} vs {exps_b[0]}")
    degree = exps_a[0]
    if degree % 4 == 0:
        raise ValueError(f"degree {degree} is divisible by 4; no preferred pair exists")
    n = 2 ** degree - 1
    if not (0 <= shift < n):
        raise ValueError(f"shift must lie in [0, {n}), got {shift}")
    seq_a = gen_mseq(exps_a)
    seq_b = gen_mseq(exps_b)
    chips = seq_a.chips.astype(np.int8) * np.roll(seq_b.chips, -shift).astype(np.int8)
    return PnSequence(
        chips=chips,
        kind=CodeKind.GOLD,
        generator={"taps_a": list(exps_a), "taps_b": list(exps_b), "shift": shift},
        verified_primitive=seq_a.verified_primitive and seq_b.verified_primitive,
    )


def manual_sequence(chips) -> PnSequence:
    """Wrap user-supplied bipolar chips without primitivity guarantees."""
    return PnSequence(chips=np.asarray(chips), kind=CodeKind.MANUAL,
                      generator={}, verified_primitive=False)


def gen_hops(pn: PnSequence, num_channels: int, dwell_chips: int = 1) -> HopSequence:
    """Derive a hop schedule by regrouping PN bits into channel indices.

    Groups of ceil(log2(num_channels)) consecutive bits form integers
    (MSB first) reduced modulo ``num_channels``; the trailing partial
    group is dropped.
    """
    if num_channels < 2:
        raise ValueError("num_channels must be >= 2")
    if dwell_chips < 1:
        raise ValueError("dwell_chips must be >= 1")
    bits_per_hop = max(1, math.ceil(math.log2(num_channels)))
    bits = pn.bits
    n_hops = bits.size // bits_per_hop
    grouped = bits[: n_hops * bits_per_hop].reshape(n_hops, bits_per_hop)
    weights = (1 << np.arange(bits_per_hop - 1, -1, -1)).astype(np.int64)
    indices = (grouped.astype(np.int64) @ weights) % num_channels
    return HopSequence(channel_indices=indices, num_channels=num_channels,
                       dwell_chips=dwell_chips)


def periodic_autocorrelation(pn: PnSequence) -> np.ndarray:
    """Periodic (circular) autocorrelation for every lag 0..N-1."""
    chips = pn.chips.astype(np.int64)
    return np.array([int(np.dot(chips, np.roll(chips, lag)))
                     for lag in range(chips.size)], dtype=np.int64)


def periodic_crosscorrelation(a: PnSequence, b: PnSequence) -> np.ndarray:
    """Periodic cross-correlation of two equal-length sequences."""
    if a.length != b.length:
        raise ValueError("sequences must have equal length")
    ca = a.chips.astype(np.int64)
    cb = b.chips.astype(np.int64)
    return np.array([int(np.dot(ca, np.roll(cb, lag)))
                     for lag in range(ca.size)], dtype=np.int64)
