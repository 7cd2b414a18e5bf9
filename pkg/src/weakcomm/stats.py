"""Deterministic random streams, sample estimators and Gaussian-approximation
sample-size predictions.

Streams are counter based: draw ``j`` of a stream with key ``k`` is
``mix64(k + (j + 1) * 0x9E3779B97F4A7C15)``, the SplitMix64 output function
evaluated at an explicit counter. A stream is therefore random access, and
blocks of draws can be produced by either kernel backend without sharing any
hidden state. Stream keys are derived as::

    key(seed, index) = mix64(mix64(seed ^ 0x6A09E667F3BCC909) ^ (index * 0xD1B54A32D192ED03))

which is a bijection in ``seed`` for fixed ``index`` and in ``index`` for
fixed ``seed``. This function is part of the reproducibility contract and
must not change between versions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from . import _kernels

MASK64 = (1 << 64) - 1
_SEED_SALT = 0x6A09E667F3BCC909
_INDEX_MULT = 0xD1B54A32D192ED03
_STD_NORMAL = NormalDist()


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (bijective on 64-bit values)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass
class RandomStream:
    """A single-consumer, counter-based random stream.

    ``seed`` and ``stream_id`` identify the stream; ``counter`` is the next
    unused position. Every draw advances the counter, so two streams built
    from the same ``(seed, stream_id)`` yield the same sequence.
    """

    seed: int
    stream_id: int
    key: int = field(init=False)
    counter: int = 0

    def __post_init__(self):
        self.seed &= MASK64
        self.stream_id &= MASK64
        self.key = mix64(mix64(self.seed ^ _SEED_SALT) ^ ((self.stream_id * _INDEX_MULT) & MASK64))

    def take(self, n: int) -> int:
        """Reserve ``n`` counters and return the first one."""
        if n < 0:
            raise ValueError("cannot reserve a negative number of draws")
        start = self.counter
        self.counter += n
        return start

    def raw(self, n: int) -> np.ndarray:
        return _kernels.splitmix_block(self.key, self.take(n), n)

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` uniforms on [0, 1) with 53-bit resolution."""
        return _kernels.uniform_block(self.key, self.take(n), n)

    def normals(self, n: int) -> np.ndarray:
        """``n`` standard normals (Box-Muller, two counters each)."""
        return _kernels.normal_block(self.key, self.take(2 * n), n)

    def next_u64(self) -> int:
        return int(self.raw(1)[0])

    def spawn(self, index: int) -> "RandomStream":
        """Child stream keyed on this stream's key; does not consume draws."""
        return derive_stream(self.key, index)


def derive_stream(base_seed: int, index: int) -> RandomStream:
    """Independent stream number ``index`` under ``base_seed``."""
    return RandomStream(base_seed, index)


def gaussian(rng: RandomStream, mean: float, sd: float) -> float:
    """One normal draw with the given mean and standard deviation."""
    if sd < 0:
        raise ValueError(f"standard deviation must be non-negative, got {sd}")
    z = float(rng.normals(1)[0])
    if sd == 0:
        return float(mean)
    return mean + sd * z


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean: float
    stderr: float


def sample_stats(values: Sequence[float], fixed_sd: float | None = None) -> SampleStats:
    """Mean and standard error of ``values``.

    With ``fixed_sd`` the error is ``fixed_sd / sqrt(n)``, which is how pointer
    bins are reported (the pointer width is known). Otherwise the sample
    standard deviation (ddof=1, zero for a single value) is used.
    """
    vals = np.asarray(values, dtype=float)
    n = vals.size
    if n == 0:
        raise ValueError("sample_stats needs at least one value")
    # fsum makes the mean independent of the order of the values
    mean = math.fsum(vals) / n
    if fixed_sd is not None:
        if fixed_sd < 0:
            raise ValueError("fixed_sd must be non-negative")
        return SampleStats(n, mean, fixed_sd / math.sqrt(n))
    if n == 1:
        return SampleStats(1, mean, 0.0)
    var = math.fsum((vals - mean) ** 2) / (n - 1)
    return SampleStats(n, mean, math.sqrt(var / n))


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_ppf(q: float) -> float:
    return _STD_NORMAL.inv_cdf(q)


def required_n(separation: float, sd_per_sample: float, target_accuracy: float) -> int:
    """Smallest N with ``Phi(separation * sqrt(N) / (2 * sd)) >= target``.

    This is the two-hypothesis Gaussian prediction: two means ``separation``
    apart, per-sample noise ``sd``, decision at the midpoint.
    """
    if separation <= 0 or sd_per_sample <= 0:
        raise ValueError("separation and sd_per_sample must be positive")
    if not 0.5 < target_accuracy < 1.0:
        raise ValueError(f"target accuracy must lie in (0.5, 1), got {target_accuracy}")

    def acc(n: int) -> float:
        return normal_cdf(separation * math.sqrt(n) / (2.0 * sd_per_sample))

    z = normal_ppf(target_accuracy)
    n = max(1, math.ceil((2.0 * sd_per_sample * z / separation) ** 2))
    while acc(n) < target_accuracy:
        n += 1
    while n > 1 and acc(n - 1) >= target_accuracy:
        n -= 1
    return n
