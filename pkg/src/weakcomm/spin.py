"""Single-qubit states and spin observables.

States are stored as complex amplitude pairs; the Bloch vector is a derived
view. Eigenvectors of ``n.sigma`` follow a fixed phase convention: the
up-amplitude is real and non-negative, and when it vanishes the
down-amplitude is +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .stats import RandomStream

NORM_TOL = 1e-12
DIRECTION_TOL = 1e-9
SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class QubitState:
    amplitude_up: complex
    amplitude_down: complex

    def __post_init__(self):
        norm2 = abs(self.amplitude_up) ** 2 + abs(self.amplitude_down) ** 2
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm2!r})")

    @classmethod
    def normalized(cls, up: complex, down: complex) -> "QubitState":
        norm = math.sqrt(abs(up) ** 2 + abs(down) ** 2)
        if norm == 0:
            raise ValueError("zero vector cannot be normalized")
        return cls(complex(up) / norm, complex(down) / norm)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amplitude_up, self.amplitude_down], dtype=complex)

    def bloch(self) -> np.ndarray:
        cross = self.amplitude_up.conjugate() * self.amplitude_down
        return np.array([
            2.0 * cross.real,
            2.0 * cross.imag,
            abs(self.amplitude_up) ** 2 - abs(self.amplitude_down) ** 2,
        ])

    def same_ray(self, other: "QubitState", tol: float = 1e-9) -> bool:
        """Equality up to global phase."""
        return abs(abs(overlap(self, other)) - 1.0) <= tol


@dataclass(frozen=True)
class SpinObservable:
    """The observable ``n.sigma`` for a unit Bloch direction ``n``."""

    bloch_direction: tuple[float, float, float]

    def __post_init__(self):
        vec = tuple(float(c) for c in self.bloch_direction)
        if len(vec) != 3:
            raise ValueError("bloch_direction must have three components")
        if abs(math.sqrt(sum(c * c for c in vec)) - 1.0) > NORM_TOL:
            raise ValueError(f"bloch_direction {vec} is not a unit vector")
        object.__setattr__(self, "bloch_direction", vec)

    @classmethod
    def along(cls, direction: Iterable[float]) -> "SpinObservable":
        """Observable along ``direction`` after normalizing it."""
        vec = np.asarray(list(direction), dtype=float)
        norm = float(np.linalg.norm(vec))
        if norm == 0:
            raise ValueError("direction must be non-zero")
        return cls(tuple(vec / norm))

    @property
    def n(self) -> np.ndarray:
        return np.array(self.bloch_direction)

    def matrix(self) -> np.ndarray:
        nx, ny, nz = self.bloch_direction
        return np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]], dtype=complex)

    def eigenstate(self, outcome: int) -> QubitState:
        pu, pdr, pdi, mu, mdr, mdi = (float(v) for v in _kernels.eigvecs(*self.bloch_direction))
        if outcome == 1:
            return QubitState(complex(pu), complex(pdr, pdi))
        if outcome == -1:
            return QubitState(complex(mu), complex(mdr, mdi))
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")


SIGMA_X = SpinObservable((1.0, 0.0, 0.0))
SIGMA_Y = SpinObservable((0.0, 1.0, 0.0))
SIGMA_Z = SpinObservable((0.0, 0.0, 1.0))
# (sigma_x + sigma_y)/sqrt2 and (sigma_x - sigma_y)/sqrt2
A_PLUS = SpinObservable((SQRT_HALF, SQRT_HALF, 0.0))
A_MINUS = SpinObservable((SQRT_HALF, -SQRT_HALF, 0.0))


def bloch_state(direction: Iterable[float]) -> QubitState:
    """The +1 eigenstate of ``direction . sigma``."""
    vec = tuple(float(c) for c in direction)
    if len(vec) != 3:
        raise ValueError("direction must have three components")
    norm = math.sqrt(sum(c * c for c in vec))
    if abs(norm - 1.0) > DIRECTION_TOL:
        raise ValueError(f"direction {vec} is not a unit vector (norm {norm})")
    return SpinObservable(tuple(c / norm for c in vec)).eigenstate(1)


X_PLUS = bloch_state((1.0, 0.0, 0.0))


def overlap(bra: QubitState, ket: QubitState) -> complex:
    """The inner product <bra|ket>."""
    return (bra.amplitude_up.conjugate() * ket.amplitude_up
            + bra.amplitude_down.conjugate() * ket.amplitude_down)


def expectation(obs: SpinObservable, state: QubitState) -> float:
    return float(np.dot(state.bloch(), obs.n))


def variance(obs: SpinObservable, state: QubitState) -> float:
    # rounding can push |<A>| a hair above 1 for eigenstates
    return max(0.0, 1.0 - expectation(obs, state) ** 2)


def born_probability(state: QubitState, obs: SpinObservable, outcome: int) -> float:
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    e = min(1.0, max(-1.0, expectation(obs, state)))
    # larger probability lies in [1/2, 1], so 1 - big is exact and the two
    # outcomes sum to exactly one
    big = 0.5 * (1.0 + abs(e))
    likely = 1 if e >= 0 else -1
    return big if outcome == likely else 1.0 - big


def measure_strong(state: QubitState, obs: SpinObservable,
                   rng: RandomStream) -> tuple[int, QubitState]:
    """Projective measurement of ``obs``; returns the outcome and collapsed state."""
    outcomes, up, down = measure_strong_batch(
        np.array([state.amplitude_up]), np.array([state.amplitude_down]), obs, rng)
    return int(outcomes[0]), QubitState(complex(up[0]), complex(down[0]))


def measure_strong_batch(up: np.ndarray, down: np.ndarray, axes, rng: RandomStream):
    """Measure every spin of an amplitude array.

    ``axes`` is a single :class:`SpinObservable` or an ``(n, 3)`` array of
    per-spin directions. Consumes one draw per spin.
    """
    n = len(up)
    if isinstance(axes, SpinObservable):
        axes = axes.n
    start = rng.take(n)
    return _kernels.strong_measure(up, down, axes, rng.key, start)
