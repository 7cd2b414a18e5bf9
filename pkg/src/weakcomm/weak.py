"""Gaussian-pointer weak measurement of a spin observable.

The pointer starts in a real Gaussian of width ``delta_p`` and is shifted by
the eigenvalue (+1 or -1) of the measured observable, so the joint state is
``c+ |a+>|phi(p-1)> + c- |a->|phi(p+1)>``. Everything below follows from that
two-component structure without a wavefunction grid.

Closed forms
------------
Write ``e = exp(-1/(2 dp^2))`` for the overlap of the two shifted pointer
states, ``C = <b|psi>`` and ``A_w = <b|A|psi>/<b|psi>``. Projecting the joint
state on ``|b>`` gives the unnormalized pointer state
``C [(1 + A_w)/2 phi+ + (1 - A_w)/2 phi-]``. With
``<phi+|p|phi+> = 1``, ``<phi-|p|phi-> = -1`` and ``<phi+|p|phi-> = 0`` (the
product of the two Gaussians is even in p):

* numerator  ``<phi(b)|p|phi(b)> = |C|^2 Re A_w``
* norm       ``P'(b) = |C|^2 [(1 + |A_w|^2)/2 + (1 - |A_w|^2) e / 2]``

so ``P'(b)/P(b) = 1 - (1 - |A_w|^2)(1 - e)/2``. With the disturbance
``D = (var_A/2)(1 - e)`` this is ``1 + dP/P`` where
``dP/P = -(1 - |A_w|^2) D / var_A``, and the conditional pointer mean is
``Re A_w / (1 + dP/P)`` with no truncation in D.

Fidelity is ``|c+|^4 + |c-|^4 + 2 |c+|^2 |c-|^2 e``; since
``var_A = 4 |c+|^2 |c-|^2``, ``1 - F`` equals ``D`` identically.

Sampling
--------
A reading is drawn from the exact marginal
``|c+|^2 g(p - 1) + |c-|^2 g(p + 1)`` by picking the branch with one uniform
and adding ``delta_p`` times a Box-Muller normal. The spin is then left in
``c+ phi(p-1) |a+> + c- phi(p+1) |a->`` (normalized), which uses the ratio
``phi(p+1)/phi(p-1) = exp(-p/dp^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import WeakValueUndefined
from .spin import QubitState, SpinObservable, expectation, overlap
from .stats import RandomStream

ORTHOGONAL_TOL = 1e-12


@dataclass(frozen=True)
class PointerConfig:
    delta_p: float

    def __post_init__(self):
        if not (self.delta_p > 0 and math.isfinite(self.delta_p)):
            raise ValueError(f"pointer width must be positive and finite, got {self.delta_p}")

    @property
    def overlap_factor(self) -> float:
        """<phi+|phi-> = exp(-1/(2 dp^2))."""
        return math.exp(-0.5 / self.delta_p ** 2)

    def is_weak(self, var_a: float = 0.5) -> bool:
        return disturbance(self.delta_p, var_a) < 0.05


@dataclass(frozen=True)
class WeakReading:
    p: float
    post_state: QubitState


@dataclass(frozen=True)
class WeakValueReport:
    a_w: complex
    re_a_w: float
    prob_unperturbed: float
    prob_perturbed: float
    rel_shift: float
    cond_mean: float


def disturbance(delta_p: float, var_a: float) -> float:
    """Flip probability ``(var_a/2)(1 - exp(-1/(2 dp^2)))``."""
    if not delta_p > 0:
        raise ValueError(f"pointer width must be positive, got {delta_p}")
    if not 0.0 <= var_a <= 1.0:
        raise ValueError(f"spin variance must lie in [0, 1], got {var_a}")
    return 0.5 * var_a * -math.expm1(-0.5 / delta_p ** 2)


def invert_disturbance(d: float, var_a: float = 0.5) -> float:
    """Pointer width giving disturbance ``d``; exact inverse of :func:`disturbance`."""
    if not 0.0 < d < 0.5 * var_a:
        raise ValueError(f"disturbance must lie in (0, {0.5 * var_a}), got {d}")
    return math.sqrt(-0.5 / math.log1p(-2.0 * d / var_a))


def fidelity(pre: QubitState, obs: SpinObservable, cfg: PointerConfig) -> float:
    """Probability that the spin is found back in ``pre`` after the coupling."""
    w_plus = abs(overlap(obs.eigenstate(1), pre)) ** 2
    w_minus = 1.0 - w_plus
    return w_plus ** 2 + w_minus ** 2 + 2.0 * w_plus * w_minus * cfg.overlap_factor


def weak_value(obs: SpinObservable, pre: QubitState, post: QubitState) -> complex:
    amp = overlap(post, pre)
    if abs(amp) < ORTHOGONAL_TOL:
        raise WeakValueUndefined("post-selected state is orthogonal to the pre-selected state")
    num = np.conj(post.vector) @ obs.matrix() @ pre.vector
    return complex(num / amp)


def prob_shift(a_w: complex, var_a: float, d: float) -> float:
    """Relative change of the post-selection probability caused by the coupling."""
    if var_a <= 0:
        raise ValueError("prob_shift needs a positive spin variance")
    return -(1.0 - abs(a_w) ** 2) * d / var_a


def conditional_mean(obs: SpinObservable, pre: QubitState, post: QubitState,
                     cfg: PointerConfig) -> WeakValueReport:
    a_w = weak_value(obs, pre, post)
    prob = abs(overlap(post, pre)) ** 2
    # written via (1 - e) directly so an eigenstate pre-selection (var_A = 0)
    # needs no special case
    rel = -(1.0 - abs(a_w) ** 2) * 0.5 * -math.expm1(-0.5 / cfg.delta_p ** 2)
    return WeakValueReport(
        a_w=a_w,
        re_a_w=a_w.real,
        prob_unperturbed=prob,
        prob_perturbed=prob * (1.0 + rel),
        rel_shift=rel,
        cond_mean=a_w.real / (1.0 + rel),
    )


def sum_rule_check(obs: SpinObservable, pre: QubitState, post_axis: SpinObservable) -> float:
    """<A> minus the probability-weighted real weak values over both outcomes."""
    total = 0.0
    for outcome in (1, -1):
        b = post_axis.eigenstate(outcome)
        total += abs(overlap(b, pre)) ** 2 * weak_value(obs, pre, b).real
    return expectation(obs, pre) - total


def weak_measure_batch(up: np.ndarray, down: np.ndarray, obs: SpinObservable,
                       cfg: PointerConfig, rng: RandomStream):
    """Weakly measure ``obs`` on every spin; three draws per spin.

    Returns ``(readings, new_up, new_down)``.
    """
    n = len(up)
    start = rng.take(3 * n)
    return _kernels.weak_measure(up, down, obs.bloch_direction, cfg.delta_p, rng.key, start)


def sample_weak_reading(pre: QubitState, obs: SpinObservable, cfg: PointerConfig,
                        rng: RandomStream) -> WeakReading:
    p, up, down = weak_measure_batch(np.array([pre.amplitude_up]),
                                     np.array([pre.amplitude_down]), obs, cfg, rng)
    return WeakReading(float(p[0]), QubitState(complex(up[0]), complex(down[0])))


def pointer_density(p, pre: QubitState, obs: SpinObservable, cfg: PointerConfig):
    """Marginal density of the pointer reading."""
    p = np.asarray(p, dtype=float)
    w_plus = abs(overlap(obs.eigenstate(1), pre)) ** 2
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * cfg.delta_p)

    def g(x):
        return norm * np.exp(-0.5 * (x / cfg.delta_p) ** 2)

    return w_plus * g(p - 1.0) + (1.0 - w_plus) * g(p + 1.0)

