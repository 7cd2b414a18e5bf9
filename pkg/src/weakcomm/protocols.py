"""The two single-bit protocols.

Protocol 1 (Bob -> Alice): Alice weakly measures (sx + sy)/sqrt2 on N spins
prepared along +x and keeps the readings (the code). Bob later measures sy
for "yes" or sz for "no" and broadcasts his outcomes (the key). Alice bins her
code by the key.

Protocol 2 (Alice -> Bob): Alice weakly measures (sx + sy)/sqrt2 for "yes" or
(sx - sy)/sqrt2 for "no", then hands over spins and code. Bob measures sx or
sy at random per spin; the sx results are a disturbance check, the sy results
bin the code.

Decision rule (both protocols): with bin means m1, m0 and standard errors
``dp/sqrt(n)``, each hypothesis h gets
``S(h) = ((m1 - mu1(h))/se1)^2 + ((m0 - mu0(h))/se0)^2`` and the smaller S
wins. The result is Inconclusive when ``|S(yes) - S(no)| < 1`` or either bin
has fewer than 10 readings. The "yes" centres use the exact conditional mean
``sqrt2/(1 + 2D)`` rather than sqrt2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ProtocolViolation
from .spin import A_MINUS, A_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, X_PLUS, QubitState, measure_strong_batch
from .stats import RandomStream, sample_stats
from .weak import PointerConfig, disturbance, weak_measure_batch

MIN_BIN = 10
INCONCLUSIVE_BAND = 1.0
SECURITY_SIGMAS = 5.0
SPIN_VARIANCE = 0.5  # variance of (sx +- sy)/sqrt2 on |x+>


class Message(str, Enum):
    YES = "yes"
    NO = "no"


class Decision(str, Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"

    def matches(self, message: Message) -> bool:
        return self.value == message.value


@dataclass
class SpinRegister:
    """Ordered spin sample, stored as amplitude arrays."""

    up: np.ndarray
    down: np.ndarray
    consumed: np.ndarray = None

    def __post_init__(self):
        self.up = np.asarray(self.up, dtype=complex)
        self.down = np.asarray(self.down, dtype=complex)
        if self.up.shape != self.down.shape or self.up.ndim != 1:
            raise ValueError("amplitude arrays must be 1-D and of equal length")
        if self.consumed is None:
            self.consumed = np.zeros(len(self.up), dtype=bool)

    @classmethod
    def prepared(cls, n: int, state: QubitState = X_PLUS) -> "SpinRegister":
        if n < 0:
            raise ValueError("spin count must be non-negative")
        return cls(np.full(n, state.amplitude_up), np.full(n, state.amplitude_down))

    def __len__(self) -> int:
        return len(self.up)

    def state(self, i: int) -> QubitState:
        return QubitState(complex(self.up[i]), complex(self.down[i]))

    def consume(self):
        """Hand all spins to an honest measurement; each may be consumed once."""
        if self.consumed.any():
            raise ProtocolViolation(
                f"{int(self.consumed.sum())} spin(s) were already strongly measured")
        self.consumed[:] = True

    def replaced(self, up: np.ndarray, down: np.ndarray) -> "SpinRegister":
        return SpinRegister(up, down, self.consumed.copy())

    def permuted(self, perm) -> "SpinRegister":
        perm = np.asarray(perm)
        return SpinRegister(self.up[perm], self.down[perm], self.consumed[perm])


@dataclass(frozen=True)
class Code:
    readings: np.ndarray

    def __len__(self) -> int:
        return len(self.readings)


@dataclass(frozen=True)
class Key:
    """Outcome bits (1 = up, 0 = down), optionally with the measured axis per bit."""

    bits: np.ndarray
    axes: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.bits)

    @classmethod
    def from_outcomes(cls, outcomes: np.ndarray, axes=None) -> "Key":
        return cls((np.asarray(outcomes) > 0).astype(np.int8), axes)


@dataclass
class DecodeReport:
    mean_bin1: float | None
    mean_bin0: float | None
    stderr_bin1: float | None
    stderr_bin0: float | None
    n_bin1: int
    n_bin0: int
    decision: Decision
    z_scores: dict = field(default_factory=dict)


@dataclass
class SecurityReport:
    n_x_checked: int
    n_x_flipped: int
    expected_flip_rate: float
    alarm: bool
    alarm_threshold: int


def yes_center(delta_p: float) -> float:
    """Conditional pointer mean for the sqrt2 weak value at this pointer width."""
    return math.sqrt(2.0) / (1.0 + 2.0 * disturbance(delta_p, SPIN_VARIANCE))


def bin_stats(readings: np.ndarray, in_bin1: np.ndarray, delta_p: float):
    """Sample stats for the two bins (None for an empty bin)."""
    b1 = readings[in_bin1]
    b0 = readings[~in_bin1]
    s1 = sample_stats(b1, fixed_sd=delta_p) if len(b1) else None
    s0 = sample_stats(b0, fixed_sd=delta_p) if len(b0) else None
    return s1, s0


def decide(s1, s0, hypotheses: dict, *, band: float = INCONCLUSIVE_BAND,
           min_bin: int = MIN_BIN) -> DecodeReport:
    """Nearest-hypothesis decision on two bins.

    ``hypotheses`` maps :class:`Decision` (YES/NO) to the expected
    ``(bin1, bin0)`` means.
    """
    n1 = s1.n if s1 else 0
    n0 = s0.n if s0 else 0
    scores = {}
    decision = Decision.INCONCLUSIVE
    if n1 >= max(min_bin, 1) and n0 >= max(min_bin, 1):
        for h, (mu1, mu0) in hypotheses.items():
            scores[h.value] = ((s1.mean - mu1) / s1.stderr) ** 2 + ((s0.mean - mu0) / s0.stderr) ** 2
        diff = scores["no"] - scores["yes"]
        if abs(diff) >= band and diff != 0:
            decision = Decision.YES if diff > 0 else Decision.NO
    return DecodeReport(
        mean_bin1=s1.mean if s1 else None,
        mean_bin0=s0.mean if s0 else None,
        stderr_bin1=s1.stderr if s1 else None,
        stderr_bin0=s0.stderr if s0 else None,
        n_bin1=n1,
        n_bin0=n0,
        decision=decision,
        z_scores=scores,
    )


def _weak_encode(n: int, cfg: PointerConfig, obs, rng: RandomStream):
    reg = SpinRegister.prepared(n)
    readings, up, down = weak_measure_batch(reg.up, reg.down, obs, cfg, rng)
    return reg.replaced(up, down), Code(readings)


# -- Protocol 1 ------------------------------------------------------------

def p1_alice_encode(n: int, cfg: PointerConfig, rng: RandomStream) -> tuple[SpinRegister, Code]:
    return _weak_encode(n, cfg, A_PLUS, rng)


def p1_bob_respond(reg: SpinRegister, message: Message, rng: RandomStream) -> Key:
    message = Message(message)
    reg.consume()
    axis = SIGMA_Y if message is Message.YES else SIGMA_Z
    outcomes, up, down = measure_strong_batch(reg.up, reg.down, axis, rng)
    reg.up, reg.down = up, down
    return Key.from_outcomes(outcomes)


def p1_hypotheses(delta_p: float) -> dict:
    half = math.sqrt(0.5)
    return {Decision.YES: (yes_center(delta_p), 0.0), Decision.NO: (half, half)}


def p1_alice_decode(code: Code, key: Key, cfg: PointerConfig) -> DecodeReport:
    if len(code) != len(key):
        raise ValueError(f"code has {len(code)} readings but key has {len(key)} bits")
    s1, s0 = bin_stats(np.asarray(code.readings, float), np.asarray(key.bits) == 1, cfg.delta_p)
    return decide(s1, s0, p1_hypotheses(cfg.delta_p))


# -- Protocol 2 ------------------------------------------------------------

def p2_observable(message: Message):
    return A_PLUS if Message(message) is Message.YES else A_MINUS


def p2_alice_encode(n: int, cfg: PointerConfig, message: Message,
                    rng: RandomStream) -> tuple[SpinRegister, Code]:
    return _weak_encode(n, cfg, p2_observable(message), rng)


def p2_hypotheses(delta_p: float) -> dict:
    mu = yes_center(delta_p)
    return {Decision.YES: (mu, 0.0), Decision.NO: (0.0, mu)}


def alarm_threshold(d: float, n_x: int) -> int:
    expected = d * n_x
    return math.ceil(expected + SECURITY_SIGMAS * max(math.sqrt(expected), 1.0))


def p2_bob_measure(reg: SpinRegister, rng: RandomStream) -> Key:
    """Bob's half of Protocol 2 that needs only the spins: random sx/sy per spin."""
    reg.consume()
    n = len(reg)
    use_x = rng.uniforms(n) < 0.5
    axes = np.where(use_x[:, None], SIGMA_X.n, SIGMA_Y.n)
    outcomes, up, down = measure_strong_batch(reg.up, reg.down, axes, rng)
    reg.up, reg.down = up, down
    return Key.from_outcomes(outcomes, np.where(use_x, "x", "y"))


def p2_security(key: Key, cfg: PointerConfig) -> SecurityReport:
    on_x = key.axes == "x"
    n_x = int(on_x.sum())
    flipped = int((on_x & (key.bits == 0)).sum())
    d = disturbance(cfg.delta_p, SPIN_VARIANCE)
    threshold = alarm_threshold(d, n_x)
    return SecurityReport(n_x, flipped, d, flipped > threshold, threshold)


def p2_bob_finish(key: Key, code: Code, cfg: PointerConfig) -> tuple[DecodeReport, SecurityReport]:
    """Decode once the code has been released."""
    if len(code) != len(key):
        raise ValueError(f"code has {len(code)} readings but key has {len(key)} bits")
    on_y = key.axes == "y"
    readings = np.asarray(code.readings, float)[on_y]
    s1, s0 = bin_stats(readings, key.bits[on_y] == 1, cfg.delta_p)
    return decide(s1, s0, p2_hypotheses(cfg.delta_p)), p2_security(key, cfg)


def p2_bob_decode(reg: SpinRegister, code: Code, cfg: PointerConfig,
                  rng: RandomStream) -> tuple[DecodeReport, SecurityReport]:
    if len(code) != len(reg):
        raise ValueError(f"code has {len(code)} readings but register has {len(reg)} spins")
    key = p2_bob_measure(reg, rng)
    return p2_bob_finish(key, code, cfg)
