"""Simulation of weak-measurement messaging between two parties, with
eavesdropper models and closed-form oracles for every sampled quantity."""

from ._kernels import BACKEND, available_backends
from .adversary import (
    AttackOutcome, ScalingReport, eve_frequency_attack, eve_intercept_decode,
    eve_intercept_resend, eve_weak_attack, eve_weak_decode, scaling_experiment,
)
from .errors import ConfigError, ProtocolViolation, WeakValueUndefined
from .harness import RunConfig, Transcript, dumps, loads, run, run_many, sweep
from .protocols import (
    Code, DecodeReport, Decision, Key, Message, SecurityReport, SpinRegister,
    p1_alice_decode, p1_alice_encode, p1_bob_respond, p2_alice_encode, p2_bob_decode,
)
from .spin import (
    A_MINUS, A_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, X_PLUS, QubitState, SpinObservable,
    bloch_state, born_probability, expectation, measure_strong, overlap, variance,
)
from .stats import RandomStream, SampleStats, derive_stream, gaussian, required_n, sample_stats
from .weak import (
    PointerConfig, WeakReading, WeakValueReport, conditional_mean, disturbance, fidelity,
    invert_disturbance, prob_shift, sample_weak_reading, sum_rule_check, weak_value,
)

__version__ = "0.1.0"
