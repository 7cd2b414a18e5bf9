import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from weakcomm.harness import dumps, loads
from weakcomm.spin import SpinObservable, bloch_state, born_probability, expectation, variance
from weakcomm.stats import derive_stream, required_n
from weakcomm.weak import (
    PointerConfig, conditional_mean, disturbance, fidelity, invert_disturbance, sum_rule_check,
    weak_measure_batch, weak_value,
)

coord = st.floats(-1.0, 1.0, allow_nan=False)


@st.composite
def unit_vectors(draw):
    v = np.array([draw(coord), draw(coord), draw(coord)])
    norm = np.linalg.norm(v)
    assume(norm > 1e-3)
    return tuple(v / norm)


widths = st.floats(0.2, 50.0)


@given(unit_vectors(), unit_vectors(), widths)
def test_one_minus_fidelity_is_disturbance(pre_dir, obs_dir, dp):
    pre, obs = bloch_state(pre_dir), SpinObservable(obs_dir)
    d = disturbance(dp, variance(obs, pre))
    assert abs((1 - fidelity(pre, obs, PointerConfig(dp))) - d) < 1e-12


@given(unit_vectors(), unit_vectors(), unit_vectors())
def test_sum_rule_residual_zero(pre_dir, obs_dir, post_dir):
    pre, obs, post = bloch_state(pre_dir), SpinObservable(obs_dir), SpinObservable(post_dir)
    assume(abs(np.dot(pre_dir, post_dir)) < 1 - 1e-6)
    assert abs(sum_rule_check(obs, pre, post)) < 1e-12


@given(unit_vectors(), unit_vectors())
def test_born_probabilities_normalized(state_dir, obs_dir):
    s, obs = bloch_state(state_dir), SpinObservable(obs_dir)
    p = born_probability(s, obs, 1)
    assert 0.0 <= p <= 1.0
    assert p + born_probability(s, obs, -1) == 1.0
    assert abs(p - 0.5 * (1 + expectation(obs, s))) < 1e-12


@given(unit_vectors(), unit_vectors(), unit_vectors(), widths)
def test_perturbed_probabilities_sum_to_one(pre_dir, obs_dir, post_dir, dp):
    pre, obs, post_axis = bloch_state(pre_dir), SpinObservable(obs_dir), SpinObservable(post_dir)
    assume(abs(np.dot(pre_dir, post_dir)) < 1 - 1e-6)
    cfg = PointerConfig(dp)
    total = sum(conditional_mean(obs, pre, post_axis.eigenstate(k), cfg).prob_perturbed
                for k in (1, -1))
    assert abs(total - 1.0) < 1e-12


@given(unit_vectors(), unit_vectors(), unit_vectors())
def test_weak_value_real_part_bounds_via_sum_rule(pre_dir, obs_dir, post_dir):
    # with post = pre the weak value reduces to the expectation
    pre, obs = bloch_state(pre_dir), SpinObservable(obs_dir)
    assert abs(weak_value(obs, pre, pre) - expectation(obs, pre)) < 1e-12


@given(st.floats(1e-6, 0.2499))
def test_disturbance_inversion(d):
    assert math.isclose(disturbance(invert_disturbance(d), 0.5), d, rel_tol=1e-10)


@given(unit_vectors(), unit_vectors(), widths, st.integers(0, 2 ** 63))
@settings(max_examples=30)
def test_weak_post_states_normalized(state_dir, obs_dir, dp, seed):
    s = bloch_state(state_dir)
    n = 64
    _, up, down = weak_measure_batch(np.full(n, s.amplitude_up), np.full(n, s.amplitude_down),
                                     SpinObservable(obs_dir), PointerConfig(dp),
                                     derive_stream(seed, 0))
    assert np.allclose(np.abs(up) ** 2 + np.abs(down) ** 2, 1.0, atol=1e-12)


@given(st.floats(0.01, 10), st.floats(0.1, 10), st.floats(0.51, 0.999))
def test_required_n_monotone(sep, sd, target):
    n = required_n(sep, sd, target)
    assert n >= 1
    assert required_n(sep * 2, sd, target) <= n
    assert required_n(sep, sd * 2, target) >= n


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-2 ** 63, 2 ** 63)
    | st.floats(allow_nan=False, allow_infinity=False) | st.text(max_size=8),
    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(max_size=5), inner,
                                                                 max_size=4),
    max_leaves=20,
)


@given(st.dictionaries(st.text(max_size=6), json_values, max_size=5))
def test_serialization_round_trip(doc):
    text = dumps(doc)
    assert dumps(loads(text)) == text
