"""Acceptance criteria 1-12, each at its stated tolerance and sample size."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from weakcomm.adversary import eve_accuracy, scaling_experiment
from weakcomm.harness import RunConfig, dumps, run, run_trial
from weakcomm.protocols import Message, p1_alice_encode, p1_bob_respond
from weakcomm.spin import A_PLUS, SIGMA_Y, SIGMA_Z, X_PLUS, SpinObservable, bloch_state, variance
from weakcomm.spin import measure_strong_batch
from weakcomm.stats import derive_stream
from weakcomm.weak import (
    PointerConfig, conditional_mean, disturbance, fidelity, invert_disturbance, sum_rule_check,
    weak_measure_batch, weak_value,
)

from conftest import SQRT2, random_unit

D5 = disturbance(5.0, 0.5)


def _rate(flags) -> float:
    flags = list(flags)
    return sum(flags) / len(flags)


def test_criterion_01_weak_value_table(verdict):
    y_plus, y_minus = SIGMA_Y.eigenstate(1), SIGMA_Y.eigenstate(-1)
    errs = [
        abs(weak_value(A_PLUS, X_PLUS, y_plus) - SQRT2),
        abs(weak_value(A_PLUS, X_PLUS, y_minus)),
        abs(weak_value(A_PLUS, X_PLUS, SIGMA_Z.eigenstate(1)).real - 1 / SQRT2),
        abs(weak_value(A_PLUS, X_PLUS, SIGMA_Z.eigenstate(-1)).real - 1 / SQRT2),
    ]
    verdict(1, "weak-value table", max(errs) <= 1e-12, f"max error {max(errs):.2e}")


def test_criterion_02_disturbance_consistency(verdict):
    gen = np.random.default_rng(202)
    worst_exact = 0.0
    for _ in range(200):
        pre = bloch_state(random_unit(gen))
        obs = SpinObservable(random_unit(gen))
        dp = float(gen.uniform(0.2, 50.0))
        d = disturbance(dp, variance(obs, pre))
        worst_exact = max(worst_exact, abs(1 - fidelity(pre, obs, PointerConfig(dp)) - d))
    widths = np.concatenate([[3.0], np.linspace(3.0, 100.0, 400)])
    rel = [abs(1 / (8 * dp ** 2) - disturbance(dp, 0.5)) / disturbance(dp, 0.5) for dp in widths]
    worst_dp = float(widths[int(np.argmax(rel))])
    ok = worst_exact <= 1e-12 and max(rel) <= 0.02
    verdict(2, "disturbance consistency", ok,
            f"|1-F-D| max {worst_exact:.1e} (tol 1e-12); 1/(8dp^2) rel. error max "
            f"{max(rel):.4f} at dp={worst_dp:g} (tol 0.02)")


def test_criterion_03_conditional_mean_vs_monte_carlo(verdict):
    t0 = time.perf_counter()
    n = 100_000
    worst = 0.0
    details = []
    post_axes = {"y": SIGMA_Y, "z": SIGMA_Z, "a": A_PLUS}
    for i, dp in enumerate((2.0, 5.0, 10.0)):
        cfg = PointerConfig(dp)
        for j, (name, axis) in enumerate(post_axes.items()):
            rng = derive_stream(303, 10 * i + j)
            p, up, down = weak_measure_batch(np.full(n, X_PLUS.amplitude_up),
                                             np.full(n, X_PLUS.amplitude_down), A_PLUS, cfg, rng)
            outcomes, _, _ = measure_strong_batch(up, down, axis, rng)
            for k in (1, -1):
                sel = outcomes == k
                n_bin = int(sel.sum())
                want = conditional_mean(A_PLUS, X_PLUS, axis.eigenstate(k), cfg).cond_mean
                z = abs(p[sel].mean() - want) / (dp / math.sqrt(n_bin))
                worst = max(worst, z)
                details.append(z)
    elapsed = time.perf_counter() - t0
    ok = worst <= 4.0 and elapsed <= 60
    verdict(3, "conditional mean vs Monte Carlo", ok,
            f"18 bins, worst |dev| = {worst:.2f} x dp/sqrt(N_bin) (tol 4); {elapsed:.1f} s")


def test_criterion_04_sum_rule(verdict):
    gen = np.random.default_rng(404)
    worst = max(abs(sum_rule_check(A_PLUS, X_PLUS, SpinObservable(random_unit(gen))))
                for _ in range(100))
    verdict(4, "sum rule", worst <= 1e-12, f"max residual {worst:.1e} over 100 axes")


def test_criterion_05_probability_shift(verdict):
    n = 100_000
    cfg = PointerConfig(5.0)
    out = {}
    for msg, target in ((Message.YES, 0.5 + D5), (Message.NO, 0.5)):
        reg, _ = p1_alice_encode(n, cfg, derive_stream(505, 1))
        key = p1_bob_respond(reg, msg, derive_stream(505, 2))
        f = float(np.mean(key.bits))
        se = math.sqrt(target * (1 - target) / n)
        out[msg.value] = (f, target, abs(f - target) / se)
    ok = all(z <= 4 for _, _, z in out.values())
    verdict(5, "probability shift", ok,
            "; ".join(f"{m}: f={f:.5f} vs {t:.5f} ({z:.2f} SE)" for m, (f, t, z) in out.items()))


def _p1_runs(message, trials=500):
    cfg = RunConfig(protocol=1, n=2000, delta_p=5.0, message=message, seed=606)
    return [run_trial(cfg, t).decode["decision"] for t in range(trials)]


def test_criterion_06_protocol1_end_to_end(verdict):
    stats = {}
    for msg in ("yes", "no"):
        decisions = _p1_runs(msg)
        stats[msg] = (_rate(d == msg for d in decisions),
                      _rate(d == "inconclusive" for d in decisions))
    ok = all(acc >= 0.95 and inc <= 0.05 for acc, inc in stats.values())
    verdict(6, "protocol 1 end to end", ok,
            "; ".join(f"{m}: accuracy {a:.3f}, inconclusive {i:.3f}"
                      for m, (a, i) in stats.items()))


def test_criterion_07_eve_window(verdict):
    small = eve_accuracy(2000, 5.0, 1000, seed=707)
    large = eve_accuracy(120_000, 5.0, 1000, seed=708)
    verdict(7, "eve frequency window", small <= 0.65 and large >= 0.95,
            f"N=2000: {small:.3f} (<= 0.65); N=120000: {large:.3f} (>= 0.95)")


@pytest.mark.slow
def test_criterion_08_scaling_law(verdict):
    t0 = time.perf_counter()
    rep = scaling_experiment([0.02, 0.01, 0.005, 0.0025], 0.95, 500, derive_stream(808, 0))
    elapsed = time.perf_counter() - t0
    slope = rep.slope()
    ok = abs(slope - 1.0) <= 0.2 and elapsed <= 600 and not any(rep.saturated_eve)
    rows = ", ".join(f"D={d}: N_A={a} N_E={e}" for d, a, e in
                     zip(rep.d_values, rep.n_alice, rep.n_eve))
    verdict(8, "scaling law", ok, f"slope {slope:.3f} (1.0 +- 0.2); {elapsed:.0f} s; {rows}")


def _p2_runs(trials=500, **kw):
    base = dict(protocol=2, n=4000, delta_p=5.0, seed=909)
    base.update(kw)
    cfg = RunConfig(**base)
    return [run_trial(cfg, t) for t in range(trials)]


def test_criterion_09_protocol2_end_to_end(verdict):
    stats = {}
    for msg in ("yes", "no"):
        trs = _p2_runs(message=msg)
        stats[msg] = (_rate(t.correct() for t in trs), _rate(t.security["alarm"] for t in trs))
    ok = all(acc >= 0.95 and alarm < 0.01 for acc, alarm in stats.values())
    verdict(9, "protocol 2 end to end", ok,
            "; ".join(f"{m}: accuracy {a:.3f}, false alarm {f:.3f}"
                      for m, (a, f) in stats.items()))


def test_criterion_10_intercept_resend(verdict):
    msgs = ["yes" if t % 2 == 0 else "no" for t in range(500)]

    def runs(axis):
        out = []
        for t, msg in enumerate(msgs):
            cfg = RunConfig(protocol=2, n=4000, delta_p=5.0, message=msg, seed=1010,
                            eve="intercept", eve_axis=axis)
            out.append(run_trial(cfg, t))
        return out

    y_runs, x_runs = runs("y"), runs("x")
    alarm_y = _rate(t.security["alarm"] for t in y_runs)
    alarm_x = _rate(t.security["alarm"] for t in x_runs)
    eve_x = _rate(t.attack["guess"] == t.config["message"] for t in x_runs)
    ok = alarm_y >= 0.99 and alarm_x < 0.01 and eve_x <= 0.55
    verdict(10, "intercept-resend", ok,
            f"sy alarm {alarm_y:.3f} (>= 0.99); sx alarm {alarm_x:.3f} (honest < 0.01), "
            f"sx Eve accuracy {eve_x:.3f} (<= 0.55)")


def test_criterion_11_weak_attack_tradeoff(verdict):
    alarms, accs = [], []
    for i, scale in enumerate((0.25, 1.0, 4.0, 16.0)):
        dp_eve = invert_disturbance(scale * D5)
        trs = []
        for t in range(500):
            msg = "yes" if t % 2 == 0 else "no"
            cfg = RunConfig(protocol=2, n=4000, delta_p=5.0, message=msg, seed=1111 + i,
                            eve="weak", eve_delta_p=dp_eve)
            trs.append(run_trial(cfg, t))
        alarms.append(_rate(t.security["alarm"] for t in trs))
        accs.append(_rate(t.attack["guess"] == t.config["message"] for t in trs))
    monotone = all(a <= b for a, b in zip(alarms, alarms[1:]))
    ok = monotone and max(accs) <= 0.55
    detail = "; ".join(f"D_E={s}D: alarm {a:.3f}, Eve {e:.3f}"
                       for s, a, e in zip(("1/4", "1", "4", "16"), alarms, accs))
    verdict(11, "weak-attack tradeoff", ok,
            f"{detail} (alarm nondecreasing: {monotone}; Eve <= 0.55)")


_REPRO_CONFIGS = [
    RunConfig(protocol=1, n=500, seed=1, eve="frequency"),
    RunConfig(protocol=1, n=300, seed=2, message="no", eve="weak", eve_delta_p=3.0,
              timerev=True),
    RunConfig(protocol=2, n=400, seed=3, eve="intercept", eve_axis="y"),
    RunConfig(protocol=2, n=400, seed=4, message="no", eve="weak", eve_delta_p=2.0,
              eve_code_access=True),
]

_CHILD = """
import hashlib, sys
from weakcomm.harness import RunConfig, dumps, run
cfgs = {cfgs!r}
print("\\n".join(hashlib.sha256(dumps(run(RunConfig(**c))).encode()).hexdigest() for c in cfgs))
"""


def test_criterion_12_reproducibility(verdict):
    import hashlib
    from dataclasses import asdict

    same_process = all(dumps(run(c)) == dumps(run(c)) for c in _REPRO_CONFIGS)
    digests = [hashlib.sha256(dumps(run(c)).encode()).hexdigest() for c in _REPRO_CONFIGS]
    code = _CHILD.format(cfgs=[asdict(c) for c in _REPRO_CONFIGS])
    child = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                           check=True).stdout.split()
    ok = same_process and child == digests
    verdict(12, "reproducibility", ok,
            f"{len(_REPRO_CONFIGS)} configs byte-identical within a process: {same_process}; "
            f"in a fresh process: {child == digests}")
