"""Command-line entry point: ``weakcomm {run,sweep,scaling,oracle}``.

Exit codes: 0 success, 2 configuration error, 3 protocol violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .adversary import scaling_experiment
from .errors import ConfigError, ProtocolViolation, WeakValueUndefined
from .harness import RunConfig, dumps, rows_to_csv, run, run_many, sweep
from .protocols import SPIN_VARIANCE
from .spin import SpinObservable, bloch_state, expectation, variance
from .stats import derive_stream
from .weak import (PointerConfig, conditional_mean, disturbance, fidelity, invert_disturbance,
                   sum_rule_check)

EXIT_CONFIG = 2
EXIT_PROTOCOL = 3

_NAMED_AXES = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
    "a": (math.sqrt(0.5), math.sqrt(0.5), 0.0),
    "b": (math.sqrt(0.5), -math.sqrt(0.5), 0.0),
}


def parse_axis(text: str) -> tuple[float, float, float]:
    """``x``, ``-y``, ``a`` (= (x+y)/sqrt2), ``b`` (= (x-y)/sqrt2) or ``nx,ny,nz``."""
    t = text.strip().lower()
    sign = 1.0
    if t[:1] in "+-" and t[1:] in _NAMED_AXES:
        sign = -1.0 if t[0] == "-" else 1.0
        t = t[1:]
    if t in _NAMED_AXES:
        return tuple(sign * c for c in _NAMED_AXES[t])
    try:
        vec = np.array([float(c) for c in t.split(",")])
    except ValueError:
        raise ConfigError(f"cannot parse axis {text!r}") from None
    if vec.shape != (3,) or not np.linalg.norm(vec) > 0:
        raise ConfigError(f"axis {text!r} must have three components, not all zero")
    return tuple(vec / np.linalg.norm(vec))


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(v)) for v in text.split(",") if v.strip()]


def _add_width(p: argparse.ArgumentParser, default=argparse.SUPPRESS):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--delta-p", type=float, default=default, help="pointer width")
    g.add_argument("--d", type=float, default=argparse.SUPPRESS,
                   help="target disturbance; converted to the exact pointer width")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakcomm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one protocol cycle (or several trials)")
    S = argparse.SUPPRESS
    r.add_argument("--config", help="JSON file with RunConfig fields")
    r.add_argument("--protocol", type=int, choices=(1, 2), default=S)
    r.add_argument("--n", type=int, default=S)
    _add_width(r)
    r.add_argument("--message", choices=("yes", "no"), default=S)
    r.add_argument("--seed", type=int, default=S)
    r.add_argument("--eve", choices=("none", "frequency", "intercept", "weak"), default=S)
    r.add_argument("--eve-axis", choices=("x", "y", "z"), default=S)
    r.add_argument("--eve-delta-p", type=float, default=S)
    r.add_argument("--eve-code-access", action="store_true", default=S,
                   help="let a weak eavesdropper use the released code")
    r.add_argument("--timerev", action="store_true", default=S,
                   help="allow weak interception of protocol 1 spins")
    r.add_argument("--trials", type=int, default=S)
    r.add_argument("--out", help="write JSON here instead of stdout")

    s = sub.add_parser("sweep", help="accuracy/alarm table over a (D, N) grid, as CSV")
    s.add_argument("--d-grid", type=_floats, required=True)
    s.add_argument("--n-grid", type=_ints, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")

    c = sub.add_parser("scaling", help="minimal N for Alice and Eve versus D")
    c.add_argument("--d-grid", type=_floats, default=[0.02, 0.01, 0.005, 0.0025])
    c.add_argument("--target", type=float, default=0.95)
    c.add_argument("--trials", type=int, default=400)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--out")

    o = sub.add_parser("oracle", help="print closed-form weak-measurement quantities")
    o.add_argument("--pre", default="x", help="pre-selected Bloch direction")
    o.add_argument("--post", default="y", help="post-selection axis (both outcomes reported)")
    o.add_argument("--obs", default="a", help="weakly measured observable axis")
    _add_width(o, default=5.0)
    return parser


def _resolve_width(ns) -> None:
    if getattr(ns, "d", None) is not None:
        try:
            ns.delta_p = invert_disturbance(ns.d, SPIN_VARIANCE)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(ns) -> None:
    values = {}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                values.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        if "d" in values:
            values["delta_p"] = invert_disturbance(values.pop("d"), SPIN_VARIANCE)
    _resolve_width(ns)
    for name in ("protocol", "n", "delta_p", "message", "seed", "eve", "eve_axis",
                 "eve_delta_p", "trials", "timerev", "eve_code_access"):
        if hasattr(ns, name):
            values[name] = getattr(ns, name)
    config = RunConfig.from_dict(values).validate()
    t0 = time.perf_counter()
    doc = run(config) if config.trials == 1 else run_many(config)
    print(f"elapsed {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    _emit(dumps(doc), ns.out)


def _cmd_sweep(ns) -> None:
    rows = sweep(ns.d_grid, ns.n_grid, ns.trials, ns.seed)
    _emit(rows_to_csv(rows), ns.out)


def _cmd_scaling(ns) -> None:
    try:
        report = scaling_experiment(ns.d_grid, ns.target, ns.trials, derive_stream(ns.seed, 0),
                                    workers=ns.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [{"d": d, "n_alice": a, "n_eve": e, "ratio": r, "saturated_alice": sa,
             "saturated_eve": se}
            for d, a, e, r, sa, se in zip(report.d_values, report.n_alice, report.n_eve,
                                          report.ratios, report.saturated_alice,
                                          report.saturated_eve)]
    _emit(dumps({"target": ns.target, "trials": ns.trials, "rows": rows,
                 "slope": report.slope() if len(rows) > 1 else None}), ns.out)


def _cmd_oracle(ns) -> None:
    _resolve_width(ns)
    cfg = PointerConfig(ns.delta_p)
    pre = bloch_state(parse_axis(ns.pre))
    obs = SpinObservable(parse_axis(ns.obs))
    post_axis = SpinObservable(parse_axis(ns.post))
    var = variance(obs, pre)
    out = {
        "delta_p": cfg.delta_p,
        "expectation": expectation(obs, pre),
        "variance": var,
        "disturbance": disturbance(cfg.delta_p, var),
        "fidelity": fidelity(pre, obs, cfg),
        "post_selection": {},
    }
    for outcome, label in ((1, "plus"), (-1, "minus")):
        try:
            rep = conditional_mean(obs, pre, post_axis.eigenstate(outcome), cfg)
        except WeakValueUndefined:
            out["post_selection"][label] = None
            continue
        out["post_selection"][label] = {
            "weak_value_re": rep.a_w.real, "weak_value_im": rep.a_w.imag,
            "prob_unperturbed": rep.prob_unperturbed, "prob_perturbed": rep.prob_perturbed,
            "rel_shift": rep.rel_shift, "cond_mean": rep.cond_mean,
        }
    try:
        out["sum_rule_residual"] = sum_rule_check(obs, pre, post_axis)
    except WeakValueUndefined:
        out["sum_rule_residual"] = None
    sys.stdout.write(dumps(out))


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "scaling": _cmd_scaling,
               "oracle": _cmd_oracle}[ns.command]
    try:
        handler(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolViolation as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
