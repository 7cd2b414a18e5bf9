"""Run orchestration, sweeps and transcript serialization.

Every run is driven by ``(seed, config)``. Trial ``t`` of a run uses the
streams ``derive_stream(seed, t).spawn(k)`` with ``k = 1`` for Alice, ``2``
for Bob and ``3`` for Eve, so adding an eavesdropper never changes the honest
parties' random choices.

Transcripts are JSON with a fixed key order and floats written with 17
significant digits, so parse -> serialize reproduces the same bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Any

import numpy as np

from . import _kernels
from .adversary import (
    eve_frequency_attack, eve_intercept_decode, eve_intercept_resend, eve_weak_decode,
    eve_weak_measure, trial_message,
)
from .errors import ConfigError
from .protocols import (
    SPIN_VARIANCE, Message, p1_alice_decode, p1_alice_encode, p1_bob_respond,
    p2_alice_encode, p2_bob_finish, p2_bob_measure,
)
from .spin import SIGMA_X, SIGMA_Y, SIGMA_Z
from .stats import derive_stream, mix64
from .weak import PointerConfig, disturbance, invert_disturbance

EVE_MODES = ("none", "frequency", "intercept", "weak")
AXES = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass
class RunConfig:
    protocol: int = 1
    n: int = 2000
    delta_p: float = 5.0
    message: str = "yes"
    seed: int = 0
    eve: str = "none"
    eve_axis: str | None = None
    eve_delta_p: float | None = None
    trials: int = 1
    timerev: bool = False
    eve_code_access: bool = False

    def validate(self) -> "RunConfig":
        if self.protocol not in (1, 2):
            raise ConfigError(f"protocol must be 1 or 2, got {self.protocol}")
        if not isinstance(self.n, int) or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n}")
        if not (isinstance(self.delta_p, (int, float)) and self.delta_p > 0
                and math.isfinite(self.delta_p)):
            raise ConfigError(f"delta_p must be positive, got {self.delta_p}")
        if self.message not in ("yes", "no"):
            raise ConfigError(f"message must be 'yes' or 'no', got {self.message!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.eve not in EVE_MODES:
            raise ConfigError(f"eve must be one of {EVE_MODES}, got {self.eve!r}")
        if self.eve == "frequency" and self.protocol != 1:
            raise ConfigError("the key-frequency attack applies to protocol 1 only")
        if self.eve == "intercept" and self.protocol != 2:
            raise ConfigError("intercept-resend applies to protocol 2 only")
        if self.eve == "weak" and self.protocol != 2 and not self.timerev:
            raise ConfigError("weak interception of protocol 1 needs the timerev variant")
        if self.eve_axis is not None and self.eve_axis not in AXES:
            raise ConfigError(f"eve_axis must be one of x, y, z, got {self.eve_axis!r}")
        if self.eve == "weak":
            if self.eve_delta_p is None:
                raise ConfigError("weak interception needs eve_delta_p")
            if not self.eve_delta_p > 0:
                raise ConfigError("eve_delta_p must be positive")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**data)


def _f(x):
    return None if x is None else float(x)


def _decode_dict(report) -> dict:
    return {
        "mean_bin1": _f(report.mean_bin1),
        "mean_bin0": _f(report.mean_bin0),
        "stderr_bin1": _f(report.stderr_bin1),
        "stderr_bin0": _f(report.stderr_bin0),
        "n_bin1": int(report.n_bin1),
        "n_bin0": int(report.n_bin0),
        "decision": report.decision.value,
        "scores": {k: float(v) for k, v in sorted(report.z_scores.items())},
    }


def _attack_dict(outcome) -> dict:
    data = {}
    for k, v in outcome.eve_data.items():
        if isinstance(v, (np.integer,)):
            v = int(v)
        elif isinstance(v, (np.floating,)):
            v = float(v)
        data[k] = v
    return {
        "guess": outcome.guess.value if outcome.guess is not None else None,
        "detected": bool(outcome.detected),
        "eve_data": data,
    }


@dataclass
class Transcript:
    config: dict
    backend: str
    disturbance: float
    events: list
    code: list
    key: dict
    decode: dict
    security: dict | None
    attack: dict | None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def correct(self) -> bool:
        return self.decode["decision"] == self.config["message"]


def run_trial(config: RunConfig, trial: int = 0) -> Transcript:
    """One complete protocol cycle, in protocol order."""
    config.validate()
    base = derive_stream(config.seed, trial)
    alice, bob, eve = base.spawn(1), base.spawn(2), base.spawn(3)
    cfg = PointerConfig(float(config.delta_p))
    msg = Message(config.message)
    d = disturbance(cfg.delta_p, SPIN_VARIANCE)
    events = []
    security = attack = None
    eve_axis = AXES[config.eve_axis or "y"]

    if config.protocol == 1:
        reg, code = p1_alice_encode(config.n, cfg, alice)
        events.append("alice_encode")
        eve_readings = None
        if config.eve == "weak":
            events.append("eve_weak_transit")
            reg, eve_readings = eve_weak_measure(reg, PointerConfig(config.eve_delta_p), eve)
        events.append("handover")
        key = p1_bob_respond(reg, msg, bob)
        events += ["bob_respond", "key_broadcast"]
        if config.eve == "frequency":
            attack = eve_frequency_attack(key, d)
            events.append("eve_key_analysis")
        elif config.eve == "weak":
            attack = eve_weak_decode(eve_readings, PointerConfig(config.eve_delta_p), cfg,
                                     protocol=1, key=key)
            events.append("eve_decode")
        report = p1_alice_decode(code, key, cfg)
        events.append("alice_decode")
        key_dict = {"bits": [int(b) for b in key.bits]}
    else:
        reg, code = p2_alice_encode(config.n, cfg, msg, alice)
        events += ["alice_encode", "spins_in_transit"]
        eve_outcomes = eve_readings = None
        if config.eve == "intercept":
            reg, eve_outcomes = eve_intercept_resend(reg, eve_axis, eve)
            events.append("eve_intercept")
        elif config.eve == "weak":
            reg, eve_readings = eve_weak_measure(reg, PointerConfig(config.eve_delta_p), eve)
            events.append("eve_weak_transit")
        key = p2_bob_measure(reg, bob)
        events += ["bob_measure", "code_release"]
        report, sec = p2_bob_finish(key, code, cfg)
        events.append("bob_decode")
        security = asdict(sec)
        security = {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v)
                    for k, v in security.items()}
        if eve_outcomes is not None:
            attack = eve_intercept_decode(eve_outcomes, code, cfg)
            attack.eve_data["axis"] = config.eve_axis or "y"
            attack.eve_data["n_plus"] = int((eve_outcomes > 0).sum())
        elif eve_readings is not None:
            attack = eve_weak_decode(eve_readings, PointerConfig(config.eve_delta_p), cfg,
                                     protocol=2, code=code if config.eve_code_access else None)
            attack.eve_data["eve_disturbance"] = disturbance(config.eve_delta_p, SPIN_VARIANCE)
        if attack is not None:
            attack.detected = sec.alarm
            events.append("eve_decode")
        key_dict = {"bits": [int(b) for b in key.bits], "axes": [str(a) for a in key.axes]}

    return Transcript(
        config=_config_echo(config),
        backend=_kernels.BACKEND,
        disturbance=d,
        events=events,
        code=[float(p) for p in code.readings],
        key=key_dict,
        decode=_decode_dict(report),
        security=security,
        attack=_attack_dict(attack) if attack is not None else None,
    )


def _config_echo(config: RunConfig) -> dict:
    out = asdict(config)
    out["delta_p"] = float(out["delta_p"])
    if out["eve_delta_p"] is not None:
        out["eve_delta_p"] = float(out["eve_delta_p"])
    return out


def run(config: RunConfig) -> Transcript:
    return run_trial(config, 0)


def run_many(config: RunConfig) -> dict:
    """``config.trials`` runs with derived streams; a compact summary per run."""
    config.validate()
    runs = []
    for t in range(config.trials):
        tr = run_trial(config, t)
        entry = {"trial": t, "decision": tr.decode["decision"], "correct": tr.correct()}
        if tr.security is not None:
            entry["alarm"] = tr.security["alarm"]
            entry["n_x_flipped"] = tr.security["n_x_flipped"]
        if tr.attack is not None:
            entry["eve_guess"] = tr.attack["guess"]
        runs.append(entry)
    summary = {
        "trials": config.trials,
        "accuracy": sum(r["correct"] for r in runs) / config.trials,
        "inconclusive_rate": sum(r["decision"] == "inconclusive" for r in runs) / config.trials,
    }
    if config.protocol == 2:
        summary["alarm_rate"] = sum(r["alarm"] for r in runs) / config.trials
    if config.eve != "none":
        summary["eve_accuracy"] = sum(r.get("eve_guess") == config.message
                                      for r in runs) / config.trials
    return {"config": _config_echo(config), "backend": _kernels.BACKEND,
            "disturbance": disturbance(config.delta_p, SPIN_VARIANCE),
            "summary": summary, "runs": runs}


# -- serialization -------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} cannot be serialized")
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _encode(obj: Any, indent: int, level: int) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if level >= 2:
            return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                                   for k, v in obj.items()) + "}"
        pad = " " * (indent * (level + 1))
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + " " * (indent * level) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON: insertion key order, 17-digit floats."""
    if isinstance(obj, Transcript):
        obj = obj.to_dict()
    return _encode(obj, 2, 0) + "\n"


def loads(text: str):
    return json.loads(text)


# -- sweeps ------------------------------------------------------------------------

SWEEP_COLUMNS = ["d", "delta_p", "n", "trials", "alice_accuracy", "eve_accuracy", "alarm_rate"]


def sweep_cell(d: float, n: int, trials: int, seed: int) -> dict:
    delta_p = invert_disturbance(d, SPIN_VARIANCE)
    cfg = PointerConfig(delta_p)
    d_exact = disturbance(delta_p, SPIN_VARIANCE)
    alice_ok = eve_ok = alarms = 0
    for t in range(trials):
        msg = trial_message(t)
        base = derive_stream(seed, t)
        reg, code = p1_alice_encode(n, cfg, base.spawn(1))
        key = p1_bob_respond(reg, msg, base.spawn(2))
        alice_ok += p1_alice_decode(code, key, cfg).decision.matches(msg)
        guess = eve_frequency_attack(key, d_exact).guess
        eve_ok += guess is not None and guess.matches(msg)
        reg2, code2 = p2_alice_encode(n, cfg, msg, base.spawn(4))
        _, sec = p2_bob_finish(p2_bob_measure(reg2, base.spawn(5)), code2, cfg)
        alarms += sec.alarm
    return {"d": d, "delta_p": delta_p, "n": n, "trials": trials,
            "alice_accuracy": alice_ok / trials, "eve_accuracy": eve_ok / trials,
            "alarm_rate": alarms / trials}


def sweep(d_grid, n_grid, trials: int, base_seed: int) -> list[dict]:
    """Accuracy/alarm table over the (D, N) grid, rows in grid order."""
    d_grid, n_grid = list(d_grid), list(n_grid)
    if not d_grid or not n_grid:
        raise ConfigError("sweep grid must be non-empty")
    if trials < 1:
        raise ConfigError("sweep needs at least one trial per cell")
    rows = []
    for i, d in enumerate(d_grid):
        for j, n in enumerate(n_grid):
            cell_seed = mix64(base_seed ^ mix64((i << 32) | j))
            rows.append(sweep_cell(float(d), int(n), trials, cell_seed))
    return rows


def rows_to_csv(rows: list[dict], columns=SWEEP_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt_float(row[c]) if isinstance(row[c], float) else row[c]
                         for c in columns])
    return buf.getvalue()

