import json
import math

import pytest

from weakcomm import cli
from weakcomm.errors import ConfigError
from weakcomm.harness import (
    SWEEP_COLUMNS, RunConfig, dumps, loads, rows_to_csv, run, run_many, sweep,
)
from weakcomm.weak import disturbance, invert_disturbance


def test_config_validation():
    RunConfig().validate()
    bad = [
        dict(protocol=3), dict(n=1), dict(delta_p=0.0), dict(message="maybe"), dict(seed=-1),
        dict(trials=0), dict(eve="mallory"), dict(protocol=2, eve="frequency"),
        dict(protocol=1, eve="intercept"), dict(protocol=1, eve="weak", eve_delta_p=1.0),
        dict(protocol=2, eve="weak"), dict(eve_axis="w"),
    ]
    for kw in bad:
        with pytest.raises(ConfigError):
            RunConfig(**kw).validate()
    RunConfig(protocol=1, eve="weak", eve_delta_p=1.0, timerev=True).validate()


def test_from_dict_rejects_unknown():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"n": 10, "colour": "red"})


def test_protocol1_transcript_shape():
    tr = run(RunConfig(protocol=1, n=200, seed=1))
    assert tr.events == ["alice_encode", "handover", "bob_respond", "key_broadcast",
                         "alice_decode"]
    assert len(tr.code) == 200 and len(tr.key["bits"]) == 200
    assert tr.security is None and tr.attack is None
    assert tr.disturbance == disturbance(5.0, 0.5)


def test_protocol2_transcript_order():
    tr = run(RunConfig(protocol=2, n=200, seed=1, eve="intercept", eve_axis="y"))
    assert tr.events == ["alice_encode", "spins_in_transit", "eve_intercept", "bob_measure",
                         "code_release", "bob_decode", "eve_decode"]
    assert set(tr.key) == {"bits", "axes"}


def test_eve_does_not_change_honest_randomness():
    plain = run(RunConfig(protocol=2, n=300, seed=4))
    attacked = run(RunConfig(protocol=2, n=300, seed=4, eve="weak", eve_delta_p=50.0))
    assert plain.code == attacked.code
    assert plain.key["axes"] == attacked.key["axes"]


def test_transcript_byte_identical_and_round_trip():
    cfg = RunConfig(protocol=2, n=500, seed=77, eve="weak", eve_delta_p=3.0,
                    eve_code_access=True)
    a, b = dumps(run(cfg)), dumps(run(cfg))
    assert a == b
    assert dumps(loads(a)) == a


def test_float_format_round_trips():
    for x in [0.1, 1.0, 1e-300, 2.0 ** 60, -0.0, math.pi]:
        text = dumps({"x": x})
        assert loads(text)["x"] == x
        assert dumps(loads(text)) == text


def test_run_many_summary():
    out = run_many(RunConfig(protocol=1, n=2000, trials=20, seed=3, eve="frequency"))
    assert out["summary"]["trials"] == 20
    assert len(out["runs"]) == 20
    assert 0.0 <= out["summary"]["eve_accuracy"] <= 1.0


def test_timerev_weak_attack_on_protocol1():
    tr = run(RunConfig(protocol=1, n=500, seed=2, eve="weak", eve_delta_p=2.0, timerev=True))
    assert "eve_weak_transit" in tr.events
    assert tr.attack["eve_data"]["strategy"] == "key_binning"


def test_sweep_rows_and_csv():
    rows = sweep([0.005], [200, 400], trials=4, base_seed=1)
    assert [r["n"] for r in rows] == [200, 400]
    assert rows[0]["delta_p"] == invert_disturbance(0.005)
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    assert rows == sweep([0.005], [200, 400], trials=4, base_seed=1)
    with pytest.raises(ConfigError):
        sweep([], [10], 1, 0)
    with pytest.raises(ConfigError):
        sweep([0.01], [10], 0, 0)


# -- command line ----------------------------------------------------------------

def test_parse_axis():
    assert cli.parse_axis("x") == (1.0, 0.0, 0.0)
    assert cli.parse_axis("-z") == (-0.0, -0.0, -1.0)
    assert cli.parse_axis("a")[0] == pytest.approx(1 / math.sqrt(2))
    assert cli.parse_axis("0,3,4") == pytest.approx((0.0, 0.6, 0.8))
    with pytest.raises(ConfigError):
        cli.parse_axis("q")
    with pytest.raises(ConfigError):
        cli.parse_axis("0,0,0")


def test_cli_run_writes_json(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert cli.main(["run", "--protocol", "1", "--n", "100", "--seed", "5",
                     "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["n"] == 100 and doc["config"]["seed"] == 5


def test_cli_precedence(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"n": 50, "seed": 9, "message": "no"}))
    assert cli.main(["run", "--config", str(conf), "--n", "60"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["n"] == 60
    assert doc["config"]["seed"] == 9
    assert doc["config"]["message"] == "no"
    assert doc["config"]["protocol"] == 1


def test_cli_d_flag(capsys):
    assert cli.main(["run", "--n", "20", "--d", "0.01"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["disturbance"] == pytest.approx(0.01, rel=1e-12)


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "--protocol", "2", "--eve", "frequency"]) == 2
    assert cli.main(["run", "--n", "1"]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["oracle", "--d", "0.9"]) == 2


def test_cli_protocol_violation_exit(monkeypatch, capsys):
    from weakcomm.errors import ProtocolViolation

    def boom(config):
        raise ProtocolViolation("spin measured twice")

    monkeypatch.setattr(cli, "run", boom)
    assert cli.main(["run"]) == 3


def test_cli_oracle(capsys):
    assert cli.main(["oracle", "--pre", "x", "--post", "y", "--obs", "a",
                     "--delta-p", "5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["post_selection"]["plus"]["weak_value_re"] == pytest.approx(math.sqrt(2))
    assert doc["disturbance"] == pytest.approx(0.00495033167331127, abs=1e-14)
    assert abs(doc["sum_rule_residual"]) < 1e-12


def test_cli_oracle_orthogonal_post(capsys):
    assert cli.main(["oracle", "--pre", "x", "--post", "x"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["post_selection"]["minus"] is None


def test_cli_sweep(capsys):
    assert cli.main(["sweep", "--d-grid", "0.01", "--n-grid", "100,200", "--trials", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
