import csv
import json
import subprocess
import sys

import pytest

from frontspeed.cli import RunConfig, UsageError, config_from_args, parse_reaction, parse_trial, run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_speed_fisher(capsys):
    code, out, _ = call(capsys, "speed", "--reaction", "fisher")
    assert code == 0
    assert float(out.split("c0 ")[1].split()[0]) == pytest.approx(2.0, abs=1e-3)


def test_bound_golden(capsys):
    code, out, _ = call(capsys, "bound", "--reaction", "fisher", "--principle", "VP2",
                        "--trial", "g=1-u")
    assert code == 0
    assert "value 1.06666666667" in out


def test_unknown_reaction(capsys):
    code, _, err = call(capsys, "speed", "--reaction", "nosuch")
    assert code == 2 and "nosuch" in err


@pytest.mark.parametrize("argv", [
    [],
    ["launch", "--reaction", "fisher"],
    ["speed"],
    ["bound", "--reaction", "fisher", "--principle", "VP2", "--trial", "g=sin(u)"],
    ["bound", "--reaction", "fisher", "--principle", "VP1", "--trial", "g=1-u"],
    ["speed", "--reaction", "fisher", "--c-tol", "1e-12"],
])
def test_usage_errors(capsys, argv):
    assert call(capsys, *argv)[0] == 2


def test_computational_failure_exit_code(capsys):
    code, _, err = call(capsys, "bound", "--reaction", "fisher", "--principle", "VP2",
                        "--trial", "power_g(1.5)")
    assert code == 1 and "failure" in err


def test_json_output_is_stable(capsys):
    argv = ["bound", "--reaction", "hadeler_rothe(nu=4)", "--principle", "VP4",
            "--trial", "g=((1-u)/u)^1.5", "--json"]
    first = call(capsys, *argv)[1]
    second = call(capsys, *argv)[1]
    assert first == second
    rec = json.loads(first)
    assert rec["command"] == "bound" and rec["value"] == pytest.approx(3 / 2 ** 0.5, rel=1e-9)


def test_speed_csv_outputs(tmp_path, capsys):
    up, zu = tmp_path / "up.csv", tmp_path / "zu.csv"
    code, _, _ = call(capsys, "speed", "--reaction", "bistable_cubic(a=0.3)", "--out", str(up),
                      "--profile-out", str(zu))
    assert code == 0
    assert next(csv.reader(open(up))) == ["u", "p"]
    assert next(csv.reader(open(zu))) == ["z", "u", "uz"]


def test_verify_writes_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, text, _ = call(capsys, "verify", "--reaction", "bistable_cubic(a=0.3)", "--out", str(out))
    assert code == 0 and "pass true" in text
    assert json.loads(out.read_text())["pass"] is True


def test_evolve_command(tmp_path, capsys):
    track = tmp_path / "track.csv"
    code, out, _ = call(capsys, "evolve", "--reaction", "fisher", "--L", "80", "--t-end", "30",
                        "--out", str(track), "--json")
    assert code == 0
    assert json.loads(out)["speed"] > 1.5
    assert next(csv.reader(open(track))) == ["t", "x_level"]


def test_config_file_round_trip(tmp_path, capsys):
    cfg = RunConfig(command="bound", reaction={"kind": "builtin", "name": "fisher"},
                    principle="VP4", trial="g=1-u")
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    parsed = config_from_args(["bound", "--config", str(path)])
    assert parsed.to_json() == cfg.to_json()
    assert RunConfig.from_dict(json.loads(cfg.to_json())) == cfg
    code, out, _ = call(capsys, "bound", "--config", str(path))
    assert code == 0 and "value 0.707106781187" in out


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "speed", "reaction": "fisher", "colour": "red"}))
    with pytest.raises(UsageError):
        config_from_args(["speed", "--config", str(path)])


@pytest.mark.parametrize("text,label", [
    ("g=1-u", "g=1-u"),
    ("g=(1-u)^2", "g=(1-u)^2"),
    ("g = ((1-u)/u)^0.5", "g=((1-u)/u)^0.5"),
    ("alpha=u", "alpha=u"),
    ("alpha=u*(1-u)", "alpha=u*(1-u)"),
    ("alpha=1.41421356*u*(1-u)", "alpha=1.41421*u*(1-u)"),
    ("beta_g(0.5,2)", None),
    ("poly_alpha(1, 0.5, -0.3)", None),
])
def test_trial_language(text, label):
    trial = parse_trial(text)
    if label is not None:
        assert trial.label == label


@pytest.mark.parametrize("text", ["g=u", "power_g(1,2)", "beta_g(a,b)", "g=optimal"])
def test_trial_language_rejects(text):
    with pytest.raises(UsageError):
        parse_trial(text)


def test_reaction_forms():
    assert parse_reaction("fisher").label == "fisher"
    assert parse_reaction("hadeler_rothe(nu=4)").params["nu"] == 4.0
    assert parse_reaction('{"kind": "polynomial", "coefficients": [1, -1]}').kind == "polynomial"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "frontspeed", "speed", "--reaction", "fisher"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("reaction fisher")
