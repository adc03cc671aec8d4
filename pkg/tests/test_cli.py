import json
import math
import xml.etree.ElementTree as ET

import pytest

from satfronts.cli import (
    EXIT_DOMAIN,
    EXIT_OK,
    EXIT_REGIME,
    exit_code_for,
    main,
    parse_grid,
)
from satfronts.errors import DomainError, IpofError, QuadratureError


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("SATFRONTS_OUT", str(tmp_path))
    return tmp_path


def _run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_speed_bistable(out, capsys):
    code, stdout, _ = _run(capsys, "speed", "--eps", "0.01")
    assert code == EXIT_OK
    summary = json.loads(stdout)
    assert abs(summary["value"] - 0.0006326) / 0.0006326 < 0.05
    saved = json.loads((out / "speed_bistable_eps0.01.json").read_text())
    assert saved["value"] == summary["value"]


def test_speed_monostable(out, capsys):
    code, stdout, _ = _run(capsys, "speed", "--kind", "monostable", "--eps", "0.01")
    assert code == EXIT_OK
    assert json.loads(stdout)["value"] == pytest.approx(2.0 * math.sqrt(0.0024), rel=1e-12)


def test_steady_writes_jump_metadata(out, capsys):
    code, stdout, _ = _run(capsys, "steady", "--eps", "0.005", "--plot")
    assert code == EXIT_OK
    meta = json.loads((out / "steady_eps0.005.json").read_text())
    assert meta["kind"] == "discontinuous_steady" and len(meta["jump"]) == 2
    assert meta["residual"]["max"] < 1e-4
    assert ET.parse(out / "steady.svg").getroot().tag.endswith("svg")


def test_nonmonotone_bounce(out, capsys):
    code, stdout, _ = _run(capsys, "nonmonotone", "--eps", "0.5", "--c", "0", "--turns", "2")
    assert code == EXIT_OK
    zeros = json.loads(stdout)["zeros"]
    assert zeros[0] == pytest.approx(2.0 / 3.0, abs=1e-9) and zeros[1] == 0.0


def test_inviscid(out, capsys):
    code, _, _ = _run(capsys, "inviscid", "--c", "0.1", "0.2")
    assert code == EXIT_OK
    assert (out / "inviscid_c0.1.csv").exists() and (out / "inviscid_c0.2.csv").exists()


@pytest.mark.parametrize(
    "argv,code,error",
    [
        (["speed", "--eps", "-1"], EXIT_DOMAIN, "DomainError"),
        (["steady", "--eps", "0.02"], EXIT_DOMAIN, "DomainError"),
        (["front", "--eps", "0.1", "--c", "0.3"], EXIT_DOMAIN, "DomainError"),
        (["front", "--eps", "0.05", "--critical", "monostable", "--c", "0.1"], EXIT_REGIME, "RegimeError"),
    ],
)
def test_errors_are_reported_as_json(out, capsys, argv, code, error):
    rc, stdout, stderr = _run(capsys, *argv)
    assert rc == code and stdout == ""
    record = json.loads(stderr)
    assert record["error"] == error and record["exit_code"] == code and record["command"] == argv[0]


def test_usage_error(out, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["speed"])
    assert exc.value.code == 2


def test_exit_code_mapping():
    assert exit_code_for(IpofError("x")) == EXIT_REGIME
    assert exit_code_for(QuadratureError("x")) == 5
    assert exit_code_for(KeyError("x")) == 1


def test_config_overrides_reaction(out, capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"reaction": {"type": "cubic", "a": 0.3}, "kind": "monostable"}))
    code, stdout, _ = _run(capsys, "speed", "--config", str(cfg), "--eps", "0.01")
    assert code == EXIT_OK
    # f'(a) = a (1 - a) = 0.21
    assert json.loads(stdout)["value"] == pytest.approx(2.0 * math.sqrt(0.21 * 0.01), rel=1e-12)
    # an explicit flag beats the config
    code, stdout, _ = _run(capsys, "speed", "--config", str(cfg), "--eps", "0.01", "--a", "0.4")
    assert json.loads(stdout)["value"] == pytest.approx(2.0 * math.sqrt(0.24 * 0.01), rel=1e-12)


def test_bad_config(out, capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    rc, _, stderr = _run(capsys, "speed", "--config", str(cfg), "--eps", "0.01")
    assert rc == EXIT_DOMAIN and json.loads(stderr)["error"] == "ValidationError"


def test_reruns_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["front", "--eps", "0.1", "--out-dir", str(d)]) == EXIT_OK
    capsys.readouterr()
    for name in ("front_bistable_eps0.1.csv", "front_bistable_eps0.1.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_speed_sweep(out, capsys):
    code, stdout, _ = _run(capsys, "sweep", "--eps-grid", "0.1,0.05", "--plot")
    assert code == EXIT_OK
    summary = json.loads(stdout)
    assert summary["c_star"][0] > summary["c_star"][1] > 0.0
    lines = (out / "sweep_speed_cstar.csv").read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1] == "eps,value" and len(lines) == 4
    ET.parse(out / "sweep_speed.svg")


def test_parse_grid():
    assert parse_grid("0.1,0.05") == [0.1, 0.05]
    g = parse_grid("1:0.01:log:3")
    assert g == pytest.approx([1.0, 0.1, 0.01])
    assert len(parse_grid("0:1:lin")) == 12
    for bad in ("1:2", "1:2:cubic", "0:1:log", "1:2:lin:1"):
        with pytest.raises(DomainError):
            parse_grid(bad)
