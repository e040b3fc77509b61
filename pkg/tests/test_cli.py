import json

import pytest

from src.cli import main, parse_config, summary_line
from src.utils.errors import ConfigError


def test_parse_config_sections():
    text = """
    # weaver run
    command = select-weaver
    seed = 3
    [select-weaver]
    n = 8
    dim = 2
    """
    payload = parse_config(text)
    assert payload == {"command": "select-weaver", "seed": 3, "params": {"n": 8, "dim": 2}}


def test_parse_config_rejects_foreign_section():
    with pytest.raises(ConfigError):
        parse_config("command = select-ks2\n[select-weaver]\nn = 8\n")


def test_parse_config_rejects_unknown_key():
    with pytest.raises(ConfigError):
        parse_config("command = select-ks2\nwindow = 3\n")


def test_summary_line_rounds():
    cert = {"kind": "mcp-maxroot", "summary": {"achieved": 2.00000000000001, "promised": None}}
    assert summary_line(cert) == "mcp-maxroot: achieved=2.0 promised=null"


def test_run_and_reverify(tmp_path, capsys):
    out = tmp_path / "maxroot"
    code = main(["run", "--command", "mcp-maxroot", "--set", "identity=true", "--output", str(out)])
    assert code == 0
    assert "achieved=2.0" in capsys.readouterr().out
    assert (out / "certificate.json").exists()
    assert main(["reverify", str(out)]) == 0
    assert "reverified" in capsys.readouterr().out


def test_reverify_detects_drift(tmp_path, capsys):
    out = tmp_path / "maxroot"
    assert main(["run", "--command", "mcp-maxroot", "--set", "identity=true", "--output", str(out)]) == 0
    path = out / "certificate.json"
    cert = json.loads(path.read_text())
    cert["result"]["maxroot"]["value"] += 1e-3
    path.write_text(json.dumps(cert))
    capsys.readouterr()
    assert main(["reverify", str(path)]) == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["reason"] == "certificate_drift"
    assert err["context"]["field"] == "result.maxroot.value"


def test_reverify_detects_instance_tampering(tmp_path, capsys):
    out = tmp_path / "maxroot"
    assert main(["run", "--command", "mcp-maxroot", "--set", "identity=true", "--output", str(out)]) == 0
    path = out / "certificate.json"
    cert = json.loads(path.read_text())
    cert["instance"]["dim"] = 3
    path.write_text(json.dumps(cert))
    assert main(["reverify", str(path)]) == 1


def test_config_file_run(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("command = binary-tree\nseed = 5\n[binary-tree]\ndim = 2\nn = 16\ndepth = 2\n")
    out = tmp_path / "tree"
    assert main(["run", "--config", str(config), "--output", str(out)]) == 0
    assert (out / "leaves.csv").read_text().startswith("b,size,deviation,bound")
    assert main(["reverify", str(out)]) == 0


def test_invalid_parameter_exits_one(capsys):
    assert main(["run", "--command", "mcp-maxroot", "--set", "dim=0"]) == 1
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["reason"] == "invalid_config"


def test_missing_file_exits_two(tmp_path, capsys):
    assert main(["reverify", str(tmp_path / "absent.json")]) == 2
    assert "io_error" in capsys.readouterr().err
