from __future__ import annotations

import json
import os

import pytest

from cli.commands import build_parser, main
from cantor.config import Config, get_config
from cantor.core.analyzer import RunResult, Workbench
from cantor.errors import InvalidParameters

PROFILE = ["--config-profile", "testing"]


def _run(capsys, *argv):
    code = main([*PROFILE, *argv])
    return code, capsys.readouterr()


def test_no_command_prints_help(capsys):
    code, captured = _run(capsys)
    assert code == 2
    assert "usage: cantor" in captured.out


def test_fixratio_json(capsys):
    code, captured = _run(capsys, "fixratio", "--example", "ex45_c", "--d", "2", "--k", "2", "--json")
    assert code == 0
    payload = json.loads(captured.out)
    assert payload["ratio"] == {"num": "1", "den": "16"}
    assert payload["vertex"] == "0001"
    assert payload["depth"] == 9
    assert payload["resolved"] is True
    assert payload["command"] == "fixratio"
    assert payload["schema_version"] == "1"


def test_global_options_before_the_command(capsys):
    code, captured = _run(capsys, "--json", "fixratio", "--example", "ex44_c", "--level", "1")
    assert code == 0
    assert json.loads(captured.out)["ratio"] == {"num": "1", "den": "27"}


def test_domain_error_exit_code(capsys):
    code, captured = _run(capsys, "fixratio", "--example", "odometer", "--vertex", "0", "--depth", "4", "--json")
    assert code == 1
    error = json.loads(captured.out)
    assert error["success"] is False
    assert error["error"]["code"] == "not_fixed"
    assert error["error"]["details"]["image"] == "1"


def test_usage_errors(capsys):
    code, _ = _run(capsys, "orbit", "--example", "odometer", "--index", "{not json", "--vertex", "0")
    assert code == 2
    with pytest.raises(SystemExit):
        main([*PROFILE, "fixratio", "--example", "ex45_c"])


def test_status_honours_overrides(capsys):
    code, captured = _run(capsys, "status", "--level-cap", "5000", "--seed", "11")
    assert code == 0
    payload = json.loads(captured.out)
    assert payload["level_cap"] == 5000
    assert payload["seed"] == 11
    assert payload["problems"] == []


def test_catalog_list_as_a_table(capsys):
    code, captured = _run(capsys, "--format", "table", "catalog", "list")
    assert code == 0
    assert "grigorchuk" in captured.out
    assert "ex45_c" in captured.out


def test_catalog_facts(capsys):
    code, captured = _run(capsys, "catalog", "facts", "grigorchuk")
    assert code == 0
    assert json.loads(captured.out)["all_passed"] is True


def test_schreier_dot_to_file(capsys, tmp_path):
    out = tmp_path / "level2.dot"
    code, captured = _run(
        capsys, "schreier", "--example", "odometer", "--level", "2", "--format", "dot", "--out", str(out),
    )
    assert code == 0
    assert captured.out.startswith("digraph")
    assert out.read_text(encoding="utf-8") == captured.out


def test_dot_needs_a_graph(capsys):
    code, captured = _run(capsys, "--format", "dot", "fixed", "--example", "odometer", "--level", "2")
    assert code == 1
    assert "no graph output" in captured.err


def test_irs_is_reproducible(capsys):
    argv = ["irs", "--example", "odometer", "--n", "20", "--depth", "16", "--radius", "2", "--seed", "7"]
    _, first = _run(capsys, *argv)
    _, second = _run(capsys, *argv)
    payload = json.loads(first.out)
    assert first.out == second.out
    assert len(payload["classes"]) == 1


def test_parser_accepts_every_verb():
    parser = build_parser()
    for verb in ("catalog list", "status", "chains --left {} --right {}"):
        args = parser.parse_args(verb.split())
        assert args.command == verb.split()[0]


def test_workbench_render(config):
    bench = Workbench(config)
    result = RunResult("demo", {"value": 1}, rows=[{"ratio": {"num": "1", "den": "4"}, "word": "ab"}])
    table = bench.render(result, "table")
    assert "1/4" in table
    assert json.loads(bench.render(result, "json")) == {"value": 1}
    with pytest.raises(InvalidParameters):
        bench.render(result, "dot")


def test_workbench_status(config):
    status = Workbench(config).get_configuration_status()
    assert status["level_cap"] == config.LEVEL_CAP
    assert status["atom_threshold"] == "1/2"


def test_workbench_rejects_bad_configuration(config):
    config.LEVEL_CAP = 0
    with pytest.raises(InvalidParameters) as info:
        Workbench(config)
    assert "LEVEL_CAP must be positive" in info.value.details["problems"]


def test_catalog_facts_for_the_dihedral_group(capsys):
    code, captured = _run(capsys, "catalog", "facts", "dihedral", "--json")
    assert code == 0
    payload = json.loads(captured.out)
    assert payload["example"] == "dihedral"
    assert all(fact["passed"] for fact in payload["facts"])


def test_dihedral_level_graph_as_dot(capsys):
    code, captured = _run(capsys, "--format", "dot", "schreier", "--example", "dihedral", "--level", "2")
    assert code == 0
    assert captured.out.count("shape=") == 4
    assert captured.out.count("->") == 8


def test_default_profile_logs_at_info():
    config = get_config("default")
    assert config.LOG_LEVEL == Config.LOG_LEVEL
    if "CANTOR_LOG_LEVEL" not in os.environ:
        assert config.LOG_LEVEL == "INFO"
    assert get_config("testing").LOG_LEVEL == "DEBUG"
