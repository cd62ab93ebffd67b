"""
golden/ 中固定的报告：Z6 的谱逐字节比较 JSON 值，其余报告只固定字段集合
"""

import json
from pathlib import Path

import pytest

from app import run
from conftest import CORPUS

GOLDEN = Path(__file__).parent / "golden"


def load_golden(name: str):
    return json.loads((GOLDEN / name).read_text(encoding="utf-8"))


def report(capsys, argv):
    assert run(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_z6_spectrum_matches_golden(capsys):
    assert report(capsys, ["spec", str(CORPUS / "z6-mult.tgs"), "--topology"]) == load_golden("spec-z6-mult.json")


@pytest.mark.parametrize("command, argv", [
    ("verify", ["verify", "z6-mult.tgs"]),
    ("ideals", ["ideals", "chain3.tgs"]),
    ("spec", ["spec", "chain3.tgs"]),
    ("localize", ["localize", "z6-mult.tgs", "--prime", "0,3"]),
    ("sheaf", ["sheaf", "z6-mult.tgs"]),
    ("module", ["module", "homs", "z3-regular.tgm", "z3-regular.tgm"]),
    ("cech", ["cech", "z6-mult.tgs", "--module", "z6-regular.tgm", "--cover", "2,3"]),
    ("tor", ["tor", "z3-regular.tgm", "z3-regular.tgm", "--i", "0"]),
])
def test_report_fields(capsys, command, argv):
    argv = [str(CORPUS / a) if a.endswith((".tgs", ".tgm")) else a for a in argv]
    assert sorted(report(capsys, argv)) == load_golden("report-keys.json")[command]


def test_enumeration_and_catalog_fields(capsys, tmp_path):
    keys = load_golden("report-keys.json")
    assert sorted(report(capsys, ["--catalog", str(tmp_path), "enumerate", "--order", "1"])) == keys["enumerate"]
    assert sorted(report(capsys, ["--catalog", str(tmp_path), "catalog", "query"])) == keys["catalog"]
