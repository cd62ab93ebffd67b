"""
命令行：退出码、JSON 报告、--quiet 输出
"""

import json

import pytest

import config
from app import REPORTS, build_parser, report_schema, run
from conftest import CORPUS


def corpus(name: str) -> str:
    return str(CORPUS / name)


def run_json(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    assert code == 0, out
    return json.loads(out)


def run_quiet(capsys, *argv):
    code = run(["--quiet", *argv])
    captured = capsys.readouterr()
    return code, captured.out.strip(), captured.err


class TestExitCodes:
    def test_help(self, capsys):
        assert run(["--help"]) == 0

    def test_no_command(self, capsys):
        assert run([]) == 2

    def test_quiet_and_verbose_conflict(self, capsys):
        assert run(["--quiet", "--verbose", "verify", corpus("z6-mult.tgs")]) == 2

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run_quiet(capsys, "verify", str(tmp_path / "nope.tgs"))
        assert code == 2
        assert "MalformedFile" in err

    def test_malformed_file(self, capsys, tmp_path):
        path = tmp_path / "bad.tgs"
        path.write_text("order 2\ngamma 1\nadd\n0 1\n", encoding="utf-8")
        assert run_quiet(capsys, "verify", str(path))[0] == 2

    def test_computation_failure_is_exit_one(self, capsys):
        code, _, err = run_quiet(capsys, "cech", corpus("z6-mult.tgs"), "--cover", "2")
        assert code == 1
        assert "NotACover" in err

    def test_workers_default_comes_from_config(self, monkeypatch):
        assert build_parser().parse_args(["verify", "x"]).workers == config.DEFAULT_WORKERS
        monkeypatch.setattr(config, "DEFAULT_WORKERS", 2)
        assert build_parser().parse_args(["verify", "x"]).workers == 2

    def test_usage_error_is_exit_two(self, capsys):
        code, _, err = run_quiet(capsys, "localize", corpus("z6-mult.tgs"), "--system", "1,5", "--prime", "0,3")
        assert code == 2
        assert "hint:" in err


class TestCommands:
    def test_verify(self, capsys):
        assert run_json(capsys, "verify", corpus("z6-mult.tgs"))["valid"] is True
        assert run_quiet(capsys, "verify", corpus("z6-add.tgs"))[:2] == (0, "false")

    def test_ideals(self, capsys):
        report = run_json(capsys, "ideals", corpus("z6-mult.tgs"), "--classify")
        assert report["ideal_count"] == 4
        assert [e["elements"] for e in report["ideals"] if e["maximal"]] == [[0, 3], [0, 2, 4]]
        assert len(report["covers"]) == 4

    def test_ideals_without_classify_has_no_flags(self, capsys):
        report = run_json(capsys, "ideals", corpus("z6-mult.tgs"))
        assert report["ideal_count"] == 4
        assert all(e["prime"] is None and e["maximal"] is None for e in report["ideals"])

    def test_spec(self, capsys):
        report = run_json(capsys, "spec", corpus("chain3.tgs"), "--topology")
        assert report["points"] == [[0], [0, 1]]
        assert report["topology"]["is_discrete"] is False

    def test_spec_topology_is_opt_in(self, capsys):
        report = run_json(capsys, "spec", corpus("z6-mult.tgs"))
        assert report["points"] == [[0, 3], [0, 2, 4]]
        assert report["topology"] is None

    @pytest.mark.parametrize("argv, expected", [
        (["--system", "1,2,4,5"], "3"),
        (["--system", "1,3,5"], "2"),
        (["--prime", "0,2,4"], "2"),
    ])
    def test_localize(self, capsys, argv, expected):
        assert run_quiet(capsys, "localize", corpus("z6-mult.tgs"), *argv)[:2] == (0, expected)

    def test_localize_literal_addition_fails(self, capsys):
        code, _, err = run_quiet(capsys, "localize", corpus("z6-mult.tgs"), "--system", "1,2,4,5",
                                 "--addition", "literal")
        assert code == 1
        assert "NotWellDefined" in err

    def test_sheaf(self, capsys):
        report = run_json(capsys, "sheaf", corpus("z6-mult.tgs"), "--module", corpus("z6-regular.tgm"),
                          "--open", "0,1")
        assert report["kind"] == "module"
        assert report["open_sections"] == 6
        assert [s["size"] for s in report["stalks"]] == [3, 2]

    @pytest.mark.parametrize("argv, expected", [
        (["verify", corpus("z3-regular.tgm")], "true"),
        (["homs", corpus("z6-regular.tgm"), corpus("z6-two.tgm")], "2"),
        (["tensor", corpus("z3-regular.tgm"), corpus("z3-regular.tgm")], "3"),
        (["hom-module", corpus("z3-regular.tgm"), corpus("z3-regular.tgm")], "3"),
    ])
    def test_module(self, capsys, argv, expected):
        assert run_quiet(capsys, "module", *argv)[:2] == (0, expected)

    def test_module_bases_must_agree(self, capsys):
        assert run_quiet(capsys, "module", "homs", corpus("z3-regular.tgm"), corpus("z6-regular.tgm"))[0] == 2

    def test_cech(self, capsys):
        report = run_json(capsys, "cech", corpus("z6-mult.tgs"), "--cover", "1,2,3",
                          "--module", corpus("z6-regular.tgm"))
        assert report["describe"] == {"0": "Z6", "1": "0", "2": "0"}
        assert run_quiet(capsys, "cech", corpus("z6-mult.tgs"), "--cover", "2,3")[1] == "0:Z6 1:0"

    def test_cech_module_base_must_match(self, capsys):
        argv = ["cech", corpus("z3-mult.tgs"), "--cover", "1", "--module", corpus("z6-regular.tgm")]
        assert run_quiet(capsys, *argv)[0] == 2

    def test_cech_on_semigroup_sections(self, capsys):
        code, _, err = run_quiet(capsys, "cech", corpus("chain3.tgs"), "--cover", "2")
        assert code == 1
        assert "GroupRequired" in err

    @pytest.mark.parametrize("mode, expected", [("generators", "1"), ("multiplicative", "6")])
    def test_euler(self, capsys, mode, expected):
        argv = ["euler", corpus("z6-mult.tgs"), "--module", corpus("z6-regular.tgm"), "--cover", "1,2,3",
                "--mode", mode]
        assert run_quiet(capsys, *argv)[:2] == (0, expected)

    def test_tor_and_ext(self, capsys):
        left = right = corpus("z3-regular.tgm")
        assert run_quiet(capsys, "tor", left, right, "--i", "0")[:2] == (0, "Z3")
        assert run_quiet(capsys, "tor", left, right)[:2] == (0, "0")
        report = run_json(capsys, "ext", left, right, "--degree", "0")
        assert report["functor"] == "ext"
        assert report["group"]["invariant_factors"] == [3]


class TestEnumerateAndCatalog:
    def test_enumerate_writes_catalog(self, capsys, tmp_path):
        report = run_json(capsys, "--catalog", str(tmp_path), "enumerate", "--order", "2")
        assert report["labeled_count"] == 4
        assert report["class_count"] == 4
        assert report["complete"] is True
        assert report["index"] == "index.json"
        assert len(report["written"]) == 4
        assert all((tmp_path / name).exists() for name in report["written"])
        assert run_quiet(capsys, "--catalog", str(tmp_path), "catalog", "query", "--order", "2")[:2] == (0, "4")

    def test_enumerate_writes_every_labeled_result(self, capsys, tmp_path):
        report = run_json(capsys, "enumerate", "--order", "3", "--out", str(tmp_path))
        assert report["up_to_iso"] is False
        assert len(report["written"]) == report["labeled_count"]
        assert len(list(tmp_path.glob("*.tgs"))) == report["labeled_count"]
        assert report["class_count"] < report["labeled_count"]
        index = json.loads((tmp_path / "index.json").read_text(encoding="utf-8"))
        assert len(index["entries"]) == report["class_count"]

    def test_enumerate_up_to_iso(self, capsys, tmp_path):
        report = run_json(capsys, "enumerate", "--order", "3", "--up-to-iso", "--out", str(tmp_path))
        assert report["up_to_iso"] is True
        assert len(report["written"]) == report["class_count"]
        assert len(list(tmp_path.glob("*.tgs"))) == report["class_count"]

    def test_enumerate_commutative_flag(self, capsys, tmp_path):
        argv = ["enumerate", "--order", "2", "--commutativity", "off", "--commutative", "--out", str(tmp_path)]
        assert run_json(capsys, *argv)["labeled_count"] == 4

    def test_enumerate_stable_order(self, capsys, tmp_path):
        texts = []
        for name in ("first", "second"):
            out = tmp_path / name
            report = run_json(capsys, "--workers", "2", "enumerate", "--order", "2", "--stable-order",
                              "--out", str(out))
            texts.append([(out / f).read_text(encoding="utf-8") for f in report["written"]])
        assert texts[0] == texts[1]

    def test_enumerate_budget(self, capsys, tmp_path):
        report = run_json(capsys, "enumerate", "--order", "3", "--max-results", "1", "--out", str(tmp_path))
        assert report["complete"] is False
        assert report["reason"] == "max_results"

    def test_catalog_add_twice(self, capsys, tmp_path):
        z6 = corpus("z6-mult.tgs")
        assert run_quiet(capsys, "--catalog", str(tmp_path), "catalog", "add", z6, z6)[:2] == (0, "2")
        report = run_json(capsys, "--catalog", str(tmp_path), "catalog", "query")
        assert len(report["entries"]) == 1
        assert report["entries"][0]["order"] == 6

    def test_catalog_query_empty(self, capsys, tmp_path):
        assert run_json(capsys, "--catalog", str(tmp_path / "none"), "catalog", "query") == {"entries": []}

    def test_catalog_flags(self, capsys, tmp_path):
        run_quiet(capsys, "--catalog", str(tmp_path), "catalog", "add", corpus("z3-mult.tgs"), corpus("chain3.tgs"))
        argv = ["--catalog", str(tmp_path), "catalog", "query", "--order", "3", "--flag", "group"]
        assert run_quiet(capsys, *argv)[:2] == (0, "1")

    def test_corrupt_index(self, capsys, tmp_path):
        (tmp_path / "index.json").write_text("{", encoding="utf-8")
        code, _, err = run_quiet(capsys, "--catalog", str(tmp_path), "catalog", "query")
        assert code == 2
        assert "CorruptIndex" in err

    def test_rebuild(self, capsys, tmp_path):
        run_quiet(capsys, "--catalog", str(tmp_path), "catalog", "add", corpus("z3-mult.tgs"))
        (tmp_path / "index.json").write_text("{", encoding="utf-8")
        assert run_quiet(capsys, "--catalog", str(tmp_path), "catalog", "rebuild")[:2] == (0, "1")


class TestSchema:
    @pytest.mark.parametrize("name", sorted(REPORTS))
    def test_every_report_has_a_schema(self, capsys, name):
        report = run_json(capsys, "schema", name)
        assert report["name"] == name
        assert "properties" in report["json_schema"]

    def test_unknown_report(self, capsys):
        assert run(["schema", "nope"]) == 2
        with pytest.raises(KeyError):
            report_schema("nope")
