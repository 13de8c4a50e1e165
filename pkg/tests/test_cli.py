# tests/test_cli.py

import json
import logging
import os

import pytest

from main_pcfr import EXIT_DIVERGENCE, EXIT_FAIL, EXIT_OK, EXIT_USAGE, format_real, run
from tests.conftest import corpus_path


def output_of(capsys, *argv):
    code = run([str(a) for a in argv])
    return code, capsys.readouterr()


@pytest.fixture(autouse=True)
def restore_log_level():
    level = logging.getLogger().level
    yield
    logging.getLogger().setLevel(level)


def test_format_real():
    assert format_real(2.0) == "2"
    assert format_real(-0.5) == "-0.5"


def test_eval(capsys):
    code, out = output_of(capsys, "eval", corpus_path("floor"), "--args", "2.5")
    assert code == EXIT_OK
    assert out.out.strip() == "2"
    code, out = output_of(capsys, "eval", corpus_path("relu"), "--args", "-3", "--strategy", "cbv")
    assert out.out.strip() == "0"


def test_eval_divergence_and_domain_errors(capsys, tmp_path):
    loop = tmp_path / "loop.pcfr"
    loop.write_text("(fix f:R -> R. \\n:R. f n) x\n", encoding="utf-8")
    code, out = output_of(capsys, "eval", loop, "--args", "1", "--fuel", "100")
    assert code == EXIT_DIVERGENCE
    assert "fuel" in out.out
    log = tmp_path / "log.pcfr"
    log.write_text("log(x)\n", encoding="utf-8")
    code, out = output_of(capsys, "eval", log, "--args", "0")
    assert code == EXIT_DIVERGENCE
    assert "undefined" in out.out


def test_eval_with_capped_fixpoints(capsys):
    code, out = output_of(capsys, "eval", corpus_path("floor"), "--args", "-4.5", "--fix-cap", "16")
    assert code == EXIT_OK
    assert out.out.strip() == "-5"


def test_usage_and_parse_errors(capsys, tmp_path):
    assert run([]) == EXIT_USAGE
    assert run(["eval"]) == EXIT_USAGE
    broken = tmp_path / "broken.pcfr"
    broken.write_text("<1, 2", encoding="utf-8")
    code, out = output_of(capsys, "eval", broken)
    assert code == EXIT_USAGE
    assert "parse error" in out.err
    code, _ = output_of(capsys, "eval", corpus_path("relu"), "--args", "1", "2")
    assert code == EXIT_USAGE
    code, _ = output_of(capsys, "eval", tmp_path / "missing.pcfr")
    assert code == EXIT_USAGE


def test_help_documents_the_guard_convention(capsys):
    assert run(["--help"]) == EXIT_OK
    help_text = capsys.readouterr().out
    assert "<=" in help_text and "ReLU" in help_text


def test_transform(capsys):
    code, out = output_of(capsys, "transform", corpus_path("relu"), "--mode", "rev", "-n", "1", "--print-type")
    assert code == EXIT_OK
    lines = out.out.strip().splitlines()
    assert lines[-1] == "type: (R * (R -> R))"


def test_grad_warns_when_differences_disagree(capsys, caplog):
    with caplog.at_level(logging.WARNING):
        code, out = output_of(capsys, "grad", corpus_path("sillyid"), "--mode", "rev", "--at", "0")
    assert code == EXIT_OK
    assert out.out.strip() == "0"
    assert any("disagree" in r.message for r in caplog.records)


def test_grad_prints_jacobian_rows(capsys, tmp_path):
    pair = tmp_path / "pair.pcfr"
    pair.write_text("-- args: x y\n<x * y, x + y>\n", encoding="utf-8")
    code, out = output_of(capsys, "grad", pair, "--mode", "fwd", "--at", "2", "5")
    assert code == EXIT_OK
    assert out.out.strip().splitlines() == ["5 2", "1 1"]


def test_check_exit_codes(capsys, tmp_path):
    code, out = output_of(capsys, "check", corpus_path("sillyid"), "--at", "0")
    assert code == EXIT_FAIL
    assert json.loads(out.out)["verdict"] == "Fail"
    code, _ = output_of(capsys, "check", corpus_path("sillyid"), "--at", "0.5")
    assert code == EXIT_OK
    report = tmp_path / "check.json"
    code, _ = output_of(capsys, "check", corpus_path("relu"), "--at", "0", "--json", report)
    assert code == EXIT_OK
    assert json.loads(report.read_text(encoding="utf-8"))["verdict"] == "OutsideDiffDomain"


def test_lab_commands_report_divergence(capsys, tmp_path):
    loop = tmp_path / "loop.pcfr"
    loop.write_text("(fix f:R -> R. \\n:R. f n) x\n", encoding="utf-8")
    code, out = output_of(capsys, "check", loop, "--at", "1", "--fuel", "100")
    assert code == EXIT_DIVERGENCE
    assert json.loads(out.out)["adForward"] is None
    code, out = output_of(capsys, "stability", loop, "--at", "0", "--fuel", "100")
    assert code == EXIT_DIVERGENCE
    assert json.loads(out.out)["kind"] == "Inconclusive"
    code, out = output_of(capsys, "scan", loop, "--box", "-1", "1", "--samples", "5", "--fuel", "100")
    assert code == EXIT_DIVERGENCE
    assert json.loads(out.out)["divergent"] == 5


def test_check_of_an_undefined_point(capsys, tmp_path):
    log = tmp_path / "log.pcfr"
    log.write_text("log(x)\n", encoding="utf-8")
    code, _ = output_of(capsys, "check", log, "--at", "0")
    assert code == EXIT_DIVERGENCE
    code, _ = output_of(capsys, "check", log, "--at", "1")
    assert code == EXIT_OK


def test_scan_writes_reports(capsys, tmp_path):
    json_path, csv_path = tmp_path / "scan.json", tmp_path / "scan.csv"
    code, out = output_of(capsys, "scan", corpus_path("eqproj"), "--box", "-1", "1", "-1", "1",
                          "--samples", "30", "--seed", "42", "--json", json_path, "--csv", csv_path)
    assert code == EXIT_OK
    report = json.loads(out.out)
    assert report["samples"] == 30
    assert report["failFraction"] == 0.0
    assert json.loads(json_path.read_text(encoding="utf-8")) == report
    assert len(csv_path.read_text(encoding="utf-8").strip().splitlines()) == 31
    code, _ = output_of(capsys, "scan", corpus_path("eqproj"), "--box", "-1", "1", "-1")
    assert code == EXIT_USAGE


def test_stability(capsys):
    code, out = output_of(capsys, "stability", corpus_path("relu"), "--at", "0", "--radius", "0.1",
                          "--probes", "32", "--seed", "42")
    assert code == EXIT_OK
    assert json.loads(out.out)["kind"] == "UnstableEmpirical"


def test_trace(capsys):
    code, out = output_of(capsys, "trace", corpus_path("relu"), "--at", "1")
    assert code == EXIT_OK
    assert out.out.strip().splitlines() == ["CondTaken(else, 1.0)", "NormalForm"]


def test_pretrace(capsys):
    code, out = output_of(capsys, "pretrace", corpus_path("sillyid_t2"), corpus_path("sillyid"))
    assert (code, out.out.strip()) == (EXIT_OK, "yes")
    code, out = output_of(capsys, "pretrace", corpus_path("identity"), corpus_path("relu"))
    assert out.out.strip() == "no"
    code, _ = output_of(capsys, "pretrace", corpus_path("relu"), corpus_path("relu"))
    assert code == EXIT_USAGE


def test_corpus_commands(capsys):
    code, out = output_of(capsys, "corpus", "list", "--dir", os.path.dirname(corpus_path("relu")))
    assert code == EXIT_OK
    assert any(line.startswith("floor") for line in out.out.splitlines())
    code, out = output_of(capsys, "corpus", "run", "--dir", os.path.dirname(corpus_path("relu")))
    assert code == EXIT_OK
    assert "== sillyid" in out.out
    assert "-> Fail" in out.out
