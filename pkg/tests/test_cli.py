import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from qvkirwan.cli import main
from qvkirwan.linalg import Field
from qvkirwan.pipeline import (JobSpec, PipelineError, QuiverFileError, Report, emit_report, parse_kv,
                               parse_quiver_file, run_pipeline)

QUIVERS = Path(__file__).resolve().parent.parent / "quivers"
JORDAN = "vertex 1\narrow loop 1 1\ndim 1 2\nframe 1 1\ntheta 1 1\n"


def test_parse_jordan_example():
    qf = parse_quiver_file(JORDAN)
    assert qf.quiver.vertices == ("1",)
    assert qf.quiver.edges() == [("loop", "1", "1")]
    assert qf.v["1"] == 2 and qf.w["1"] == 1 and qf.theta["1"] == 1


def test_parse_defaults_and_comments():
    qf = parse_quiver_file("# two vertices\nvertex a\nvertex b   # trailing\narrow x a b\ndim a 1\nframe a 1\n")
    assert qf.w["b"] == 0 and qf.v["b"] == 0 and qf.theta["b"] == 1


@pytest.mark.parametrize("text,line", [
    ("vertex 1\narrow h 1 2\n", 2),
    ("vertex 1\nvertex 1\n", 2),
    ("vertex 1\nbogus 1\n", 2),
    ("vertex 1\ndim 1 -1\n", 2),
    ("vertex 1\ndim 1 x\n", 2),
    ("vertex 1\ndim 1 1\ndim 1 2\n", 3),
    ("vertex 1\narrow 1 1 1\n", 2),
    ("vertex inf\n", 1),
    ("vertex a:b\n", 1),
    ("\n\nframe 2 1\n", 3),
    ("vertex 1 2\n", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(QuiverFileError) as err:
        parse_quiver_file(text)
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}:")


def test_zero_framing_is_rejected():
    with pytest.raises(PipelineError):
        run_pipeline(JobSpec(parse_quiver_file("vertex 1\ndim 1 1\n")))


def test_kv_round_trip_and_sorting():
    rep = Report()
    rep.put("b.value", Fraction(-3, 4))
    rep.put("a.flag", True)
    rep.check("c.ok", True)
    out = emit_report(rep, "kv")
    keys = [line.split("=", 1)[0] for line in out.decode().splitlines()]
    assert keys == sorted(keys)
    kv = parse_kv(out)
    assert kv["b.value"] == "-3/4" and kv["a.flag"] == "true" and kv["status"] == "pass"
    assert emit_report(Report(), "kv") == b"checks=0\nfailures=0\nstatus=pass\n"
    assert emit_report(Report()).startswith(b"qvkirwan report\n")


def test_pipeline_report_for_jordan():
    job = JobSpec(parse_quiver_file((QUIVERS / "jordan_v1_w1.quiver").read_text()), seed=42, samples=4,
                  field=Field(101))
    rep = run_pipeline(job)
    assert rep.ok
    kv = parse_kv(emit_report(rep, "kv"))
    assert kv["complex.expected_rank"] == "2"
    assert kv["complex.rank_identity_all"] == "pass"
    assert kv["chern.generators"] == "1"


def test_degenerate_theta_is_refused():
    text = "vertex 1\nvertex 2\narrow b 1 2\ndim 1 1\ndim 2 1\nframe 1 1\ntheta 1 1\ntheta 2 -1\n"
    rep = run_pipeline(JobSpec(parse_quiver_file(text), pipelines=("stability",)))
    assert not rep.ok
    assert "nondegen.witness" in rep.entries
    assert "stability.stable" not in rep.entries


def test_window_override_rejected_for_complex():
    job = JobSpec(parse_quiver_file(JORDAN), window=(0, 3), pipelines=("complex-verify",))
    with pytest.raises(PipelineError):
        run_pipeline(job)
    ok = run_pipeline(JobSpec(parse_quiver_file(JORDAN), window=(0, 3), pipelines=("theta-gtr",)))
    assert ok.ok


def test_main_exit_codes(tmp_path, capsysbinary):
    good = tmp_path / "j.quiver"
    good.write_text(JORDAN)
    assert main(["describe", str(good)]) == 0
    out = capsysbinary.readouterr().out
    assert b"expected_rank: 4" in out
    bad = tmp_path / "bad.quiver"
    bad.write_text("vertex 1\narrow h 1 9\n")
    assert main(["describe", str(bad)]) == 2
    assert b"line 2" in capsysbinary.readouterr().err
    degen = tmp_path / "degen.quiver"
    degen.write_text("vertex 1\ndim 1 1\nframe 1 1\ntheta 1 0\n")
    assert main(["nondegen", str(degen)]) == 1


def test_all_is_byte_identical_across_processes(tmp_path):
    cmd = [sys.executable, "-m", "qvkirwan", "all", str(QUIVERS / "a2_v11_w10.quiver"),
           "--field", "fp:101", "--seed", "7", "--samples", "3", "--format", "kv"]
    runs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1] and b"status=pass" in runs[0]
    other = subprocess.run(cmd[:-5] + ["8", "--samples", "3", "--format", "kv"], capture_output=True).stdout
    assert b"status=pass" in other
