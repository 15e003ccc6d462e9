import json

import pytest

from polyopt.cli import main
from polyopt.pop import instance_to_dict, read_instance, write_instance
from polyopt.gallery import gallery_instance


@pytest.fixture
def quad_file(tmp_path):
    path = tmp_path / "quad.json"
    write_instance(gallery_instance("quadratic-ball"), path)
    return str(path)


def run_cli(*argv):
    return main(list(argv))


class TestGalleryCommand:
    def test_list(self, capsys):
        assert run_cli("gallery") == 0
        out = capsys.readouterr().out
        assert "motzkin-ball" in out

    def test_emit_and_reparse_idempotent(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        assert run_cli("gallery", "motzkin-ball", "--out", str(path)) == 0
        inst = read_instance(path)
        again = tmp_path / "m2.json"
        write_instance(inst, again)
        assert instance_to_dict(read_instance(again)) == instance_to_dict(inst)

    def test_unknown_name(self, capsys):
        with pytest.raises(KeyError):
            run_cli("gallery", "bogus")


class TestSolveCommand:
    def test_solve_json(self, quad_file, capsys):
        assert run_cli("solve", quad_file, "--level", "2", "--json") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["value"] == pytest.approx(-2.0 / 7.0, abs=1e-6)
        assert doc["status"] == "optimal"

    def test_moment_form(self, quad_file, capsys):
        assert run_cli("solve", quad_file, "--form", "moment", "--json") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["value"] == pytest.approx(-2.0 / 7.0, abs=1e-6)

    def test_trace_and_export(self, quad_file, tmp_path, capsys):
        trace = tmp_path / "trace.csv"
        sdp = tmp_path / "prob.sdp"
        assert run_cli("solve", quad_file, "--solver-trace", str(trace),
                       "--export-sdp", str(sdp)) == 0
        assert trace.read_text().startswith("iteration,")
        from polyopt import read_problem

        prob = read_problem(sdp)
        assert prob.nrows > 0

    def test_solver_failure_exit_code(self, quad_file, capsys):
        assert run_cli("solve", quad_file, "--max-iter", "1") == 3

    def test_parse_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli("solve", str(bad)) == 2

    def test_missing_file_exit_code(self, capsys):
        assert run_cli("solve", "/does/not/exist.json") == 2

    def test_ball_flag(self, tmp_path, capsys):
        from polyopt import Polynomial, PopInstance

        path = tmp_path / "lin.json"
        write_instance(PopInstance(f=Polynomial(1, {(1,): 1.0})), path)
        assert run_cli("solve", str(path), "--ball", "1.0", "--json") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["value"] == pytest.approx(-1.0, abs=1e-6)

    def test_level_below_minimum(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        write_instance(gallery_instance("motzkin-ball"), path)
        assert run_cli("solve", str(path), "--level", "1") == 2


class TestHierarchyCommand:
    def test_run_with_artifacts(self, quad_file, tmp_path, capsys):
        csv = tmp_path / "levels.csv"
        certs = tmp_path / "certs"
        certs.mkdir()
        code = run_cli("hierarchy", quad_file, "--max-level", "3",
                       "--csv", str(csv), "--cert-dir", str(certs), "--json")
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["stop_reason"] == "flat"
        assert csv.read_text().startswith("level,value,")
        written = sorted(certs.glob("certificate_k*.json"))
        assert written
        # every emitted certificate re-verifies from disk
        for path in written:
            assert run_cli("verify", str(path)) == 0


class TestCheckLocalCommand:
    def test_boundary_minimizer_all_true(self, tmp_path, capsys):
        import math

        path = tmp_path / "lin.json"
        write_instance(gallery_instance("linear-ball"), path)
        s = math.sqrt(5.0)
        code = run_cli("check-local", str(path),
                       f"--point={-1.0 / s},{-2.0 / s}", "--json")
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["cqc"] is True and doc["scc"] is True
        assert doc["sonc"] is True and doc["sosc"] is True
        assert doc["kkt_point"] is True

    def test_non_kkt_point(self, quad_file, capsys):
        assert run_cli("check-local", quad_file, "--point", "0.9,0") == 0
        out = capsys.readouterr().out
        assert "not a KKT point" in out

    def test_motzkin_origin_sosc_false(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        write_instance(gallery_instance("motzkin-ball"), path)
        assert run_cli("check-local", str(path), "--point", "0,0,0", "--json") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["sosc"] is False
        assert doc["sonc"] is True

    def test_infeasible_point(self, quad_file, capsys):
        assert run_cli("check-local", quad_file, "--point", "5,5") == 2

    def test_bad_point(self, quad_file, capsys):
        assert run_cli("check-local", quad_file, "--point", "abc") == 2


class TestCertifyVerify:
    def test_certify_then_verify(self, quad_file, tmp_path, capsys):
        cert = tmp_path / "cert.json"
        assert run_cli("certify", quad_file, "--level", "2", "--out", str(cert)) == 0
        assert run_cli("verify", str(cert)) == 0
        assert run_cli("verify", str(cert), "--instance", quad_file) == 0

    def test_tampered_certificate_fails(self, quad_file, tmp_path, capsys):
        cert = tmp_path / "cert.json"
        assert run_cli("certify", quad_file, "--out", str(cert)) == 0
        doc = json.loads(cert.read_text())
        doc["sigma"][0]["gram"][0][0] += 0.25
        cert.write_text(json.dumps(doc))
        assert run_cli("verify", str(cert)) == 4

    def test_verify_bad_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert run_cli("verify", str(bad)) == 2


class TestEnsembleCommand:
    def test_zero_count(self, capsys):
        assert run_cli("random-ensemble", "--count", "0") == 0
        assert "count=0" in capsys.readouterr().out

    def test_seed_repeat_identical_table(self, capsys):
        assert run_cli("random-ensemble", "--count", "3", "--seed", "5") == 0
        first = capsys.readouterr().out
        assert run_cli("random-ensemble", "--count", "3", "--seed", "5") == 0
        second = capsys.readouterr().out
        assert first == second

    def test_json_output(self, capsys):
        assert run_cli("random-ensemble", "--count", "2", "--seed", "9", "--json") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["count"] == 2
        assert "fractions" in doc


class TestConsoleScript:
    def test_entry_point_installed(self):
        import shutil
        import subprocess

        exe = shutil.which("polyopt")
        if exe is None:
            pytest.skip("console script not on PATH")
        out = subprocess.run([exe, "--version"], capture_output=True, text=True)
        assert out.returncode == 0
        assert "polyopt" in out.stdout
