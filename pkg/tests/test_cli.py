"""Tests for the command line tool: exit codes, reports, exports."""

import json
import math
import os

import jsonschema
import pytest
from importlib import resources

from kokoflex import designfile
from kokoflex.cli import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_UNCERTIFIED,
    main,
)
from kokoflex.designs import bundled_design


def load_schema():
    text = resources.files("kokoflex").joinpath(
        "report_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def run_check(capsys, path, *extra):
    rc = main(["check", str(path), *extra])
    captured = capsys.readouterr()
    report = json.loads(captured.out) if captured.out else None
    return rc, report, captured.err


class TestCheck:
    def test_flagship_certifies(self, capsys):
        rc, report, _err = run_check(capsys, bundled_design("flagship"))
        assert rc == EXIT_OK
        assert report["certified"] is True
        assert report["summary"] == "elliptic OI, case: all-negative, flexible"
        assert report["kind"] == "mesh"
        assert report["minors"]["ok"] and report["minors"]["max_abs"] < 1e-10
        assert report["existence"]["case"] == 1
        assert report["probe"]["max_closure_residual"] < 1e-8

    @pytest.mark.parametrize("name", ["flagship", "pseudo_planar",
                                      "perturbed", "deltoid_mixed",
                                      "deltoid_published"])
    def test_reports_validate_against_schema(self, capsys, name):
        _rc, report, _err = run_check(capsys, bundled_design(name))
        jsonschema.validate(report, load_schema())

    def test_perturbed_fails_and_names_minor(self, capsys):
        rc, report, err = run_check(capsys, bundled_design("perturbed"))
        assert rc == EXIT_UNCERTIFIED
        assert report["certified"] is False
        # the offsets sit on the vanishing-column branch, so the first
        # three minors stay zero and p23 is the first to break
        assert report["minors"]["first_failing"] == "p23"
        assert "p23" in err

    def test_deltoid_mixed_certifies(self, capsys):
        rc, report, _err = run_check(capsys, bundled_design("deltoid_mixed"))
        assert rc == EXIT_OK
        assert report["minors"]["system"] == "deltoid"
        assert report["classification"] == [
            "elliptic", "deltoid", "antideltoid", "elliptic"]
        assert report["existence"] is None
        assert report["probe"]["max_closure_residual"] < 1e-8

    def test_outer_side_reading_fails(self, capsys):
        rc, report, _err = run_check(capsys,
                                     bundled_design("deltoid_published"))
        assert rc == EXIT_UNCERTIFIED
        assert report["minors"]["ok"] is False
        assert report["probe"] is None

    def test_malformed_json_exits_64(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{ not json")
        rc = main(["check", str(bad)])
        assert rc == EXIT_PARSE
        assert "error:" in capsys.readouterr().err

    def test_structural_error_exits_64(self, tmp_path, capsys):
        doc = designfile.parse_file(bundled_design("flagship"))
        doc["quads"] = doc["quads"][:3]
        bad = tmp_path / "three_quads.json"
        bad.write_text(json.dumps(doc))
        assert main(["check", str(bad)]) == EXIT_PARSE
        capsys.readouterr()

    def test_missing_file_exits_64(self, capsys):
        assert main(["check", "/nonexistent.json"]) == EXIT_PARSE
        capsys.readouterr()

    def test_report_file_option(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        rc = main(["check", bundled_design("flagship"), "--report", str(out)])
        captured = capsys.readouterr()
        assert rc == EXIT_OK
        assert captured.out == ""
        report = json.loads(out.read_text())
        assert report["certified"] is True

    def test_linkage_file_checked_without_embedding(self, tmp_path, capsys):
        doc = designfile.parse_file(bundled_design("flagship"))
        for cp in doc["couplings"]:
            cp.pop("tau")
            cp.pop("zeta")
        del doc["lengths"]
        path = tmp_path / "linkage.json"
        designfile.emit_file(doc, path)
        rc, report, _err = run_check(capsys, path)
        assert rc == EXIT_OK
        assert report["kind"] == "linkage"
        assert report["minors"]["ok"]
        assert report["probe"]["max_corner_deviation"] is None


class TestSynthesize:
    def write(self, tmp_path, params):
        path = tmp_path / "params.json"
        path.write_text(json.dumps(params))
        return str(path)

    def test_direct_seed_matches_bundled(self, tmp_path, capsys):
        params = {"nu": [8, 16, 8, 16],
                  "t": ["sqrt(14)/14", "2*sqrt(14)/7",
                        "-sqrt(14)/14", "-2*sqrt(14)/7"]}
        out = tmp_path / "design.json"
        rc = main(["synthesize", self.write(tmp_path, params),
                   "--out", str(out)])
        capsys.readouterr()
        assert rc == EXIT_OK
        produced = designfile.parse_file(out)
        bundled = designfile.parse_file(bundled_design("flagship"))
        assert produced["quads"] == bundled["quads"]
        assert produced["couplings"] == bundled["couplings"]
        assert produced["lengths"] == bundled["lengths"]

    def test_linear_branch_seed(self, tmp_path, capsys):
        params = {"nu": [8, 16, 8, 16],
                  "t1": "sqrt(14)/14", "t3": "-sqrt(14)/14"}
        out = tmp_path / "design.json"
        assert main(["synthesize", self.write(tmp_path, params),
                     "--out", str(out)]) == EXIT_OK
        capsys.readouterr()
        produced = designfile.parse_file(out)
        bundled = designfile.parse_file(bundled_design("flagship"))
        assert produced["couplings"] == bundled["couplings"]

    def test_cell_seed_produces_certified_design(self, tmp_path, capsys):
        params = {"nu2": 16, "nu4": 16, "t1": 0.25, "t3": -0.2}
        out = tmp_path / "design.json"
        assert main(["synthesize", self.write(tmp_path, params),
                     "--out", str(out)]) == EXIT_OK
        capsys.readouterr()
        rc, report, _err = run_check(capsys, out)
        assert rc == EXIT_OK and report["certified"] is True

    def test_pseudo_planar_seed_splits_at_minus_tau(self, tmp_path, capsys):
        params = {"nu": [8, 16, 16, 8], "t": [0, 0, 0, 0]}
        out = tmp_path / "design.json"
        assert main(["synthesize", self.write(tmp_path, params),
                     "--out", str(out)]) == EXIT_OK
        capsys.readouterr()
        doc = designfile.parse_file(out)
        for cp in doc["couplings"]:
            tau = designfile.evaluate_scalar(cp["tau"])
            zeta = designfile.evaluate_scalar(cp["zeta"])
            assert zeta == pytest.approx(-tau, abs=1e-12)

    def test_stdout_output(self, tmp_path, capsys):
        params = {"nu": [8, 16, 8, 16],
                  "t": ["sqrt(14)/14", "2*sqrt(14)/7",
                        "-sqrt(14)/14", "-2*sqrt(14)/7"]}
        rc = main(["synthesize", self.write(tmp_path, params)])
        captured = capsys.readouterr()
        assert rc == EXIT_OK
        doc = designfile.parse_text(captured.out)
        assert len(doc["quads"]) == 4

    def test_unreal_seed_exits_2(self, tmp_path, capsys):
        params = {"nu": [2, 2, 2, 2], "t": [0.1, 0.1, 0.1, 0.1]}
        rc = main(["synthesize", self.write(tmp_path, params)])
        assert rc == EXIT_UNCERTIFIED
        assert "synthesis failed" in capsys.readouterr().err

    def test_bad_params_exit_64(self, tmp_path, capsys):
        cases = [
            "{ not json",
            json.dumps([1, 2]),
            json.dumps({"nu": [8, 16, 8, 16]}),
            json.dumps({"nu": [8, 16, 8], "t": [0, 0, 0, 0]}),
            json.dumps({"nu": [8, 16, 8, 16], "t": [0, 0, 0, 0],
                        "bogus": 1}),
        ]
        for i, text in enumerate(cases):
            path = tmp_path / f"params{i}.json"
            path.write_text(text)
            assert main(["synthesize", str(path)]) == EXIT_PARSE
            capsys.readouterr()


class TestTrace:
    def test_single_frame_matches_check_probe(self, tmp_path, capsys):
        _rc, report, _err = run_check(capsys, bundled_design("flagship"))
        frame0 = report["probe"]["frame0"]
        csv_path = tmp_path / "one.csv"
        rc = main(["trace", bundled_design("flagship"), "--frames", "1",
                   "--csv", str(csv_path)])
        capsys.readouterr()
        assert rc == EXIT_OK
        header, row = csv_path.read_text().splitlines()
        assert header == ("index,x1,phi1,phi2,phi3,phi4,"
                          "psi1,psi2,psi3,psi4,"
                          "closure_residual,max_corner_deviation")
        cells = row.split(",")
        assert cells[0] == "0"
        assert float(cells[1]) == float(frame0["x1"])
        for k in range(4):
            assert float(cells[2 + k]) == frame0["phi"][k]
            assert float(cells[6 + k]) == frame0["psi"][k]
        assert float(cells[10]) == frame0["closure_residual"]
        assert float(cells[11]) == frame0["max_corner_deviation"]

    def test_obj_export(self, tmp_path, capsys):
        obj_dir = tmp_path / "objs"
        rc = main(["trace", bundled_design("flagship"), "--frames", "5",
                   "--obj", str(obj_dir)])
        capsys.readouterr()
        assert rc == EXIT_OK
        names = sorted(os.listdir(obj_dir))
        assert names == [f"frame_000{i}.obj" for i in range(5)]
        lines = (obj_dir / "frame_0000.obj").read_text().splitlines()
        v_lines = [ln for ln in lines if ln.startswith("v ")]
        f_lines = [ln for ln in lines if ln.startswith("f ")]
        assert len(v_lines) == 12
        # central quad + four side quads + four corner triangles
        assert len(f_lines) == 9
        assert sum(1 for ln in f_lines if len(ln.split()) == 5) == 5
        assert sum(1 for ln in f_lines if len(ln.split()) == 4) == 4
        for ln in f_lines:
            ids = [int(v) for v in ln.split()[1:]]
            assert all(1 <= i <= 12 for i in ids)

    def test_triangulate(self, tmp_path, capsys):
        obj_dir = tmp_path / "tris"
        rc = main(["trace", bundled_design("flagship"), "--frames", "1",
                   "--obj", str(obj_dir), "--triangulate"])
        capsys.readouterr()
        assert rc == EXIT_OK
        lines = (obj_dir / "frame_0000.obj").read_text().splitlines()
        f_lines = [ln for ln in lines if ln.startswith("f ")]
        assert len(f_lines) == 14
        assert all(len(ln.split()) == 4 for ln in f_lines)

    def test_deterministic_export(self, tmp_path, capsys):
        texts = []
        for sub in ("a", "b"):
            obj_dir = tmp_path / sub
            csv_path = tmp_path / f"{sub}.csv"
            main(["trace", bundled_design("flagship"), "--frames", "3",
                  "--obj", str(obj_dir), "--csv", str(csv_path)])
            capsys.readouterr()
            blob = csv_path.read_text()
            for name in sorted(os.listdir(obj_dir)):
                blob += (obj_dir / name).read_text()
            texts.append(blob)
        assert texts[0] == texts[1]

    def test_failing_design_writes_nothing(self, tmp_path, capsys):
        obj_dir = tmp_path / "objs"
        csv_path = tmp_path / "out.csv"
        rc = main(["trace", bundled_design("perturbed"),
                   "--obj", str(obj_dir), "--csv", str(csv_path)])
        err = capsys.readouterr().err
        assert rc == EXIT_UNCERTIFIED
        assert not obj_dir.exists() and not csv_path.exists()
        assert "trace failed" in err
        assert "existence" in err

    def test_zero_frames_rejected(self, capsys):
        rc = main(["trace", bundled_design("flagship"), "--frames", "0"])
        assert rc == EXIT_UNCERTIFIED
        capsys.readouterr()

    def test_linkage_design_rejected(self, tmp_path, capsys):
        doc = designfile.parse_file(bundled_design("flagship"))
        for cp in doc["couplings"]:
            cp.pop("tau")
            cp.pop("zeta")
        path = tmp_path / "linkage.json"
        designfile.emit_file(doc, path)
        rc = main(["trace", str(path)])
        assert rc == EXIT_UNCERTIFIED
        assert "embedding" in capsys.readouterr().err

    def test_malformed_design_exits_64(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("[]")
        assert main(["trace", str(bad)]) == EXIT_PARSE
        capsys.readouterr()
