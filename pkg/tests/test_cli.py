"""Command-line interface: outputs, exit codes, determinism."""

import csv
import json

import numpy as np
import pytest

from crnlift import models
from crnlift.cli import main
from crnlift.network import parse_network


@pytest.fixture
def net_dir(tmp_path):
    for name, text in [
        ("schlogl", models.SCHLOGL),
        ("lva", models.LVA),
        ("lva_homogenised", models.LVA_HOMOGENISED),
        ("brusselator", models.BRUSSELATOR),
        ("lotka", models.LOTKA),
    ]:
        (tmp_path / f"{name}.crn").write_text(text)
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


class TestInfo:
    def test_schlogl_report(self, net_dir, capsys):
        code, out = run(capsys, "info", net_dir / "schlogl.crn")
        assert code == 0
        payload = json.loads(out)
        assert payload["rank"] == 1
        assert payload["is_homogeneous"] is False
        assert payload["stoichiometric_matrix"] == [["1", "-1", "1", "-1"]]

    def test_homogenised_lva_report(self, net_dir, capsys):
        code, out = run(capsys, "info", net_dir / "lva_homogenised.crn")
        assert code == 0
        payload = json.loads(out)
        assert payload["rank"] == 2
        assert payload["conservation_laws"] == [["1", "1", "1"]]
        assert payload["is_homogeneous"] is True

    def test_empty_file_is_parse_error(self, tmp_path, capsys):
        empty = tmp_path / "empty.crn"
        empty.write_text("# nothing here\n")
        code, _ = run(capsys, "info", empty)
        assert code == 2

    def test_syntax_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.crn"
        bad.write_text("X + -> Y\n")
        code, _ = run(capsys, "info", bad)
        assert code == 2


class TestLift:
    def test_brusselator_round_trip(self, net_dir, tmp_path, capsys):
        out_dir = tmp_path / "out"
        code, out = run(capsys, "lift", net_dir / "brusselator.crn",
                        "--c-vector=-1,-1", "--name", "Z", "--k", "1,1,3,1",
                        "--out", out_dir)
        assert code == 0
        sidecar = json.loads((out_dir / "brusselator_lift.json").read_text())
        assert sidecar["c"] == ["-1", "-1"]
        assert sidecar["alpha"] == [1.0, 0.0, 0.0, 0.0]
        lifted = parse_network((out_dir / "brusselator_lifted.crn").read_text())
        reference = models.brusselator_homogenised()
        assert lifted.species == reference.species
        assert [(r.reactant, r.product) for r in lifted.reactions] == \
            [(r.reactant, r.product) for r in reference.reactions]
        assert lifted.rate_constants() == (1.0, 1.0, 3.0, 1.0)
        code, out = run(capsys, "info", out_dir / "brusselator_lifted.crn")
        assert json.loads(out)["is_homogeneous"] is True

    def test_zero_dependency_lift(self, net_dir, tmp_path, capsys):
        out_dir = tmp_path / "out"
        code, out = run(capsys, "lift", net_dir / "lotka.crn", "--c-vector=0,0",
                        "--name", "Z", "--k", "1,1,1", "--out", out_dir)
        assert code == 0
        code, out = run(capsys, "info", out_dir / "lotka_lifted.crn")
        payload = json.loads(out)
        assert payload["rank"] == 2
        assert payload["conservation_laws"] == [["0", "0", "1"]]

    def test_invalid_lift_exit_code(self, net_dir, capsys):
        code, _ = run(capsys, "lift", net_dir / "brusselator.crn",
                      "--c-vector=-1,-1", "--name", "X", "--k", "1,1,3,1")
        assert code == 3

    def test_homogenise_command(self, net_dir, capsys):
        code, out = run(capsys, "homogenise", net_dir / "lva.crn", "--species", "Z")
        assert code == 0
        assert parse_network(out) == parse_network(models.LVA_HOMOGENISED)


class TestEquilibria:
    def test_schlogl_three_records(self, net_dir, capsys):
        code, out = run(capsys, "equilibria", net_dir / "schlogl.crn",
                        "--k", "6,11,6,1", "--box", "0.1,5", "--grid", "25")
        assert code == 0
        payload = json.loads(out)
        points = [e["point"][0] for e in payload["equilibria"]]
        assert np.allclose(points, [1.0, 2.0, 3.0], atol=1e-8)
        assert [e["classification"] for e in payload["equilibria"]] == [
            "stable", "unstable", "stable",
        ]

    def test_class_flag_on_conserved_network(self, net_dir, capsys):
        code, out = run(capsys, "equilibria", net_dir / "lva_homogenised.crn",
                        "--k", "1,1,1,0.4", "--class", "5.0", "--box", "0.05,3",
                        "--grid", "12")
        assert code == 0
        payload = json.loads(out)
        assert payload["class_levels"] == [5.0]
        for record in payload["equilibria"]:
            assert sum(record["point"]) == pytest.approx(5.0, abs=1e-8)

    def test_missing_class_flag_is_error(self, net_dir, capsys):
        code, _ = run(capsys, "equilibria", net_dir / "lva_homogenised.crn",
                      "--k", "1,1,1,0.4")
        assert code == 2


class TestSimulateAndOrbit:
    def test_trajectory_csv(self, net_dir, tmp_path, capsys):
        out_dir = tmp_path / "run"
        code, _ = run(capsys, "simulate", net_dir / "brusselator.crn",
                      "--k", "1,1,3,1", "--x0", "2,2", "--t-end", "10",
                      "--out", out_dir)
        assert code == 0
        with (out_dir / "trajectory.csv").open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["t", "x1", "x2"]
        assert float(rows[1][0]) == 0.0
        assert float(rows[-1][0]) == pytest.approx(10.0)
        meta = json.loads((out_dir / "trajectory.json").read_text())
        assert meta["samples"] == len(rows) - 1

    def test_simulate_derives_class_from_x0(self, net_dir, tmp_path, capsys):
        out_dir = tmp_path / "run"
        code, out = run(capsys, "simulate", net_dir / "lva_homogenised.crn",
                        "--k", "1,1,1,0.4", "--x0", "0.5,0.5,2.0", "--t-end", "5",
                        "--out", out_dir)
        assert code == 0
        meta = json.loads((out_dir / "trajectory.json").read_text())
        assert meta["class_levels"] == [3.0]

    def test_orbit_record(self, net_dir, capsys):
        code, out = run(capsys, "orbit", net_dir / "brusselator.crn",
                        "--k", "1,1,3,1", "--x0", "2,2",
                        "--t-transient", "60", "--t-guess", "7")
        assert code == 0
        payload = json.loads(out)["orbit"]
        assert payload["stability"] == "linearly stable"
        assert payload["period"] == pytest.approx(7.157, abs=1e-2)
        mults = sorted(abs(complex(m["re"], m["im"])) for m in payload["floquet"])
        assert 0 < mults[0] < 1

    def test_orbit_failure_exit_code(self, net_dir, capsys):
        # no periodic orbit below the Hopf threshold
        code, _ = run(capsys, "orbit", net_dir / "brusselator.crn",
                      "--k", "1,1,1,1", "--x0", "2,2",
                      "--t-transient", "5", "--t-guess", "5")
        assert code == 1


class TestScans:
    def test_hopf_scan_lva(self, net_dir, capsys):
        code, out = run(capsys, "hopf-scan", net_dir / "lva.crn",
                        "--k", "1,1,1,0.3", "--param-index", "4",
                        "--range", "0.3,0.7", "--samples", "21",
                        "--seed-state", "0.3,0.21")
        assert code == 0
        points = json.loads(out)["points"]
        assert len(points) == 1
        assert points[0]["parameters"]["k4"] == pytest.approx(0.5, abs=1e-9)
        assert points[0]["diagnostics"]["L1"] < 0

    def test_fold_scan_schlogl(self, net_dir, capsys):
        code, out = run(capsys, "fold-scan", net_dir / "schlogl.crn",
                        "--k", "6,11,6,1", "--param-index", "1",
                        "--range", "6,7", "--samples", "21",
                        "--seed-state", "1.0")
        assert code == 0
        points = json.loads(out)["points"]
        assert len(points) == 1
        assert abs(points[0]["diagnostics"]["det"]) < 1e-8


class TestDiagram:
    def test_reference_points_and_files(self, tmp_path, capsys):
        out_dir = tmp_path / "fig"
        code, out = run(capsys, "brusselator-diagram", "--k1", "2", "--k2", "4",
                        "--c", "6", "--grid", "40", "--out", out_dir)
        assert code == 0
        payload = json.loads(out)
        assert payload["BT"] == {"k3": 9.0, "k4": 3.0, "t": 1.0}
        assert payload["GH"][0]["k3"] == pytest.approx(12.0)
        assert payload["GH"][0]["k4"] == pytest.approx(25 / 6)
        with (out_dir / "fig2.csv").open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["k3", "k4", "curve_id"]
        t_rows = [r for r in rows[1:] if r[2] == "T"]
        h_rows = [r for r in rows[1:] if r[2] == "H"]
        assert t_rows and h_rows
        for r in t_rows:
            assert float(r[0]) == pytest.approx(3.0 * float(r[1]), abs=1e-8)
        with (out_dir / "fig1.csv").open() as handle:
            sign_rows = list(csv.reader(handle))
        assert sign_rows[0] == ["a", "b", "sign_P", "on_H_boundary"]
        assert len(sign_rows) > 100


class TestDeterminism:
    def test_equilibria_byte_identical(self, net_dir, tmp_path, capsys):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        args = ["equilibria", str(net_dir / "schlogl.crn"), "--k", "6,11,6,1",
                "--box", "0.1,5", "--grid", "25"]
        code, _ = run(capsys, *args, "--out", out_a)
        assert code == 0
        code, _ = run(capsys, *args, "--out", out_b)
        assert code == 0
        assert (out_a / "equilibria.json").read_bytes() == \
            (out_b / "equilibria.json").read_bytes()

    def test_trajectory_byte_identical(self, net_dir, tmp_path, capsys):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        args = ["simulate", str(net_dir / "brusselator.crn"), "--k", "1,1,3,1",
                "--x0", "2,2", "--t-end", "10"]
        run(capsys, *args, "--out", out_a)
        run(capsys, *args, "--out", out_b)
        assert (out_a / "trajectory.csv").read_bytes() == \
            (out_b / "trajectory.csv").read_bytes()
