from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from vorcdf import __version__, cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    lines = text.split("\r\n")
    meta = {}
    body = []
    for line in lines:
        if line.startswith("# "):
            key, value = line[2:].split(": ", 1)
            meta[key] = json.loads(value)
        elif line:
            body.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return meta, rows


class TestParsers:
    def test_ranges(self):
        assert cli.parse_range("3:7") == [3, 4, 5, 6, 7]
        assert cli.parse_range("2:10:4") == [2, 6, 10]
        assert cli.parse_range("5,1,9") == [5, 1, 9]

    def test_floats_and_radii(self):
        assert cli.parse_floats(["1/4", "0.5"]) == [0.25, 0.5]
        assert cli.parse_radii("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert cli.parse_radii("0.1,0.2") == [0.1, 0.2]

    @pytest.mark.parametrize("argv", [["nsm-table", "--n", "a"], ["awgn-pe", "--sigma2", "-1"], ["bsc-pe", "--p", "0.6"]])
    def test_validation_exit(self, capsys, argv):
        code, _, err = run_cli(capsys, *argv)
        assert code == 2 and "invalid input" in err


class TestNsmTable:
    def test_rows_and_empty_cells(self, capsys):
        code, out, _ = run_cli(capsys, "nsm-table", "--n", "1,2,8,13,40")
        assert code == 0
        meta, rows = parse_csv(out)
        assert meta["tool"] == "vorcdf" and meta["version"] == __version__
        assert meta["config"]["n"] == [1, 2, 8, 13, 40]
        by_n = {int(r["n"]): r for r in rows}
        assert by_n[2]["nsm_upper"] == ""
        assert "divergent" in by_n[2]["notes"]
        assert by_n[8]["nsm_upper"] and float(by_n[8]["upper_over_ball"]) <= 1.5
        assert by_n[8]["nsm_zador_lattice"] == "" and by_n[13]["nsm_zador_lattice"]
        assert float(by_n[1]["nsm_ball"]) == pytest.approx(1 / 12)

    def test_monotone_36_48(self, capsys):
        _, out, _ = run_cli(capsys, "nsm-table", "--n-range", "36:48")
        vals = [float(r["nsm_upper"]) for r in parse_csv(out)[1]]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestAwgn:
    def test_defaults_and_orderings(self, capsys):
        code, out, _ = run_cli(capsys, "awgn-pe", "--n-range", "4:64:4")
        assert code == 0
        meta, rows = parse_csv(out)
        assert meta["y_axis"] == "log"
        assert sorted({float(r["sigma2"]) for r in rows}) == sorted(cli.lattice_bounds.SIGMA2_FIGURE)
        for r in rows:
            assert r["sp_le_new"] == "true" and r["sp_le_mlb"] == "true"

    def test_sphere_packing_falls_at_large_n(self, capsys):
        # at small n the bound still rises; it turns down once n passes about 128
        s2 = min(cli.lattice_bounds.SIGMA2_FIGURE)
        _, out, _ = run_cli(capsys, "awgn-pe", "--n-range", "256:2048:256", "--sigma2", repr(s2))
        sp = [float(r["pe_sphere_packing"]) for r in parse_csv(out)[1]]
        assert all(a > b for a, b in zip(sp, sp[1:]))

    def test_json(self, capsys):
        code, out, _ = run_cli(capsys, "awgn-pe", "--n", "8", "--sigma2", "0.05", "--format", "json")
        doc = json.loads(out)
        assert code == 0 and doc["columns"][:2] == ["n", "sigma2"] and len(doc["rows"]) == 1


class TestBsc:
    def test_defaults(self, capsys):
        code, out, _ = run_cli(capsys, "bsc-pe", "--n-range", "100:200:2", "--p", "0.1")
        assert code == 0
        _, rows = parse_csv(out)
        assert len(rows) == 51
        for r in rows:
            assert int(r["k"]) * 2 == int(r["n"])
            assert r["new_le_rcu"] == "true"
            assert float(r["pe_sp_bsc"]) <= float(r["pe_new_bsc"])

    def test_odd_n_rejected(self, capsys):
        code, _, err = run_cli(capsys, "bsc-pe", "--n", "3")
        assert code == 2


class TestSimulate:
    def test_z4_and_rerun_bytes(self, capsys, tmp_path):
        argv = ["simulate-lattice", "--lattice", "Z4", "--radii", "0,0.5,1.0", "--samples", "20000", "--seed", "5"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(argv + ["--out", str(a)]) == 0
        text_a = a.read_bytes()
        assert cli.main(argv + ["--out", str(a), "--workers", "2"]) == 0
        # only the echoed worker count differs
        assert text_a.replace(b'"workers": 1', b'"workers": 2') == a.read_bytes()
        assert cli.main(argv + ["--out", str(b)]) == 0
        assert b.read_bytes() == text_a.replace(b"a.csv", b"b.csv")
        assert cli.main(argv + ["--out", str(a)]) == 0
        assert a.read_bytes() == text_a
        meta, rows = parse_csv(text_a.decode())
        assert float(rows[-1]["g_mc"]) == 1.0
        assert meta["seed"] == 5 and "Z4" in meta["nsm_estimates"]

    def test_fig1b_pair(self, capsys):
        code, out, _ = run_cli(capsys, "simulate-lattice", "--lattice", "Z40", "--lattice", "E8x5", "--samples", "5000", "--radii", "1.6,1.7")
        assert code == 0
        assert {r["lattice"] for r in parse_csv(out)[1]} == {"Z40", "E8x5"}

    def test_unsupported(self, capsys):
        code, _, _ = run_cli(capsys, "simulate-lattice", "--lattice", "A2")
        assert code == 2

    def test_svg_deterministic(self, capsys):
        argv = ["simulate-lattice", "--lattice", "D4", "--samples", "5000", "--format", "svg"]
        _, one, _ = run_cli(capsys, *argv)
        _, two, _ = run_cli(capsys, *argv)
        assert one == two and one.startswith("<svg") and "polyline" in one


class TestCodeOracle:
    def test_pass(self, capsys):
        code, out, _ = run_cli(capsys, "code-oracle", "--n", "6", "--k", "2")
        meta, rows = parse_csv(out)
        assert code == 0 and meta["all_passed"] is True
        assert all(r["status"] == "PASS" for r in rows)
        assert meta["codes_enumerated"] == 651

    def test_count_at_4_2(self, capsys):
        _, out, _ = run_cli(capsys, "code-oracle", "--n", "4", "--k", "2", "--p", "1/3")
        assert parse_csv(out)[0]["codes_enumerated"] == 35

    def test_capacity(self, capsys):
        code, _, err = run_cli(capsys, "code-oracle", "--n", "20", "--k", "10")
        assert code == 3 and "capacity" in err

    def test_no_plot(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["code-oracle", "--n", "4", "--k", "2", "--format", "svg"])
        assert exc.value.code == 2

    def test_failure_exit(self, monkeypatch, capsys):
        real = cli.code_oracle_checks

        def broken(*a, **kw):
            count, checks = real(*a, **kw)
            checks[0].rhs = checks[0].lhs - 1
            return count, checks

        monkeypatch.setattr(cli, "code_oracle_checks", broken)
        code, out, _ = run_cli(capsys, "code-oracle", "--n", "4", "--k", "2")
        assert code == 1 and "FAIL" in out


class TestDistortion:
    def test_rows(self, capsys):
        code, out, _ = run_cli(capsys, "distortion", "--n-range", "32:256:32")
        assert code == 0
        meta, rows = parse_csv(out)
        for r in rows:
            assert float(r["d_star"]) <= float(r["dc_upper"])
            assert float(r["delta_gap"]) <= meta["delta_gap_max"]
            assert float(r["d_rate"]) == pytest.approx(0.110028, abs=1e-6)

    def test_rounded_k_noted(self, capsys):
        _, out, _ = run_cli(capsys, "distortion", "--n", "33")
        row = parse_csv(out)[1][0]
        assert row["notes"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vorcdf", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
