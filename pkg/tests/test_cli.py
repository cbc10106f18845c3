from __future__ import annotations

import json

import pytest

from spintangle import __version__
from spintangle.cli import main

EMPTY = "label,A_kHz,B_kHz\n"
BAD_ROW = "label,A_kHz,B_kHz\nC1,1,2\nC2,x,4\n"
SMALL = """\
# larmor_kHz=432
# s0=0
# s1=-1
label,A_kHz,B_kHz
C5,-11.346,59.21
C12,20.569,41.51
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestResonances:
    def test_table_and_ordering(self, capsys):
        code = main(["resonances", "--register", "nv27", "--k-min", "1",
                     "--k-max", "2"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].split() == ["label", "k", "t_us"]
        labels = [l.split()[0] for l in lines[1:]]
        assert labels == sorted(labels)
        assert len(lines) == 1 + 27 * 2

    def test_known_value(self, capsys):
        main(["resonances", "--register", "nv27", "--k-min", "3",
              "--k-max", "3"])
        out = capsys.readouterr().out
        row = [l for l in out.splitlines() if l.startswith("C5 ")][0]
        assert float(row.split()[2]) == pytest.approx(11.373, abs=1e-3)

    def test_empty_register_succeeds(self, tmp_path, capsys):
        path = _write(tmp_path, "empty.csv", EMPTY)
        code = main(["resonances", "--register", path,
                     "--larmor-khz", "432", "--s0", "0", "--s1", "-1"])
        assert code == 0
        assert capsys.readouterr().out.strip().splitlines()[0].startswith("label")

    def test_malformed_row_exits_one(self, tmp_path, capsys):
        path = _write(tmp_path, "bad.csv", BAD_ROW)
        code = main(["resonances", "--register", path,
                     "--larmor-khz", "432", "--s0", "0", "--s1", "-1"])
        assert code == 1
        assert ":3:" in capsys.readouterr().err

    def test_unknown_register_exits_one(self, capsys):
        assert main(["resonances", "--register", "nope"]) == 1
        assert "error:" in capsys.readouterr().err


class TestOutputs:
    def test_csv_json_agree_and_are_reproducible(self, tmp_path, capsys):
        csv1 = str(tmp_path / "a.csv")
        js1 = str(tmp_path / "a.json")
        args = ["resonances", "--register", "nv27", "--k-max", "2",
                "--csv", csv1, "--json", js1]
        assert main(args) == 0
        a = open(csv1, "rb").read()
        assert main(args) == 0
        b = open(csv1, "rb").read()
        assert a == b
        payload = json.loads(open(js1).read())
        assert payload["provenance"]["version"] == __version__
        assert "constants" in payload["provenance"]
        rows = [l for l in open(csv1).read().splitlines()
                if not l.startswith("#")]
        header = rows[0].split(",")
        assert header == ["label", "k", "t_us"]
        for csv_row, rec in zip(rows[1:], payload["records"]):
            parts = csv_row.split(",")
            assert parts[0] == rec["label"]
            assert float(parts[2]) == pytest.approx(rec["t_us"], rel=1e-14)
        capsys.readouterr()

    def test_provenance_header_lines(self, tmp_path, capsys):
        out = str(tmp_path / "p.csv")
        main(["resonances", "--register", "nv27", "--k-max", "1",
              "--csv", out])
        capsys.readouterr()
        header = [l for l in open(out).read().splitlines()
                  if l.startswith("#")]
        keys = {l.split("=", 1)[0].lstrip("# ") for l in header}
        assert {"version", "flags", "seed", "constants"} <= keys


class TestDesign:
    def test_no_design_exits_zero(self, tmp_path, capsys):
        path = _write(tmp_path, "small.csv", SMALL)
        code = main(["design", "--register", path, "--anchor", "C5",
                     "--k", "1", "--max-gate-time", "1e-9"])
        assert code == 0
        assert "no design" in capsys.readouterr().out

    def test_design_found(self, capsys):
        code = main(["design", "--register", "nv27", "--anchor", "C23",
                     "--k", "3"])
        assert code == 0
        out = capsys.readouterr().out
        assert "ok" in out
        assert "C4;C5;C15" in out

    def test_unknown_anchor_exits_one(self, capsys):
        assert main(["design", "--register", "nv27", "--anchor", "C99",
                     "--k", "1"]) == 1
        capsys.readouterr()


class TestQec:
    def test_single_run(self, capsys):
        code = main(["qec", "--register", "nv27", "--ideal",
                     "--error", "electron"])
        assert code == 0
        out = capsys.readouterr().out
        assert "recovery_probability" in out

    def test_grid_row_count(self, tmp_path, capsys):
        out = str(tmp_path / "grid.csv")
        code = main(["qec", "--register", "nv27", "--ideal",
                     "--error", "electron", "--grid", "50", "50",
                     "--threads", "2", "--csv", out])
        assert code == 0
        capsys.readouterr()
        rows = [l for l in open(out).read().splitlines()
                if l and not l.startswith("#")]
        assert len(rows) == 1 + 2500


class TestSweep:
    def test_metrics_table(self, capsys):
        code = main(["sweep", "--register", "nv27", "--spin", "C5",
                     "--k", "3", "--n-max", "10", "--metrics", "g1,tangle"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].split() == ["label", "t_us", "N", "g1", "tangle"]
        assert len(lines) == 1 + 10

    def test_empty_metrics_exits_one(self, capsys):
        assert main(["sweep", "--register", "nv27", "--spin", "C5",
                     "--metrics", ","]) == 1
        assert "empty metrics" in capsys.readouterr().err

    def test_unknown_metric_exits_one(self, capsys):
        assert main(["sweep", "--register", "nv27", "--spin", "C5",
                     "--metrics", "bogus"]) == 1
        assert "unknown metric" in capsys.readouterr().err
