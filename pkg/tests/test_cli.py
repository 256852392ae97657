import csv

import pytest

from manetsim.cli import main
from manetsim.metrics import CSV_COLUMNS

BASE = "nodes = 4\narea = 200x200\nsim_time = 3\nconnections = 1\nstart_window = 1\n"


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "base.cfg"
    path.write_text(BASE + "protocol = dsr\n")
    return path


def read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_one_row(cfg, tmp_path):
    out = tmp_path / "one.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == list(CSV_COLUMNS)
    assert len(rows) == 2 and rows[1][0] == "dsr"


def test_run_flags_override_file(cfg, tmp_path):
    out = tmp_path / "one.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--protocol", "aodv",
                 "--model", "rice", "--seed", "7"]) == 0
    row = read(out)[1]
    assert (row[0], row[1], row[4]) == ("aodv", "rice", "7")


def test_run_trace(cfg, tmp_path):
    out, trace = tmp_path / "one.csv", tmp_path / "trace.txt"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--trace", str(trace)]) == 0
    lines = trace.read_text().splitlines()
    assert lines[0].startswith("# mobility")
    assert any(line.startswith("# packets") for line in lines)


def test_run_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("propagation = rayleigh\nrice_k = 5\n")
    assert main(["run", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "rice_k" in err


def test_sweep_writes_csv_and_gnuplot(cfg, tmp_path):
    out = tmp_path / "grid.csv"
    code = main(["sweep", "--config", str(cfg), "--protocols", "aodv,dsdv",
                 "--models", "tworay,rayleigh", "--connections", "1,2", "--seeds", "1,2",
                 "--jobs", "2", "--out", str(out)])
    assert code == 0
    rows = read(out)
    assert len(rows) == 1 + 16
    dat = (tmp_path / "grid.dat").read_text()
    assert dat.count("# aodv") == 2 and dat.count("# dsdv") == 2


def test_sweep_failed_cell_exit_code(cfg, tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code = main(["sweep", "--config", str(cfg), "--models", "tworay,bogus",
                 "--out", str(out), "--gnuplot", str(tmp_path / "g.dat")])
    assert code == 1
    rows = read(out)
    assert [r[5] == "ERROR" for r in rows[1:]] == [False, True]
    assert "bogus" in capsys.readouterr().err
