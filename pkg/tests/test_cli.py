import json
import math
import subprocess
import sys

import pytest

from qpath import cli, oracle
from qpath import hausdorff as hd
from qpath.scales import PhysicalScales

EVAL_EXAMPLE = ["eval", "--deltax", "1", "--vs", "0", "--dt", "1", "--dim", "1", "--D", "2"]


def run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def data_lines(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


def test_eval_example(capsys):
    code, out, _ = run(EVAL_EXAMPLE, capsys)
    assert code == 0
    header, row = data_lines(out)
    assert tuple(header.split(",")) == hd.FIELDS
    rec = dict(zip(hd.FIELDS, row.split(",")))
    # theta = 1 here, so the packet has spread by sqrt(1 + 1/4)
    assert float(rec["length"]) == pytest.approx(math.sqrt(2 / math.pi) * math.sqrt(1.25), rel=1e-10)
    assert float(rec["dimension_estimate"]) == 2.0
    assert "# rerun: qpath eval" in out


def test_eval_static_packet(capsys):
    code, out, _ = run(["eval", "--dt", "0", "--dim", "1", "--D", "2"], capsys)
    assert code == 0
    rec = dict(zip(hd.FIELDS, data_lines(out)[1].split(",")))
    assert float(rec["length"]) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-10)


@pytest.mark.parametrize("argv,code", [
    (["eval", "--deltax", "-1"], 3),
    (["eval", "--D", "3"], 3),
    (["eval", "--bogus"], 1),
    (["eval", "--dim", "2"], 1),
    (["sweep"], 1),
    (["sweep", "--axis", "D="], 3),
    (["sweep", "--axis", "D=1:2:0.5", "--axis", "D=1"], 1),
    (["sweep", "--axis", "mass=1"], 1),
    (["figure", "7"], 1),
    (["eval", "--method", "aw-a", "--vs", "0"], 3),
])
def test_exit_codes(argv, code, capsys):
    got, out, err = run(argv, capsys)
    assert got == code
    assert err.startswith("qpath: ")


def test_no_file_written_on_error(tmp_path, capsys):
    out = tmp_path / "x.csv"
    assert run(["eval", "--deltax", "-1", "--out", str(out)], capsys)[0] == 3
    assert not out.exists()
    assert not list(tmp_path.iterdir())


def test_out_file_written(tmp_path, capsys):
    out = tmp_path / "x.csv"
    code, stdout, _ = run(["eval", "--method", "debroglie", "--vs", "1", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    assert "debroglie" in out.read_text()


def test_config_file_and_precedence(tmp_path, capsys):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"method": "debroglie", "vs": 1.0, "D": 1.5, "deltax": 2.0}))
    code, out, _ = run(["eval", "--config", str(cfgfile), "--deltax", "0.5"], capsys)
    assert code == 0
    rec = dict(zip(hd.FIELDS, data_lines(out)[1].split(",")))
    assert rec["method"] == "debroglie"
    assert float(rec["delta_x"]) == 0.5 and float(rec["D"]) == 1.5


def test_config_unknown_key(tmp_path, capsys):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"speed": 1.0}))
    assert run(["eval", "--config", str(cfgfile)], capsys)[0] == 1
    cfgfile.write_text("{not json")
    assert run(["eval", "--config", str(cfgfile)], capsys)[0] == 1


def test_parse_axis():
    assert cli.parse_axis("D=1:2:0.5") == ("D", [1.0, 1.5, 2.0])
    name, vals = cli.parse_axis("deltax=log:0.1:5:25")
    assert name == "deltax" and len(vals) == 25
    assert vals[0] == pytest.approx(0.1) and vals[-1] == pytest.approx(5.0)
    assert cli.parse_axis("vs=0,2") == ("vs", [0.0, 2.0])
    assert cli.parse_axis("dt=1") == ("deltat", [1.0])
    with pytest.raises(cli.UsageError):
        cli.parse_axis("nonsense")


def _same(a, b):
    return a == b or (isinstance(a, float) and math.isnan(a) and math.isnan(b))


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_table_round_trip(fmt):
    table = hd.sweep({"D": [1.0, 2.0], "vs": [0.0, 1.0]}, hd.Method.AW_A,
                     base=PhysicalScales(delta_x=1.0), metadata={"note": "x"})
    assert table.failures == 2  # xbar = 0 rows
    text = cli.emit_table(table, fmt)
    back = cli.parse_table(text, fmt)
    assert back.metadata == table.metadata
    assert back.axes == table.axes
    for r1, r2 in zip(table.rows, back.rows):
        assert all(_same(x, y) for x, y in zip(r1.as_row(), r2.as_row()))
    assert cli.emit_table(back, fmt) == text


def test_empty_table_keeps_header():
    table = hd.SweepTable(axes={}, rows=[], metadata={"k": "v"})
    text = cli.emit_table(table, "csv")
    assert text.splitlines() == ["# k: v", ",".join(hd.FIELDS)]
    assert cli.parse_table(text).rows == []


def test_dispersion_command(capsys):
    code, out, _ = run(["dispersion", "--vs", "1", "--k", "0,2", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == ["kind", "k", "energy", "omega", "group_velocity"]
    assert doc["rows"][1]["energy"] == pytest.approx(math.sqrt(8), rel=1e-15)
    assert doc["rows"][0]["group_velocity"] == 1.0
    assert "probe_group_velocity" in doc["metadata"]


def test_figure_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["figure", "4", "--out", str(a), "--workers", "1"], capsys)[0] == 0
    assert run(["figure", "4", "--out", str(b), "--workers", "2"], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(data_lines(a.read_text())) == 1 + 1375


def test_sweep_json(capsys):
    code, out, _ = run(["sweep", "--method", "debroglie", "--vs", "1", "--axis", "D=1:2:0.5",
                        "--axis", "deltax=0.5,1", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["rows"]) == 6
    # first axis varies slowest
    assert [(r["D"], r["delta_x"]) for r in doc["rows"][:3]] == [(1.0, 0.5), (1.0, 1.0), (1.5, 0.5)]


def test_validate_subset(monkeypatch, capsys):
    monkeypatch.setattr(oracle, "VALIDATION_SET", ((0.0, 1.0),))
    code, out, _ = run(["validate", "--dim", "1"], capsys)
    assert code == 0
    rows = data_lines(out)[1:]
    assert len(rows) == 2 and all(r.endswith(",yes") for r in rows)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qpath", "eval", "--method", "debroglie"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "debroglie" in proc.stdout
