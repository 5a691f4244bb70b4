import json
import math

import pytest

from linstat.cli import ResultTable, load_table, main, run, validate
from linstat.errors import ConfigError

QUARTIC = {"kind": "quartic", "m2": 3, "g": 1}
GUE = {"kind": "gaussian", "g": 1}


def cfg(tmp_path, **kw):
    d = {"model": QUARTIC, "experiment": "variance-sweep", "n_values": [40, 41],
         "test_function": {"kind": "linear", "t": 1}, "output": {"path": str(tmp_path / "out.csv"), "format": "csv"}}
    d.update(kw)
    return d


def write(tmp_path, d, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return p


def errors_of(d):
    with pytest.raises(ConfigError) as exc:
        validate(json.dumps(d))
    return dict(exc.value.errors)


# --- validate -----------------------------------------------------------------

def test_empty_n_values(tmp_path):
    assert "n_values" in errors_of(cfg(tmp_path, n_values=[]))


def test_descending_n_values(tmp_path):
    assert "strictly ascending" in errors_of(cfg(tmp_path, n_values=[41, 40]))["n_values"]


def test_indicator_with_laplace(tmp_path):
    errs = errors_of(cfg(tmp_path, experiment="laplace", test_function={"kind": "indicator", "a": -1, "b": 1}))
    assert "not compatible" in errs["test_function.kind"]


def test_errors_are_collected(tmp_path):
    errs = errors_of(cfg(tmp_path, n_values=[], experiment="nope", colour="red"))
    assert {"n_values", "experiment", "colour"} <= set(errs)


def test_bad_json():
    with pytest.raises(ConfigError):
        validate("{not json")


def test_canonical_round_trip(tmp_path):
    c = validate(json.dumps(cfg(tmp_path)))
    text = c.canonical()
    assert validate(text).canonical() == text
    assert validate(text) == c


def test_counting_accepts_indicator_as_interval(tmp_path):
    c = validate(json.dumps(cfg(tmp_path, model=GUE, experiment="counting",
                                test_function={"kind": "indicator", "a": -1, "b": 1})))
    assert c.intervals == ((-1.0, 1.0),)


# --- ResultTable ----------------------------------------------------------------

def table():
    rows = [ResultTable.row(40, 0.1 + 0.2, 1 / 3, "even"), ResultTable.row(41, math.pi, math.e, "odd")]
    return ResultTable(rows=rows, metadata={"x": 1})


def test_row_discrepancy():
    r = table().rows[0]
    assert r["discrepancy"] == abs(r["finite_value"] - r["limit_value"])


def test_csv_round_trip():
    t = table()
    assert ResultTable.from_csv(t.to_csv(), t.metadata) == t


def test_json_round_trip():
    t = table()
    assert ResultTable.from_json(t.to_json(), t.metadata) == t


def test_discrepancy_recomputed_on_load():
    text = table().to_csv().replace("0.33333333333333331,", "0.5,", 1)
    r = ResultTable.from_csv(text, {}).rows[0]
    assert r["limit_value"] == 0.5
    assert r["discrepancy"] == pytest.approx(abs(0.3 - 0.5), abs=1e-15)


def test_csv_header():
    assert table().to_csv().splitlines()[0] == "n,finite_value,limit_value,discrepancy,case_tag"


# --- run --------------------------------------------------------------------------

def test_variance_sweep_clusters(tmp_path):
    c = validate(json.dumps(cfg(tmp_path, n_values=list(range(40, 81, 4)) + [81])))
    vals = {r["n"]: r["finite_value"] for r in run(c).rows}
    lo, hi = (3 - math.sqrt(5)) / 2, (3 + math.sqrt(5)) / 2
    for n, v in vals.items():
        assert abs(v / (lo if n % 2 == 0 else hi) - 1) <= 0.03


def test_equilibrium_gue(tmp_path):
    d = cfg(tmp_path, model=GUE, experiment="equilibrium", n_values=[1])
    del d["test_function"]
    c = validate(json.dumps(d))
    rows = run(c).rows
    ends = [r for r in rows if r["case_tag"] != "el_residual"]
    assert all(r["discrepancy"] <= 1e-2 for r in ends)
    assert sorted(round(r["limit_value"], 12) for r in ends) == [-2.0, 2.0]
    res = [r for r in rows if r["case_tag"] == "el_residual"]
    assert res and res[0]["finite_value"] <= 1e-6


def test_written_table_reloads(tmp_path):
    c = validate(json.dumps(cfg(tmp_path)))
    t = run(c)
    assert load_table(tmp_path / "out.csv") == t
    meta = json.loads((tmp_path / "out.csv.meta.json").read_text())
    assert {"config", "conventions", "tolerances", "versions"} <= set(meta)


def test_json_output(tmp_path):
    c = validate(json.dumps(cfg(tmp_path, output={"path": str(tmp_path / "o.json"), "format": "json"})))
    t = run(c)
    assert load_table(tmp_path / "o.json") == t


def test_deterministic_across_workers(tmp_path):
    c = validate(json.dumps(cfg(tmp_path, n_values=[40, 41, 42, 43])))
    run(c, workers=1, out=tmp_path / "a.csv")
    run(c, workers=3, out=tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.csv.meta.json").read_bytes() == (tmp_path / "b.csv.meta.json").read_bytes()


# --- main / exit codes -------------------------------------------------------------

def test_main_validate(tmp_path, capsys):
    p = write(tmp_path, cfg(tmp_path))
    assert main(["validate", str(p)]) == 0
    assert json.loads(capsys.readouterr().out)["experiment"] == "variance-sweep"


def test_main_run(tmp_path):
    p = write(tmp_path, cfg(tmp_path))
    assert main(["run", str(p), "--out", str(tmp_path / "x.csv")]) == 0
    assert (tmp_path / "x.csv").exists()


def test_main_config_error(tmp_path, capsys):
    p = write(tmp_path, cfg(tmp_path, n_values=[]))
    assert main(["run", str(p)]) == 2
    assert "n_values" in capsys.readouterr().err


def test_main_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "absent.json")]) == 2


def test_main_bad_workers(tmp_path):
    assert main(["run", str(write(tmp_path, cfg(tmp_path))), "--workers", "0"]) == 2


def test_main_numeric_error(tmp_path, capsys):
    # an interval reaching past the soft edge is well-formed but outside the bulk regime
    d = cfg(tmp_path, model=GUE, experiment="counting", n_values=[32], intervals=[[-1, 2.5]])
    del d["test_function"]
    assert main(["run", str(write(tmp_path, d))]) == 3
    assert "counting at n = 32" in capsys.readouterr().err
