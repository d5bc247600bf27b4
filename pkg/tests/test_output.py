import json
import math

import numpy as np
import polars as pl
import pytest

from densify import __version__
from densify.errors import InvalidArgumentError
from densify.output import ResultSink, format_float, portable_config

CONFIG = {"run": {"seed": 7, "threads": 4, "out": "x", "format": "csv", "trials": None}, "table1": {"a": 1}}


def make_sink(tmp_path, **kw) -> ResultSink:
    base = dict(fmt="csv", command="table1", seed=7, config=CONFIG)
    base.update(kw)
    return ResultSink(tmp_path, **base)


def test_format_float():
    assert format_float(1 / 3) == "0.333333333"
    assert format_float(1e-6) == "1e-06"
    assert format_float(2.0) == "2"
    assert format_float(math.nan) == "nan"
    assert format_float(math.inf) == "inf"
    assert format_float(-math.inf) == "-inf"


def test_portable_config_drops_execution_knobs():
    out = portable_config(CONFIG)
    assert out["run"] == {"seed": 7, "trials": None}
    assert out["table1"] == {"a": 1}
    assert CONFIG["run"]["threads"] == 4


def test_rejects_unknown_format(tmp_path):
    with pytest.raises(InvalidArgumentError):
        make_sink(tmp_path, fmt="xlsx")


def test_csv_table_with_metadata(tmp_path):
    sink = make_sink(tmp_path)
    path = sink.write_table("t", [{"n": 1, "p": 1 / 3}, {"n": 2, "p": 0.5}], notes=["hello"])
    lines = path.read_text().splitlines()
    assert lines[0] == f"# densify {__version__} (numpy {np.__version__})"
    assert lines[1] == "# command: table1"
    assert lines[2] == "# seed: 7"
    assert json.loads(lines[3][len("# config: "):]) == {"run": {"seed": 7, "trials": None}, "table1": {"a": 1}}
    assert lines[4] == "# note: hello"
    assert lines[5:] == ["n,p", "1,0.333333333", "2,0.5"]
    assert sink.written == [path]


def test_csv_reads_back_with_polars(tmp_path):
    path = make_sink(tmp_path).write_table("t", pl.DataFrame({"x": [1.5, 2.25]}))
    assert pl.read_csv(path, comment_prefix="#")["x"].to_list() == [1.5, 2.25]


def test_files_identical_across_thread_settings(tmp_path):
    other = {**CONFIG, "run": {**CONFIG["run"], "threads": 1, "out": "elsewhere"}}
    a = make_sink(tmp_path / "a").write_table("t", [{"v": 0.1}])
    b = make_sink(tmp_path / "b", config=other).write_table("t", [{"v": 0.1}])
    assert a.read_bytes() == b.read_bytes()


def test_parquet_keeps_metadata(tmp_path):
    pq = pytest.importorskip("pyarrow.parquet")
    path = make_sink(tmp_path, fmt="parquet").write_table("t", [{"v": 0.25}], notes=["n1"])
    table = pq.read_table(path)
    meta = json.loads(table.schema.metadata[b"densify"])
    assert meta["seed"] == 7 and meta["notes"] == ["n1"]
    assert table.column("v").to_pylist() == [0.25]


def test_matrix_csv(tmp_path):
    path = make_sink(tmp_path).write_matrix("m", np.array([[1.0, 2.5], [-3.0, 0.125]]))
    body = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    assert body == ["1,2.5", "-3,0.125"]


def test_pgm_layout(tmp_path):
    grid = np.arange(6, dtype=float).reshape(2, 3)
    path = make_sink(tmp_path).write_pgm("img", grid)
    data = path.read_bytes()
    assert data.startswith(b"P5\n# densify")
    assert b"# note: scale: 0 .. 5 dBm\n3 2\n65535\n" in data
    pixels = np.frombuffer(data[-12:], dtype=">u2").reshape(2, 3)
    # top image row is the last grid row
    assert pixels.tolist() == [[39321, 52428, 65535], [0, 13107, 26214]]


def test_pgm_constant_and_invalid(tmp_path):
    sink = make_sink(tmp_path)
    data = sink.write_pgm("flat", np.full((2, 2), 4.0)).read_bytes()
    assert np.all(np.frombuffer(data[-8:], dtype=">u2") == 0)
    with pytest.raises(InvalidArgumentError):
        sink.write_pgm("bad", np.array([[1.0, np.inf]]))
    with pytest.raises(InvalidArgumentError):
        sink.write_pgm("bad", np.arange(3.0))


def test_json_payload(tmp_path):
    path = make_sink(tmp_path).write_json("r", {"value": np.float64(2.5), "edge": math.inf, "n": np.int64(3)})
    doc = json.loads(path.read_text())
    assert doc["value"] == 2.5 and doc["edge"] == "inf" and doc["n"] == 3
    assert doc["metadata"]["command"] == "table1"
    assert list(doc) == sorted(doc)
