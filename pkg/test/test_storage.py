import csv
import io
import json
import math

import numpy as np
import pytest

from core.models import CurvatureStatus, Dimension, VertexFunction
from infrastructure.storage import StorageManager, to_jsonable


@pytest.fixture
def storage():
    return StorageManager()


def test_to_jsonable_non_finite_and_numpy():
    payload = {
        "k": -math.inf,
        "n": Dimension.parse("inf"),
        "status": CurvatureStatus.UNBOUNDED_BELOW,
        "values": np.array([1.0, math.nan]),
        "count": np.int64(3),
        "flag": np.bool_(True),
        "pair": ("a", "b"),
    }
    assert to_jsonable(payload) == {
        "k": "-inf",
        "n": "inf",
        "status": "unbounded-below",
        "values": [1.0, "nan"],
        "count": 3,
        "flag": True,
        "pair": ["a", "b"],
    }


def test_vertex_function_dumps_as_mapping(storage):
    f = VertexFunction(values={"x": 1.5, "y": -2.0})
    assert json.loads(storage.dumps({"u": f})) == {"u": {"x": 1.5, "y": -2.0}}


def test_graph_roundtrip(storage, tmp_path, remark):
    target = tmp_path / "nested" / "remark.json"
    storage.save_graph(remark, str(target))
    assert storage.load_graph(str(target)) == remark


def test_vertex_function_roundtrip(storage, tmp_path, remark):
    f = VertexFunction(values={"1": 0.5, "2": 0.0, "3": -1.0})
    target = tmp_path / "u.json"
    storage.save_vertex_function(f, remark, str(target))
    assert storage.load_vertex_function(str(target), remark) == f


def test_stdin_and_stdout(storage, monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO('{"a": 1}'))
    assert storage.read_text("-") == '{"a": 1}'
    storage.write_json({"t": math.inf})
    assert json.loads(capsys.readouterr().out) == {"t": "inf"}


def test_jsonl_and_csv(storage, tmp_path):
    lines = tmp_path / "trace.jsonl"
    storage.write_jsonl([{"t": 0.0}, {"status": "completed"}], str(lines))
    assert [json.loads(line) for line in lines.read_text().splitlines()] == [{"t": 0.0}, {"status": "completed"}]

    table = tmp_path / "rows.csv"
    storage.write_csv(("vertex", "k"), [("a", -math.inf), ("b", 0.25)], str(table))
    assert list(csv.reader(table.open())) == [["vertex", "k"], ["a", "-inf"], ["b", "0.25"]]


def test_missing_file(storage, tmp_path):
    with pytest.raises(OSError):
        storage.read_text(str(tmp_path / "absent.json"))
