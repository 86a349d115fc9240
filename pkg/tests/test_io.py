import json

import numpy as np

from burgers_rigidity import io


def test_dumps_is_canonical():
    a = io.dumps({"b": np.float64(1.5), "a": [np.int64(2), float("nan"), float("inf")], "c": np.bool_(True)})
    b = io.dumps({"c": True, "a": [2, float("nan"), float("inf")], "b": 1.5})
    assert a == b
    assert json.loads(a) == {"a": [2, "nan", "inf"], "b": 1.5, "c": True}


def test_atomic_write_leaves_no_temp(tmp_path):
    p = tmp_path / "sub" / "x.json"
    io.write_json(p, {"k": 1})
    io.write_json(p, {"k": 2})
    assert json.loads(p.read_text()) == {"k": 2}
    assert [f.name for f in p.parent.iterdir()] == ["x.json"]


def test_write_columns(tmp_path):
    p = tmp_path / "c.csv"
    io.write_columns(p, ["x", "y"], [[1, 2], [3.5, 4]], comment="slope = 1")
    assert p.read_text() == "# slope = 1\nx,y\n1.0,3.5\n2.0,4.0\n"
