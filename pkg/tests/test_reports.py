import json
import math

import numpy as np

from kepler_convexity.reports import dumps, fmt_float, table_csv


def test_float_format_roundtrips():
    for x in (0.1, 1 / 3, -2.0, 1e-300, 5.2753039688184282, np.float64(2) ** 0.5):
        s = fmt_float(x)
        assert float(s) == float(x)
        assert len(s.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_dumps_compact_and_valid():
    obj = {"violations": [], "pass": True, "x": 0.1, "n": np.int64(3), "flag": np.bool_(False), "none": None}
    s = dumps(obj)
    assert '"violations":[]' in s
    assert s == '{"violations":[],"pass":true,"x":0.10000000000000001,"n":3,"flag":false,"none":null}'
    assert json.loads(s)["x"] == 0.1


def test_dumps_nonfinite():
    assert dumps([math.nan, math.inf]) == "[null,null]"


def test_table_csv():
    s = table_csv([{"a": 1.5, "ok": True}], ["a", "ok"])
    assert s == "a,ok\n1.5,true\n"
