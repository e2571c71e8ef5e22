"""Deterministic JSON serialization."""

import numpy as np
import pytest

from adaptix import jsonio


class TestFmt17:
    def test_round_trips_float64_exactly(self):
        rng = np.random.default_rng(70)
        samples = list(rng.standard_normal(200))
        samples += list(rng.standard_normal(50) * 1e300)
        samples += list(rng.standard_normal(50) * 1e-300)
        samples += [0.0, -0.0, 1.0, 2.0 / 3.0, np.pi, 5e-324, 1.7976931348623157e308]
        for x in samples:
            assert float(jsonio.fmt17(x)) == float(x)

    def test_rejects_non_finite(self):
        for bad in (np.nan, np.inf, -np.inf):
            with pytest.raises(ValueError):
                jsonio.fmt17(bad)


class TestDumps:
    def test_types_and_shape(self):
        obj = {
            "i": 3,
            "f": 0.5,
            "s": "text",
            "none": None,
            "flag": True,
            "off": False,
            "seq": [1, 2.5, "x"],
            "tup": (1, 2),
            "arr": np.array([[1.0, 2.0], [3.0, 4.0]]),
            "np_int": np.int64(7),
            "np_float": np.float64(0.25),
        }
        text = jsonio.dumps(obj)
        assert text.endswith("\n")
        import json
        back = json.loads(text)
        assert back["i"] == 3 and back["flag"] is True and back["off"] is False
        assert back["none"] is None
        assert back["tup"] == [1, 2]
        assert back["arr"] == [[1.0, 2.0], [3.0, 4.0]]
        assert back["np_int"] == 7 and back["np_float"] == 0.25
        assert '"flag": true' in text  # bools must not degrade to 0/1

    def test_deterministic(self):
        obj = {"a": [0.1, 0.2, 1e-17], "b": {"c": np.pi}}
        assert jsonio.dumps(obj) == jsonio.dumps(obj)

    def test_rejects_unknown_types(self):
        with pytest.raises(TypeError):
            jsonio.dumps({"bad": {1, 2}})
        with pytest.raises(TypeError):
            jsonio.dumps(complex(1, 2))

    def test_rejects_non_finite_floats(self):
        with pytest.raises(ValueError):
            jsonio.dumps({"x": float("nan")})
        with pytest.raises(ValueError):
            jsonio.dumps([np.inf])


class TestFileRoundTrip:
    def test_dump_and_load(self, tmp_path):
        path = tmp_path / "blob.json"
        obj = {"values": np.linspace(-1, 1, 5), "n": 5, "name": "grid"}
        jsonio.dump(obj, path)
        back = jsonio.load(path)
        assert back == {"values": list(np.linspace(-1, 1, 5)), "n": 5, "name": "grid"}
        first = path.read_bytes()
        jsonio.dump(obj, path)
        assert path.read_bytes() == first
