import json

import numpy as np
import pytest

from anisofield import errors, io
from anisofield.params import Family
from anisofield.synth import sample_field


@pytest.mark.parametrize(
    ["value", "expected"],
    [
        pytest.param(0.1, "0.10000000000000001", id="float"),
        pytest.param(np.float64(1.0) / 3.0, "0.33333333333333331", id="numpy_float"),
        pytest.param(7, "7", id="int"),
        pytest.param(np.int64(-3), "-3", id="numpy_int"),
        pytest.param(True, "true", id="bool"),
        pytest.param("Vt22", "Vt22", id="string"),
    ],
)
def test_format_number(value, expected):
    assert io.format_number(value) == expected


def test_format_number_round_trips():
    value = 2.0 ** 1.133333

    assert float(io.format_number(value)) == value


def test_write_csv(tmp_path):
    path = tmp_path / "table.csv"

    io.write_csv(str(path), [{"gamma": 0.5, "family": "Vt21", "n": 3}], ["family", "gamma", "n"])

    assert path.read_text() == "family,gamma,n\nVt21,0.5,3\n"


def test_write_csv_columns_from_rows(tmp_path):
    path = tmp_path / "table.csv"

    io.write_csv(str(path), [{"a": 1, "b": 2.5}, {"a": 2, "b": -1.0}])

    assert path.read_text().splitlines() == ["a,b", "1,2.5", "2,-1"]


def test_write_json_serializes_numpy_and_enums(tmp_path):
    path = tmp_path / "report.json"
    error = errors.ZeroValue("vanishes", direction=[1.0, 0.0])

    io.write_json(
        str(path),
        {
            "values": np.arange(3.0),
            "scalar": np.float64(0.5),
            "family": Family.VT22,
            "error": error,
        },
    )
    data = json.loads(path.read_text())

    assert data["values"] == [0.0, 1.0, 2.0]
    assert data["scalar"] == 0.5
    assert data["family"] == "Vt22"
    assert data["error"]["code"] == "ZeroValue"
    assert data["error"]["details"] == {"direction": [1.0, 0.0]}


def test_write_json_rejects_unknown(tmp_path):
    with pytest.raises(TypeError):
        io.write_json(str(tmp_path / "report.json"), {"value": object()})


def test_field_round_trip(tmp_path, make_ctx):
    field = sample_field(make_ctx(M=4), 5, 7, seed=2)
    path = str(tmp_path / "field.bin")

    io.write_field(path, field)
    values, metadata = io.read_field(path)

    np.testing.assert_array_equal(values, field.values)
    assert metadata["dtype"] == "<f8"
    assert metadata["order"] == "row-major"
    assert (tmp_path / "field.bin").stat().st_size == 8 * 5 * 7


def test_artifact_writer(tmp_path, make_ctx):
    writer = io.ArtifactWriter(str(tmp_path / "out"))

    writer.csv("theory.csv", [{"gamma": 1.0}])
    writer.json("summary.json", {"status": "pass"})
    writer.field("field.bin", sample_field(make_ctx(M=2), 3, 3, seed=0))

    assert writer.written == ["theory.csv", "summary.json", "field.json", "field.bin"]
    assert writer.path("theory.csv") == str(tmp_path / "out" / "theory.csv")
    assert (tmp_path / "out" / "field.json").exists()
