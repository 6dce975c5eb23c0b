"""JSON and binary field exchange"""

import io
import json

import numpy as np
import pytest

from errors import FieldFormatError
from field_io import field_from_dict, field_to_dict, load_field, save_field


@pytest.mark.unit
class TestFieldIO:

    def test_json_file(self, tmp_path, spinor_field):
        path = tmp_path / "psi.json"
        save_field(spinor_field, path)
        back = load_field(path)
        assert back.same_lattice(spinor_field) and back.components == 4
        np.testing.assert_array_equal(back.values, spinor_field.values)

    def test_binary_file_with_sidecar(self, tmp_path, field):
        path = tmp_path / "phi.bin"
        save_field(field, path)
        assert (tmp_path / "phi.bin.json").exists()
        assert path.stat().st_size == field.values.size * 16
        np.testing.assert_array_equal(load_field(path).values, field.values)

    def test_flat_values_list(self):
        data = {"dims": [1, 1, 1, 2], "spacing": [1, 1, 1, 1], "M": 2.0, "components": 1,
                "values": [1.0, 0.5, -2.0, 0.0]}
        f = field_from_dict(data)
        np.testing.assert_array_equal(f.values.reshape(-1), [1 + 0.5j, -2])
        assert f.M == 2.0

    def test_writer_emits_flat_pairs(self):
        values = np.array([1 + 0.5j, -2.0]).reshape(1, 1, 1, 2, 1)
        f = field_from_dict({"dims": [1, 1, 1, 2], "spacing": [1, 1, 1, 1], "M": 1.0, "components": 1,
                             "values": [[1.0, 0.5], [-2.0, 0.0]]})
        np.testing.assert_array_equal(f.values, values)
        assert field_to_dict(f)["values"] == [1.0, 0.5, -2.0, 0.0]

    def test_stdin(self, monkeypatch, field):
        monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(field_to_dict(field))))
        np.testing.assert_array_equal(load_field("-").values, field.values)

    @pytest.mark.parametrize("mutate", [
        lambda d: d.pop("dims"),
        lambda d: d.pop("values"),
        lambda d: d.update(values=d["values"][:-1]),
        lambda d: d.update(values=[]),
        lambda d: d.update(values=[float("nan")] * len(d["values"])),
        lambda d: d.update(values="abc"),
        lambda d: d.update(dims=[8, 8, 8]),
    ])
    def test_malformed_payloads(self, field, mutate):
        data = field_to_dict(field)
        mutate(data)
        with pytest.raises(FieldFormatError):
            field_from_dict(data)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        with pytest.raises(FieldFormatError):
            load_field(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(FieldFormatError):
            load_field(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FieldFormatError):
            load_field(tmp_path / "absent.json")

    def test_binary_without_sidecar(self, tmp_path):
        path = tmp_path / "lonely.bin"
        path.write_bytes(np.zeros(4, dtype="<f8").tobytes())
        with pytest.raises(FieldFormatError):
            load_field(path)
