"""
Field exchange format

JSON:
    {"dims": [n0, n1, n2, n3], "spacing": [d0, d1, d2, d3], "M": m,
     "components": c, "values": [re, im, re, im, ...]}
    values are flattened (re, im) pairs, row-major over sites, component-minor.
    Nested [[re, im], ...] pairs are accepted on read.

Binary:
    <name>.bin holds little-endian float64 (re, im) pairs in the same order;
    <name>.bin.json holds the header (everything except "values").
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from errors import FieldFormatError
from field_decomposition import MomentumLatticeField

logger = logging.getLogger(__name__)

HEADER_KEYS = ("dims", "spacing", "M", "components")


def _header(f: MomentumLatticeField) -> Dict[str, Any]:
    return {"dims": list(f.dims), "spacing": list(f.spacing), "M": f.M, "components": f.components}


def field_to_dict(f: MomentumLatticeField) -> Dict[str, Any]:
    flat = f.values.reshape(-1)
    data = _header(f)
    data["values"] = np.column_stack([flat.real, flat.imag]).reshape(-1).tolist()
    return data


def _pairs_to_complex(raw: Any) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as e:
        raise FieldFormatError(f"values are not numeric: {e}") from e
    if arr.ndim == 1:
        if arr.size % 2:
            raise FieldFormatError("flat values list must have even length")
        arr = arr.reshape(-1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FieldFormatError(f"values must be [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FieldFormatError("values contain NaN or Inf")
    return arr[:, 0] + 1j * arr[:, 1]


def _check_header(data: Dict[str, Any]) -> None:
    missing = [k for k in HEADER_KEYS if k not in data]
    if missing:
        raise FieldFormatError(f"missing keys: {', '.join(missing)}")


def _build(data: Dict[str, Any], values: np.ndarray) -> MomentumLatticeField:
    try:
        dims = tuple(int(n) for n in data["dims"])
        components = int(data["components"])
        expected = int(np.prod(dims)) * components
    except (TypeError, ValueError) as e:
        raise FieldFormatError(f"bad header: {e}") from e
    if len(dims) != 4 or components < 1:
        raise FieldFormatError(f"need 4 dims and components >= 1, got {dims}, {components}")
    if values.size == 0:
        raise FieldFormatError("field payload is empty")
    if values.size != expected:
        raise FieldFormatError(f"expected {expected} values, got {values.size}")
    try:
        return MomentumLatticeField(dims, data["spacing"], float(data["M"]),
                                    values.reshape(dims + (components,)))
    except (TypeError, ValueError) as e:
        raise FieldFormatError(str(e)) from e


def field_from_dict(data: Dict[str, Any]) -> MomentumLatticeField:
    if not isinstance(data, dict):
        raise FieldFormatError("field payload must be a JSON object")
    _check_header(data)
    if "values" not in data:
        raise FieldFormatError("missing keys: values")
    return _build(data, _pairs_to_complex(data["values"]))


def save_field(f: MomentumLatticeField, path: Union[str, Path]) -> None:
    path = Path(path)
    if path.suffix == ".bin":
        pairs = np.stack([f.values.real.reshape(-1), f.values.imag.reshape(-1)], axis=1)
        path.write_bytes(pairs.astype("<f8").tobytes())
        Path(f"{path}.json").write_text(json.dumps(_header(f)))
    else:
        path.write_text(json.dumps(field_to_dict(f)))
    logger.debug(f"🔍 wrote field {f.dims}x{f.components} to {path}")


def load_field(path: Union[str, Path]) -> MomentumLatticeField:
    """Read a field from .json, .bin (+ sidecar) or '-' for stdin JSON"""
    if str(path) == "-":
        return _parse_json(sys.stdin.read(), "<stdin>")
    path = Path(path)
    try:
        if path.suffix == ".bin":
            header = json.loads(Path(f"{path}.json").read_text())
            if not isinstance(header, dict):
                raise FieldFormatError("sidecar header must be a JSON object")
            _check_header(header)
            raw = np.frombuffer(path.read_bytes(), dtype="<f8")
            if raw.size % 2:
                raise FieldFormatError("binary payload has an odd number of float64 values")
            if not np.all(np.isfinite(raw)):
                raise FieldFormatError("values contain NaN or Inf")
            return _build(header, raw[0::2] + 1j * raw[1::2])
        return _parse_json(path.read_text(), str(path))
    except OSError as e:
        raise FieldFormatError(f"cannot read '{path}': {e}") from e
    except json.JSONDecodeError as e:
        raise FieldFormatError(f"invalid JSON header for '{path}': {e}") from e


def _parse_json(text: str, source: str) -> MomentumLatticeField:
    if not text.strip():
        raise FieldFormatError(f"{source} is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FieldFormatError(f"invalid JSON in {source}: {e}") from e
    return field_from_dict(data)
