"""
JSON serialization helpers

orjson with native numpy support. Floats are written with the shortest
representation that round-trips, so a snapshot restored from disk reproduces
the in-memory state bit for bit.
"""

from pathlib import Path
from typing import Any, Union

import numpy as np
import orjson

from ..core.errors import ArgumentError

_DUMP_OPTIONS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


def dumps(obj: Any) -> bytes:
    """Serialize `obj` (numpy arrays and scalars included) to JSON bytes"""
    return orjson.dumps(obj, default=_default, option=_DUMP_OPTIONS)


def loads(data: Union[bytes, str]) -> Any:
    try:
        return orjson.loads(data)
    except orjson.JSONDecodeError as e:
        raise ArgumentError(f"invalid JSON document: {e}") from e


def write_json(path: Union[str, Path], obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(obj) + b"\n")
    return path


def read_json(path: Union[str, Path]) -> Any:
    return loads(Path(path).read_bytes())


def check_format(doc: Any, expected: str) -> dict:
    """Ensure `doc` is a mapping tagged with the expected format string"""
    if not isinstance(doc, dict) or doc.get("format") != expected:
        found = doc.get("format") if isinstance(doc, dict) else type(doc).__name__
        raise ArgumentError(f"expected a '{expected}' document, got {found!r}")
    return doc


def _default(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (tuple, set, frozenset)):
        return list(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
