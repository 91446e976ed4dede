"""Deterministic JSON serialization.

Emits byte-identical text for equal inputs: object keys sorted, floats
rendered with 17 significant digits (round-trip exact for float64), no
locale- or version-dependent formatting. Used for all CLI output and for
cache entries so determinism checks can compare raw bytes.
"""

from __future__ import annotations

import json
import math
from typing import Any


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float cannot be serialized")
    text = format(x, ".17g")
    # Guarantee the token reads back as a float, not an int.
    if not any(c in text for c in ".eE"):
        text += ".0"
    return text


def _emit(obj: Any, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        out.append("{")
        first = True
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"object keys must be str, got {type(key).__name__}")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Serialize ``obj`` to a deterministic JSON string."""
    out: list = []
    _emit(obj, out)
    return "".join(out)
