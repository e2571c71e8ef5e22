"""Deterministic JSON and number formatting shared by all serializers.

Every float written to disk goes through ``fmt17`` (17 significant digits,
enough for exact float64 round-trips), so re-running a command with the
same inputs produces byte-identical artifacts.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def fmt17(x: float) -> str:
    """Format a finite float with 17 significant digits."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value cannot be serialized: {x!r}")
    return format(x, ".17g")


def _render(obj: Any, out: list[str]) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _render(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _render(v, out)
        out.append("]")
    elif isinstance(obj, np.ndarray):
        _render(obj.tolist(), out)
    elif isinstance(obj, bool):  # before int: bool subclasses int
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt17(obj))
    elif obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Serialize to a JSON string with deterministic float formatting."""
    out: list[str] = []
    _render(obj, out)
    out.append("\n")
    return "".join(out)


def dump(obj: Any, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))


def load(path) -> Any:
    with open(path) as fh:
        return json.load(fh)
