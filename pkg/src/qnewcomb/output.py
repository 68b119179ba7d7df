"""Report and landscape serialization with fixed numeric formatting."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np

CSV_HEADER = "chart,re,im,payoff_usd"


class Usd(float):
    """A dollar amount; emitted with exactly six decimals in reports."""


def _coord(x: float) -> str:
    s = f"{x:.8f}"
    return s[1:] if s == "-0.00000000" else s


def landscape_row(chart: str, re: float, im: float, payoff: float) -> str:
    return f"{chart},{_coord(re)},{_coord(im)},{payoff:.6f}"


def emit_landscape_csv(samples: Iterable) -> str:
    """CSV text with LF endings; rows keep the (chart, row, column) order given."""
    lines = [CSV_HEADER]
    lines.extend(landscape_row(s.chart, s.re, s.im, s.payoff) for s in samples)
    return "\n".join(lines) + "\n"


def _encode(o, level: int) -> str:
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(o, Usd):
        return f"{float(o):.6f}"
    if o is None or isinstance(o, (bool, str, int)):
        return json.dumps(o)
    if isinstance(o, (float, np.floating)):
        o = float(o)
        if not math.isfinite(o):
            raise ValueError(f"cannot serialize non-finite value {o}")
        return json.dumps(o)
    if isinstance(o, np.integer):
        return str(int(o))
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, level + 1)}" for k, v in o.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(o, (list, tuple, np.ndarray)):
        if len(o) == 0:
            return "[]"
        if all(isinstance(x, (int, float, np.number)) and not isinstance(x, bool) for x in o):
            return "[" + ", ".join(_encode(x, 0) for x in o) + "]"
        return "[\n" + ",\n".join(inner + _encode(x, level + 1) for x in o) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps_report(obj) -> str:
    """JSON text; ``Usd`` values print with six decimals, other floats round-trip."""
    return _encode(obj, 0) + "\n"


def complex_matrix_json(a) -> list:
    """``[[re, im], ...]`` rows for a complex matrix."""
    a = np.asarray(a, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temp file beside ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
