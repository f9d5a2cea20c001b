"""Deterministic JSON/CSV writers: exact "p/q" values next to 12-digit decimals."""

from __future__ import annotations

import csv
import io
import json
import math
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .engine import Schedule
from .group import format_fraction


def decimal_str(x) -> str:
    """12 significant digits; exact for Fractions (no float round trip)."""
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return f"{x:.12g}"
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = 12
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return f"{d:.12g}" if d != 0 else "0"


def _is_rational_str(v) -> bool:
    if not isinstance(v, str) or "/" not in v:
        return False
    p, _, q = v.partition("/")
    return p.lstrip("-").isdigit() and q.isdigit()


def jsonable(obj):
    """Fractions become "p/q"; tuples become lists; infinities become "inf"."""
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return "inf" if math.isinf(obj) else obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    """One line per row; rational columns get a companion ``<name>_decimal`` column."""
    rows = [jsonable(r) for r in rows]
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    rational = [c for c in columns if any(_is_rational_str(r.get(c)) for r in rows)]
    header = []
    for c in columns:
        header.append(c)
        if c in rational:
            header.append(f"{c}_decimal")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        line = []
        for c in columns:
            v = r.get(c, "")
            if isinstance(v, (list, dict)):
                v = json.dumps(v, sort_keys=True, separators=(",", ":"))
            line.append("" if v is None else v)
            if c in rational:
                line.append(decimal_str(v) if _is_rational_str(v) else "")
        w.writerow(line)
    return buf.getvalue()


def write_csv(path: str | Path, rows: Sequence[dict], columns: Sequence[str] | None = None) -> Path:
    path = Path(path)
    path.write_text(rows_to_csv(rows, columns))
    return path


def save_schedule(path: str | Path, s: Schedule) -> Path:
    return write_json(path, s.to_json())


def load_schedule(path: str | Path, verify_hash: bool = True) -> Schedule:
    return Schedule.from_json(json.loads(Path(path).read_text()), verify_hash=verify_hash)


def flatten(rows: Iterable[dict], prefix: str = "") -> list[dict]:
    return [{f"{prefix}{k}": v for k, v in r.items()} for r in rows]
