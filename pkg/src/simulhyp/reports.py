"""Flat key-value text records shared by certificates and reports.

A record is one ``key=value`` pair per line, preceded by a ``[name]``
header. Values are rendered with ``str``; lists are joined with `` ; ``.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction


def render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return " ; ".join(render_value(x) for x in v)
    if isinstance(v, dict):
        return " ; ".join(f"{k}:{render_value(x)}" for k, x in v.items())
    if isinstance(v, float) and v == float("inf"):
        return "unbounded"
    return str(v)


def to_kv(name: str, fields: dict) -> str:
    lines = [f"[{name}]"]
    for k, v in fields.items():
        text = render_value(v).replace("\n", " ")
        lines.append(f"{k}={text}")
    return "\n".join(lines) + "\n"


def parse_kv(text: str) -> list[tuple[str, dict]]:
    """Inverse of ``to_kv`` on the string level (values stay strings)."""
    records: list[tuple[str, dict]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            records.append((line[1:-1], {}))
        elif "=" in line and records:
            k, v = line.split("=", 1)
            records[-1][1][k] = v
        else:
            raise ValueError(f"malformed report line: {raw!r}")
    return records


def fraction_text(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]
