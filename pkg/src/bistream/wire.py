"""JSON-lines wire format.

Input, one record per line::

    {"id": "u1", "attrs": {"income": 10.0, "region": "north"}}

Output, one event per line, keys in this order::

    {"event":"release","t":3,"id":"c","attr":"income","value":21.0,"partner":"a","beta":0.412345}
"""
from __future__ import annotations

import json
import math
from typing import Sequence

from .errors import InvalidValue, ParseError, SchemaError
from .events import OutputEvent


def parse_record(line: str, specs: Sequence | None = None, lineno: int | None = None) -> tuple[str, dict]:
    """Decode one input line into ``(id, {attr: value})``.

    With ``specs`` (objects with ``name`` and ``kind``) the attribute set
    and value types are checked and values come back in schema order.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", lineno) from None
    if not isinstance(obj, dict) or not isinstance(obj.get("id"), str) or not isinstance(obj.get("attrs"), dict):
        raise ParseError('expected an object with string "id" and object "attrs"', lineno)
    attrs = obj["attrs"]
    if specs is None:
        return obj["id"], attrs
    where = f"line {lineno}: " if lineno is not None else ""
    names = [s.name for s in specs]
    if set(attrs) != set(names):
        missing = sorted(set(names) - set(attrs))
        extra = sorted(set(attrs) - set(names))
        raise SchemaError(f"{where}attribute mismatch: missing {missing}, unexpected {extra}")
    values = {}
    for s in specs:
        v = attrs[s.name]
        if s.kind == "numeric":
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidValue(f"{where}attribute {s.name!r} expects a finite number, got {v!r}")
            values[s.name] = float(v)
        else:
            if not isinstance(v, str):
                raise InvalidValue(f"{where}attribute {s.name!r} expects a category label, got {v!r}")
            values[s.name] = v
    return obj["id"], values


def serialize_event(e: OutputEvent) -> str:
    return json.dumps(
        {
            "event": e.kind,
            "t": e.t,
            "id": e.id,
            "attr": e.attr,
            "value": e.value,
            "partner": e.partner_id,
            "beta": round(e.beta, 6),
        },
        separators=(",", ":"),
    )


def parse_event(line: str, lineno: int | None = None) -> OutputEvent:
    try:
        obj = json.loads(line)
        return OutputEvent(
            kind=obj["event"],
            t=obj["t"],
            id=obj["id"],
            value=obj["value"],
            beta=obj["beta"],
            partner_id=obj["partner"],
            attr=obj["attr"],
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"bad event line ({exc})", lineno) from None


def read_events(lines) -> list[OutputEvent]:
    return [parse_event(line, n) for n, line in enumerate(lines, 1) if line.strip()]
