"""Deterministic serialization for reports and flow traces.

All JSON output is canonical: sorted keys, compact separators, floats
printed with %.17g (round-trip exact), exact rationals as strings.  Two runs
with the same inputs produce byte-identical files except for the single
top-level "timestamp" key, which callers can strip before comparing.
"""

import json
import math
from datetime import datetime, timezone
from fractions import Fraction


def _fraction_str(x: Fraction):
    """Finite decimal expansion when the denominator is 2^a 5^b, else p/q."""
    den = x.denominator
    two = five = 0
    while den % 2 == 0:
        den //= 2
        two += 1
    while den % 5 == 0:
        den //= 5
        five += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    shift = max(two, five)
    scaled = x.numerator * 10**shift // x.denominator
    if shift == 0:
        return str(scaled)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(shift + 1, "0")
    return f"{sign}{digits[:-shift]}.{digits[-shift:]}"


def _float_str(x: float):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        x = 0.0  # collapse -0.0
    return "%.17g" % x


def canonical_json(obj) -> str:
    """Serialize to a canonical JSON string (no trailing newline)."""
    try:
        import numpy as np

        if isinstance(obj, np.ndarray):
            obj = obj.tolist()
        elif isinstance(obj, np.floating):
            obj = float(obj)
        elif isinstance(obj, np.integer):
            obj = int(obj)
        elif isinstance(obj, np.bool_):
            obj = bool(obj)
    except ImportError:  # pragma: no cover
        pass
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float_str(obj)
    if isinstance(obj, Fraction):
        # exact values ride as decimal/ratio strings, flagged so readers
        # don't mistake them for rounded floats
        return '{"rational":true,"value":' + json.dumps(_fraction_str(obj)) + "}"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        inner = ",".join(
            f"{json.dumps(str(k))}:{canonical_json(v)}" for k, v in items
        )
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if hasattr(obj, "to_json_dict"):
        return canonical_json(obj.to_json_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__} canonically")


def render_report(payload, timestamp=True) -> str:
    """Canonical JSON document with an optional isolated timestamp key.

    The timestamp is injected after canonicalization so the remainder of the
    byte stream is independent of wall-clock time.
    """
    body = canonical_json(payload)
    if not timestamp:
        return body + "\n"
    if not body.startswith("{"):
        raise TypeError("timestamped reports must be JSON objects")
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    head = f'"timestamp":{json.dumps(stamp)}'
    if body == "{}":
        return "{" + head + "}\n"
    return "{" + head + "," + body[1:] + "\n"


def write_report(path, payload, timestamp=True):
    text = render_report(payload, timestamp=timestamp)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def strip_timestamp(text: str) -> str:
    """Remove the isolated timestamp key for byte comparison."""
    doc = json.loads(text)
    doc.pop("timestamp", None)
    return canonical_json(doc) + "\n"


def write_trace_csv(path, columns, rows):
    """Plain CSV with %.17g floats; `rows` is an iterable of tuples."""
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    "%.17g" % v if isinstance(v, float) else str(v) for v in row
                )
                + "\n"
            )
