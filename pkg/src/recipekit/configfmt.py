"""Line-oriented ``key = value`` format over (nested) dataclasses.

Keys are dotted field paths (``optimizer.lr``).  Values are typed by the field
annotation: ``int``, ``float``, ``bool`` (true/false), ``str``, tuples written
as comma-separated items, and ``Optional[...]`` accepting ``none``.  ``#``
starts a comment.  Canonical output sorts keys alphabetically, one per line,
LF endings.
"""

import dataclasses
import math
import typing

from .errors import ConfigParseError


def _hints(cls):
    return typing.get_type_hints(cls)


def field_types(cls, prefix=""):
    """Map every leaf dotted key of dataclass ``cls`` to its annotation."""
    out = {}
    hints = _hints(cls)
    for f in dataclasses.fields(cls):
        tp = hints[f.name]
        if dataclasses.is_dataclass(tp):
            out.update(field_types(tp, prefix + f.name + "."))
        else:
            out[prefix + f.name] = tp
    return out


def _parse_scalar(text, tp):
    if tp is bool:
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if tp is int:
        return int(text)
    if tp is float:
        return float(text)
    if tp is str:
        if not text:
            raise ValueError("empty string")
        return text
    raise TypeError(f"unsupported field type {tp}")


def parse_value(text, tp):
    text = text.strip()
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union:
        inner = [a for a in args if a is not type(None)]
        if text.lower() == "none":
            return None
        return parse_value(text, inner[0])
    if origin is tuple:
        items = [t for t in (s.strip() for s in text.split(",")) if t != ""]
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_parse_scalar(t, args[0]) for t in items)
        if len(items) != len(args):
            raise ValueError(f"expected {len(args)} comma-separated items, got {len(items)}")
        return tuple(_parse_scalar(t, a) for t, a in zip(items, args))
    return _parse_scalar(text, tp)


def format_value(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def parse_overrides(text, cls):
    """Parse ``text`` into ``{dotted_key: typed_value}`` for dataclass ``cls``."""
    types = field_types(cls)
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"malformed line (expected 'key = value'): {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigParseError(f"unknown key {key!r}", lineno, key)
        try:
            out[key] = parse_value(value, types[key])
        except (ValueError, TypeError) as exc:
            raise ConfigParseError(f"bad value for {key!r}: {exc}", lineno, key) from None
    return out


def get_path(obj, key):
    for part in key.split("."):
        obj = getattr(obj, part)
    return obj


def apply_overrides(obj, overrides):
    """Return a copy of dataclass ``obj`` with dotted-key ``overrides`` applied."""
    nested = {}
    direct = {}
    for key, value in overrides.items():
        head, _, rest = key.partition(".")
        if rest:
            nested.setdefault(head, {})[rest] = value
        else:
            direct[head] = value
    for head, sub in nested.items():
        direct[head] = apply_overrides(getattr(obj, head), sub)
    return dataclasses.replace(obj, **direct)


def serialize(obj):
    """Canonical text form: every leaf key, sorted, ``key = value``."""
    keys = sorted(field_types(type(obj)))
    return "".join(f"{k} = {format_value(get_path(obj, k))}\n" for k in keys)


def deserialize(text, cls, base):
    return apply_overrides(base, parse_overrides(text, cls))
