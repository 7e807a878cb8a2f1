"""Experiment config files: one ``key = value`` per line.

Keys are dotted (``metric.alpha``, ``smoothing.window_length``); ``#``
starts a comment. Values parse as bool, int, float, then plain text.
A JSON run report is also accepted, in which case its ``config`` object is
used. Precedence when merging: defaults < file < command-line flags.
"""

from __future__ import annotations

import json
from pathlib import Path

from .core import DataError

_TRUE = {"true", "on", "yes", "1"}
_FALSE = {"false", "off", "no", "0"}


def parse_value(text: str):
    s = text.strip()
    low = s.lower()
    if low in ("true", "on", "yes"):
        return True
    if low in ("false", "off", "no"):
        return False
    if low in ("none", "null"):
        return None
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
        return s[1:-1]
    return s


def as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in _TRUE:
        return True
    if s in _FALSE:
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise DataError(f"{source}:{lineno}: empty key")
        out[key] = parse_value(value)
    return out


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
        cfg = doc.get("config", doc)
        if not isinstance(cfg, dict):
            raise DataError(f"{path}: 'config' is not an object")
        return dict(cfg)
    return parse_config_text(text, str(path))


def dump_config(cfg: dict) -> str:
    lines = []
    for key in sorted(cfg):
        v = cfg[key]
        if isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


def merge(*layers: dict) -> dict:
    """Later layers win; ``None`` values never override."""
    out = {}
    for layer in layers:
        for k, v in layer.items():
            if v is not None:
                out[k] = v
    return out
