"""Minimal key-value config parser (a small YAML-ish subset, no dependency).

Supports `key: value` and `key = value`, quoted or bare scalars, booleans,
ints, floats, inline lists, and bracketed lists spanning multiple lines —
enough to read task, training, expert, cohort, and attack files verbatim.
"""
from __future__ import annotations

__all__ = ["parse_kv_text", "parse_kv_blocks", "format_kv"]


class ConfigParseError(ValueError):
    pass


def _scalar(text: str):
    t = text.strip()
    if not t:
        return ""
    if (t[0] == t[-1] == '"' or t[0] == t[-1] == "'") and len(t) >= 2:
        return t[1:-1]
    low = t.lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def _split_items(body: str):
    items = []
    for piece in body.split(","):
        piece = piece.strip()
        if piece:
            items.append(_scalar(piece))
    return items


def parse_kv_text(text: str) -> dict:
    out: dict = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i]
        line = _strip_comment(raw).strip()
        i += 1
        if not line:
            continue
        if ":" in line:
            key, _, rest = line.partition(":")
        elif "=" in line:
            key, _, rest = line.partition("=")
        else:
            raise ConfigParseError(f"line {i}: expected 'key: value', got {raw!r}")
        key = key.strip()
        rest = rest.strip()
        if rest.startswith("[") and not rest.endswith("]"):
            # bracketed list continuing over following lines
            buf = rest[1:]
            closed = False
            while i < len(lines):
                piece = _strip_comment(lines[i]).strip()
                i += 1
                if piece.endswith("]"):
                    buf += "," + piece[:-1]
                    closed = True
                    break
                buf += "," + piece
            if not closed:
                raise ConfigParseError(f"unterminated list for key {key!r}")
            out[key] = _split_items(buf)
        elif rest.startswith("[") and rest.endswith("]"):
            out[key] = _split_items(rest[1:-1])
        else:
            out[key] = _scalar(rest)
    return out


def _strip_comment(line: str) -> str:
    in_quote = None
    for i, ch in enumerate(line):
        if in_quote:
            if ch == in_quote:
                in_quote = None
        elif ch in ("'", '"'):
            in_quote = ch
        elif ch == "#":
            return line[:i]
    return line


def parse_kv_blocks(text: str) -> list[dict]:
    """Blank-line-separated key-value blocks (one block per expert, etc.)."""
    blocks = []
    current: list[str] = []
    for line in text.splitlines() + [""]:
        if line.strip():
            current.append(line)
        elif current:
            blocks.append(parse_kv_text("\n".join(current)))
            current = []
    return blocks


def format_kv(d: dict) -> str:
    lines = []
    for k, v in d.items():
        if isinstance(v, (list, tuple)):
            inner = ", ".join(f'"{x}"' if isinstance(x, str) else str(x) for x in v)
            lines.append(f"{k}: [{inner}]")
        elif isinstance(v, bool):
            lines.append(f"{k}: {'true' if v else 'false'}")
        elif isinstance(v, str):
            lines.append(f'{k}: "{v}"')
        else:
            lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"
