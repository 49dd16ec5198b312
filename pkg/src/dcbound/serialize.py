"""Line-oriented witness serialization.

Witnesses share the instance file conventions (blank lines and '#' comments
ignored, exact rational values):

    h {1,3} = 7/2          polymatroid function value
    lambda {2} = 1         coverage weight
    z 1 = 2                modular weight
    delta 1 = 1/3          dual capacity (1-based constraint index)
    sigma {1}|{2} = 1/2    submodularity dual (unordered incomparable pair)
    mu {1,2}->{1} = 1      monotonicity dual (upper -> lower)
"""

from __future__ import annotations

import re

from .core import ParseError, lex_key, set_str
from .ratio import Rat, RAT0, format_rational, parse_rational

_SET = r"\{[0-9, ]*\}"
_LINE_RES = {
    "h": re.compile(rf"^h\s*(?P<a>{_SET})\s*=\s*(?P<v>\S+)$"),
    "lambda": re.compile(rf"^lambda\s*(?P<a>{_SET})\s*=\s*(?P<v>\S+)$"),
    "z": re.compile(r"^z\s*(?P<a>\d+)\s*=\s*(?P<v>\S+)$"),
    "delta": re.compile(r"^delta\s*(?P<a>\d+)\s*=\s*(?P<v>\S+)$"),
    "sigma": re.compile(rf"^sigma\s*(?P<a>{_SET})\s*\|\s*(?P<b>{_SET})\s*=\s*(?P<v>\S+)$"),
    "mu": re.compile(rf"^mu\s*(?P<a>{_SET})\s*->\s*(?P<b>{_SET})\s*=\s*(?P<v>\S+)$"),
}


def _set_mask(text: str) -> int:
    body = text.strip()[1:-1].strip()
    if not body:
        return 0
    mask = 0
    for part in body.split(","):
        mask |= 1 << (int(part) - 1)
    return mask


def sigma_key(a: int, b: int) -> tuple[int, int]:
    """Canonical unordered key: lexicographically smaller member tuple first."""
    return (a, b) if lex_key(a) <= lex_key(b) else (b, a)


def parse_witness(source) -> dict:
    """Parse witness lines into a dict of per-kind maps.

    Returns {'h': {mask: Rat}, 'lambda': {mask: Rat}, 'z': {attr: Rat},
    'delta': {index0: Rat}, 'sigma': {(a,b): Rat}, 'mu': {(x,y): Rat}}
    with only the kinds that appear.
    """
    text = source.read() if hasattr(source, "read") else source
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind = line.split(None, 1)[0].split("{", 1)[0]
        rex = _LINE_RES.get(kind)
        m = rex.match(line) if rex else None
        if not m:
            raise ParseError(f"malformed witness line {line!r}", lineno)
        try:
            val = parse_rational(m.group("v"))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        bucket = out.setdefault(kind, {})
        if kind in ("h", "lambda"):
            bucket[_set_mask(m.group("a"))] = val
        elif kind == "z":
            bucket[int(m.group("a"))] = val
        elif kind == "delta":
            bucket[int(m.group("a")) - 1] = val
        elif kind == "sigma":
            bucket[sigma_key(_set_mask(m.group("a")), _set_mask(m.group("b")))] = val
        else:  # mu {upper}->{lower}: stored as (lower, upper)
            upper = _set_mask(m.group("a"))
            lower = _set_mask(m.group("b"))
            bucket[(lower, upper)] = val
    return out


def render_witness(parts: dict, include_zero: bool = False) -> str:
    """Render per-kind maps in the canonical line format (sorted keys)."""
    lines = []
    for kind in ("h", "lambda", "z", "delta", "sigma", "mu"):
        if kind not in parts:
            continue
        entries = parts[kind]
        for key in sorted(entries, key=_sort_key(kind)):
            val = entries[key]
            if not include_zero and Rat(val) == RAT0:
                continue
            lines.append(_format_entry(kind, key, val))
    return "\n".join(lines) + ("\n" if lines else "")


def _sort_key(kind):
    if kind in ("h", "lambda"):
        return lex_key
    if kind in ("z", "delta"):
        return lambda k: k
    if kind == "sigma":
        return lambda k: (lex_key(k[0]), lex_key(k[1]))
    return lambda k: (lex_key(k[1]), lex_key(k[0]))  # mu: by upper then lower


def _format_entry(kind, key, val) -> str:
    v = format_rational(val)
    if kind in ("h", "lambda"):
        return f"{kind} {set_str(key)} = {v}"
    if kind == "z":
        return f"z {key} = {v}"
    if kind == "delta":
        return f"delta {key + 1} = {v}"
    if kind == "sigma":
        return f"sigma {set_str(key[0])}|{set_str(key[1])} = {v}"
    lower, upper = key
    return f"mu {set_str(upper)}->{set_str(lower)} = {v}"
