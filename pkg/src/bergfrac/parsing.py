"""Text formats: weight specs, series literals and experiment config files.

Weight grammar::

    weight  := base suffix*
    base    := "std:alpha=" NUM | "log:beta=" NUM | "exp:c=" NUM
             | "zero:[" NUM "," NUM "]:" base
             | "tab:[" NUM ":" NUM ("," NUM ":" NUM)* "]"
             | "(" weight ")"
    suffix  := "+" | "*" | "~" | "^alpha=" NUM | "^r2"

The base of ``zero:`` takes no suffixes unless parenthesised, so
``zero:[0.3,0.4]:std:alpha=1+`` is the plus transform of the zero-annulus
weight while ``zero:[0.3,0.4]:(std:alpha=1+)`` zeroes the transformed base.
Every weight label produced by :mod:`bergfrac.weights` parses back to an
equal weight.

Series literals: ``poly:[c0,c1,...]`` (Python complex syntax allowed),
``logfn`` and ``geom``, optionally ``@N`` for the truncation degree.

Config files hold one ``key = value`` per line; ``#`` starts a comment and
list values are bracketed, ``[a, b, [c, d]]``, split at top-level commas.
"""

from __future__ import annotations

import re

from .series import PowerSeries
from .weights import (
    Exponential,
    Logarithmic,
    RadialWeight,
    Standard,
    Tabulated,
    ZeroAnnulus,
    alpha_shift,
    plus_transform,
    r2_multiply,
    star_transform,
    tilde_weight,
)

_NUM = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
DEFAULT_SERIES_DEGREE = 64


class ParseError(ValueError):
    """Malformed input; ``position`` is the 0-based offset of the problem."""

    def __init__(self, text: str, position: int, message: str):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}\n  {text}\n  {' ' * position}^")


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message):
        return ParseError(self.text, self.pos, message)

    def peek(self, literal: str) -> bool:
        return self.text.startswith(literal, self.pos)

    def take(self, literal: str) -> bool:
        if self.peek(literal):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str):
        if not self.take(literal):
            raise self.error(f"expected {literal!r}")

    def number(self) -> float:
        m = _NUM.match(self.text, self.pos)
        if not m:
            raise self.error("expected a number")
        self.pos = m.end()
        return float(m.group())

    def done(self) -> bool:
        return self.pos >= len(self.text)


def _base(cur: _Cursor) -> RadialWeight:
    start = cur.pos
    try:
        if cur.take("("):
            w = _weight(cur)
            cur.expect(")")
            return w
        if cur.take("std:alpha="):
            return Standard(cur.number())
        if cur.take("log:beta="):
            return Logarithmic(cur.number())
        if cur.take("exp:c="):
            return Exponential(cur.number())
        if cur.take("zero:["):
            a = cur.number()
            cur.expect(",")
            b = cur.number()
            cur.expect("]:")
            return ZeroAnnulus(_base(cur), a, b)
        if cur.take("tab:["):
            rs, ws = [], []
            while True:
                rs.append(cur.number())
                cur.expect(":")
                ws.append(cur.number())
                if cur.take("]"):
                    break
                cur.expect(",")
            return Tabulated(tuple(rs), tuple(ws))
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(cur.text, start, str(exc)) from None
    raise cur.error("expected a weight (std:, log:, exp:, zero:, tab: or '(')")


def _weight(cur: _Cursor) -> RadialWeight:
    w = _base(cur)
    while True:
        if cur.take("+"):
            w = plus_transform(w)
        elif cur.take("*"):
            w = star_transform(w)
        elif cur.take("~"):
            w = tilde_weight(w)
        elif cur.take("^r2"):
            w = r2_multiply(w)
        elif cur.take("^alpha="):
            at = cur.pos
            a = cur.number()
            if a < 0:
                raise ParseError(cur.text, at, "alpha shift needs alpha >= 0")
            w = alpha_shift(w, a)
        else:
            return w


def parse_weight_spec(text: str) -> RadialWeight:
    """Parse the weight mini-language; errors carry the offending position."""
    cur = _Cursor(text.strip())
    w = _weight(cur)
    if not cur.done():
        raise cur.error("unexpected trailing input")
    return w


def parse_series_literal(text: str, degree: int = DEFAULT_SERIES_DEGREE) -> PowerSeries:
    """``poly:[...]``, ``logfn[@N]`` or ``geom[@N]``."""
    text = text.strip()
    if text.startswith("poly:"):
        if not (text[5:6] == "[" and text.endswith("]")):
            raise ParseError(text, 5, "expected poly:[c0,c1,...]")
        coeffs, pos = [], 6
        for item in text[6:-1].split(","):
            try:
                coeffs.append(complex(item.replace(" ", "")))
            except ValueError:
                raise ParseError(text, pos, f"bad coefficient {item.strip()!r}") from None
            pos += len(item) + 1
        return PowerSeries(coeffs)
    name, sep, deg = text.partition("@")
    if sep:
        if not deg.isdigit():
            raise ParseError(text, len(name) + 1, "expected an integer degree")
        degree = int(deg)
    if name == "logfn":
        return PowerSeries.logfn(degree)
    if name == "geom":
        return PowerSeries.geom(degree)
    raise ParseError(text, 0, "expected poly:[...], logfn or geom")


def split_top_level(body: str) -> list[str]:
    """Split at commas outside brackets and parentheses."""
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail or parts:
        parts.append(tail)
    return [p for p in parts if p]


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` config; bracketed values become lists of strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParseError(raw, 0, f"line {lineno}: expected key = value")
        if key in out:
            raise ParseError(raw, 0, f"line {lineno}: duplicate key {key!r}")
        if value.startswith("["):
            if not value.endswith("]"):
                raise ParseError(raw, len(raw.rstrip()), f"line {lineno}: unterminated list")
            out[key] = split_top_level(value[1:-1])
        else:
            out[key] = value
    return out
