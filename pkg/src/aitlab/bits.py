"""Finite bit strings, prefix order and self-delimiting codes.

Bit strings are plain ``str`` values over ``'0'``/``'1'``; the empty string is
the empty word (written ``eps`` in text files).
"""

from __future__ import annotations

from collections.abc import Iterator

from aitlab.errors import LengthMismatch, MalformedCode

EMPTY = ""
EPS_TOKEN = "eps"


def check_bits(x: str) -> str:
    if x.strip("01"):
        raise ValueError(f"not a bit string: {x!r}")
    return x


def is_prefix(x: str, y: str) -> bool:
    """``x`` is a (not necessarily proper) prefix of ``y``."""
    return y.startswith(x)


def is_proper_prefix(x: str, y: str) -> bool:
    return len(x) < len(y) and y.startswith(x)


def parent(x: str) -> str:
    """Drop the last bit. The empty string has no parent."""
    if not x:
        raise ValueError("the empty string has no parent")
    return x[:-1]


def self_delimit(x: str) -> str:
    """Unary length, a ``0`` terminator, then the payload: ``1^len(x) 0 x``."""
    return "1" * len(x) + "0" + x


def parse_self_delimited(s: str) -> tuple[str, str]:
    """Split ``s`` into the decoded payload and the unread remainder."""
    n = s.find("0")
    if n < 0:
        raise MalformedCode(f"no terminator in {s!r}")
    end = 2 * n + 1
    if len(s) < end:
        raise MalformedCode(f"code announces {n} payload bits, only {len(s) - n - 1} present")
    return s[n + 1 : end], s[end:]


def pair_encode(x: str, y: str) -> str:
    """Injective pairing: both components self-delimited."""
    return self_delimit(x) + self_delimit(y)


def parse_pair(s: str) -> tuple[str, str]:
    x, rest = parse_self_delimited(s)
    y, rest = parse_self_delimited(rest)
    if rest:
        raise MalformedCode(f"trailing bits after pair: {rest!r}")
    return x, y


def numeric_less(x: str, y: str) -> bool:
    """Strict order on equal-length strings read as big-endian integers."""
    if len(x) != len(y):
        raise LengthMismatch(f"lengths differ: {len(x)} vs {len(y)}")
    return x < y  # lexicographic order coincides with numeric order at equal length


def strings_of_length(n: int) -> Iterator[str]:
    if n == 0:
        yield ""
        return
    for i in range(1 << n):
        yield format(i, f"0{n}b")


def strings_up_to(n: int) -> Iterator[str]:
    """All strings of length at most ``n`` in length-then-lex order."""
    for k in range(n + 1):
        yield from strings_of_length(k)


def canonical_key(x: str) -> tuple[int, str]:
    return (len(x), x)


def canonical_index(x: str) -> int:
    """Position of ``x`` in the length-then-lex enumeration of all strings."""
    return (1 << len(x)) - 1 + (int(x, 2) if x else 0)


def string_at(index: int) -> str:
    if index < 0:
        raise ValueError("index must be nonnegative")
    n = (index + 1).bit_length() - 1
    offset = index + 1 - (1 << n)
    return format(offset, f"0{n}b") if n else ""


def to_text(x: str) -> str:
    return x if x else EPS_TOKEN


def from_text(token: str) -> str:
    if token in ("", EPS_TOKEN):
        return ""
    return check_bits(token)
