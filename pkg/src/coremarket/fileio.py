"""Line-oriented text formats for markets, allocations, matchings and digraphs.

Market file::

    market v1
    agent a
    agent b
    accept a : b c          # acceptable houses (own house implied)
    cover a : b < c         # a prefers c to b
    list b : a > @self      # best-first shorthand; [x y] is a tie class

Allocation lines are ``a -> b``; matching lines are ``a -- b``; a digraph is
``n m`` followed by ``m`` lines ``u v`` (1-indexed).
"""

from __future__ import annotations

import re
from typing import Sequence

from .errors import (
    InvalidMatching,
    MarketSyntaxError,
    UnknownAgent,
)
from .market import SELF, Allocation, HousingMarket, RawMarket, validate_allocation, validate_market

_NAME = re.compile(r"^[^\s:<>\[\]#@]+$")


def _lines(text: str):
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _check_name(lineno: int, name: str) -> str:
    if not _NAME.match(name) or name in ("->", "--"):
        raise MarketSyntaxError(lineno, f"invalid agent name {name!r}")
    return name


def _house(lineno: int, token: str) -> str:
    return token if token == SELF else _check_name(lineno, token)


def _split_owner(lineno: int, rest: str) -> tuple[str, str]:
    if ":" not in rest:
        raise MarketSyntaxError(lineno, "expected '<owner> : ...'")
    owner, body = rest.split(":", 1)
    owner = owner.strip()
    if not owner:
        raise MarketSyntaxError(lineno, "missing owner before ':'")
    return _check_name(lineno, owner), body.strip()


def _parse_list(lineno: int, body: str) -> list[list[str]]:
    classes: list[list[str]] = []
    for part in body.split(">"):
        part = part.strip()
        if not part:
            raise MarketSyntaxError(lineno, "empty entry in preference list")
        if part.startswith("["):
            if not part.endswith("]"):
                raise MarketSyntaxError(lineno, f"unterminated tie {part!r}")
            names = part[1:-1].split()
            if not names:
                raise MarketSyntaxError(lineno, "empty tie class")
        else:
            names = part.split()
            if len(names) != 1:
                raise MarketSyntaxError(lineno, f"use brackets for ties: {part!r}")
        classes.append([_house(lineno, t) for t in names])
    return classes


def parse_raw_market(text: str) -> RawMarket:
    lines = list(_lines(text))
    if not lines or lines[0][1].split() != ["market", "v1"]:
        lineno = lines[0][0] if lines else 1
        raise MarketSyntaxError(lineno, "expected header 'market v1'")
    raw = RawMarket([])
    for lineno, line in lines[1:]:
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "agent":
            raw.agents.append(_check_name(lineno, rest))
        elif word == "accept":
            owner, body = _split_owner(lineno, rest)
            raw.accept.setdefault(owner, set()).update(_house(lineno, t) for t in body.split())
        elif word == "cover":
            owner, body = _split_owner(lineno, rest)
            parts = [t.strip() for t in body.split("<")]
            if len(parts) != 2 or not all(parts):
                raise MarketSyntaxError(lineno, "expected 'cover <owner> : <x> < <y>'")
            x, y = (_house(lineno, t) for t in parts)
            raw.relations.setdefault(owner, []).append((x, y))
        elif word == "list":
            owner, body = _split_owner(lineno, rest)
            classes = _parse_list(lineno, body)
            if not any(SELF in c or owner in c for c in classes):
                classes.append([SELF])
            raw.accept.setdefault(owner, set()).update(x for c in classes for x in c)
            rel = raw.relations.setdefault(owner, [])
            for hi, lo in zip(classes, classes[1:]):
                rel.extend((w, b) for b in hi for w in lo)
        else:
            raise MarketSyntaxError(lineno, f"unknown directive {word!r}")
    if not raw.agents:
        raise MarketSyntaxError(lines[0][0], "at least one agent required")
    return raw


def parse_market(text: str) -> HousingMarket:
    return validate_market(parse_raw_market(text))


def serialize_market(H: HousingMarket) -> str:
    """Canonical poset form: agents in ordinal order, covers sorted by ordinal."""
    names = H.names
    out = ["market v1"]
    out.extend(f"agent {name}" for name in names)
    for a, poset in enumerate(H.prefs):
        others = sorted(b for b in poset.acceptable if b != a)
        if others:
            out.append(f"accept {names[a]} : " + " ".join(names[b] for b in others))
        for x, y in sorted(poset.covers):
            out.append(f"cover {names[a]} : {names[x]} < {names[y]}")
    return "\n".join(out) + "\n"


def serialize_lists(H: HousingMarket) -> str:
    """Shorthand form; only valid when every preference is a weak order."""
    names = H.names
    out = ["market v1"]
    out.extend(f"agent {name}" for name in names)
    for a, poset in enumerate(H.prefs):
        levels = poset.tie_classes()
        if levels is None:
            raise ValueError(f"preferences of {names[a]} are not a weak order")
        if levels == [(a,)]:
            continue
        parts = []
        for cls in levels:
            toks = [SELF if x == a else names[x] for x in cls]
            parts.append(toks[0] if len(toks) == 1 else "[" + " ".join(toks) + "]")
        out.append(f"list {names[a]} : " + " > ".join(parts))
    return "\n".join(out) + "\n"


def parse_allocation(text: str, H: HousingMarket) -> Allocation:
    X: list[int | None] = [None] * H.n
    for lineno, line in _lines(text):
        parts = [t.strip() for t in line.split("->")]
        if len(parts) != 2:
            raise MarketSyntaxError(lineno, "expected '<agent> -> <house>'")
        a, b = (H.agent(t) for t in parts)
        if X[a] is not None:
            raise MarketSyntaxError(lineno, f"agent {parts[0]} assigned twice")
        X[a] = b
    # agents not mentioned keep their own house
    return validate_allocation(H, [a if b is None else b for a, b in enumerate(X)])


def serialize_allocation(H: HousingMarket, X: Sequence[int]) -> str:
    return "".join(f"{H.names[a]} -> {H.names[b]}\n" for a, b in enumerate(X))


def parse_matching(text: str, names: Sequence[str]) -> tuple[int | None, ...]:
    index = {name: i for i, name in enumerate(names)}
    mate: list[int | None] = [None] * len(names)
    for lineno, line in _lines(text):
        parts = [t.strip() for t in line.split("--")]
        if len(parts) != 2:
            raise MarketSyntaxError(lineno, "expected '<agent> -- <agent>'")
        try:
            a, b = (index[t] for t in parts)
        except KeyError as e:
            raise UnknownAgent(f"line {lineno}: unknown agent {e.args[0]!r}") from None
        if a == b or mate[a] is not None or mate[b] is not None:
            raise InvalidMatching(f"line {lineno}: agents matched twice or to themselves")
        mate[a], mate[b] = b, a
    return tuple(mate)


def serialize_matching(names: Sequence[str], mate: Sequence[int | None]) -> str:
    return "".join(
        f"{names[a]} -- {names[b]}\n"
        for a, b in enumerate(mate) if b is not None and a < b)


def parse_digraph_text(text: str) -> tuple[int, list[tuple[int, int]]]:
    """Return ``(n, arcs)`` with 0-indexed arcs; validation is left to the caller."""
    lines = list(_lines(text))
    if not lines:
        raise MarketSyntaxError(1, "expected 'n m' header")
    lineno, head = lines[0]
    try:
        n, m = (int(t) for t in head.split())
    except ValueError:
        raise MarketSyntaxError(lineno, "expected 'n m' header") from None
    if len(lines) - 1 != m:
        raise MarketSyntaxError(lineno, f"header announces {m} arcs, found {len(lines) - 1}")
    arcs = []
    for lineno, line in lines[1:]:
        try:
            u, v = (int(t) for t in line.split())
        except ValueError:
            raise MarketSyntaxError(lineno, "expected 'u v'") from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise MarketSyntaxError(lineno, f"vertex out of range 1..{n}")
        arcs.append((u - 1, v - 1))
    return n, arcs


def serialize_digraph_text(n: int, arcs: Sequence[tuple[int, int]]) -> str:
    body = "".join(f"{u + 1} {v + 1}\n" for u, v in arcs)
    return f"{n} {len(arcs)}\n" + body
