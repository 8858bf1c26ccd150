"""Hardness gadgets built from Acyclic Partition instances.

Given a simple digraph ``D`` on ``v1..vn`` the arc-in-core gadget has agents
``a*, b*, a0, b0`` and ``a_i, b_i, c_i, d_i`` for each vertex, with strict
preferences (best first, own house last)::

    a*:  b*
    b*:  a0, a1, ..., an, a*
    a_i: b_i, b*                        (0 <= i <= n)
    b_i: c_{i+1}, d_{i+1}               (0 <= i < n)
    bn:  a0
    c_i: d_i, c_j for arcs (v_i, v_j) by ascending j, a_i
    d_i: c_i, d_j for arcs (v_i, v_j) by ascending j, a_i

Some core allocation contains ``(a*, b*)`` iff ``D`` splits into two acyclic
vertex sets. The forbidden-arc variant adds ``s*`` (``a*: b*, s*`` and
``s*: a*``); then a core allocation contains ``(a*, b*)`` iff it avoids
``(a*, s*)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import BadParams, KTooLarge, LoopInDigraph
from .fileio import parse_digraph_text, serialize_digraph_text
from .market import HousingMarket, from_lists

DEFAULT_K_CAP = 4096


@dataclass(frozen=True)
class SimpleDigraph:
    """Vertices ``0..n-1`` (shown 1-indexed in files); no loops or parallel arcs."""

    n: int
    arcs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 0:
            raise BadParams("vertex count must be non-negative")
        arcs = tuple(sorted(set(self.arcs)))
        if len(arcs) != len(self.arcs):
            raise BadParams("parallel arcs are not allowed")
        for u, v in arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise BadParams(f"arc ({u + 1}, {v + 1}) leaves the vertex range")
            if u == v:
                raise LoopInDigraph(f"loop at vertex {u + 1}")
        object.__setattr__(self, "arcs", arcs)

    def out(self, u: int) -> list[int]:
        return [v for x, v in self.arcs if x == u]

    @classmethod
    def parse(cls, text: str) -> "SimpleDigraph":
        n, arcs = parse_digraph_text(text)
        return cls(n, tuple(arcs))

    def serialize(self) -> str:
        return serialize_digraph_text(self.n, self.arcs)


def is_acyclic(D: SimpleDigraph, part: Sequence[int]) -> bool:
    inside = set(part)
    indeg = {v: 0 for v in inside}
    for u, v in D.arcs:
        if u in inside and v in inside:
            indeg[v] += 1
    ready = [v for v in inside if indeg[v] == 0]
    seen = 0
    while ready:
        u = ready.pop()
        seen += 1
        for v in D.out(u):
            if v in inside:
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
    return seen == len(inside)


def acyclic_partition(D: SimpleDigraph) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Brute force over all 2-colourings; returns the first acyclic split found."""
    for mask in range(1 << max(D.n - 1, 0)):
        # vertex n-1 always goes to the second side (symmetry)
        V1 = tuple(v for v in range(D.n) if v < D.n - 1 and mask >> v & 1)
        V2 = tuple(v for v in range(D.n) if v not in V1)
        if is_acyclic(D, V1) and is_acyclic(D, V2):
            return V1, V2
    return None


def has_acyclic_partition(D: SimpleDigraph) -> bool:
    return acyclic_partition(D) is not None


def all_digraphs(n: int) -> Iterator[SimpleDigraph]:
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    for mask in range(1 << len(pairs)):
        yield SimpleDigraph(n, tuple(p for i, p in enumerate(pairs) if mask >> i & 1))


def smallest_no_instance(max_n: int = 5) -> SimpleDigraph:
    """Fewest vertices, then fewest arcs, then first in enumeration order."""
    for n in range(1, max_n + 1):
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
        for m in range(len(pairs) + 1):
            for arcs in itertools.combinations(pairs, m):
                D = SimpleDigraph(n, arcs)
                if not has_acyclic_partition(D):
                    return D
    raise ValueError(f"no digraph without an acyclic partition on at most {max_n} vertices")


# --- gadgets -----------------------------------------------------------------

def _gadget_lists(D: SimpleDigraph, with_s: bool) -> tuple[list[str], dict[str, list[str]]]:
    n = D.n
    agents = ["a*", "b*", "a0", "b0"]
    for i in range(1, n + 1):
        agents += [f"a{i}", f"b{i}", f"c{i}", f"d{i}"]
    lists: dict[str, list[str]] = {
        "a*": ["b*", "s*"] if with_s else ["b*"],
        "b*": [f"a{i}" for i in range(n + 1)] + ["a*"],
    }
    for i in range(n + 1):
        lists[f"a{i}"] = [f"b{i}", "b*"]
        lists[f"b{i}"] = [f"c{i + 1}", f"d{i + 1}"] if i < n else ["a0"]
    for i in range(1, n + 1):
        succ = sorted(v + 1 for v in D.out(i - 1))
        lists[f"c{i}"] = [f"d{i}"] + [f"c{j}" for j in succ] + [f"a{i}"]
        lists[f"d{i}"] = [f"c{i}"] + [f"d{j}" for j in succ] + [f"a{i}"]
    if with_s:
        agents.append("s*")
        lists["s*"] = ["a*"]
    return agents, lists


def gadget_arc_in_core(D: SimpleDigraph) -> tuple[HousingMarket, tuple[int, int]]:
    H = from_lists(*_gadget_lists(D, False))
    return H, (H.agent("a*"), H.agent("b*"))


def gadget_forbidden_arc(D: SimpleDigraph) -> tuple[HousingMarket, tuple[int, int]]:
    H = from_lists(*_gadget_lists(D, True))
    return H, (H.agent("a*"), H.agent("s*"))


def _iroot_ceil(x: int, k: int) -> int:
    """Smallest r with r**k >= x."""
    if x <= 1:
        return x
    lo, hi = 1, 1 << (x.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** k >= x:
            hi = mid
        else:
            lo = mid + 1
    return lo


def subdivision_k(n: int, epsilon: Fraction | float | str) -> int:
    """K = ceil((4n+4) ** (1/epsilon)), computed exactly for rational epsilon."""
    eps = Fraction(epsilon)
    if not 0 < eps <= 1:
        raise BadParams("epsilon must lie in (0, 1]")
    base = 4 * n + 4
    # K**num >= base**den with epsilon = num/den
    return _iroot_ceil(base ** eps.denominator, eps.numerator)


def gadget_maxcore(
    D: SimpleDigraph,
    epsilon: Fraction | float | str = 1,
    *,
    force_k: int | None = None,
    k_cap: int = DEFAULT_K_CAP,
) -> HousingMarket:
    """Arc-in-core gadget with ``(a*, b*)`` subdivided by agents ``p1..pK``."""
    if force_k is not None:
        if force_k < 1:
            raise BadParams("K must be at least 1")
        K = force_k
    else:
        K = subdivision_k(D.n, epsilon)
        if K > k_cap:
            raise KTooLarge(f"K = {K} exceeds the cap {k_cap}; pass force_k to override")
    agents, lists = _gadget_lists(D, False)
    agents += [f"p{i}" for i in range(1, K + 1)]
    lists["a*"] = ["p1"]
    for i in range(1, K + 1):
        lists[f"p{i}"] = [f"p{i + 1}" if i < K else "b*"]
    return from_lists(agents, lists)


def gadget_strict_improvement(kind: str, D: SimpleDigraph) -> tuple[HousingMarket, HousingMarket, int]:
    """``(before, after, p)`` where ``after`` is a p-improvement of ``before``.

    PSIB: ``after`` is the arc-in-core gadget and ``before`` drops ``a*`` from
    ``b*``'s list (p = a*). PSIW: ``after`` is the forbidden-arc gadget and
    ``before`` drops ``s*`` from ``a*``'s list (p = s*).
    """
    kind = kind.upper()
    if kind == "PSIB":
        agents, lists = _gadget_lists(D, False)
        after = from_lists(agents, lists)
        lists["b*"] = [x for x in lists["b*"] if x != "a*"]
        return from_lists(agents, lists), after, after.agent("a*")
    if kind == "PSIW":
        agents, lists = _gadget_lists(D, True)
        after = from_lists(agents, lists)
        lists["a*"] = ["b*"]
        return from_lists(agents, lists), after, after.agent("s*")
    raise BadParams("kind must be PSIB or PSIW")
