"""Housing markets with partially ordered preferences.

Agents are ordinals ``0..n-1``; agent ``a`` owns house ``a``. Each agent has a
``PreferencePoset`` over its acceptable houses, stored as a Hasse diagram
(``covers``) plus a precomputed strict up-set per house so ``prefers`` is a
set lookup.

Unacceptable houses are not stored. For comparisons involving them we use
the canonical extension: every unacceptable house lies strictly below every
acceptable one, and unacceptable houses are mutually incomparable.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    CyclicPreference,
    DuplicateAgent,
    InvalidAllocation,
    SelfDispreferred,
    UnknownAgent,
)

Allocation = tuple[int, ...]
SELF = "@self"


@dataclass(frozen=True)
class PreferencePoset:
    """Strict partial order of ``owner`` over its acceptable houses.

    ``covers`` may be passed as any relation (pairs ``(x, y)`` meaning
    ``x`` is worse than ``y``); it is normalized to the Hasse diagram.
    """

    owner: int
    acceptable: frozenset[int]
    covers: frozenset[tuple[int, int]]
    above: Mapping[int, frozenset[int]] = field(init=False, compare=False, repr=False)
    upper: Mapping[int, tuple[int, ...]] = field(init=False, compare=False, repr=False)
    lower: Mapping[int, tuple[int, ...]] = field(init=False, compare=False, repr=False)
    n_upper: Mapping[int, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        acceptable = frozenset(self.acceptable) | {self.owner}
        succ: dict[int, set[int]] = {x: set() for x in acceptable}
        for x, y in self.covers:
            if x not in acceptable or y not in acceptable:
                bad = x if x not in acceptable else y
                raise SelfDispreferred(
                    f"agent {self.owner}: relation {x} < {y} names unacceptable house {bad}")
            if x == y:
                raise CyclicPreference(f"agent {self.owner}: {x} < {x}")
            succ[x].add(y)

        # Kahn on the reversed relation: process houses top-down
        pred: dict[int, list[int]] = {x: [] for x in acceptable}
        for x in acceptable:
            for y in succ[x]:
                pred[y].append(x)
        out_left = {x: len(succ[x]) for x in acceptable}
        ready = deque(sorted(x for x in acceptable if out_left[x] == 0))
        order = []
        while ready:
            y = ready.popleft()
            order.append(y)
            for x in pred[y]:
                out_left[x] -= 1
                if out_left[x] == 0:
                    ready.append(x)
        if len(order) != len(acceptable):
            stuck = sorted(x for x in acceptable if out_left[x] > 0)
            raise CyclicPreference(
                f"agent {self.owner}: preference relation has a cycle through {stuck}")

        above: dict[int, frozenset[int]] = {}
        shared: dict[frozenset[int], frozenset[int]] = {}  # tied houses share one set
        for x in order:
            s: set[int] = set()
            for y in succ[x]:
                s.add(y)
                s |= above[y]
            fs = frozenset(s)
            above[x] = shared.setdefault(fs, fs)

        for x in acceptable:
            if self.owner in above[x]:
                raise SelfDispreferred(
                    f"agent {self.owner}: house {x} is ranked below the own house")

        covers = set()
        for x in acceptable:
            sx = succ[x]
            for y in sx:
                if not any(y in above[z] for z in sx if z != y):
                    covers.add((x, y))
        upper = {x: [] for x in acceptable}
        lower = {x: [] for x in acceptable}
        for x, y in covers:
            upper[x].append(y)
            lower[y].append(x)

        object.__setattr__(self, "acceptable", acceptable)
        object.__setattr__(self, "covers", frozenset(covers))
        object.__setattr__(self, "above", above)
        object.__setattr__(self, "upper", {x: tuple(sorted(v)) for x, v in upper.items()})
        object.__setattr__(self, "lower", {x: tuple(sorted(v)) for x, v in lower.items()})
        object.__setattr__(self, "n_upper", {x: len(v) for x, v in upper.items()})

    def prefers(self, x: int, y: int) -> bool:
        """True iff ``x`` is strictly worse than ``y`` for the owner."""
        up = self.above.get(x)
        if up is None:
            return y in self.acceptable
        return y in up

    def weakly_prefers(self, x: int, y: int) -> bool:
        """``x`` is weakly worse than ``y``: not ``y`` strictly worse than ``x``."""
        return not self.prefers(y, x)

    def incomparable(self, x: int, y: int) -> bool:
        return not self.prefers(x, y) and not self.prefers(y, x)

    def maximal(self) -> tuple[int, ...]:
        return tuple(sorted(x for x in self.acceptable if not self.upper[x]))

    def chain(self) -> tuple[int, ...] | None:
        """Houses best-first if the order is total on acceptable houses."""
        ranked = sorted(self.acceptable, key=lambda x: len(self.above[x]))
        for i, x in enumerate(ranked):
            if len(self.above[x]) != i:
                return None
        return tuple(ranked)

    def tie_classes(self) -> list[tuple[int, ...]] | None:
        """Best-first indifference classes if the order is a weak order."""
        by_height: dict[int, list[int]] = {}
        for x in self.acceptable:
            by_height.setdefault(len(self.above[x]), []).append(x)
        levels = [tuple(sorted(by_height[h])) for h in sorted(by_height)]
        # weak order iff every house sees exactly the shallower levels above it
        for i, cls in enumerate(levels):
            expect = frozenset(y for c in levels[:i] for y in c)
            if any(self.above[x] != expect for x in cls):
                return None
        return levels

    @property
    def size(self) -> int:
        """|H_a|: vertices plus arcs of the Hasse diagram."""
        return len(self.acceptable) + len(self.covers)


@dataclass(frozen=True)
class HousingMarket:
    names: tuple[str, ...]
    prefs: tuple[PreferencePoset, ...]
    _index: Mapping[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "prefs", tuple(self.prefs))
        index: dict[str, int] = {}
        for i, name in enumerate(self.names):
            if name in index:
                raise DuplicateAgent(f"agent {name!r} declared twice")
            index[name] = i
        if len(self.prefs) != len(self.names):
            raise ValueError("one preference poset per agent required")
        n = len(self.names)
        for i, poset in enumerate(self.prefs):
            if poset.owner != i:
                raise ValueError(f"poset {i} is owned by {poset.owner}")
            for b in poset.acceptable:
                if not 0 <= b < n:
                    raise UnknownAgent(f"agent {self.names[i]}: house {b} out of range")
        object.__setattr__(self, "_index", index)

    @property
    def n(self) -> int:
        return len(self.names)

    def agent(self, name: str | int) -> int:
        if isinstance(name, int):
            if not 0 <= name < self.n:
                raise UnknownAgent(f"agent ordinal {name} out of range")
            return name
        try:
            return self._index[name]
        except KeyError:
            raise UnknownAgent(f"unknown agent {name!r}") from None

    def acceptable(self, a: int) -> frozenset[int]:
        return self.prefs[a].acceptable

    def prefers(self, a: int, x: int, y: int) -> bool:
        """Agent ``a`` strictly prefers house ``y`` to house ``x``."""
        return self.prefs[a].prefers(x, y)

    def weakly_prefers(self, a: int, x: int, y: int) -> bool:
        return not self.prefs[a].prefers(y, x)

    @property
    def size(self) -> int:
        return sum(p.size for p in self.prefs)

    @property
    def num_arcs(self) -> int:
        """|E| of the acceptability graph, loops included."""
        return sum(len(p.acceptable) for p in self.prefs)

    def is_strict(self) -> bool:
        return all(p.chain() is not None for p in self.prefs)

    def is_weak(self) -> bool:
        return all(p.tie_classes() is not None for p in self.prefs)

    def replace(self, a: int, poset: PreferencePoset) -> "HousingMarket":
        prefs = list(self.prefs)
        prefs[a] = poset
        return HousingMarket(self.names, tuple(prefs))

    def submarket(self, agents: Iterable[int]) -> tuple["HousingMarket", tuple[int, ...]]:
        """Market restricted to ``agents``; returns it with the old ordinals."""
        keep = tuple(sorted(set(agents)))
        new_of = {a: i for i, a in enumerate(keep)}
        prefs = []
        for i, a in enumerate(keep):
            old = self.prefs[a]
            acc = frozenset(new_of[b] for b in old.acceptable if b in new_of)
            rel = frozenset(
                (new_of[x], new_of[y])
                for x in old.acceptable if x in new_of
                for y in old.above[x] if y in new_of)
            prefs.append(PreferencePoset(i, acc, rel))
        return HousingMarket(tuple(self.names[a] for a in keep), tuple(prefs)), keep


@dataclass
class RawMarket:
    """Unvalidated market description keyed by agent name."""

    agents: list[str]
    accept: dict[str, set[str]] = field(default_factory=dict)
    relations: dict[str, list[tuple[str, str]]] = field(default_factory=dict)


def validate_market(raw: RawMarket) -> HousingMarket:
    index: dict[str, int] = {}
    for name in raw.agents:
        if name in index:
            raise DuplicateAgent(f"agent {name!r} declared twice")
        index[name] = len(index)

    def resolve(owner: str, name: str) -> int:
        if name == SELF:
            return index[owner]
        if name not in index:
            raise UnknownAgent(f"agent {owner}: unknown agent {name!r}")
        return index[name]

    for owner in list(raw.accept) + list(raw.relations):
        if owner not in index:
            raise UnknownAgent(f"preferences given for unknown agent {owner!r}")

    prefs = []
    for name in raw.agents:
        acc = {resolve(name, b) for b in raw.accept.get(name, ())}
        rel = {(resolve(name, x), resolve(name, y)) for x, y in raw.relations.get(name, ())}
        prefs.append(PreferencePoset(index[name], frozenset(acc), frozenset(rel)))
    return HousingMarket(tuple(raw.agents), tuple(prefs))


def from_lists(agents: Sequence[str], lists: Mapping[str, Sequence]) -> HousingMarket:
    """Build a market from best-first lists.

    Each entry is a name, ``"@self"`` or a list/tuple of names forming a tie.
    The own house goes at the bottom unless placed explicitly; agents absent
    from ``lists`` accept only their own house.
    """
    raw = RawMarket(list(agents))
    for owner, entries in lists.items():
        classes = [list(e) if isinstance(e, (list, tuple)) else [e] for e in entries]
        if not any(SELF in c or owner in c for c in classes):
            classes.append([SELF])
        raw.accept[owner] = {x for c in classes for x in c}
        raw.relations[owner] = [
            (worse, better)
            for hi, lo in zip(classes, classes[1:])
            for better in hi for worse in lo]
    return validate_market(raw)


# --- allocations -----------------------------------------------------------

def validate_allocation(H: HousingMarket, X: Sequence[int]) -> Allocation:
    X = tuple(X)
    if len(X) != H.n:
        raise InvalidAllocation(f"allocation covers {len(X)} agents, market has {H.n}")
    if sorted(X) != list(range(H.n)):
        raise InvalidAllocation("allocation is not a bijection on the agents")
    for a, b in enumerate(X):
        if b not in H.prefs[a].acceptable:
            raise InvalidAllocation(
                f"{H.names[a]} receives unacceptable house {H.names[b]}")
    return X


def identity(H: HousingMarket) -> Allocation:
    return tuple(range(H.n))


def trading(X: Sequence[int]) -> int:
    """Number of agents that do not keep their own house (allocation size)."""
    return sum(1 for a, b in enumerate(X) if a != b)


def cycles_of(X: Sequence[int]) -> list[tuple[int, ...]]:
    seen = [False] * len(X)
    out = []
    for a in range(len(X)):
        if seen[a]:
            continue
        cyc = []
        b = a
        while not seen[b]:
            seen[b] = True
            cyc.append(b)
            b = X[b]
        out.append(tuple(cyc))
    return out


# --- graphs and verdicts ---------------------------------------------------

@dataclass(frozen=True)
class Digraph:
    """Adjacency-list digraph on ``0..n-1``; out-lists sorted by ordinal."""

    out: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.out)

    def arcs(self) -> list[tuple[int, int]]:
        return [(a, b) for a, bs in enumerate(self.out) for b in bs]

    @property
    def size(self) -> int:
        return self.n + sum(len(bs) for bs in self.out)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check; ``witness`` is a blocking cycle/pair when ``ok`` is False."""

    ok: bool
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def acceptability_graph(H: HousingMarket) -> Digraph:
    return Digraph(tuple(tuple(sorted(p.acceptable)) for p in H.prefs))


def envy_graph(H: HousingMarket, X: Sequence[int]) -> Digraph:
    out = []
    for a, poset in enumerate(H.prefs):
        up = poset.above[X[a]]
        out.append(tuple(sorted(up)))
    return Digraph(tuple(out))


def find_cycle(out: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
    """First directed cycle closed by an ordinal-ordered iterative DFS."""
    n = len(out)
    color = [0] * n  # 0 new, 1 on stack, 2 done
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, 0)]
        path = [root]
        color[root] = 1
        while stack:
            v, i = stack[-1]
            nbrs = out[v]
            if i < len(nbrs):
                stack[-1] = (v, i + 1)
                w = nbrs[i]
                if color[w] == 0:
                    color[w] = 1
                    stack.append((w, 0))
                    path.append(w)
                elif color[w] == 1:
                    return tuple(path[path.index(w):])
            else:
                color[v] = 2
                stack.pop()
                path.pop()
    return None


def check_core(H: HousingMarket, X: Sequence[int]) -> Verdict:
    """In core iff the envy graph is acyclic; otherwise return a blocking cycle."""
    cyc = find_cycle(envy_graph(H, X).out)
    return Verdict(True) if cyc is None else Verdict(False, cyc)


def check_strict_core(H: HousingMarket, X: Sequence[int]) -> Verdict:
    """Look for a weakly blocking cycle.

    Such a cycle exists iff some strictly augmenting arc has both endpoints in
    one strongly connected component of the weakly-augmenting graph.
    """
    n = H.n
    weak: list[list[int]] = []
    for a, poset in enumerate(H.prefs):
        xa = X[a]
        weak.append(sorted(b for b in poset.acceptable if not poset.prefers(b, xa)))
    comp = _scc(weak)
    for a in range(n):
        up = H.prefs[a].above[X[a]]
        for b in sorted(up):
            if comp[a] == comp[b]:
                path = _bfs_path(weak, b, a, comp)
                return Verdict(False, (a,) + path[:-1])
    return Verdict(True)


def _bfs_path(out, src, dst, comp) -> tuple[int, ...]:
    prev = {src: None}
    q = deque([src])
    while q:
        v = q.popleft()
        if v == dst:
            break
        for w in out[v]:
            if w not in prev and comp[w] == comp[src]:
                prev[w] = v
                q.append(w)
    path = []
    v = dst
    while v is not None:
        path.append(v)
        v = prev[v]
    return tuple(reversed(path))


def _scc(out: Sequence[Sequence[int]]) -> list[int]:
    """Iterative Tarjan; returns a component id per vertex."""
    n = len(out)
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on[root] = True
        while work:
            v, i = work[-1]
            if i < len(out[v]):
                work[-1] = (v, i + 1)
                w = out[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, 0))
                elif on[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        on[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
    return comp
