"""Brute-force ground truth for small markets.

Allocations are enumerated as cycle covers of the acceptability graph by
branching on the lowest-ordinal agent that has no house yet. Two prunings
keep this cheap on sparse markets: every house not yet taken must still have
an agent that could take it, and the agents assigned so far must not already
contain a blocking cycle (envy of an agent depends only on its own house).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import EmptyCore, NoSuchArc, NotAnImprovement, TooLarge
from .improve import is_p_improvement
from .market import Allocation, HousingMarket, check_strict_core, trading

DENSE_CAP = 12
SPARSE_CAP = 24
SPARSE_DENSITY = 0.25
CAP_ENV = "COREMARKET_ORACLE_CAP"


def density(H: HousingMarket) -> float:
    """Fraction of possible non-loop arcs present in the acceptability graph."""
    n = H.n
    if n < 2:
        return 0.0
    return (H.num_arcs - n) / (n * (n - 1))


def check_size(H: HousingMarket, cap: int | None = None) -> None:
    """Raise TooLarge unless ``H`` is small enough to enumerate.

    An explicit ``cap`` or the ``COREMARKET_ORACLE_CAP`` variable replaces the
    default rule (12 agents, or 24 when the graph has density at most 0.25).
    """
    if cap is None and os.environ.get(CAP_ENV):
        cap = int(os.environ[CAP_ENV])
    if cap is not None:
        ok = H.n <= cap
    else:
        ok = H.n <= DENSE_CAP or (H.n <= SPARSE_CAP and density(H) <= SPARSE_DENSITY)
    if not ok:
        raise TooLarge(f"market with {H.n} agents (density {density(H):.2f}) exceeds the oracle cap")


def iter_allocations(
    H: HousingMarket,
    *,
    core_only: bool = False,
    require: Sequence[tuple[int, int]] = (),
    forbid: Sequence[tuple[int, int]] = (),
    first: int | None = None,
) -> Iterator[Allocation]:
    """All allocations of ``H`` (or only core ones) in lexicographic order.

    ``require``/``forbid`` restrict arcs; ``first`` fixes the house of agent 0
    (used to split the search across workers).
    """
    n = H.n
    acc = [sorted(p.acceptable) for p in H.prefs]
    forced = {a: b for a, b in require}
    banned = set(forbid)
    if first is not None:
        forced.setdefault(0, first)
        if forced[0] != first:
            return
    choices = []
    for a in range(n):
        if a in forced:
            b = forced[a]
            choices.append([b] if b in H.prefs[a].acceptable and (a, b) not in banned else [])
        else:
            choices.append([b for b in acc[a] if (a, b) not in banned])
    holders: list[list[int]] = [[] for _ in range(n)]
    for a in range(n):
        for b in choices[a]:
            holders[b].append(a)
    if any(not c for c in choices) or any(not h for h in holders):
        return

    avail_in = [len(h) for h in holders]
    taken = [False] * n
    X = [-1] * n
    above = [p.above for p in H.prefs]

    def blocks_through(a: int) -> bool:
        # is there an envy path among assigned agents from a back to a?
        stack = [c for c in above[a][X[a]] if X[c] >= 0]
        seen = set(stack)
        while stack:
            v = stack.pop()
            if v == a:
                return True
            for c in above[v][X[v]]:
                if X[c] >= 0 and c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def rec(a: int) -> Iterator[Allocation]:
        if a == n:
            yield tuple(X)
            return
        for b in choices[a]:
            if taken[b]:
                continue
            taken[b] = True
            X[a] = b
            ok = True
            for c in choices[a]:
                avail_in[c] -= 1
                if avail_in[c] == 0 and not taken[c]:
                    ok = False
            if ok and core_only and blocks_through(a):
                ok = False
            if ok:
                yield from rec(a + 1)
            for c in choices[a]:
                avail_in[c] += 1
            X[a] = -1
            taken[b] = False

    yield from rec(0)


def _branch(args) -> list[Allocation]:
    H, first, strict = args
    out = list(iter_allocations(H, core_only=True, first=first))
    if strict:
        out = [X for X in out if check_strict_core(H, X)]
    return out


@dataclass
class CoreSummary:
    market: HousingMarket
    allocations: list[Allocation]
    strict: bool = False
    _best: dict[int, tuple[int, ...]] = field(default_factory=dict, repr=False)
    _worst: dict[int, tuple[int, ...]] = field(default_factory=dict, repr=False)

    def obtained(self, p: int) -> set[int]:
        return {X[p] for X in self.allocations}

    def best(self, p: int) -> tuple[int, ...]:
        """Maximal houses ``p`` gets in some listed allocation (an antichain)."""
        if p not in self._best:
            got = self.obtained(p)
            poset = self.market.prefs[p]
            self._best[p] = tuple(sorted(
                x for x in got if not any(poset.prefers(x, y) for y in got)))
        return self._best[p]

    def worst(self, p: int) -> tuple[int, ...]:
        if p not in self._worst:
            got = self.obtained(p)
            poset = self.market.prefs[p]
            self._worst[p] = tuple(sorted(
                x for x in got if not any(poset.prefers(y, x) for y in got)))
        return self._worst[p]

    @property
    def opt(self) -> int:
        return max(trading(X) for X in self.allocations)

    def witness(self) -> Allocation:
        """First allocation of maximum size."""
        best = self.opt
        return next(X for X in self.allocations if trading(X) == best)


def enumerate_core(
    H: HousingMarket,
    cap: int | None = None,
    *,
    strict: bool = False,
    workers: int = 1,
) -> CoreSummary:
    """Every core (or strict-core) allocation of ``H``, in lexicographic order."""
    check_size(H, cap)
    if workers > 1 and H.n > 1:
        jobs = [(H, b, strict) for b in sorted(H.prefs[0].acceptable)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_branch, jobs))
        allocs = [X for part in parts for X in part]
    else:
        allocs = list(iter_allocations(H, core_only=True))
        if strict:
            allocs = [X for X in allocs if check_strict_core(H, X)]
    if not allocs and not strict:
        raise EmptyCore("enumeration found no core allocation")
    return CoreSummary(H, allocs, strict)


def _has_core(H: HousingMarket, **kw) -> bool:
    return next(iter_allocations(H, core_only=True, **kw), None) is not None


def _check_arc(H: HousingMarket, a: int, b: int) -> None:
    if b not in H.prefs[a].acceptable:
        raise NoSuchArc(f"({H.names[a]}, {H.names[b]}) is not an arc of the acceptability graph")


def arc_in_core(H: HousingMarket, a: int, b: int, cap: int | None = None) -> bool:
    check_size(H, cap)
    _check_arc(H, a, b)
    return _has_core(H, require=[(a, b)])


def forbidden_arc_in_core(H: HousingMarket, a: int, b: int, cap: int | None = None) -> bool:
    check_size(H, cap)
    _check_arc(H, a, b)
    return _has_core(H, forbid=[(a, b)])


def agent_trading(H: HousingMarket, a: int, cap: int | None = None) -> bool:
    check_size(H, cap)
    return _has_core(H, forbid=[(a, a)])


def max_core(H: HousingMarket, cap: int | None = None) -> tuple[int, Allocation]:
    summary = enumerate_core(H, cap)
    return summary.opt, summary.witness()


KINDS = ("PSIB", "NSIB", "PSIW", "NSIW")


def strict_improvement_decide(
    kind: str,
    H: HousingMarket,
    H2: HousingMarket,
    p: int,
    cap: int | None = None,
) -> bool:
    """Compare p's best (B) or worst (W) core houses before and after an
    improvement; P asks for some strictly better pair, N for all pairs."""
    kind = kind.upper()
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if not is_p_improvement(H, H2, p):
        raise NotAnImprovement("second market is not an improvement for p")
    before = enumerate_core(H, cap)
    after = enumerate_core(H2, cap)
    pick = (lambda s: s.best(p)) if kind[3] == "B" else (lambda s: s.worst(p))
    pairs = [(a, b) for a in pick(before) for b in pick(after)]
    poset = H2.prefs[p]
    test = any if kind[0] == "P" else all
    return test(poset.prefers(a, b) for a, b in pairs)

