"""Improvements of a market for one agent, and core repair after them.

An improvement for agent ``p`` changes the preferences of some agents
``q != p`` so that house ``p`` only moves up: comparisons between other houses
are untouched, whatever was below ``p`` stays below it, and nothing new rises
above it.

``hm_improve`` takes a core allocation ``X`` of ``H`` and returns a core
allocation of the improved market ``H2`` in which ``p`` is at least as well
off. It works on an auxiliary market in which every improved agent ``q`` that
now envies ``p`` reaches ``p`` through a private shadow agent. Shadow agents
are numbered ``n, n+1, ...`` in the order of their ``q``.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .errors import AgentSetMismatch, NotAnImprovement, NotInCore
from .market import (
    Allocation,
    HousingMarket,
    PreferencePoset,
    check_core,
    find_cycle,
    validate_allocation,
)
from .ttc import ttc_within


# --- improvement transforms ------------------------------------------------

def improvement_violation(old: PreferencePoset, new: PreferencePoset, p: int) -> str | None:
    """Why ``new`` is not an improvement of ``old`` for house ``p``, or None."""
    A, A2 = old.acceptable, new.acceptable
    if A - {p} != A2 - {p}:
        return "acceptability of a house other than p changed"
    for x in A:
        if x != p and old.above[x] - {p} != new.above[x] - {p}:
            return f"order between houses other than p changed above house {x}"
    if p in A:
        if p not in A2:
            return "p became unacceptable"
        for x in A:
            if x != p and p in old.above[x] and p not in new.above[x]:
                return f"house {x} no longer below p"
        if not new.above[p] <= old.above[p]:
            return "a house rose above p"
    return None


def is_p_improvement(H: HousingMarket, H2: HousingMarket, p: int) -> bool:
    if H.names != H2.names:
        raise AgentSetMismatch("markets have different agent sets")
    for a, (old, new) in enumerate(zip(H.prefs, H2.prefs)):
        if old == new:
            continue
        if a == p or improvement_violation(old, new, p) is not None:
            return False
    return True


@dataclass(frozen=True)
class ImprovementSpec:
    p: int
    steps: tuple[tuple[int, PreferencePoset], ...] = field(default_factory=tuple)


def apply_improvement(H: HousingMarket, spec: ImprovementSpec) -> HousingMarket:
    p = H.agent(spec.p)
    seen: set[int] = set()
    H2 = H
    for q, poset in spec.steps:
        q = H.agent(q)
        if q == p:
            raise NotAnImprovement("an improvement for p cannot change p's own preferences")
        if q in seen:
            raise NotAnImprovement(f"agent {H.names[q]} appears in two steps")
        seen.add(q)
        if poset.owner != q:
            raise NotAnImprovement(f"step for {H.names[q]} carries a poset of agent {poset.owner}")
        why = improvement_violation(H.prefs[q], poset, p)
        if why is not None:
            raise NotAnImprovement(f"step for {H.names[q]}: {why}")
        if poset == H.prefs[q]:
            warnings.warn(f"improvement step for {H.names[q]} changes nothing", stacklevel=2)
        H2 = H2.replace(q, poset)
    return H2


def promote(poset: PreferencePoset, p: int, above: Sequence[int] = ()) -> PreferencePoset:
    """Make ``p`` acceptable (if needed) and place it above the houses in ``above``
    in addition to its current position."""
    rel = set(poset.covers)
    acc = set(poset.acceptable)
    if p not in acc:
        acc.add(p)
        rel.update((x, p) for x in poset.acceptable if not poset.lower[x])
    rel.update((x, p) for x in above)
    return PreferencePoset(poset.owner, frozenset(acc), frozenset(rel))


# --- HM-Improve --------------------------------------------------------------

@dataclass
class ImproveStats:
    iterations: int = 0
    shadows: int = 0
    irrelevant: int = 0
    short_circuit: bool = False


class _Shadow:
    """Preferences of the auxiliary market, derived on the fly from ``H2``."""

    def __init__(self, H2: HousingMarket, p: int, Q: list[int]):
        self.H2 = H2
        self.n = n = H2.n
        self.p = p
        self.shadow_of = {q: n + i for i, q in enumerate(Q)}
        self.owner_of = {n + i: q for i, q in enumerate(Q)}
        self.total = n + len(Q)

    def above(self, a: int, x: int) -> frozenset[int]:
        """Houses ``a`` strictly prefers to ``x`` (``x`` acceptable to ``a``)."""
        p = self.p
        if a >= self.n:
            return frozenset((p,)) if x == a else frozenset()
        qt = self.shadow_of.get(a)
        if qt is None:
            return self.H2.prefs[a].above[x]
        up = self.H2.prefs[a].above[p if x == qt else x]
        return (up - {p}) | {qt} if p in up else up

    def acceptable(self, a: int) -> frozenset[int]:
        if a >= self.n:
            return frozenset((a, self.p))
        acc = self.H2.prefs[a].acceptable
        qt = self.shadow_of.get(a)
        return acc if qt is None else (acc - {self.p}) | {qt}

    def holders(self) -> list[list[int]]:
        """In-neighbours (without loops) of every vertex in the auxiliary graph."""
        out: list[list[int]] = [[] for _ in range(self.total)]
        p = self.p
        for a, poset in enumerate(self.H2.prefs):
            qt = self.shadow_of.get(a)
            for b in poset.acceptable:
                if b == a:
                    continue
                if b == p and qt is not None:
                    out[qt].append(a)
                else:
                    out[b].append(a)
        for qt in self.owner_of:
            out[p].append(qt)
        return out


def hm_improve(
    H: HousingMarket,
    H2: HousingMarket,
    p: int,
    X: Sequence[int],
    *,
    check_invariants: bool = False,
    stats: ImproveStats | None = None,
) -> Allocation:
    """Core allocation ``X'`` of ``H2`` with ``X(p)`` weakly below ``X'(p)`` for ``p``.

    Deterministic: among augmenting arcs entering a source, the lowest
    ``(s, u)`` pair is used; when none exists the lowest-ordinal source is
    made irrelevant. ``check_invariants`` re-verifies the working state after
    every iteration (quadratic; meant for tests).
    """
    if H.names != H2.names:
        raise AgentSetMismatch("markets have different agent sets")
    p = H.agent(p)
    X = validate_allocation(H, X)
    if not check_core(H, X):
        raise NotInCore("input allocation is blocked in the original market")
    if not is_p_improvement(H, H2, p):
        raise NotAnImprovement(f"second market is not an improvement for {H.names[p]}")
    X = validate_allocation(H2, X)
    st = stats if stats is not None else ImproveStats()
    if check_core(H2, X):
        st.short_circuit = True
        return X

    n = H.n
    Q = [a for a in range(n)
         if H.prefs[a] != H2.prefs[a] and H2.prefers(a, X[a], p)]
    S = _Shadow(H2, p, Q)
    total = S.total
    st.shadows = len(Q)

    Yout: list[int | None] = list(X) + [None] * len(Q)
    Yin: list[int | None] = [None] * total
    for a in range(n):
        Yin[X[a]] = a
    inU = [False] * total
    inV = [False] * total
    inR = [False] * total
    for q, qt in S.shadow_of.items():
        Yin[X[q]] = None
        Yout[q] = qt
        Yin[qt] = q
        inV[qt] = True
    epoch = [0] * total
    holders = S.holders()
    arcs: list[tuple[int, int, int]] = []
    sources: list[int] = []
    unmatched = 0  # |U \ V|

    aboves = [P.above for P in H2.prefs]
    shadowed = [False] * n
    for q in Q:
        shadowed[q] = True

    def augmenting(s: int, b: int) -> bool:
        if inV[s]:
            return True
        if s < n and not shadowed[s]:
            return b in aboves[s][Yout[s]]
        return b in S.above(s, Yout[s])

    # An arc that stops being augmenting never becomes augmenting again
    # (living agents only move up, R only grows), so each vertex keeps a
    # forward-only pointer into its sorted holders and the heap holds one
    # entry per source: its lowest live holder.
    ptr = [0] * total

    def push_next(u: int, e: int) -> None:
        hs = holders[u]
        i = ptr[u]
        while i < len(hs) and (inR[hs[i]] or not augmenting(hs[i], u)):
            i += 1
        ptr[u] = i
        if i < len(hs):
            heapq.heappush(arcs, (hs[i], u, e))

    def make_source(u: int) -> None:
        nonlocal unmatched
        inU[u] = True
        if not inV[u]:
            unmatched += 1
        epoch[u] += 1
        heapq.heappush(sources, u)
        push_next(u, epoch[u])

    def leave_u(u: int) -> None:
        nonlocal unmatched
        inU[u] = False
        if not inV[u]:
            unmatched -= 1

    for q in Q:
        make_source(X[q])

    history = None
    if check_invariants:
        history = [Yout[:]]
        max_iter = sum(len(S.acceptable(a)) for a in range(total)) + total
    while unmatched:
        st.iterations += 1
        arc = None
        while arcs:
            s, u, e = arcs[0]
            if not inU[u] or epoch[u] != e:
                heapq.heappop(arcs)
            elif inR[s] or not augmenting(s, u):
                heapq.heappop(arcs)
                ptr[u] += 1
                push_next(u, e)
            else:
                arc = (s, u)
                break
        if arc is not None:
            s, u = arc
            heapq.heappop(arcs)
            leave_u(u)
            if inV[s]:
                # a shadow sink finally reaches p
                inV[s] = False
                if inU[s]:
                    unmatched += 1
                Yout[s] = u
                Yin[u] = s
            else:
                u2 = Yout[s]
                Yout[s] = u
                Yin[u] = s
                Yin[u2] = None
                make_source(u2)
        else:
            while not inU[sources[0]]:
                heapq.heappop(sources)
            u = heapq.heappop(sources)
            leave_u(u)
            inR[u] = True
            if inV[u]:
                inV[u] = False
            else:
                u2 = Yout[u]
                Yout[u] = None
                Yin[u2] = None
                make_source(u2)
        if check_invariants:
            _check_state(S, Yout, Yin, inU, inV, inR, history)
            assert st.iterations <= max_iter, "iteration bound exceeded"

    R = [a for a in range(n) if inR[a]]
    st.irrelevant = len(R)
    loose = [qt for qt in S.owner_of if not inR[qt] and not inU[qt]]
    if check_invariants:
        assert not inR[p], "p became irrelevant"
        assert len(loose) <= 1, "more than one shadow agent holds p"
        _check_no_envy_into_R(S, Yout, inR)

    out = list(range(n))
    out_R = ttc_within(H2, R)
    for a, b in out_R.items():
        out[a] = b
    for a in range(n):
        if inR[a]:
            continue
        b = Yout[a]
        out[a] = p if b >= n else b
    return validate_allocation(H2, out)


def _check_state(S: _Shadow, Yout, Yin, inU, inV, inR, history) -> None:
    total = S.total
    for a in range(total):
        if inR[a]:
            continue
        assert (Yout[a] is None) == inV[a], f"out-degree constraint broken at {a}"
        assert (Yin[a] is None) == inU[a], f"in-degree constraint broken at {a}"
        assert not inV[a] or a >= S.n, f"real agent {a} became a sink"
        if Yout[a] is not None:
            assert Yin[Yout[a]] == a and not inR[Yout[a]], f"arc of {a} inconsistent"
            assert Yout[a] in S.acceptable(a), f"arc of {a} is not acceptable"
    envy: list[list[int]] = [[] for _ in range(total)]
    for s in range(total):
        if inR[s]:
            continue
        acc = S.acceptable(s)
        up = acc if inV[s] else S.above(s, Yout[s])
        envy[s] = sorted(b for b in up if b != s and not inR[b])
    assert find_cycle(envy) is None, "envy graph of the sub-allocation has a cycle"
    prev = history[-1]
    for a in range(total):
        if inR[a] or prev[a] is None or Yout[a] is None or prev[a] == Yout[a]:
            continue
        assert Yout[a] in S.above(a, prev[a]), f"agent {a} got worse"
    history.append(Yout[:])


def _check_no_envy_into_R(S: _Shadow, Yout, inR) -> None:
    for a in range(S.total):
        if inR[a] or Yout[a] is None:
            continue
        for b in S.above(a, Yout[a]):
            assert not inR[b], f"agent {a} envies irrelevant agent {b}"
