"""Top Trading Cycles for partially ordered preferences, in O(|H|) time.

Each remaining agent points at its undominated remaining houses U(a). For
every agent b we keep, per acceptable house x, the number of upper covers of
x in b's Hasse diagram that have not yet been *released*. A house is exposed
once that count drops to zero. An exposed house that is still on the market
belongs to U(b); an exposed house whose owner has left is released at once,
which decrements the counts of its lower covers. Houses that leave while still
dominated are released later, when they become exposed. Every cover arc is
thus decremented at most once, which gives the linear bound.
"""

from __future__ import annotations

from typing import Iterable

from .market import Allocation, HousingMarket, trading


def ttc(H: HousingMarket) -> Allocation:
    """A core allocation of ``H``.

    Paths start at the lowest-ordinal remaining agent and always follow the
    lowest-ordinal undominated house. A cycle is removed as soon as it
    closes, and the walk resumes from the last agent left on the path.
    """
    X = _ttc(H, range(H.n))
    return tuple(X[a] for a in range(H.n))


def ttc_within(H: HousingMarket, agents: Iterable[int]) -> dict[int, int]:
    """Core allocation of the submarket on ``agents`` (other agents are treated
    as already gone), keyed by the original ordinals."""
    return _ttc(H, agents)


def maxcore_trivial_approx(H: HousingMarket) -> Allocation:
    """Any core allocation has at least OPT/|N| trading agents, since OPT > 0
    forces a cycle in the acceptability graph, which blocks the identity."""
    return ttc(H)


def _ttc(H: HousingMarket, agents: Iterable[int]) -> dict[int, int]:
    n = H.n
    alive = [False] * n
    members = sorted(set(agents))
    for a in members:
        alive[a] = True

    prefs = H.prefs
    lowers = [P.lower for P in prefs]
    count: list[dict[int, int] | None] = [None] * n
    U: list[set[int] | None] = [None] * n

    def release(b: int, x: int) -> None:
        lower = lowers[b]
        cnt = count[b]
        Ub = U[b]
        stack = [x]
        while stack:
            v = stack.pop()
            for y in lower[v]:
                c = cnt[y] - 1
                cnt[y] = c
                if c == 0:
                    if alive[y]:
                        Ub.add(y)
                    else:
                        stack.append(y)

    # holders of house x (agents b != x with x in A(b)) live in
    # hold[hstart[x]:hstart[x + 1]], a flat layout that stays cache-friendly
    hstart = [0] * (n + 1)
    for b in members:
        for x in prefs[b].acceptable:
            hstart[x + 1] += 1
        hstart[b + 1] -= 1
    for x in range(n):
        hstart[x + 1] += hstart[x]
    fill = hstart[:]
    hold = [0] * hstart[n]
    for b in members:
        for x in prefs[b].acceptable:
            if x != b:
                hold[fill[x]] = b
                fill[x] += 1

    for b in members:
        poset = prefs[b]
        n_upper = poset.n_upper
        count[b] = dict(n_upper)
        U[b] = set()
        for x in poset.acceptable:
            if not n_upper[x]:
                if alive[x]:
                    U[b].add(x)
                else:
                    release(b, x)

    def remove(x: int) -> None:
        # houses exposed after their owner left were already released
        for i in range(hstart[x], hstart[x + 1]):
            b = hold[i]
            if alive[b] and x in U[b]:
                U[b].discard(x)
                release(b, x)

    X: dict[int, int] = {}
    remaining = len(members)
    start = 0
    path: list[int] = []
    pos: dict[int, int] = {}
    while remaining:
        if not path:
            while not alive[members[start]]:
                start += 1
            v0 = members[start]
            path.append(v0)
            pos[v0] = 0
        v = path[-1]
        w = min(U[v])
        if w in pos:
            i = pos[w]
            cyc = path[i:]
            for j, c in enumerate(cyc):
                X[c] = cyc[(j + 1) % len(cyc)]
                del pos[c]
            del path[i:]
            remaining -= len(cyc)
            for c in cyc:
                alive[c] = False
            for c in cyc:
                remove(c)
        else:
            pos[w] = len(path)
            path.append(w)
    return X


__all__ = ["ttc", "ttc_within", "maxcore_trivial_approx", "trading"]
