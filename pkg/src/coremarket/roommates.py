"""Stable Roommates on top of housing markets.

A roommates instance is a market with mutual acceptability in which every
acceptable partner is strictly better than staying alone. A matching is a
tuple ``mate`` with ``mate[a]`` the partner of ``a`` or ``None``. Being
unmatched is treated as holding one's own house, which makes the blocking
conditions uniform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from . import market as mk
from .errors import (
    InvalidMatching,
    NotAnImprovement,
    NotMutuallyAcceptable,
    NotStable,
    TiesPresent,
)
from .improve import improvement_violation
from .market import HousingMarket, PreferencePoset, Verdict

Matching = tuple  # tuple[int | None, ...]


@dataclass(frozen=True)
class RoommatesInstance:
    market: HousingMarket
    _rank: tuple[tuple[int, ...], ...] | None = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        H = self.market
        for a, poset in enumerate(H.prefs):
            for b in poset.acceptable:
                if b == a:
                    continue
                if a not in H.prefs[b].acceptable:
                    raise NotMutuallyAcceptable(
                        f"{H.names[a]} accepts {H.names[b]} but not vice versa")
                if not poset.prefers(a, b):
                    raise NotMutuallyAcceptable(
                        f"{H.names[a]} does not strictly prefer {H.names[b]} to being alone")
        ranks = None
        if H.is_strict():
            ranks = tuple(tuple(x for x in p.chain() if x != a) for a, p in enumerate(H.prefs))
        object.__setattr__(self, "_rank", ranks)

    @classmethod
    def from_lists(cls, agents: Sequence[str], lists: Mapping[str, Sequence]) -> "RoommatesInstance":
        return cls(mk.from_lists(agents, lists))

    @property
    def n(self) -> int:
        return self.market.n

    @property
    def names(self) -> tuple[str, ...]:
        return self.market.names

    def is_strict(self) -> bool:
        return self._rank is not None

    def ranking(self, a: int) -> tuple[int, ...]:
        """Partners of ``a`` best-first (strict instances only)."""
        if self._rank is None:
            raise TiesPresent("instance has ties or incomparabilities")
        return self._rank[a]

    def partners(self, a: int) -> list[int]:
        return sorted(b for b in self.market.prefs[a].acceptable if b != a)

    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.n) for b in self.partners(a) if a < b]

    def prefers(self, a: int, x: int | None, y: int | None) -> bool:
        """``a`` strictly prefers partner ``y`` to ``x`` (None means alone)."""
        return self.market.prefs[a].prefers(a if x is None else x, a if y is None else y)

    def weakly_prefers(self, a: int, x: int | None, y: int | None) -> bool:
        return not self.prefers(a, y, x)

    def without(self, pairs: Sequence[tuple[int, int]]) -> "RoommatesInstance":
        """Instance with the given edges removed from both lists."""
        drop: dict[int, set[int]] = {}
        for a, b in pairs:
            drop.setdefault(a, set()).add(b)
            drop.setdefault(b, set()).add(a)
        H = self.market
        prefs = list(H.prefs)
        for a, gone in drop.items():
            old = prefs[a]
            acc = old.acceptable - gone
            rel = {(x, y) for x in acc for y in old.above[x] if y in acc}
            prefs[a] = PreferencePoset(a, acc, frozenset(rel))
        return RoommatesInstance(HousingMarket(H.names, tuple(prefs)))


def require_strict(I: RoommatesInstance) -> None:
    if not I.is_strict():
        raise TiesPresent("this operation needs strict preferences")


# --- matchings ---------------------------------------------------------------

def validate_matching(I: RoommatesInstance, mate: Sequence[int | None]) -> Matching:
    mate = tuple(mate)
    if len(mate) != I.n:
        raise InvalidMatching(f"matching covers {len(mate)} agents, instance has {I.n}")
    for a, b in enumerate(mate):
        if b is None:
            continue
        if not 0 <= b < I.n or b == a or mate[b] != a:
            raise InvalidMatching(f"partner of {I.names[a]} is inconsistent")
        if b not in I.market.prefs[a].acceptable:
            raise InvalidMatching(f"{I.names[a]} and {I.names[b]} are not mutually acceptable")
    return mate


def matching_from_pairs(n: int, pairs) -> Matching:
    mate: list[int | None] = [None] * n
    for a, b in pairs:
        mate[a], mate[b] = b, a
    return tuple(mate)


def pairs_of(mate: Sequence[int | None]) -> list[tuple[int, int]]:
    return [(a, b) for a, b in enumerate(mate) if b is not None and a < b]


def check_stable(I: RoommatesInstance, mate: Sequence[int | None]) -> Verdict:
    """Stable iff no edge ``{a, b}`` outside the matching is wanted by both ends."""
    for a in range(I.n):
        xa = mate[a]
        for b in I.partners(a):
            if b <= a or xa == b:
                continue
            if I.prefers(a, xa, b) and I.prefers(b, mate[b], a):
                return Verdict(False, (a, b))
    return Verdict(True)


def check_strongly_stable(I: RoommatesInstance, mate: Sequence[int | None]) -> Verdict:
    """Strongly stable iff no edge is weakly blocking: both ends weakly want
    it and at least one strictly (being alone counts as the worst option)."""
    for a in range(I.n):
        xa = mate[a]
        for b in I.partners(a):
            if b <= a or xa == b:
                continue
            xb = mate[b]
            if (I.weakly_prefers(a, xa, b) and I.weakly_prefers(b, xb, a)
                    and (I.prefers(a, xa, b) or I.prefers(b, xb, a))):
                return Verdict(False, (a, b))
    return Verdict(True)


def enumerate_matchings(I: RoommatesInstance) -> Iterator[Matching]:
    n = I.n
    mate: list[int | None] = [None] * n
    done = [False] * n
    nbrs = [I.partners(a) for a in range(n)]

    def rec(a: int) -> Iterator[Matching]:
        while a < n and done[a]:
            a += 1
        if a == n:
            yield tuple(mate)
            return
        done[a] = True
        yield from rec(a + 1)
        for b in nbrs[a]:
            if b > a and not done[b]:
                done[b] = True
                mate[a], mate[b] = b, a
                yield from rec(a + 1)
                mate[a] = mate[b] = None
                done[b] = False
        done[a] = False

    yield from rec(0)


def stable_matchings(I: RoommatesInstance) -> list[Matching]:
    return [m for m in enumerate_matchings(I) if check_stable(I, m)]


def strongly_stable_matchings(I: RoommatesInstance) -> list[Matching]:
    return [m for m in enumerate_matchings(I) if check_strongly_stable(I, m)]


# --- Irving's algorithm --------------------------------------------------------

class _Table:
    """Reduced preference lists with symmetric deletion."""

    def __init__(self, I: RoommatesInstance):
        n = I.n
        self.lists = [list(I.ranking(a)) for a in range(n)]
        self.rank = [{b: i for i, b in enumerate(lst)} for lst in self.lists]
        self.alive = [set(lst) for lst in self.lists]
        self.head = [0] * n
        self.tail = [len(lst) - 1 for lst in self.lists]

    def delete(self, a: int, b: int) -> None:
        self.alive[a].discard(b)
        self.alive[b].discard(a)

    def first(self, a: int) -> int | None:
        lst, alive = self.lists[a], self.alive[a]
        i = self.head[a]
        while i < len(lst) and lst[i] not in alive:
            i += 1
        self.head[a] = i
        return lst[i] if i < len(lst) else None

    def second(self, a: int) -> int | None:
        lst, alive = self.lists[a], self.alive[a]
        i = self.head[a]
        seen = 0
        while i < len(lst):
            if lst[i] in alive:
                seen += 1
                if seen == 2:
                    return lst[i]
            i += 1
        return None

    def last(self, a: int) -> int | None:
        lst, alive = self.lists[a], self.alive[a]
        i = self.tail[a]
        while i >= 0 and lst[i] not in alive:
            i -= 1
        self.tail[a] = i
        return lst[i] if i >= 0 else None

    def cut_after(self, a: int, x: int) -> None:
        """``a`` drops everyone it likes less than ``x``."""
        r = self.rank[a][x]
        for y in [y for y in self.alive[a] if self.rank[a][y] > r]:
            self.delete(a, y)


def find_stable(I: RoommatesInstance) -> Matching | None:
    """A stable matching, or None if none exists (two-phase method)."""
    require_strict(I)
    n = I.n
    T = _Table(I)

    # phase 1: proposals; b holding a proposal from a cuts everyone below a
    holder: list[int | None] = [None] * n
    for start in range(n):
        a: int | None = start
        while a is not None:
            b = T.first(a)
            if b is None:
                break
            prev = holder[b]
            holder[b] = a
            T.cut_after(b, a)
            a = prev
    active = [a for a in range(n) if T.alive[a]]

    # phase 2: eliminate rotations while some list has two or more entries
    while True:
        for a in active:
            if not T.alive[a]:
                return None
        start = next((a for a in active if len(T.alive[a]) >= 2), None)
        if start is None:
            break
        ps: list[int] = []
        pos: dict[int, int] = {}
        x = start
        while x not in pos:
            pos[x] = len(ps)
            ps.append(x)
            y = T.second(x)
            if y is None:
                return None
            x = T.last(y)
            if x is None:
                return None
        cyc = ps[pos[x]:]
        seconds = [T.second(x) for x in cyc]
        for x, y in zip(cyc, seconds):
            T.cut_after(y, x)

    mate: list[int | None] = [None] * n
    for a in active:
        b = T.first(a)
        mate[a] = b
    return validate_matching(I, mate)


# --- improvements --------------------------------------------------------------

def roommates_improvement(I: RoommatesInstance, p: int, q: int,
                          new: PreferencePoset) -> RoommatesInstance:
    """Apply a (p,q)-improvement; if ``p`` becomes acceptable to ``q``,
    ``q`` is appended at the bottom of ``p``'s list to keep acceptability mutual."""
    if p == q or new.owner != q:
        raise NotAnImprovement("step must change the preferences of some q != p")
    why = improvement_violation(I.market.prefs[q], new, p)
    if why is not None:
        raise NotAnImprovement(why)
    H = I.market.replace(q, new)
    if p in new.acceptable and p not in I.market.prefs[q].acceptable:
        old = H.prefs[p]
        rel = set(old.covers) | {(p, q)} | {(q, x) for x in old.acceptable if x != p}
        H = H.replace(p, PreferencePoset(p, old.acceptable | {q}, frozenset(rel)))
    return RoommatesInstance(H)


def is_roommates_improvement(I: RoommatesInstance, I2: RoommatesInstance, p: int, q: int) -> bool:
    H, H2 = I.market, I2.market
    if H.names != H2.names or p == q:
        return False
    for a in range(H.n):
        if a not in (p, q) and H.prefs[a] != H2.prefs[a]:
            return False
    if improvement_violation(H.prefs[q], H2.prefs[q], p) is not None:
        return False
    if H.prefs[p] == H2.prefs[p]:
        return True
    # only allowed change for p: q appended below every old partner
    old, new = H.prefs[p], H2.prefs[p]
    if p in H.prefs[q].acceptable or p not in H2.prefs[q].acceptable:
        return False
    if q in old.acceptable or new.acceptable != old.acceptable | {q}:
        return False
    if new.above[q] != old.acceptable - {p}:
        return False
    return all(new.above[x] == (old.above[x] | {q} if x == p else old.above[x])
               for x in old.acceptable)


def truncated_instance(I2: RoommatesInstance, p: int, q: int) -> RoommatesInstance:
    """Drop from ``q``'s list every agent ``q`` weakly ranks below ``p``, and ``q``
    from theirs."""
    poset = I2.market.prefs[q]
    gone = [a for a in poset.acceptable if a != q and not poset.prefers(p, a)]
    return I2.without([(q, a) for a in gone])


@dataclass
class PRSequence:
    """Proposal-rejection alternating sequence ``alpha_0, beta_1, alpha_1, ...``."""

    instance: RoommatesInstance
    alphas: list[int]
    betas: list[int] = field(default_factory=list)
    matchings: list[Matching] = field(default_factory=list)
    status: str = "running"  # running | stopped | reached | returned

    @property
    def current(self) -> Matching:
        return self.matchings[-1]

    def step(self) -> None:
        """Extend by one proposal; updates ``status`` when the sequence ends."""
        I = self.instance
        alpha = self.alphas[-1]
        M = list(self.current)
        beta = None
        for b in I.ranking(alpha):
            if I.prefers(b, M[b], alpha):
                beta = b
                break
        if beta is None:
            self.status = "stopped"
            return
        if beta in self.alphas:
            self.status = "returned"
            self.betas.append(beta)
            return
        self.betas.append(beta)
        nxt = M[beta]
        if nxt is not None:
            M[nxt] = None
        M[alpha], M[beta] = beta, alpha
        self.matchings.append(tuple(M))
        if nxt is None:
            self.status = "stopped"
        else:
            self.alphas.append(nxt)


def sr_improve(
    I: RoommatesInstance,
    I2: RoommatesInstance,
    p: int,
    q: int,
    M: Sequence[int | None],
    *,
    check_invariants: bool = False,
    trace: list | None = None,
) -> Matching | None:
    """Stable matching of ``I2`` in which ``p`` does at least as well as in ``M``,
    or None when ``I2`` has no stable matching."""
    require_strict(I)
    require_strict(I2)
    M = validate_matching(I, M)
    if not check_stable(I, M):
        raise NotStable("input matching is blocked in the original instance")
    if not is_roommates_improvement(I, I2, p, q):
        raise NotAnImprovement("second instance is not a (p,q)-improvement of the first")
    M = validate_matching(I2, M)
    if check_stable(I2, M):
        return M
    star = find_stable(I2)
    if star is None:
        return None
    if I2.weakly_prefers(p, M[p], star[p]):
        return star

    alpha0 = M[q]
    assert alpha0 is not None, "q must be matched once the shortcut cases are exhausted"
    T = truncated_instance(I2, p, q)
    M0 = list(M)
    M0[q] = M0[alpha0] = None
    S = PRSequence(T, [alpha0], matchings=[tuple(M0)])
    while True:
        S.step()
        assert S.status != "returned", "proposal-rejection sequence has a return"
        if check_invariants and S.status == "running":
            _check_without(T, S.current, S.alphas[-1])
        if S.status == "stopped":
            assert S.betas[-1] == q, "sequence stopped at an agent other than q"
            out = S.current
            break
        if S.alphas[-1] == p:
            out = list(S.current)
            out[p], out[q] = q, p
            out = tuple(out)
            break
    if trace is not None:
        trace.append(S)
    return validate_matching(I2, out)


def _check_without(I: RoommatesInstance, mate: Matching, gone: int) -> None:
    """Assert ``mate`` is stable once agent ``gone`` is removed."""
    for a in range(I.n):
        if a == gone:
            continue
        for b in I.partners(a):
            if b <= a or b == gone or mate[a] == b:
                continue
            assert not (I.prefers(a, mate[a], b) and I.prefers(b, mate[b], a)), \
                f"induced matching blocked by ({a}, {b})"
