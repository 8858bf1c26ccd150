"""Seeded random markets and random improvements.

Everything draws from ``SplitMix64``, so a given ``RandomModel`` produces the
same market on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BadParams
from .market import HousingMarket, PreferencePoset
from .rng import SplitMix64

MODELS = ("strict", "weak", "poset")


@dataclass(frozen=True)
class RandomModel:
    n: int
    seed: int = 0
    model: str = "strict"
    density: float = 0.5  # probability that a given other house is acceptable
    tie: float = 0.3  # weak: probability that the next house joins the current tie class
    edge: float = 0.3  # poset: probability of each relation along a random linear extension

    def validate(self) -> None:
        if self.n < 1:
            raise BadParams("n must be at least 1")
        if self.model not in MODELS:
            raise BadParams(f"model must be one of {', '.join(MODELS)}")
        for name in ("density", "tie", "edge"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise BadParams(f"{name} must lie in [0, 1], got {v}")


def agent_names(n: int) -> tuple[str, ...]:
    return tuple(f"a{i}" for i in range(n))


def chain_poset(owner: int, ranking) -> PreferencePoset:
    """Strict order from a best-first list (the own house is appended if missing)."""
    ranking = list(ranking)
    if owner not in ranking:
        ranking.append(owner)
    covers = frozenset(zip(ranking[1:], ranking))
    return PreferencePoset(owner, frozenset(ranking), covers)


def levels_poset(owner: int, levels) -> PreferencePoset:
    """Weak order from best-first tie classes."""
    levels = [list(c) for c in levels]
    if not any(owner in c for c in levels):
        levels.append([owner])
    covers = frozenset(
        (w, b) for hi, lo in zip(levels, levels[1:]) for b in hi for w in lo)
    return PreferencePoset(owner, frozenset(x for c in levels for x in c), covers)


def gen_random(m: RandomModel) -> HousingMarket:
    m.validate()
    rng = SplitMix64(m.seed)
    n = m.n
    prefs = []
    for a in range(n):
        others = [b for b in range(n) if b != a and rng.random() < m.density]
        rng.shuffle(others)
        if m.model == "strict":
            prefs.append(chain_poset(a, others))
        elif m.model == "weak":
            levels: list[list[int]] = []
            for b in others:
                if levels and rng.random() < m.tie:
                    levels[-1].append(b)
                else:
                    levels.append([b])
            prefs.append(levels_poset(a, levels))
        else:
            rel = {(a, b) for b in others}
            for i, hi in enumerate(others):
                for lo in others[i + 1:]:
                    if rng.random() < m.edge:
                        rel.add((lo, hi))
            prefs.append(PreferencePoset(a, frozenset(others), frozenset(rel)))
    return HousingMarket(agent_names(n), tuple(prefs))


# --- random improvements -----------------------------------------------------

def random_improvement(H: HousingMarket, p: int, q: int, rng: SplitMix64) -> PreferencePoset:
    """A random (possibly trivial) improvement of ``q``'s preferences for house ``p``.

    Strict and weak orders stay strict and weak: ``p`` moves to a random
    position at least as high as before. General posets get a random
    down-closed set below ``p`` containing the old one, and a random
    up-closed subset of the old set above ``p``.
    """
    if p == q:
        raise BadParams("an agent cannot improve its own house")
    old = H.prefs[q]
    chain = old.chain()
    if chain is not None:
        rest = [x for x in chain if x != p]
        pos = chain.index(p) if p in chain else rest.index(q)
        new_pos = rng.randint(0, pos)
        return chain_poset(q, rest[:new_pos] + [p] + rest[new_pos:])
    levels = old.tie_classes()
    if levels is not None:
        rest = [[x for x in c if x != p] for c in levels]
        # slot 2j: new class right above rest[j]; slot 2j+1: join rest[j]
        cur = next((i for i, c in enumerate(levels) if p in c), None)
        if cur is None:
            top = 2 * next(i for i, c in enumerate(rest) if q in c) + 1
        else:
            top = 2 * cur + 1
        slot = rng.randint(0, top)
        j, join = divmod(slot, 2)
        if join:
            rest[j] = rest[j] + [p]
        else:
            rest.insert(j, [p])
        return levels_poset(q, [c for c in rest if c])
    return _random_poset_improvement(old, p, rng)


def _random_poset_improvement(old: PreferencePoset, p: int, rng: SplitMix64) -> PreferencePoset:
    q = old.owner
    houses = sorted(x for x in old.acceptable if x != p)
    above = {x: old.above[x] - {p} for x in houses}
    below: dict[int, set[int]] = {x: {x} for x in houses}
    for x in houses:
        for y in above[x]:
            below[y].add(x)
    if p in old.acceptable:
        A = set(old.above[p])
        L = {x for x in houses if p in old.above[x]}
    else:
        A = {x for x in houses if x != q}
        L = set()
    A2: set[int] = set()
    for y in sorted(A):
        if rng.random() < 0.5:
            A2.add(y)
            A2 |= above[y]
    # x may go below p only if it is already below everything kept above p
    L2 = set(L)
    for x in houses:
        if x not in A2 and A2 <= above[x] and rng.random() < 0.3:
            L2 |= below[x]
    if A2 <= above[q]:
        L2.add(q)
    rel = {(x, y) for x in houses for y in above[x]}
    rel |= {(x, p) for x in L2}
    rel |= {(p, y) for y in A2}
    return PreferencePoset(q, old.acceptable | {p}, frozenset(rel))


# --- roommates ---------------------------------------------------------------

def random_roommates_market(
    names, rng: SplitMix64, density: float = 0.7, sides: tuple[set[int], set[int]] | None = None,
) -> HousingMarket:
    """Strict market with symmetric acceptability; each possible edge appears
    with probability ``density``. With ``sides`` only edges across the
    bipartition are drawn."""
    n = len(names)
    acc: list[list[int]] = [[] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            if sides is not None and (a in sides[0]) == (b in sides[0]):
                continue
            if rng.random() < density:
                acc[a].append(b)
                acc[b].append(a)
    prefs = []
    for a in range(n):
        rng.shuffle(acc[a])
        prefs.append(chain_poset(a, acc[a]))
    return HousingMarket(tuple(names), tuple(prefs))
