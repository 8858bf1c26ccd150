"""Seeded searches for small markets where improving an agent's house hurts it.

Three patterns are searched for:

* core, worst house: a 5-agent strict market on ``a, b, c, p, q`` where
  the worst core house of ``p`` drops after a (p,q)-improvement;
* roommates: a solvable 4-agent strict instance whose (p,q)-improvement has
  no stable matching at all;
* marriage with one tie: a 3+3 bipartite instance where ``q`` promotes ``p``
  into a tie and ``p``'s best strongly stable partner gets worse.

Each search returns the first hit in a deterministic order, or None.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .generate import RandomModel, gen_random, levels_poset, random_improvement, random_roommates_market
from .market import HousingMarket
from .oracle import enumerate_core
from .rng import SplitMix64
from .roommates import (RoommatesInstance, find_stable, roommates_improvement,
                        strongly_stable_matchings)

CORE_NAMES = ("a", "b", "c", "p", "q")
SR_NAMES = ("a", "b", "p", "q")
# sides {p, b, c} and {q, a, d}
SSM_NAMES = ("p", "b", "c", "q", "a", "d")


@dataclass
class Found:
    before: HousingMarket
    after: HousingMarket
    p: int
    q: int
    tries: int
    seconds: float
    detail: dict = field(default_factory=dict)


def core_worst_search(seed: int = 0, max_tries: int = 100_000) -> Found | None:
    rng = SplitMix64(seed)
    p, q = CORE_NAMES.index("p"), CORE_NAMES.index("q")
    t0 = time.perf_counter()
    for tries in range(1, max_tries + 1):
        density = rng.choice((0.5, 0.6, 0.7, 0.8, 1.0))
        H0 = gen_random(RandomModel(5, seed=rng.next_u64(), density=density))
        H = HousingMarket(CORE_NAMES, H0.prefs)
        new = random_improvement(H, p, q, rng)
        if new == H.prefs[q]:
            continue
        H2 = H.replace(q, new)
        w1 = enumerate_core(H).worst(p)[0]
        w2 = enumerate_core(H2).worst(p)[0]
        if H2.prefs[p].prefers(w2, w1):
            return Found(H, H2, p, q, tries, time.perf_counter() - t0,
                         {"worst_before": w1, "worst_after": w2})
    return None


def _bump(I: RoommatesInstance, p: int, q: int, rng: SplitMix64) -> RoommatesInstance | None:
    new = random_improvement(I.market, p, q, rng)
    if new == I.market.prefs[q]:
        return None
    return roommates_improvement(I, p, q, new)


def sr_unsolvable_search(seed: int = 0, max_tries: int = 100_000) -> Found | None:
    rng = SplitMix64(seed)
    p, q = SR_NAMES.index("p"), SR_NAMES.index("q")
    t0 = time.perf_counter()
    for tries in range(1, max_tries + 1):
        I = RoommatesInstance(random_roommates_market(SR_NAMES, rng, rng.choice((0.6, 0.8, 1.0))))
        M = find_stable(I)
        if M is None:
            continue
        I2 = _bump(I, p, q, rng)
        if I2 is None or find_stable(I2) is not None:
            continue
        return Found(I.market, I2.market, p, q, tries, time.perf_counter() - t0, {"matching": M})
    return None


def _tie_promotion(I: RoommatesInstance, p: int, q: int, rng: SplitMix64) -> RoommatesInstance | None:
    # q moves p up into the same tie class as some house it ranked above p
    ranking = list(I.market.prefs[q].chain())
    if p not in ranking:
        return None
    i = ranking.index(p)
    if i == 0:
        return None
    j = rng.randbelow(i)
    rest = [x for x in ranking if x != p]
    levels = [[x] for x in rest]
    levels[j].append(p)
    return roommates_improvement(I, p, q, levels_poset(q, levels))


def _best_partner(I: RoommatesInstance, p: int, matchings) -> int | None:
    best = None
    for M in matchings:
        if best is None or I.prefers(p, best, M[p]):
            best = M[p]
    return best


def ssm_best_search(seed: int = 0, max_tries: int = 100_000) -> Found | None:
    rng = SplitMix64(seed)
    p, q = SSM_NAMES.index("p"), SSM_NAMES.index("q")
    sides = ({0, 1, 2}, {3, 4, 5})
    t0 = time.perf_counter()
    for tries in range(1, max_tries + 1):
        H = random_roommates_market(SSM_NAMES, rng, rng.choice((0.7, 0.9, 1.0)), sides)
        I = RoommatesInstance(H)
        I2 = _tie_promotion(I, p, q, rng)
        if I2 is None:
            continue
        before = strongly_stable_matchings(I)
        after = strongly_stable_matchings(I2)
        if not before or not after:
            continue
        b1 = _best_partner(I2, p, before)
        b2 = _best_partner(I2, p, after)
        if I2.prefers(p, b2, b1):
            return Found(I.market, I2.market, p, q, tries, time.perf_counter() - t0,
                         {"best_before": b1, "best_after": b2})
    return None


SEARCHES = {
    "core-worst": core_worst_search,
    "sr-unsolvable": sr_unsolvable_search,
    "ssm-best": ssm_best_search,
}
