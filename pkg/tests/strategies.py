"""Hypothesis strategies and seeded builders shared by the test modules."""

from __future__ import annotations

from hypothesis import strategies as st

from coremarket.generate import MODELS, RandomModel, gen_random, random_improvement, random_roommates_market
from coremarket.market import HousingMarket
from coremarket.rng import SplitMix64
from coremarket.roommates import RoommatesInstance, roommates_improvement

seeds = st.integers(0, 2**64 - 1)


def models(max_n: int = 6, kinds=MODELS, min_n: int = 1):
    return st.builds(
        RandomModel,
        n=st.integers(min_n, max_n),
        seed=seeds,
        model=st.sampled_from(kinds),
        density=st.sampled_from([0.2, 0.4, 0.6, 0.8, 1.0]),
        tie=st.sampled_from([0.0, 0.3, 0.7]),
        edge=st.sampled_from([0.0, 0.3, 0.7, 1.0]),
    )


def markets(max_n: int = 6, kinds=MODELS, min_n: int = 1):
    return models(max_n, kinds, min_n).map(gen_random)


def improve_randomly(H: HousingMarket, p: int, rng: SplitMix64, share: float = 0.5) -> HousingMarket:
    """Apply a random improvement for ``p`` to each other agent with probability ``share``."""
    H2 = H
    for q in range(H.n):
        if q != p and rng.random() < share:
            H2 = H2.replace(q, random_improvement(H2, p, q, rng))
    return H2


def roommates(n: int, rng: SplitMix64, density: float = 0.7) -> RoommatesInstance:
    names = [f"r{i}" for i in range(n)]
    return RoommatesInstance(random_roommates_market(names, rng, density))


def roommates_bump(I: RoommatesInstance, p: int, q: int, rng: SplitMix64) -> RoommatesInstance:
    return roommates_improvement(I, p, q, random_improvement(I.market, p, q, rng))
