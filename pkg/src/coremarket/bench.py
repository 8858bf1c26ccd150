"""Wall-clock scaling of ``ttc`` and ``hm_improve`` on sparse weak-order markets."""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass

from .generate import agent_names, levels_poset
from .improve import hm_improve
from .market import HousingMarket
from .rng import SplitMix64
from .ttc import ttc


@dataclass(frozen=True)
class BenchConfig:
    sizes: tuple[int, ...] = (10_000, 20_000, 40_000, 80_000)
    degree: int = 6  # acceptable houses per agent besides its own
    tie: float = 0.3
    seed: int = 0
    repeat: int = 7
    instances: int = 3


def sparse_weak_market(target_size: int, degree: int, tie: float, rng: SplitMix64) -> HousingMarket:
    """Weak-order market with ``degree`` random others per agent, sized so
    that |H| lands close to ``target_size``."""
    # |H_a| is about (degree + 1) vertices plus a similar number of covers
    n = max(degree + 1, target_size // (2 * degree + 2))
    prefs = []
    for a in range(n):
        others: list[int] = []
        seen = {a}
        while len(others) < degree:
            b = rng.randbelow(n)
            if b not in seen:
                seen.add(b)
                others.append(b)
        levels: list[list[int]] = []
        for b in others:
            if levels and rng.random() < tie:
                levels[-1].append(b)
            else:
                levels.append([b])
        prefs.append(levels_poset(a, levels))
    return HousingMarket(agent_names(n), tuple(prefs))


def top_promotion(H: HousingMarket, p: int, q: int) -> HousingMarket:
    """Move house ``p`` to the top of ``q``'s weak order."""
    rest = [[x for x in c if x != p] for c in H.prefs[q].tie_classes()]
    return H.replace(q, levels_poset(q, [[p]] + [c for c in rest if c]))


def blocking_improvement(H: HousingMarket, X, rng: SplitMix64, share: int = 50) -> tuple[HousingMarket, int]:
    """Pick an agent ``p`` that keeps its own house under ``X`` and move ``p``
    to the top for every owner of a house ``p`` accepts (so ``X`` is blocked
    in the result) plus random agents, ``n / share`` in total."""
    cands = [a for a in range(H.n) if X[a] == a and len(H.prefs[a].acceptable) > 1]
    p = cands[rng.randbelow(len(cands))] if cands else 0
    qs = set(H.prefs[p].acceptable) - {p}
    while len(qs) < min(H.n - 1, H.n // share):
        q = rng.randbelow(H.n)
        if q != p:
            qs.add(q)
    H2 = H
    for q in sorted(qs):
        H2 = top_promotion(H2, p, q)
    return H2, p


def _best_time(f, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        gc.collect()
        gc.disable()
        try:
            t0 = time.perf_counter()
            f()
            best = min(best, time.perf_counter() - t0)
        finally:
            gc.enable()
    return best


def run(cfg: BenchConfig) -> list[dict]:
    """One row per (algorithm, size): best-of-``repeat`` seconds summed over
    ``instances`` markets of that size."""
    rng = SplitMix64(cfg.seed)
    rows = []
    for size in cfg.sizes:
        t_ttc = t_hm = 0.0
        actual = 0
        for _ in range(cfg.instances):
            H = sparse_weak_market(size, cfg.degree, cfg.tie, rng)
            X = ttc(H)
            H2, p = blocking_improvement(H, X, rng)
            actual += H.size
            t_ttc += _best_time(lambda: ttc(H), cfg.repeat)
            t_hm += _best_time(lambda: hm_improve(H, H2, p, X), cfg.repeat)
        for algo, t in (("ttc", t_ttc), ("hm_improve", t_hm)):
            rows.append({"algorithm": algo, "target": size, "size": actual // cfg.instances,
                         "seconds": t})
    return rows


def doubling_ratios(rows: list[dict], algorithm: str) -> list[float]:
    ts = [r["seconds"] for r in rows if r["algorithm"] == algorithm]
    return [b / a for a, b in zip(ts, ts[1:])]
