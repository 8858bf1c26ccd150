import itertools

import pytest
from hypothesis import given, strategies as st

from coremarket.errors import InvalidMatching, NotAnImprovement, NotMutuallyAcceptable, NotStable, TiesPresent
from coremarket.fileio import parse_market
from coremarket.generate import chain_poset
from coremarket.market import HousingMarket
from coremarket.rng import SplitMix64
from coremarket.roommates import (
    PRSequence,
    RoommatesInstance,
    check_stable,
    check_strongly_stable,
    enumerate_matchings,
    find_stable,
    is_roommates_improvement,
    matching_from_pairs,
    pairs_of,
    roommates_improvement,
    sr_improve,
    stable_matchings,
    strongly_stable_matchings,
    truncated_instance,
    validate_matching,
)

from strategies import roommates, roommates_bump, seeds


def _odd_triangle():
    # everyone's first choice is the next agent around a 3-cycle
    return RoommatesInstance.from_lists(["a", "b", "c"], {
        "a": ["b", "c"], "b": ["c", "a"], "c": ["a", "b"]})


def _all_strict_instances(n: int):
    """Every complete strict instance on n agents."""
    orders = [list(itertools.permutations([b for b in range(n) if b != a])) for a in range(n)]
    names = tuple(f"r{i}" for i in range(n))
    for combo in itertools.product(*orders):
        yield RoommatesInstance(HousingMarket(names, tuple(chain_poset(a, combo[a]) for a in range(n))))


# --- instances and matchings -----------------------------------------------------

def test_acceptability_must_be_mutual():
    with pytest.raises(NotMutuallyAcceptable):
        RoommatesInstance.from_lists(["a", "b"], {"a": ["b"]})


def test_partner_must_beat_being_alone():
    with pytest.raises(NotMutuallyAcceptable):
        RoommatesInstance.from_lists(["a", "b"], {"a": [("b", "@self")], "b": ["a"]})


def test_ranking_needs_strict_preferences():
    I = RoommatesInstance.from_lists(["a", "b", "c"], {
        "a": [("b", "c")], "b": ["a"], "c": ["a"]})
    assert not I.is_strict()
    with pytest.raises(TiesPresent):
        I.ranking(0)
    with pytest.raises(TiesPresent):
        find_stable(I)


def test_matching_validation():
    I = _odd_triangle()
    assert validate_matching(I, (1, 0, None)) == (1, 0, None)
    with pytest.raises(InvalidMatching):
        validate_matching(I, (1, 2, None))
    with pytest.raises(InvalidMatching):
        validate_matching(I, (1, 0))
    assert matching_from_pairs(3, [(0, 2)]) == (2, None, 0)
    assert pairs_of((2, None, 0)) == [(0, 2)]


def test_enumeration_counts_matchings_of_triangle():
    assert len(list(enumerate_matchings(_odd_triangle()))) == 4


def test_odd_triangle_has_no_stable_matching():
    I = _odd_triangle()
    assert find_stable(I) is None
    assert stable_matchings(I) == []


def test_stability_witness():
    I = _odd_triangle()
    v = check_stable(I, (1, 0, None))
    assert not v and v.witness == (1, 2)


def test_without_removes_edges_symmetrically():
    I = _odd_triangle().without([(0, 1)])
    assert I.partners(0) == [2] and I.partners(1) == [2]


# --- Irving's algorithm ----------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_irving_on_every_complete_instance(n):
    for I in _all_strict_instances(n):
        found = find_stable(I)
        stable = stable_matchings(I)
        assert (found is None) == (not stable)
        if found is not None:
            assert found in stable


@given(seeds, st.integers(1, 8), st.sampled_from([0.3, 0.6, 1.0]))
def test_irving_against_brute_force(seed, n, density):
    I = roommates(n, SplitMix64(seed), density)
    found = find_stable(I)
    stable = stable_matchings(I)
    assert (found is None) == (not stable)
    if found is not None:
        assert found in stable


@given(seeds, st.integers(1, 7))
def test_strong_equals_weak_stability_without_ties(seed, n):
    I = roommates(n, SplitMix64(seed))
    for M in enumerate_matchings(I):
        assert bool(check_stable(I, M)) == bool(check_strongly_stable(I, M))


# --- improvements ----------------------------------------------------------------

def test_newly_acceptable_partner_goes_to_bottom():
    I = RoommatesInstance.from_lists(["p", "q", "r"], {"p": ["r"], "r": ["p"]})
    I2 = roommates_improvement(I, 0, 1, chain_poset(1, [0]))
    assert I2.ranking(0) == (2, 1)
    assert is_roommates_improvement(I, I2, 0, 1)
    assert not is_roommates_improvement(I, I2, 0, 2)


def test_improvement_must_not_touch_p():
    I = _odd_triangle()
    with pytest.raises(NotAnImprovement):
        roommates_improvement(I, 0, 0, chain_poset(0, [2, 1]))
    with pytest.raises(NotAnImprovement):
        roommates_improvement(I, 0, 1, chain_poset(1, [2]))


def test_truncation_drops_agents_below_p():
    I = RoommatesInstance.from_lists(["p", "q", "r", "s"], {
        "p": ["q"], "q": ["r", "p", "s"], "r": ["q"], "s": ["q"]})
    T = truncated_instance(I, 0, 1)
    assert T.ranking(1) == (2,)
    assert T.partners(3) == [] and T.partners(0) == []


def test_pr_sequence_stops_at_an_unmatched_agent():
    I = RoommatesInstance.from_lists(["a", "b", "c"], {"a": ["b"], "b": ["a", "c"], "c": ["b"]})
    S = PRSequence(I, [0], matchings=[(None, 2, 1)])
    S.step()
    assert S.betas == [1] and S.alphas == [0, 2]
    S.step()
    assert S.status == "stopped"


def test_sr_improve_rejects_unstable_input():
    I = RoommatesInstance.from_lists(["a", "b"], {"a": ["b"], "b": ["a"]})
    with pytest.raises(NotStable):
        sr_improve(I, I, 0, 1, (None, None))


def test_sr_unsolvable_fixture(fixture_text):
    I = RoommatesInstance(parse_market(fixture_text("sr_unsolvable_before.market")))
    I2 = RoommatesInstance(parse_market(fixture_text("sr_unsolvable_after.market")))
    p, q = I.market.agent("p"), I.market.agent("q")
    assert is_roommates_improvement(I, I2, p, q)
    M = find_stable(I)
    assert M is not None
    assert stable_matchings(I2) == []
    assert sr_improve(I, I2, p, q, M, check_invariants=True) is None


def test_ssm_best_fixture(fixture_text):
    I = RoommatesInstance(parse_market(fixture_text("ssm_best_before.market")))
    I2 = RoommatesInstance(parse_market(fixture_text("ssm_best_after.market")))
    p, q = I.market.agent("p"), I.market.agent("q")
    assert is_roommates_improvement(I, I2, p, q)
    before = {M[p] for M in strongly_stable_matchings(I)}
    after = {M[p] for M in strongly_stable_matchings(I2)}
    best_before = [x for x in before if not any(I2.prefers(p, x, y) for y in before)]
    best_after = [x for x in after if not any(I2.prefers(p, x, y) for y in after)]
    assert all(I2.prefers(p, a, b) for a in best_after for b in best_before)


@given(seeds, st.integers(2, 9))
def test_sr_improve_against_enumeration(seed, n):
    rng = SplitMix64(seed)
    I = roommates(n, rng, 0.7)
    stable = stable_matchings(I)
    if not stable:
        return
    M = stable[rng.randbelow(len(stable))]
    p = rng.randbelow(n)
    q = (p + 1 + rng.randbelow(n - 1)) % n
    I2 = roommates_bump(I, p, q, rng)
    out = sr_improve(I, I2, p, q, M, check_invariants=True)
    stable2 = stable_matchings(I2)
    if out is None:
        assert stable2 == []
    else:
        assert out in stable2
        assert I2.weakly_prefers(p, M[p], out[p])
