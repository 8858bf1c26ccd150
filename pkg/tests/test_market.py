import pytest
from hypothesis import given

from coremarket.errors import CyclicPreference, DuplicateAgent, InvalidAllocation, SelfDispreferred, UnknownAgent
from coremarket.market import (
    HousingMarket,
    PreferencePoset,
    acceptability_graph,
    check_core,
    check_strict_core,
    cycles_of,
    envy_graph,
    find_cycle,
    from_lists,
    identity,
    trading,
    validate_allocation,
)
from coremarket.oracle import iter_allocations

from strategies import markets


def _three_cycle():
    return from_lists(["a", "b", "c"], {"a": ["b"], "b": ["c"], "c": ["a"]})


# --- posets ----------------------------------------------------------------------

def test_relation_is_reduced_to_hasse_diagram():
    P = PreferencePoset(0, frozenset({0, 1, 2}), frozenset({(0, 1), (1, 2), (0, 2)}))
    assert P.covers == {(0, 1), (1, 2)}
    assert P.above[0] == {1, 2}
    assert P.upper[0] == (1,) and P.lower[2] == (1,)


def test_prefers_reads_worse_then_better():
    P = PreferencePoset(0, frozenset({0, 1, 2}), frozenset({(0, 1), (1, 2)}))
    assert P.prefers(1, 2) and not P.prefers(2, 1)
    assert P.weakly_prefers(1, 1)
    # unacceptable houses sit below everything acceptable
    assert P.prefers(5, 0)
    assert not P.prefers(0, 5)


def test_two_cycle_in_covers_is_rejected():
    with pytest.raises(CyclicPreference):
        PreferencePoset(0, frozenset({0, 1, 2}), frozenset({(1, 2), (2, 1)}))


def test_loop_relation_is_rejected():
    with pytest.raises(CyclicPreference):
        PreferencePoset(0, frozenset({0, 1}), frozenset({(1, 1)}))


def test_relation_naming_unacceptable_house_is_rejected():
    with pytest.raises(SelfDispreferred):
        PreferencePoset(0, frozenset({0, 1}), frozenset({(0, 2)}))


def test_house_below_own_is_rejected():
    with pytest.raises(SelfDispreferred):
        PreferencePoset(0, frozenset({0, 1}), frozenset({(1, 0)}))


def test_incomparable_to_own_house_is_allowed():
    P = PreferencePoset(0, frozenset({0, 1}), frozenset())
    assert P.incomparable(0, 1)


def test_chain_and_tie_classes():
    strict = PreferencePoset(0, frozenset({0, 1, 2}), frozenset({(0, 1), (1, 2)}))
    assert strict.chain() == (2, 1, 0)
    weak = PreferencePoset(0, frozenset({0, 1, 2}), frozenset({(0, 1), (0, 2)}))
    assert weak.chain() is None
    assert weak.tie_classes() == [(1, 2), (0,)]
    vee = PreferencePoset(0, frozenset({0, 1, 2, 3}), frozenset({(0, 1), (0, 2), (1, 3)}))
    assert vee.tie_classes() is None


def test_tied_houses_share_one_up_set():
    H = from_lists(["a", "b", "c", "d"], {"a": ["d", ("b", "c")]})
    P = H.prefs[0]
    assert P.above[1] is P.above[2]


# --- markets ---------------------------------------------------------------------

def test_from_lists_puts_own_house_last_and_desugars_ties():
    H = from_lists(["a", "b", "c"], {"a": [("b", "c")], "b": ["a", "@self"]})
    assert H.prefs[0].tie_classes() == [(1, 2), (0,)]
    assert H.prefs[1].chain() == (0, 1)
    assert H.prefs[2].acceptable == {2}


def test_duplicate_agent_is_rejected():
    with pytest.raises(DuplicateAgent):
        from_lists(["a", "a"], {})


def test_unknown_agent_in_list_is_rejected():
    with pytest.raises(UnknownAgent):
        from_lists(["a"], {"a": ["zz"]})


def test_agent_lookup():
    H = _three_cycle()
    assert H.agent("b") == 1 and H.agent(2) == 2
    with pytest.raises(UnknownAgent):
        H.agent("x")
    with pytest.raises(UnknownAgent):
        H.agent(3)


def test_size_counts_vertices_and_cover_arcs():
    H = _three_cycle()
    # each agent: 2 houses and 1 cover
    assert H.size == 9
    assert H.num_arcs == 6


def test_submarket_keeps_relations():
    H = from_lists(["a", "b", "c"], {"a": ["c", "b"], "c": ["a"]})
    S, keep = H.submarket([0, 2])
    assert keep == (0, 2)
    assert S.names == ("a", "c")
    assert S.prefs[0].chain() == (1, 0)


# --- allocations -----------------------------------------------------------------

def test_allocation_must_be_a_permutation():
    H = _three_cycle()
    with pytest.raises(InvalidAllocation):
        validate_allocation(H, (1, 1, 2))


def test_allocation_must_respect_acceptability():
    H = _three_cycle()
    with pytest.raises(InvalidAllocation):
        validate_allocation(H, (2, 0, 1))


def test_cycles_and_trading():
    X = (1, 0, 2, 4, 3)
    assert cycles_of(X) == [(0, 1), (2,), (3, 4)]
    assert trading(X) == 4


# --- core checks -----------------------------------------------------------------

def test_identity_blocked_when_acceptability_graph_has_cycle():
    H = _three_cycle()
    v = check_core(H, identity(H))
    assert not v
    assert v.witness == (0, 1, 2)


def test_single_agent_identity_in_core():
    H = from_lists(["a"], {})
    assert check_core(H, (0,))
    assert check_strict_core(H, (0,))


def test_blocking_witness_is_first_cycle_of_ordinal_dfs():
    H = from_lists(["a", "b", "c", "d"], {"a": ["b"], "b": ["a"], "c": ["d"], "d": ["c"]})
    assert check_core(H, identity(H)).witness == (0, 1)


def test_weakly_blocking_cycle_detected():
    # a is indifferent between b and c; moving to the (b, c) swap helps b and c
    H = from_lists(["a", "b", "c"], {
        "a": [("b", "c")],
        "b": ["c", "a"],
        "c": ["a", "b"],
    })
    X = (2, 0, 1)  # a->c, b->a, c->b
    assert check_core(H, X)
    v = check_strict_core(H, X)
    assert not v
    assert len(v.witness) >= 2


def test_envy_graph_lists_strictly_better_houses():
    H = from_lists(["a", "b", "c"], {"a": ["b", "c"], "b": ["a"], "c": ["a"]})
    G = envy_graph(H, (2, 1, 0))
    assert G.out[0] == (1,)
    assert acceptability_graph(H).out[0] == (0, 1, 2)


def test_find_cycle_on_dag():
    assert find_cycle([[1], [2], []]) is None
    assert find_cycle([[1], [2], [1]]) == (1, 2)


@given(markets(max_n=5))
def test_check_core_matches_blocking_cycle_enumeration(H):
    # a blocking cycle exists iff some allocation of a sub-coalition blocks;
    # the envy-graph test must agree with the pruning-free definition
    for X in iter_allocations(H):
        blocked = not check_core(H, X)
        assert blocked == _has_blocking_coalition(H, X)


def _has_blocking_coalition(H: HousingMarket, X) -> bool:
    # brute force: a cycle a1 -> a2 -> ... where each ai strictly prefers a(i+1)'s house
    n = H.n
    better = [[b for b in range(n) if H.prefers(a, X[a], b)] for a in range(n)]

    def dfs(start, v, seen):
        for w in better[v]:
            if w == start:
                return True
            if w not in seen and w > start:
                seen.add(w)
                if dfs(start, w, seen):
                    return True
        return False

    return any(dfs(a, a, {a}) for a in range(n))


@given(markets(max_n=5))
def test_strict_core_is_subset_of_core(H):
    for X in iter_allocations(H):
        if check_strict_core(H, X):
            assert check_core(H, X)


@given(markets(max_n=5))
def test_strict_core_witness_is_weakly_blocking(H):
    for X in iter_allocations(H):
        v = check_strict_core(H, X)
        if v:
            continue
        cyc = v.witness
        strict = False
        for i, a in enumerate(cyc):
            b = cyc[(i + 1) % len(cyc)]
            assert b in H.prefs[a].acceptable
            assert H.weakly_prefers(a, X[a], b)
            strict |= H.prefers(a, X[a], b)
        assert strict
