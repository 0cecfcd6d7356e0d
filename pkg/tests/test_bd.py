from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trigtops.bd import (
    BDError,
    BDStructure,
    CyclicPerm,
    build_bd,
    enumerate_bd,
    shift_down,
    transitive_perms,
    worked_example,
)


def chains_by_search(c0: CyclicPerm, gamma) -> set[tuple[int, int]]:
    """Independent oracle: walk every start point and every length."""
    out = set()
    for s in range(1, c0.n + 1):
        for k in range(1, c0.n):
            links = [(c0.power(s, m), c0.power(s, m + 1)) for m in range(k)]
            if all(link in gamma for link in links):
                out.add((s, c0.power(s, k)))
    return out


def test_cyclic_perm_validation():
    with pytest.raises(BDError):
        CyclicPerm((1, 1, 2))
    with pytest.raises(BDError):
        CyclicPerm((2, 1, 3))  # not transitive
    c = shift_down(4)
    assert c.image == (4, 1, 2, 3)
    assert c.inverse()(c(3)) == 3
    assert c.exponent(4, 1) == 3


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_worked_example_sets(n):
    bd = worked_example(n)
    p1 = {(s, t) for s in range(1, n) for t in range(1, s)} | {(s, n) for s in range(1, n)}
    p2 = {(s, t) for s in range(2, n + 1) for t in range(1, s)}
    assert set(bd.p1) == p1
    assert set(bd.p2) == p2
    assert len(bd.p1) == n * (n - 1) // 2
    assert {bd.tau(p) for p in bd.p1} == set(bd.p2)


def test_single_pair_gamma():
    c0 = shift_down(3)
    bd = build_bd(3, c0, c0.inverse(), {(1, 3)})
    assert set(bd.p1) == {(1, 3)}
    assert set(bd.p2) == {(2, 1)}


def test_build_errors():
    c0 = shift_down(3)
    with pytest.raises(BDError):
        build_bd(3, c0, c0.inverse(), {(1, 2)})  # not an edge of C0
    with pytest.raises(BDError):
        build_bd(3, c0, c0.inverse(), c0.graph())  # not proper
    with pytest.raises(BDError):
        build_bd(4, c0, c0.inverse(), {(1, 3)})  # size mismatch


def test_tau_iterations_stay_in_p2():
    bd = worked_example(5)
    for j, i, k, l, m, nu in bd.tau_terms():
        assert (k, l) in bd.p2
        assert bd.c0.power(j, m) == i
        assert nu >= 1


def test_json_round_trip():
    bd = worked_example(4)
    back = BDStructure.from_json(bd.to_json())
    assert back == bd


def test_enumeration_small_sizes():
    assert enumerate_bd(1) == []
    # n = 2: only the swap; Gamma1 is one of the two edges, C is forced
    found = enumerate_bd(2)
    assert len(found) == 2
    with pytest.raises(BDError):
        enumerate_bd(6)


def test_enumeration_matches_brute_force_n3():
    n = 3
    expected = 0
    perms = list(transitive_perms(n))
    for c0, c in itertools.product(perms, repeat=2):
        edges = sorted(c0.graph())
        for size in range(1, n):
            for sub in itertools.combinations(edges, size):
                g2 = {(c(a), c(b)) for a, b in sub}
                if not g2 <= c0.graph():
                    continue
                p1 = chains_by_search(c0, set(sub))
                p2 = chains_by_search(c0, g2)
                if {(c(a), c(b)) for a, b in p1} == p2:
                    expected += 1
    assert len(enumerate_bd(n)) == expected
    assert worked_example(n) in enumerate_bd(n)


@given(st.integers(3, 5), st.data())
@settings(max_examples=40, deadline=None)
def test_chain_sets_match_search(n, data):
    perms = list(transitive_perms(n))
    c0 = data.draw(st.sampled_from(perms))
    c = data.draw(st.sampled_from(perms))
    edges = sorted(c0.graph())
    sub = data.draw(st.lists(st.sampled_from(edges), min_size=1, max_size=n - 1, unique=True))
    try:
        bd = build_bd(n, c0, c, sub)
    except BDError:
        return
    assert set(bd.p1) == chains_by_search(c0, set(sub))
    assert set(bd.p2) == chains_by_search(c0, set(bd.gamma2))
