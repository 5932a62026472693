import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlgames.errors import BudgetExceeded, QISInvalid
from nlgames.games import classical_value, is_synchronous, perfect_classical_exists
from nlgames.graphgames import (
    Graph,
    QuantumIndependentSet,
    check_qis,
    complete_graph,
    empty_graph,
    independence_number,
    independent_set_game,
    strategy_from_qis,
)
from nlgames.numerics import is_pvm
from nlgames.strategies import win_prob

from oracles import brute_alpha, brute_classical_value, random_graph


def test_graph_rejects_self_loops_and_range():
    with pytest.raises(ValueError):
        Graph(3, frozenset({(1, 1)}))
    with pytest.raises(ValueError):
        Graph(3, frozenset({(0, 3)}))


def test_edges_normalised():
    g = Graph(3, frozenset({(2, 0), (0, 2)}))
    assert g.edges == {(0, 2)}
    assert g.adjacent(2, 0) and g.degree(0) == 1


def test_complement():
    g = Graph(4, frozenset({(0, 1), (2, 3)}))
    c = g.complement()
    assert len(c.edges) == 4 and not c.adjacent(0, 1) and c.adjacent(0, 2)


@pytest.mark.parametrize("n", [1, 5, 9])
def test_alpha_complete_and_empty(n):
    assert independence_number(complete_graph(n))[0] == 1
    assert independence_number(empty_graph(n))[0] == n


def test_alpha_empty_seven():
    size, witness = independence_number(empty_graph(7))
    assert size == 7 and witness == tuple(range(7))


def test_alpha_budget():
    rng = np.random.default_rng(1)
    g = Graph(60, frozenset(random_graph(60, 0.3, rng)))
    with pytest.raises(BudgetExceeded):
        independence_number(g, budget=5)


def test_alpha_matches_brute_force_50_graphs(rng):
    for _ in range(50):
        n = int(rng.integers(1, 21))
        edges = random_graph(n, float(rng.uniform(0.1, 0.7)), rng)
        g = Graph(n, frozenset(edges))
        size, witness = independence_number(g)
        assert size == brute_alpha(n, edges)
        assert len(witness) == size and g.is_independent(witness)


def test_game_rules():
    g = Graph(3, frozenset({(0, 1)}))
    game = independent_set_game(g, 2)
    assert game.shape == (2, 2, 3, 3)
    assert is_synchronous(game)
    assert game.verify[0, 0, 1, 1] and not game.verify[0, 0, 1, 2]
    assert game.verify[0, 1, 0, 2] and not game.verify[0, 1, 0, 1] and not game.verify[0, 1, 2, 2]


def test_t1_game_value_one():
    g = Graph(4, frozenset({(0, 1), (1, 2), (2, 3)}))
    assert classical_value(independent_set_game(g, 1)).value == 1


def test_k2_two_not_classically_perfect():
    game = independent_set_game(complete_graph(2), 2)
    assert brute_classical_value(game.verify) < 1
    assert not perfect_classical_exists(game).exists
    assert not perfect_classical_exists(game, exploit_symmetry=False).exists


def _all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield [p for k, p in enumerate(pairs) if mask >> k & 1]


def test_perfect_iff_alpha_exhaustive_small():
    """Every graph on at most 5 vertices, t <= 5."""
    for n in range(1, 6):
        for edges in _all_graphs(n):
            g = Graph(n, frozenset(edges))
            alpha = brute_alpha(n, edges)
            for t in range(1, 6):
                game = independent_set_game(g, t)
                assert perfect_classical_exists(game, exploit_symmetry=False).exists == (alpha >= t)


def test_perfect_iff_alpha_random_up_to_12(rng):
    for _ in range(300):
        n = int(rng.integers(6, 13))
        edges = random_graph(n, float(rng.uniform(0.2, 0.8)), rng)
        g = Graph(n, frozenset(edges))
        alpha = brute_alpha(n, edges)
        for t in range(1, 6):
            game = independent_set_game(g, t)
            generic = perfect_classical_exists(game, exploit_symmetry=False)
            fast = perfect_classical_exists(game)
            assert generic.exists == fast.exists == (alpha >= t)
            for res in (generic, fast):
                if res.exists:
                    assert g.is_independent(res.witness.f_a)


def test_classical_qis_embedding():
    g = Graph(5, frozenset({(0, 1), (1, 2), (2, 3), (3, 4)}))
    q = QuantumIndependentSet.from_classical(g, [0, 2, 4])
    assert check_qis(g, q).passed
    s = strategy_from_qis(g, q)
    assert win_prob(independent_set_game(g, 3), s) == pytest.approx(1, abs=1e-12)


def test_classical_embedding_of_dependent_set_fails():
    g = Graph(3, frozenset({(0, 1)}))
    q = QuantumIndependentSet.from_classical(g, [0, 1])
    chk = check_qis(g, q)
    assert not chk.passed and chk.edges > 0.1
    with pytest.raises(QISInvalid):
        strategy_from_qis(g, q)


def test_qis_repeated_vertex_condition():
    g = empty_graph(2)
    q = QuantumIndependentSet.from_classical(g, [0, 0])
    chk = check_qis(g, q)
    assert chk.repeated_vertex > 0.1 and not chk.passed


def test_dot_round_trip():
    g = Graph(4, frozenset({(0, 1), (1, 3)}), ("a", "b", "c", "d"))
    h = Graph.from_dot(g.to_dot())
    assert h.edges == g.edges and h.labels == g.labels and h.vertex_count == 4


def test_edgelist_round_trip():
    g = Graph(6, frozenset({(0, 5), (2, 3)}))
    h = Graph.from_edgelist(g.to_edgelist())
    assert h.vertex_count == 6 and h.edges == g.edges


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**32 - 1))
def test_witness_is_independent(n, seed):
    rng = np.random.default_rng(seed)
    g = Graph(n, frozenset(random_graph(n, 0.5, rng)))
    size, w = independence_number(g)
    assert g.is_independent(w) and len(w) == size
    # adding any vertex breaks independence
    for v in set(range(n)) - set(w):
        assert not g.is_independent(w + (v,))


def test_qis_families_are_pvms_on_peres():
    from nlgames.analysis import peres_pipeline

    res = peres_pipeline()
    assert res.qis.size == 16 and res.qis.dim == 3
    for fam in res.qis.operators:
        assert is_pvm(fam)
        assert np.abs(fam.sum(axis=0) - np.eye(3)).max() <= 1e-9
