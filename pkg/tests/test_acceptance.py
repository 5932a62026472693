"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary.
"""

import contextlib
import math
import time

import networkx as nx
import numpy as np
import pytest

from nlgames.analysis import (
    coprime_rank_example,
    large_shape_report,
    no_state_selftest_certificate,
    peres_pipeline,
)
from nlgames.games import classical_value, classical_win_prob, is_synchronous, perfect_classical_exists
from nlgames.graphgames import Graph, independence_number, independent_set_game
from nlgames.kochenspecker import KSVerdict, enumerate_bases, quantum_independent_set_from_ks
from nlgames.magicsquare import (
    magic_square_game,
    magic_square_reference_strategy,
    sync_magic_square_game,
    sync_magic_square_reference_strategy,
)
from nlgames.numerics import Tolerance, frob, is_pvm, projection_residual, schmidt_rank
from nlgames.orgame import component_projections, extract_component_strategy, perfect_classical_exists_or
from nlgames.strategies import check_sync_identity, correlation, direct_sum, restrict_to_support, win_prob

from oracles import brute_alpha, brute_classical_value, random_graph
from test_strategies import rank_deficient

EQ = 1e-9
RESULTS: list[str] = []


@contextlib.contextmanager
def criterion(n: int, title: str):
    detail: dict = {}
    try:
        yield detail
    except BaseException as e:
        line = f"ACCEPTANCE {n} FAIL: {title} ({type(e).__name__}: {e})"
        RESULTS.append(line)
        print(line)
        raise
    extra = " ".join(f"{k}={v}" for k, v in detail.items())
    line = f"ACCEPTANCE {n} PASS: {title}" + (f" [{extra}]" if extra else "")
    RESULTS.append(line)
    print(line)


def pvm_residual(fam) -> float:
    d = fam.shape[-1]
    return max(max(projection_residual(p) for p in fam), frob(fam.sum(axis=0) - np.eye(d)))


def test_criterion_1_magic_square_reference_strategy():
    with criterion(1, "magic square reference strategy is a perfect PVM strategy") as d:
        t0 = time.perf_counter()
        g, s = magic_square_game(), magic_square_reference_strategy()
        wp = win_prob(g, s)
        fams = list(s.povms_a) + list(s.povms_b)
        worst = max(pvm_residual(f) for f in fams)
        elapsed = time.perf_counter() - t0
        d.update(win=f"{wp:.12f}", families=len(fams), pvm_residual=f"{worst:.1e}", seconds=f"{elapsed:.3f}")
        assert abs(wp - 1) <= EQ
        assert len(fams) == 6 and worst <= EQ
        assert all(is_pvm(f, Tolerance(EQ)) for f in fams)
        assert elapsed < 1.0


def test_criterion_2_magic_square_classical_value():
    with criterion(2, "magic square classical value equals brute-force oracle and is < 1") as d:
        g = magic_square_game()
        t0 = time.perf_counter()
        res = classical_value(g)
        elapsed = time.perf_counter() - t0
        oracle = brute_classical_value(g.verify)
        d.update(value=res.value, oracle=oracle, pairs=4**3 * 4**3, seconds=f"{elapsed:.3f}")
        assert res.exact and res.value == oracle
        assert classical_win_prob(g, res.witness) == res.value
        assert res.value < 1
        assert elapsed < 1.0


def test_criterion_3_sync_magic_square_reference_strategy():
    with criterion(3, "synchronous magic square strategy: perfect, zero pattern, sync identity") as d:
        g, s = sync_magic_square_game(), sync_magic_square_reference_strategy()
        wp = win_prob(g, s)
        # row questions answer even triples (indices 0-3), column questions odd triples (4-7)
        expected_zero = np.zeros((6, 8), dtype=bool)
        expected_zero[:3, 4:] = True
        expected_zero[3:, :4] = True
        zero_a = np.array([[not s.povms_a[x, a].any() for a in range(8)] for x in range(6)])
        zero_b = np.array([[not s.povms_b[x, a].any() for a in range(8)] for x in range(6)])
        sync = max(check_sync_identity(s, x, a) for x in range(6) for a in range(8))
        d.update(win=f"{wp:.12f}", sync_residual=f"{sync:.1e}")
        assert abs(wp - 1) <= EQ
        assert np.array_equal(zero_a, expected_zero) and np.array_equal(zero_b, expected_zero)
        assert sync <= EQ


@pytest.fixture(scope="module")
def peres_run():
    t0 = time.perf_counter()
    res = peres_pipeline()
    return res, time.perf_counter() - t0


def test_criterion_4_peres_pipeline(peres_run):
    res, elapsed = peres_run
    with criterion(4, "Peres pipeline: 33 rays, 16 bases, WeakKS, 48 vertices, alpha 15, QIS 16, rank 3") as d:
        s = res.summary()
        d.update(**{k: s[k] for k in ("rays", "bases", "verdict", "vertices", "alpha", "qis", "rank")},
                 seconds=f"{elapsed:.3f}", alpha_seconds=f"{res.timings['alpha']:.3f}")
        assert (s["rays"], s["bases"], s["vertices"], s["alpha"], s["qis"], s["rank"]) == (33, 16, 48, 15, 16, 3)
        assert res.ks.verdict is KSVerdict.WEAK_KS
        chk = res.qis_check
        assert max(chk.projection, chk.completeness, chk.edges, chk.repeated_vertex) <= EQ
        assert abs(res.win - 1) <= EQ
        assert elapsed < 60 and res.timings["alpha"] < 30
        # independent oracle for alpha on the same graph
        g = nx.Graph()
        g.add_nodes_from(range(48))
        g.add_edges_from(res.graph.graph.edges)
        clique, _ = nx.max_weight_clique(nx.complement(g), weight=None)
        assert len(clique) == 15


def test_criterion_5_quantum_exceeds_classical_independence(peres_run):
    res, _ = peres_run
    with criterion(5, "QIS size from the KS structure exceeds alpha from branch and bound") as d:
        k = len(enumerate_bases(res.rays))
        q = quantum_independent_set_from_ks(res.projective, res.graph)
        alpha, witness = independence_number(res.graph.graph)
        d.update(qis=q.size, bases=k, alpha=alpha)
        assert q.size == k == 16
        assert res.graph.graph.is_independent(witness) and len(witness) == alpha == 15
        assert q.size > alpha


@pytest.fixture(scope="module")
def or_example():
    return coprime_rank_example()


def test_criterion_6_no_state_selftest(or_example):
    with criterion(6, "or-game of the Peres independent set game and the magic square: VALID certificate") as d:
        og = or_example.og
        nxa, nyb, na, nb = og.shape
        w1 = win_prob(og.game, or_example.lifted_qis)
        w2 = win_prob(og.game, or_example.lifted_ms)
        r1, r2 = schmidt_rank(or_example.lifted_qis.state), schmidt_rank(or_example.lifted_ms.state)
        times = []
        for parent in og.parents:
            t0 = time.perf_counter()
            assert not perfect_classical_exists(parent).exists
            times.append(time.perf_counter() - t0)
        rep = no_state_selftest_certificate(og, or_example.lifted_qis, or_example.lifted_ms)
        d.update(inputs=(nxa, nyb), outputs=(na, nb), ranks=(r1, r2), gcd=math.gcd(r1, r2),
                 certificate="VALID" if rep.valid else "INVALID",
                 parent_search_seconds=tuple(f"{t:.3f}" for t in times))
        assert (nxa, nyb, na, nb) == (48, 48, 52, 52)
        assert abs(w1 - 1) <= EQ and abs(w2 - 1) <= EQ
        assert (r1, r2) == (3, 4) and math.gcd(r1, r2) == 1
        assert rep.valid
        assert perfect_classical_exists_or(og) is False
        assert all(t < 60 for t in times)


def test_criterion_7_extraction_round_trip(or_example):
    with criterion(7, "direct-sum strategy splits into perfect parent strategies") as d:
        og = or_example.og
        s = direct_sum(or_example.lifted_qis, or_example.lifted_ms, 0.5)
        assert win_prob(og.game, s) >= 1 - EQ
        cp = component_projections(og, s)
        wins = []
        for which in (1, 2):
            e = extract_component_strategy(og, s, which, projections=cp)
            wins.append(win_prob(og.parents[which - 1], e))
        d.update(parent_wins=tuple(f"{w:.12f}" for w in wins))
        assert all(abs(w - 1) <= EQ for w in wins)


def test_criterion_8_property_suite():
    with criterion(8, "restrict_to_support, alpha oracle, perfect iff alpha >= t") as d:
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(50):
            s = rank_deficient(rng, max_dim=6)
            r = restrict_to_support(s)
            worst = max(worst, float(np.abs(correlation(r) - correlation(s)).max()))
        assert worst <= EQ

        for _ in range(50):
            n = int(rng.integers(1, 21))
            edges = random_graph(n, float(rng.uniform(0.1, 0.7)), rng)
            assert independence_number(Graph(n, frozenset(edges)))[0] == brute_alpha(n, edges)

        checked = 0
        # every graph on at most 7 vertices (up to isomorphism), then random graphs on 8 to 12
        graphs = [(a.number_of_nodes(), list(a.edges)) for a in nx.graph_atlas_g() if a.number_of_nodes() > 0]
        for _ in range(200):
            n = int(rng.integers(8, 13))
            graphs.append((n, random_graph(n, float(rng.uniform(0.2, 0.8)), rng)))
        for n, edges in graphs:
            g = Graph(n, frozenset(edges))
            alpha = brute_alpha(n, edges)
            for t in range(1, 6):
                got = perfect_classical_exists(independent_set_game(g, t), exploit_symmetry=False).exists
                assert got == (alpha >= t), (n, edges, t)
                checked += 1
        d.update(restrict_worst=f"{worst:.1e}", alpha_graphs=50, game_instances=checked)


def test_criterion_9_shape_report():
    with criterion(9, "large or-game shape, delta-family lift and separation witness") as d:
        rep = large_shape_report()
        g = rep.game
        sep = rep.verdict("separation-witness").value
        diffs = [abs(r["win_prob"] - r["parent_win_prob"]) for r in rep.strategies[1:]]
        d.update(inputs=(g["inputsA"], g["inputsB"]), outputs=(g["outputsA"], g["outputsB"]),
                 max_lift_diff=f"{max(diffs):.1e}", reference_o2=sep["reference"], lifted_o2=sep["lifted_max"])
        assert (g["inputsA"], g["inputsB"], g["outputsA"], g["outputsB"]) == (1104, 1410, 16, 10)
        assert max(diffs) <= 1e-12
        assert sep["lifted_max"] == 0.0 and sep["reference"] > 0
        assert rep.verdict("separation-witness").passed
        assert is_synchronous(sync_magic_square_game())
