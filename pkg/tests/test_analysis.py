import math

import numpy as np
import pytest

from nlgames.analysis import (
    LARGE_PARENT_SHAPE,
    SelfTestReport,
    coprime_rank_example,
    large_shape_report,
    no_state_selftest_certificate,
    nonrobust_construction_report,
    peres_pipeline,
    toy_delta_family,
)
from nlgames.errors import HypothesisFailed, NotPerfect, ParentNotSynchronous
from nlgames.games import agreement_game, trivial_game
from nlgames.kochenspecker import RaySet
from nlgames.magicsquare import (
    magic_square_game,
    magic_square_reference_strategy,
    sync_magic_square_game,
    sync_magic_square_reference_strategy,
)
from nlgames.numerics import BipartiteState, random_unitary
from nlgames.orgame import lift_strategy, or_game
from nlgames.strategies import QuantumStrategy, local_unitary, win_prob


@pytest.fixture(scope="module")
def example():
    return coprime_rank_example()


def test_peres_pipeline_values():
    res = peres_pipeline()
    s = res.summary()
    assert (s["rays"], s["bases"], s["vertices"], s["alpha"], s["qis"], s["rank"]) == (33, 16, 48, 15, 16, 3)
    assert s["verdict"] == "WeakKS" and s["synchronous"]
    assert res.passed


def test_peres_pipeline_stops_on_plain_basis():
    res = peres_pipeline(RaySet(3, np.eye(3)))
    assert not res.completed and not res.passed
    assert res.summary()["verdict"] == "NotWeakKS"


def test_certificate_valid(example):
    rep = no_state_selftest_certificate(example.og, example.lifted_qis, example.lifted_ms, names=("qis", "ms"))
    assert rep.valid
    assert [s["schmidt_rank"] for s in rep.strategies] == [3, 4]
    assert rep.verdict("coprime-schmidt-ranks").value == math.gcd(3, 4) == 1
    assert rep.classical_perfect is False
    assert (rep.game["inputsA"], rep.game["outputsA"]) == (48, 52)


def test_certificate_symmetric(example):
    a = no_state_selftest_certificate(example.og, example.lifted_qis, example.lifted_ms)
    b = no_state_selftest_certificate(example.og, example.lifted_ms, example.lifted_qis)
    assert a.valid == b.valid
    assert a.verdict("coprime-schmidt-ranks").value == b.verdict("coprime-schmidt-ranks").value
    assert sorted(s["schmidt_rank"] for s in a.strategies) == sorted(s["schmidt_rank"] for s in b.strategies)


def test_certificate_swapped_parents():
    ex = coprime_rank_example(swap_parents=True)
    assert ex.og.parents[0].shape == (3, 3, 4, 4)
    assert no_state_selftest_certificate(ex.og, ex.lifted_qis, ex.lifted_ms).valid


def test_certificate_equal_ranks_invalid(example):
    rep = no_state_selftest_certificate(example.og, example.lifted_ms, example.lifted_ms)
    assert not rep.valid
    assert rep.verdict("coprime-schmidt-ranks").value == 4


def test_certificate_not_perfect(example):
    ea = np.array(example.lifted_ms.povms_a)
    x = example.og.question_a(0, 0)
    sl = example.og.answer_slice(2)
    ea[x, sl.start], ea[x, sl.start + 1] = ea[x, sl.start + 1].copy(), ea[x, sl.start].copy()
    bad = QuantumStrategy(example.lifted_ms.state, ea, example.lifted_ms.povms_b)
    with pytest.raises(HypothesisFailed) as e:
        no_state_selftest_certificate(example.og, example.lifted_qis, bad)
    assert e.value.name.startswith("perfect")
    assert e.value.measured < 1


def test_certificate_classically_winnable():
    g = agreement_game(2)
    one = QuantumStrategy(BipartiteState(1, 1, [1.0]), np.array([[[[1.0]], [[0.0]]]]), np.array([[[[1.0]], [[0.0]]]]))
    with pytest.raises(HypothesisFailed) as e:
        no_state_selftest_certificate(g, one, one)
    assert e.value.name == "pseudo-telepathy"


def test_certificate_stable_under_local_unitaries(example, rng):
    for _ in range(20):
        which = int(rng.integers(2))
        s = example.lifted_qis if which == 0 else example.lifted_ms
        d = s.state.dim_a
        t = local_unitary(s, random_unitary(d, rng), random_unitary(d, rng))
        pair = (t, example.lifted_ms) if which == 0 else (example.lifted_qis, t)
        rep = no_state_selftest_certificate(example.og, *pair)
        assert rep.valid
        assert [r["schmidt_rank"] for r in rep.strategies] == [3, 4]


def test_report_round_trip(example):
    rep = no_state_selftest_certificate(example.og, example.lifted_qis, example.lifted_ms)
    text = rep.to_json()
    back = SelfTestReport.from_json(text)
    assert back.to_json() == text
    assert list(rep.to_dict()) == ["kind", "valid", "game", "strategies", "classicalPerfect",
                                   "verdicts", "provenance", "notes"]
    assert "VALID" in rep.render_text()


def test_report_invariants():
    with pytest.raises(ValueError):
        SelfTestReport("x", {}, [{"name": "a", "schmidt_rank": 0}], None, [], {})
    from nlgames.analysis import Verdict

    with pytest.raises(ValueError):
        SelfTestReport("x", {}, [{"name": "a"}], None, [Verdict("v", True, strategies=["b"])], {})


def test_large_shape_report():
    rep = large_shape_report()
    assert rep.valid
    g = rep.game
    assert (g["inputsA"], g["inputsB"], g["outputsA"], g["outputsB"]) == (1104, 1410, 16, 10)
    sep = rep.verdict("separation-witness").value
    assert sep["lifted_max"] == 0.0 and sep["reference"] > 0.4
    for r in rep.strategies[1:]:
        assert abs(r["win_prob"] - r["parent_win_prob"]) <= 1e-12
        assert abs(r["win_prob"] - (1 - r["delta"])) <= 1e-12


def test_toy_family_at_point_nine():
    g, fam = toy_delta_family([0.1])
    og = or_game(g, sync_magic_square_game())
    assert win_prob(og.game, lift_strategy(og, 1, fam[0][1])) == pytest.approx(0.9, abs=1e-12)


def test_nonrobust_report_errors():
    toy, fam = toy_delta_family()
    with pytest.raises(ParentNotSynchronous):
        nonrobust_construction_report(LARGE_PARENT_SHAPE, magic_square_game(), magic_square_reference_strategy(), fam, toy)
    s = sync_magic_square_reference_strategy()
    fb = np.array(s.povms_b)
    fb[0, [0, 1]] = fb[0, [1, 0]]
    with pytest.raises(NotPerfect):
        nonrobust_construction_report(LARGE_PARENT_SHAPE, sync_magic_square_game(),
                                      QuantumStrategy(s.state, s.povms_a, fb), fam, toy)


def test_trivial_parent_report_shape():
    rep = nonrobust_construction_report(trivial_game(), sync_magic_square_game(),
                                        sync_magic_square_reference_strategy(), [], trivial_game())
    assert rep.game["inputsA"] == 6 and rep.game["outputsA"] == 9
