"""Certificates and end-to-end pipelines.

* :func:`no_state_selftest_certificate` checks that a pseudo-telepathy game
  has two perfect strategies whose Schmidt ranks are coprime, which rules
  out the game self-testing any state.
* :func:`nonrobust_construction_report` lifts a family of imperfect
  strategies for one parent of an or-game and records that none of them
  ever plays the second parent, while the perfect reference strategy does.
* :func:`peres_pipeline`, :func:`coprime_rank_example` and
  :func:`large_shape_report` run the worked examples end to end.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import HypothesisFailed, NotPerfect, NotWeakKS, ParentNotSynchronous
from .games import NonlocalGame, agreement_game, is_synchronous, perfect_classical_exists
from .graphgames import QISCheck, QuantumIndependentSet, check_qis, independence_number, independent_set_game, strategy_from_qis
from .kochenspecker import (
    KSResult,
    OrthogonalityGraph,
    ProjectiveKSSet,
    RaySet,
    is_weak_ks,
    orthogonality_graph,
    peres_33,
    quantum_independent_set_from_ks,
    to_projective_ks,
)
from .magicsquare import magic_square_game, magic_square_reference_strategy, sync_magic_square_game, sync_magic_square_reference_strategy
from .numerics import DEFAULT_TOL, BipartiteState, Tolerance, schmidt_rank
from .orgame import GameShape, OrGame, lift_strategy, or_game, or_shape, perfect_classical_exists_or
from .strategies import QuantumStrategy, win_prob

# Question and answer counts of a large synchronous-style game used only for sizing.
LARGE_PARENT_SHAPE = GameShape(184, 235, 8, 2)


@dataclass
class Verdict:
    name: str
    passed: bool
    value: object = None
    residual: float | None = None
    strategies: list = field(default_factory=list)


@dataclass
class SelfTestReport:
    kind: str
    game: dict
    strategies: list
    classical_perfect: bool | None
    verdicts: list
    provenance: dict
    notes: list = field(default_factory=list)

    def __post_init__(self):
        names = {s["name"] for s in self.strategies}
        for v in self.verdicts:
            missing = set(v.strategies) - names
            if missing:
                raise ValueError(f"verdict {v.name} references unknown strategies {sorted(missing)}")
        for s in self.strategies:
            r = s.get("schmidt_rank")
            if r is not None and (not isinstance(r, int) or r < 1):
                raise ValueError(f"Schmidt rank must be a positive integer, got {r!r}")

    @property
    def valid(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "valid": self.valid,
            "game": self.game,
            "strategies": self.strategies,
            "classicalPerfect": self.classical_perfect,
            "verdicts": [asdict(v) for v in self.verdicts],
            "provenance": self.provenance,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SelfTestReport":
        return cls(d["kind"], d["game"], d["strategies"], d["classicalPerfect"],
                   [Verdict(**v) for v in d["verdicts"]], d["provenance"], d.get("notes", []))

    @classmethod
    def from_json(cls, text: str) -> "SelfTestReport":
        return cls.from_dict(json.loads(text))

    def render_text(self) -> str:
        lines = [f"{self.kind}: {'VALID' if self.valid else 'INVALID'}"]
        lines.append("game: " + " ".join(f"{k}={v}" for k, v in self.game.items()))
        for s in self.strategies:
            lines.append("strategy: " + " ".join(f"{k}={_fmt(v)}" for k, v in s.items()))
        if self.classical_perfect is not None:
            lines.append(f"classical_perfect={str(self.classical_perfect).lower()}")
        for v in self.verdicts:
            extra = "" if v.residual is None else f" residual={v.residual:.3e}"
            lines.append(f"[{'PASS' if v.passed else 'FAIL'}] {v.name} value={_fmt(v.value)}{extra}")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.9f}"
    return str(v)


def _game_summary(g: NonlocalGame) -> dict:
    nxa, nyb, na, nb = g.shape
    return {"inputsA": nxa, "inputsB": nyb, "outputsA": na, "outputsB": nb, "synchronous": is_synchronous(g)}


def no_state_selftest_certificate(g, s1: QuantumStrategy, s2: QuantumStrategy,
                                  tol: Tolerance = DEFAULT_TOL,
                                  names: tuple[str, str] = ("s1", "s2")) -> SelfTestReport:
    """Coprime-Schmidt-rank certificate.

    ``g`` may be an :class:`OrGame`, in which case the classical check runs on
    the two parents separately.  Raises :class:`HypothesisFailed` if either
    strategy is not perfect or the game has a perfect classical strategy.
    """
    if isinstance(g, OrGame):
        game = g.game
        classical = perfect_classical_exists_or(g)
    else:
        game = g
        classical = None
    records, ranks = [], []
    for name, s in zip(names, (s1, s2)):
        wp = win_prob(game, s)
        if wp < 1 - tol.eq:
            raise HypothesisFailed(f"perfect:{name}", wp)
        r = schmidt_rank(s.state, tol)
        ranks.append(r)
        records.append({"name": name, "win_prob": wp, "schmidt_rank": r, "dims": [s.state.dim_a, s.state.dim_b]})
    if classical is None:
        classical = perfect_classical_exists(game).exists
    if classical:
        raise HypothesisFailed("pseudo-telepathy", 1.0)
    d = math.gcd(*ranks)
    verdicts = [
        Verdict(f"perfect:{n}", True, r["win_prob"], max(0.0, 1 - r["win_prob"]), [n]) for n, r in zip(names, records)
    ]
    verdicts.append(Verdict("no-perfect-classical", True, False))
    verdicts.append(Verdict("coprime-schmidt-ranks", d == 1, d, None, list(names)))
    summary = _game_summary(game)
    if isinstance(g, OrGame):
        summary["parents"] = [_game_summary(p) for p in g.parents]
    return SelfTestReport(
        "no-state-selftest", summary, records, classical, verdicts,
        {
            "perfect:*": "a perfect strategy is optimal, so it is among the strategies a self-test must cover",
            "no-perfect-classical": "with a perfect quantum strategy, lacking a perfect classical one means the quantum value beats the classical value",
            "coprime-schmidt-ranks": "if two optimal strategies have coprime Schmidt ranks, no single state is a local dilation of both, so no state is self-tested",
        },
        ["certificates are issued only for perfect strategies; for imperfect ones optimality cannot be checked"],
    )


def _o2_action(og: OrGame, s: QuantumStrategy) -> float:
    """max over joint questions and second-parent answers of ||(E (x) 1) psi||."""
    v = s.alice_vectors()[:, og.answer_slice(2, "A")]
    return float(np.linalg.norm(v, axis=-1).max()) if v.size else 0.0


def toy_delta_family(deltas=(0.1, 0.01, 0.001)) -> tuple[NonlocalGame, list[tuple[float, QuantumStrategy]]]:
    """Agreement game with one-dimensional strategies: Alice always answers 0,
    Bob answers 1 with probability ``delta``.  Each wins with probability ``1 - delta``."""
    g = agreement_game(2)
    out = []
    for d in deltas:
        state = BipartiteState(1, 1, np.ones(1))
        ea = np.array([[[[1.0]], [[0.0]]]], dtype=complex)
        fb = np.array([[[[1 - d]], [[d]]]], dtype=complex)
        out.append((float(d), QuantumStrategy(state, ea, fb)))
    return g, out


def nonrobust_construction_report(g1_shape, g2: NonlocalGame, s2: QuantumStrategy,
                                  delta_strategies, toy_g1: NonlocalGame,
                                  tol: Tolerance = DEFAULT_TOL) -> SelfTestReport:
    """Shape of ``g1 v g2`` plus the lifting and separation checks.

    ``g1_shape`` may be a shape-only stub.  The lifting checks run on the
    evaluable or-game ``toy_g1 v g2``, with ``delta_strategies`` a sequence
    of ``(delta, strategy for toy_g1)``.
    """
    if not is_synchronous(g2):
        raise ParentNotSynchronous("second parent must be synchronous")
    wp2 = win_prob(g2, s2)
    if wp2 < 1 - tol.eq:
        raise NotPerfect(wp2, "reference strategy")
    shape = or_shape(g1_shape, g2)
    og = or_game(toy_g1, g2)
    ref = lift_strategy(og, 2, s2)
    ref_norm = _o2_action(og, ref)
    records = [{"name": "reference", "win_prob": win_prob(og.game, ref),
                "schmidt_rank": schmidt_rank(ref.state, tol), "o2_action": ref_norm}]
    verdicts = []
    lifted_norms = []
    for i, (delta, s) in enumerate(delta_strategies):
        name = f"delta[{i}]"
        parent_wp = win_prob(toy_g1, s)
        lifted = lift_strategy(og, 1, s)
        lifted_wp = win_prob(og.game, lifted)
        norm = _o2_action(og, lifted)
        lifted_norms.append(norm)
        records.append({"name": name, "delta": delta, "parent_win_prob": parent_wp, "win_prob": lifted_wp,
                        "schmidt_rank": schmidt_rank(s.state, tol), "o2_action": norm})
        diff = abs(lifted_wp - parent_wp)
        verdicts.append(Verdict(f"lift-preserves-win:{name}", diff <= 1e-12, lifted_wp, diff, [name]))
    sep = ref_norm > tol.eq and all(n == 0.0 for n in lifted_norms)
    verdicts.append(Verdict("separation-witness", sep, {"reference": ref_norm, "lifted_max": max(lifted_norms, default=0.0)},
                            None, ["reference"] + [r["name"] for r in records[1:]]))
    game = {"inputsA": shape.inputs_a, "inputsB": shape.inputs_b, "outputsA": shape.outputs_a, "outputsB": shape.outputs_b,
            "parent1": list(GameShape.of(g1_shape).as_tuple()), "parent2": list(g2.shape),
            "toyInputsA": og.shape[0], "toyInputsB": og.shape[1]}
    return SelfTestReport(
        "nonrobust-construction", game, records, None, verdicts,
        {
            "lift-preserves-win:*": "playing only the first parent with a strategy wins the or-game exactly as often as that strategy wins the parent",
            "separation-witness": "lifted first-parent strategies never use second-parent answers, while the perfect reference strategy does, so they stay far from it however close to perfect they get",
        },
        ["the first parent is a shape-only stub for sizing; the lifting checks use a toy agreement game with a user-supplied family in its place"],
    )


@dataclass(eq=False)
class PeresPipelineResult:
    rays: RaySet
    ks: KSResult
    projective: ProjectiveKSSet | None = None
    graph: OrthogonalityGraph | None = None
    alpha: int | None = None
    alpha_witness: tuple = ()
    qis: QuantumIndependentSet | None = None
    qis_check: QISCheck | None = None
    strategy: QuantumStrategy | None = None
    game: NonlocalGame | None = None
    win: float | None = None
    rank: int | None = None
    timings: dict = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.strategy is not None

    @property
    def passed(self) -> bool:
        return (self.completed and self.qis_check.passed and self.win >= 1 - self.qis_check.tolerance
                and self.qis.size > self.alpha)

    def summary(self) -> dict:
        d = {"rays": len(self.rays), "bases": len(self.ks.bases), "verdict": self.ks.verdict.value}
        if self.completed:
            d.update(vertices=self.graph.graph.vertex_count, edges=len(self.graph.graph.edges),
                     alpha=self.alpha, qis=self.qis.size, qis_passed=self.qis_check.passed,
                     rank=self.rank, win=self.win, synchronous=is_synchronous(self.game))
        return d


def peres_pipeline(rays: RaySet | None = None, tol: Tolerance = DEFAULT_TOL,
                   alpha_budget: int | None = 10**7) -> PeresPipelineResult:
    """Rays, KS check, orthogonality graph, independence number, quantum
    independent set and the induced perfect strategy for the independent set
    game with ``t = #bases``.  Stops after the KS check if the set is not weak KS."""
    rs = rays if rays is not None else peres_33()
    t0 = time.perf_counter()
    ks = is_weak_ks(rs)
    res = PeresPipelineResult(rs, ks)
    res.timings["ks"] = time.perf_counter() - t0
    if not ks.is_weak_ks:
        return res
    res.projective = to_projective_ks(rs, tol, ks)
    res.graph = orthogonality_graph(res.projective, tol)
    t0 = time.perf_counter()
    res.alpha, res.alpha_witness = independence_number(res.graph.graph, alpha_budget)
    res.timings["alpha"] = time.perf_counter() - t0
    res.qis = quantum_independent_set_from_ks(res.projective, res.graph)
    res.qis_check = check_qis(res.graph.graph, res.qis, tol)
    res.game = independent_set_game(res.graph.graph, res.qis.size)
    res.strategy = strategy_from_qis(res.graph.graph, res.qis, tol)
    res.win = win_prob(res.game, res.strategy)
    res.rank = schmidt_rank(res.strategy.state, tol)
    return res


def require_weak_ks(res: PeresPipelineResult):
    if not res.ks.is_weak_ks:
        raise NotWeakKS(f"ray set is {res.ks.verdict.value}")


@dataclass(eq=False)
class CoprimeRankExample:
    og: OrGame
    qis_strategy: QuantumStrategy
    ms_strategy: QuantumStrategy
    lifted_qis: QuantumStrategy
    lifted_ms: QuantumStrategy
    pipeline: PeresPipelineResult


def coprime_rank_example(tol: Tolerance = DEFAULT_TOL, swap_parents: bool = False) -> CoprimeRankExample:
    """Or-game of the Peres independent set game and the magic square, with
    both parents' perfect strategies lifted into it."""
    res = peres_pipeline(tol=tol)
    require_weak_ks(res)
    ms, s_ms = magic_square_game(), magic_square_reference_strategy()
    if swap_parents:
        og = or_game(ms, res.game)
        return CoprimeRankExample(og, res.strategy, s_ms, lift_strategy(og, 2, res.strategy),
                                  lift_strategy(og, 1, s_ms), res)
    og = or_game(res.game, ms)
    return CoprimeRankExample(og, res.strategy, s_ms, lift_strategy(og, 1, res.strategy),
                              lift_strategy(og, 2, s_ms), res)


def large_shape_report(tol: Tolerance = DEFAULT_TOL, deltas=(0.1, 0.01, 0.001)) -> SelfTestReport:
    toy, family = toy_delta_family(deltas)
    return nonrobust_construction_report(LARGE_PARENT_SHAPE, sync_magic_square_game(),
                                         sync_magic_square_reference_strategy(), family, toy, tol)
