"""The or-combination of two games: both players get one question from each
parent game, each picks a parent and answers in it; they win iff they picked
the same parent and won it.

Joint questions are ordered lexicographically, ``(x1, x2) -> x1 * |I_2| + x2``;
joint answers list the first parent's answers, then the second's.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    IndexMismatch,
    NonUniformDistribution,
    NotFullSchmidtRank,
    NotPerfect,
    NotProjection,
    ParentNotSynchronous,
    QuestionDependent,
    StubGameError,
    ZeroComponent,
)
from .games import NonlocalGame, is_synchronous, perfect_classical_exists
from .numerics import DEFAULT_TOL, BipartiteState, Tolerance, dagger, frob, projection_residual, range_basis, schmidt
from .strategies import QuantumStrategy, win_prob


@dataclass(frozen=True)
class GameShape:
    """Question and answer counts of a game whose verification table is not available."""

    inputs_a: int
    inputs_b: int
    outputs_a: int
    outputs_b: int

    @classmethod
    def of(cls, g) -> "GameShape":
        if isinstance(g, GameShape):
            return g
        return cls(*g.shape)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.inputs_a, self.inputs_b, self.outputs_a, self.outputs_b)


def or_shape(g1, g2) -> GameShape:
    s1, s2 = GameShape.of(g1), GameShape.of(g2)
    return GameShape(s1.inputs_a * s2.inputs_a, s1.inputs_b * s2.inputs_b,
                     s1.outputs_a + s2.outputs_a, s1.outputs_b + s2.outputs_b)


@dataclass(frozen=True, eq=False)
class OrGame:
    game: NonlocalGame
    parents: tuple[NonlocalGame, NonlocalGame]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.game.shape

    def question_a(self, x1: int, x2: int) -> int:
        return x1 * self.parents[1].shape[0] + x2

    def question_b(self, y1: int, y2: int) -> int:
        return y1 * self.parents[1].shape[1] + y2

    def split_question_a(self, x: int) -> tuple[int, int]:
        return divmod(x, self.parents[1].shape[0])

    def split_question_b(self, y: int) -> tuple[int, int]:
        return divmod(y, self.parents[1].shape[1])

    def answer_slice(self, which: int, side: str = "A") -> slice:
        """Joint answer indices belonging to parent ``which`` (1 or 2)."""
        k = 2 if side == "A" else 3
        n1 = self.parents[0].shape[k]
        n2 = self.parents[1].shape[k]
        return slice(0, n1) if which == 1 else slice(n1, n1 + n2)

    def answer_tag(self, a: int, side: str = "A") -> tuple[int, int]:
        n1 = self.parents[0].shape[2 if side == "A" else 3]
        return (1, a) if a < n1 else (2, a - n1)

    def to_dict(self) -> dict:
        d = self.game.to_dict()
        d["parents"] = {
            "games": [p.to_dict() for p in self.parents],
            "questionIndex": "lexicographic (x1, x2) -> x1 * |I_2| + x2",
            "answerTags": {
                "A": [list(self.answer_tag(a, "A")) for a in range(self.shape[2])],
                "B": [list(self.answer_tag(b, "B")) for b in range(self.shape[3])],
            },
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "OrGame":
        g1, g2 = (NonlocalGame.from_dict(p) for p in d["parents"]["games"])
        return or_game(g1, g2)


def or_game(g1: NonlocalGame, g2: NonlocalGame) -> OrGame:
    for g in (g1, g2):
        if not isinstance(g, NonlocalGame):
            raise StubGameError("or_game needs full games; use or_shape for shape-only parents")
        if not g.is_uniform:
            raise NonUniformDistribution("parent games must have uniform question distributions")
    xa1, yb1, a1, b1 = g1.shape
    xa2, yb2, a2, b2 = g2.shape
    v = np.zeros((xa1, xa2, yb1, yb2, a1 + a2, b1 + b2), dtype=bool)
    v[:, :, :, :, :a1, :b1] = g1.verify[:, None, :, None]
    v[:, :, :, :, a1:, b1:] = g2.verify[None, :, None, :]
    v = v.reshape(xa1 * xa2, yb1 * yb2, a1 + a2, b1 + b2)
    w = np.einsum("ac,bd->abcd", g1.weights, g2.weights).reshape(xa1 * xa2, yb1 * yb2)
    game = NonlocalGame(
        [f"{p}|{q}" for p in g1.inputs_a for q in g2.inputs_a],
        [f"{p}|{q}" for p in g1.inputs_b for q in g2.inputs_b],
        [f"1:{a}" for a in g1.outputs_a] + [f"2:{a}" for a in g2.outputs_a],
        [f"1:{b}" for b in g1.outputs_b] + [f"2:{b}" for b in g2.outputs_b],
        v, w, g1.denominator * g2.denominator,
    )
    return OrGame(game, (g1, g2))


def lift_strategy(og: OrGame, which: int, s: QuantumStrategy) -> QuantumStrategy:
    """Strategy that always plays parent ``which`` with ``s``, ignoring the other question."""
    parent = og.parents[which - 1]
    if s.shape != parent.shape:
        raise IndexMismatch(f"strategy shape {s.shape} does not match parent {which} {parent.shape}")
    nxa, nyb, na, nb = og.shape
    ea = np.zeros((nxa, na) + s.povms_a.shape[2:], dtype=complex)
    fb = np.zeros((nyb, nb) + s.povms_b.shape[2:], dtype=complex)
    xs = np.array([og.split_question_a(x)[which - 1] for x in range(nxa)])
    ys = np.array([og.split_question_b(y)[which - 1] for y in range(nyb)])
    ea[:, og.answer_slice(which, "A")] = s.povms_a[xs]
    fb[:, og.answer_slice(which, "B")] = s.povms_b[ys]
    return QuantumStrategy(s.state, ea, fb)


@dataclass(frozen=True, eq=False)
class ComponentProjections:
    p1: np.ndarray
    p2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    question_deviation: float
    projection_residual: float
    orthogonality_residual: float

    def alice(self, which: int) -> np.ndarray:
        return self.p1 if which == 1 else self.p2

    def bob(self, which: int) -> np.ndarray:
        return self.q1 if which == 1 else self.q2


def _block_sums(ops: np.ndarray, blocks) -> tuple[list[np.ndarray], float]:
    sums, dev = [], 0.0
    for sl in blocks:
        per_question = ops[:, sl].sum(axis=1)
        dev = max(dev, float(np.linalg.norm(per_question - per_question[0], axis=(1, 2)).max()))
        sums.append(per_question[0])
    return sums, dev


def component_projections(og: OrGame, s: QuantumStrategy, tol: Tolerance = DEFAULT_TOL) -> ComponentProjections:
    """Per-player projections onto "plays parent 1" and "plays parent 2".

    For a perfect strategy with full Schmidt rank the block sums
    ``sum_{a in O_i} E_(x1,x2)a`` do not depend on the question and are
    complementary projections; all three facts are verified here.
    """
    wp = win_prob(og.game, s)
    if wp < 1 - tol.eq:
        raise NotPerfect(wp)
    dec = schmidt(s.state, tol)
    if dec.rank != s.state.dim_a or dec.rank != s.state.dim_b:
        raise NotFullSchmidtRank(
            f"Schmidt rank {dec.rank} on a {s.state.dim_a}x{s.state.dim_b} system; restrict to the support first")
    (p1, p2), dev_a = _block_sums(s.povms_a, [og.answer_slice(1, "A"), og.answer_slice(2, "A")])
    (q1, q2), dev_b = _block_sums(s.povms_b, [og.answer_slice(1, "B"), og.answer_slice(2, "B")])
    dev = max(dev_a, dev_b)
    if dev > tol.eq:
        raise QuestionDependent(dev)
    proj = max(projection_residual(m) for m in (p1, p2, q1, q2))
    orth = max(frob(p1 @ p2), frob(q1 @ q2))
    if max(proj, orth) > tol.eq:
        raise NotProjection(max(proj, orth))
    return ComponentProjections(p1, p2, q1, q2, dev, proj, orth)


def extract_component_strategy(og: OrGame, s: QuantumStrategy, which: int,
                               tol: Tolerance = DEFAULT_TOL,
                               projections: ComponentProjections | None = None) -> QuantumStrategy:
    """Perfect strategy for parent ``which`` read off a perfect or-game strategy.

    The state is compressed to ``p H_A (x) q H_B`` with ``p, q`` the component
    projections of that parent and renormalised; the other parent's question
    is fixed to its first value.
    """
    cp = projections if projections is not None else component_projections(og, s, tol)
    p, q = cp.alice(which), cp.bob(which)
    m = s.state.matrix
    mass = float(np.real(np.vdot(m, p @ m @ q.T)))
    if mass <= tol.eq:
        raise ZeroComponent(mass)
    va, vb = range_basis(p), range_basis(q)
    m_c = dagger(va) @ m @ np.conj(vb)
    state = BipartiteState.from_matrix(m_c / np.linalg.norm(m_c))
    parent = og.parents[which - 1]
    px, py = parent.shape[:2]
    if which == 1:
        xs = [og.question_a(x, 0) for x in range(px)]
        ys = [og.question_b(y, 0) for y in range(py)]
    else:
        xs = [og.question_a(0, x) for x in range(px)]
        ys = [og.question_b(0, y) for y in range(py)]
    ea = dagger(va) @ s.povms_a[xs][:, og.answer_slice(which, "A")] @ va
    fb = dagger(vb) @ s.povms_b[ys][:, og.answer_slice(which, "B")] @ vb
    return QuantumStrategy(state, ea, fb)


def perfect_classical_exists_or(og: OrGame) -> bool:
    """A perfect deterministic or-game strategy must commit both players to a
    single parent, so one exists iff some parent has one."""
    return any(perfect_classical_exists(p).exists for p in og.parents)


@dataclass(frozen=True)
class MarginalResiduals:
    alice_question_independence: float
    bob_question_independence: float
    cross_player: float

    @property
    def max(self) -> float:
        return max(self.alice_question_independence, self.bob_question_independence, self.cross_player)


def check_marginal_independence(og: OrGame, s: QuantumStrategy) -> MarginalResiduals:
    """For a synchronous second parent, answers in that parent should not depend
    on the first parent's question, and Alice's and Bob's actions on the state
    should agree.  Residuals are maxima over answers in the second parent only.
    """
    g2 = og.parents[1]
    if not is_synchronous(g2):
        raise ParentNotSynchronous("the second parent must be synchronous")
    if s.shape != og.shape:
        raise IndexMismatch("strategy does not match the or-game")
    n1a, n1b = og.parents[0].shape[:2]
    n2 = g2.shape[0]
    sa, sb = og.answer_slice(2, "A"), og.answer_slice(2, "B")
    va = s.alice_vectors()[:, sa].reshape(n1a, n2, -1, s.state.dim_a * s.state.dim_b)
    vb = s.bob_vectors()[:, sb].reshape(n1b, n2, -1, s.state.dim_a * s.state.dim_b)

    def spread(v):
        d = v[:, None] - v[None, :]
        return float(np.linalg.norm(d, axis=-1).max()) if v.shape[0] else 0.0

    cross = np.linalg.norm(va[:, None] - vb[None, :], axis=-1)
    return MarginalResiduals(spread(va), spread(vb), float(cross.max()) if cross.size else 0.0)
