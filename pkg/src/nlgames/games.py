"""Finite two-player nonlocal games and their classical (deterministic) strategies."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .cliques import max_clique
from .errors import LabelMismatch, SearchSpaceTooLarge

DEFAULT_LIMIT = 10**9


def _labels(xs) -> tuple[str, ...]:
    return tuple(str(x) for x in xs)


@dataclass(frozen=True, eq=False)
class NonlocalGame:
    """A nonlocal game with a dense verification table.

    ``verify[x, y, a, b]`` is True iff answers ``(a, b)`` win on questions
    ``(x, y)``.  The question distribution is ``weights[x, y] / denominator``,
    kept as integers so classical values come out as exact fractions.
    """

    inputs_a: tuple[str, ...]
    inputs_b: tuple[str, ...]
    outputs_a: tuple[str, ...]
    outputs_b: tuple[str, ...]
    verify: np.ndarray
    weights: np.ndarray
    denominator: int

    def __post_init__(self):
        object.__setattr__(self, "inputs_a", _labels(self.inputs_a))
        object.__setattr__(self, "inputs_b", _labels(self.inputs_b))
        object.__setattr__(self, "outputs_a", _labels(self.outputs_a))
        object.__setattr__(self, "outputs_b", _labels(self.outputs_b))
        v = np.array(self.verify, dtype=bool)
        w = np.array(self.weights, dtype=np.int64)
        shape = (len(self.inputs_a), len(self.inputs_b), len(self.outputs_a), len(self.outputs_b))
        if v.shape != shape:
            raise ValueError(f"verify table has shape {v.shape}, expected {shape}")
        if w.shape != shape[:2]:
            raise ValueError(f"weight table has shape {w.shape}, expected {shape[:2]}")
        if (w < 0).any() or int(w.sum()) != self.denominator or self.denominator <= 0:
            raise ValueError("question distribution must be non-negative and sum to 1")
        v.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "verify", v)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, inputs_a, inputs_b, outputs_a, outputs_b, verify) -> "NonlocalGame":
        na, nb = len(inputs_a), len(inputs_b)
        return cls(inputs_a, inputs_b, outputs_a, outputs_b, verify,
                   np.ones((na, nb), dtype=np.int64), na * nb)

    @classmethod
    def from_distribution(cls, inputs_a, inputs_b, outputs_a, outputs_b, verify, dist) -> "NonlocalGame":
        """Build a game from a table of rationals (anything ``Fraction`` accepts)."""
        fr = [[Fraction(p) for p in row] for row in dist]
        den = math.lcm(*(p.denominator for row in fr for p in row))
        w = np.array([[int(p * den) for p in row] for row in fr], dtype=np.int64)
        total = int(w.sum())
        if total != den:
            raise ValueError(f"distribution sums to {Fraction(total, den)}, not 1")
        return cls(inputs_a, inputs_b, outputs_a, outputs_b, verify, w, den)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.verify.shape

    def dist(self, x: int, y: int) -> Fraction:
        return Fraction(int(self.weights[x, y]), self.denominator)

    @property
    def dist_array(self) -> np.ndarray:
        return self.weights / self.denominator

    @property
    def is_uniform(self) -> bool:
        return bool((self.weights == self.weights.flat[0]).all())

    def fingerprint(self) -> str:
        """SHA-256 of the bit-packed verification table and distribution."""
        h = hashlib.sha256()
        h.update(np.array(self.shape, dtype=np.int64).tobytes())
        h.update(np.packbits(self.verify).tobytes())
        h.update(self.weights.tobytes())
        h.update(str(self.denominator).encode())
        return h.hexdigest()

    def relabel(self, perm_a: Sequence[int], perm_b: Sequence[int] | None = None) -> "NonlocalGame":
        """Reorder questions: new question ``i`` is old question ``perm[i]``.

        ``perm_b`` defaults to ``perm_a``, the consistent relabelling for games
        with equal question sets.
        """
        pa = list(perm_a)
        pb = pa if perm_b is None else list(perm_b)
        return NonlocalGame(
            [self.inputs_a[i] for i in pa], [self.inputs_b[i] for i in pb],
            self.outputs_a, self.outputs_b,
            self.verify[np.ix_(pa, pb)], self.weights[np.ix_(pa, pb)], self.denominator,
        )

    # -- serialisation -------------------------------------------------

    def to_dict(self) -> dict:
        if self.is_uniform:
            dist = "uniform"
        else:
            dist = [[str(self.dist(x, y)) for y in range(self.shape[1])] for x in range(self.shape[0])]
        losing = np.argwhere(~self.verify).tolist()
        return {
            "inputsA": list(self.inputs_a),
            "inputsB": list(self.inputs_b),
            "outputsA": list(self.outputs_a),
            "outputsB": list(self.outputs_b),
            "dist": dist,
            "losing": losing,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NonlocalGame":
        ia, ib, oa, ob = d["inputsA"], d["inputsB"], d["outputsA"], d["outputsB"]
        verify = np.ones((len(ia), len(ib), len(oa), len(ob)), dtype=bool)
        lookups = [
            {str(l): i for i, l in enumerate(ls)} for ls in (ia, ib, oa, ob)
        ]
        for tup in d.get("losing", []):
            if len(tup) != 4:
                raise ValueError(f"losing tuple {tup!r} must have four entries")
            idx = []
            for k, v in enumerate(tup):
                if isinstance(v, int):
                    idx.append(v)
                elif str(v) in lookups[k]:
                    idx.append(lookups[k][str(v)])
                else:
                    raise LabelMismatch(f"unknown label {v!r} in losing tuple {tup!r}")
            verify[tuple(idx)] = False
        dist = d.get("dist", "uniform")
        if dist == "uniform":
            return cls.uniform(ia, ib, oa, ob, verify)
        return cls.from_distribution(ia, ib, oa, ob, verify, dist)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "NonlocalGame":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DeterministicStrategy:
    """Answer maps as tuples of answer indices, one entry per question."""

    f_a: tuple[int, ...]
    f_b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "f_a", tuple(int(a) for a in self.f_a))
        object.__setattr__(self, "f_b", tuple(int(b) for b in self.f_b))

    def labelled(self, g: NonlocalGame) -> dict:
        return {
            "A": {g.inputs_a[x]: g.outputs_a[a] for x, a in enumerate(self.f_a)},
            "B": {g.inputs_b[y]: g.outputs_b[b] for y, b in enumerate(self.f_b)},
        }


@dataclass(frozen=True)
class ClassicalValueResult:
    value: Fraction
    witness: DeterministicStrategy
    exact: bool = True


class PerfectSearchResult(NamedTuple):
    exists: bool
    witness: DeterministicStrategy | None


def classical_win_prob(g: NonlocalGame, s: DeterministicStrategy) -> Fraction:
    na, nb, oa, ob = g.shape
    if len(s.f_a) != na or len(s.f_b) != nb:
        raise LabelMismatch("strategy does not assign an answer to every question")
    if not all(0 <= a < oa for a in s.f_a) or not all(0 <= b < ob for b in s.f_b):
        raise LabelMismatch("strategy answer outside the game's answer set")
    won = 0
    for x in range(na):
        for y in range(nb):
            if g.verify[x, y, s.f_a[x], s.f_b[y]]:
                won += int(g.weights[x, y])
    return Fraction(won, g.denominator)


def _best_response_search(verify, weights, chunk=1 << 15):
    """Exhaust the first player's answer maps; the second best-responds per question.

    Returns ``(best_weight, f_first, f_second)``.  Exact: for a fixed first
    map the objective is a sum of independent per-question terms of the
    second map.
    """
    nx, ny, na, nb = verify.shape
    total = na**nx
    best = (-1, None, None)
    wv = weights[:, :, None, None] * verify  # int64 (nx, ny, na, nb)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        digits = np.empty((idx.size, nx), dtype=np.int64)
        rem = idx.copy()
        for x in range(nx - 1, -1, -1):
            digits[:, x] = rem % na
            rem //= na
        score = np.zeros((idx.size, ny, nb), dtype=np.int64)
        for x in range(nx):
            score += np.transpose(wv[x][:, digits[:, x], :], (1, 0, 2))
        per = score.max(axis=2).sum(axis=1)
        k = int(np.argmax(per))
        if per[k] > best[0]:
            f2 = tuple(int(b) for b in score[k].argmax(axis=1))
            best = (int(per[k]), tuple(int(a) for a in digits[k]), f2)
    return best


def _shared_assignment_search(g: NonlocalGame, chunk=1 << 15):
    """Best strategy with ``f_a == f_b``, for games with equal question/answer sets."""
    n, _, m, _ = g.shape
    total = m**n
    best = (-1, None)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        f = np.empty((idx.size, n), dtype=np.int64)
        rem = idx.copy()
        for x in range(n - 1, -1, -1):
            f[:, x] = rem % m
            rem //= m
        won = np.zeros(idx.size, dtype=np.int64)
        for x in range(n):
            for y in range(n):
                w = int(g.weights[x, y])
                if w:
                    won += w * g.verify[x, y][f[:, x], f[:, y]]
        k = int(np.argmax(won))
        if won[k] > best[0]:
            best = (int(won[k]), tuple(int(a) for a in f[k]))
    return best


def classical_value(g: NonlocalGame, limit: int | None = DEFAULT_LIMIT) -> ClassicalValueResult:
    """Exact classical value with a witness.

    The guarded search space is the number of deterministic strategy pairs.
    For synchronous games the shared-assignment subspace is searched first;
    if the general search would exceed ``limit`` the shared-assignment value
    is returned with ``exact=False`` (it is then only a lower bound).
    """
    na, nb, oa, ob = g.shape
    card = oa**na * ob**nb
    lower = None
    if is_synchronous(g) and oa**na <= (limit if limit is not None else oa**na):
        won, f = _shared_assignment_search(g)
        lower = ClassicalValueResult(Fraction(won, g.denominator), DeterministicStrategy(f, f), False)
        if won == g.denominator:
            return ClassicalValueResult(lower.value, lower.witness, True)
    if limit is not None and card > limit:
        if lower is not None:
            return lower
        raise SearchSpaceTooLarge(card, limit)
    if oa**na <= ob**nb:
        won, fa, fb = _best_response_search(g.verify, g.weights)
    else:
        won, fb, fa = _best_response_search(
            np.transpose(g.verify, (1, 0, 3, 2)), g.weights.T)
    return ClassicalValueResult(Fraction(won, g.denominator), DeterministicStrategy(fa, fb), True)


def is_synchronous(g: NonlocalGame) -> bool:
    if g.inputs_a != g.inputs_b or g.outputs_a != g.outputs_b:
        return False
    n, m = len(g.inputs_a), len(g.outputs_a)
    diag = g.verify[np.arange(n), np.arange(n)]  # (n, m, m)
    off = ~np.eye(m, dtype=bool)
    return not bool((diag & off).any())


# -- perfect classical strategies ----------------------------------------


def _constraint_network(g: NonlocalGame, shared: bool):
    """Binary constraint network whose solutions are perfect deterministic strategies.

    Returns ``(domains, support, degree)``: initial domain bitmask per variable,
    ``support[i][j][a]`` = bitmask of values of ``j`` compatible with ``i = a``,
    and the number of losing tuples touching each variable.
    """
    na, nb, oa, ob = g.shape
    live = g.weights > 0
    if shared:
        n, m = na, oa
        ok = np.ones((n, n, m, m), dtype=bool)
        for x in range(n):
            for y in range(n):
                if live[x, y]:
                    ok[x, y] &= g.verify[x, y]
                    ok[y, x] &= g.verify[x, y].T
        domains = []
        for x in range(n):
            dom = ok[x, x].diagonal()
            domains.append(sum(1 << a for a in range(m) if dom[a]))
        support = [dict() for _ in range(n)]
        degree = [0] * n
        for x in range(n):
            for y in range(n):
                if x != y and not ok[x, y].all():
                    support[x][y] = [sum(1 << int(b) for b in np.flatnonzero(ok[x, y, a])) for a in range(m)]
                    degree[x] += int((~ok[x, y]).sum())
            degree[x] += int((~ok[x, x].diagonal()).sum())
        return domains, support, degree
    n = na + nb
    domains = [(1 << oa) - 1] * na + [(1 << ob) - 1] * nb
    support = [dict() for _ in range(n)]
    degree = [0] * n
    for x in range(na):
        for y in range(nb):
            if not live[x, y] or g.verify[x, y].all():
                continue
            v = g.verify[x, y]
            support[x][na + y] = [sum(1 << int(b) for b in np.flatnonzero(v[a])) for a in range(oa)]
            support[na + y][x] = [sum(1 << int(a) for a in np.flatnonzero(v[:, b])) for b in range(ob)]
            lose = int((~v).sum())
            degree[x] += lose
            degree[na + y] += lose
    return domains, support, degree


def _backtrack(domains, support, degree):
    """Forward-checking backtracking with failed-subproblem caching.

    Variables are taken in a fixed order of non-increasing constraint degree.
    After forward checking, the remaining subproblem depends only on the
    domains of the unassigned variables, so failed domain tuples are cached.
    """
    n = len(domains)
    order = sorted(range(n), key=lambda v: (-degree[v], v))
    failed: set = set()
    assignment = [None] * n

    def rec(depth: int, doms: tuple) -> bool:
        if depth == n:
            return True
        key = (depth, doms)
        if key in failed:
            return False
        var = order[depth]
        mask = doms[depth]
        while mask:
            low = mask & -mask
            a = low.bit_length() - 1
            mask ^= low
            new = list(doms)
            ok = True
            for k in range(depth + 1, n):
                sup = support[var].get(order[k])
                if sup is not None:
                    new[k] &= sup[a]
                    if not new[k]:
                        ok = False
                        break
            if ok:
                assignment[var] = a
                if rec(depth + 1, tuple(new)):
                    return True
        failed.add(key)
        return False

    start = tuple(domains[v] for v in order)
    if any(d == 0 for d in start):
        return None
    return list(assignment) if rec(0, start) else None


def _interchangeable_questions(g: NonlocalGame):
    """For synchronous games whose questions are all interchangeable, return the
    common unary domain and pairwise relation; otherwise None.

    Interchangeable means every permutation of the questions, applied to both
    players at once, is an automorphism of the winning condition.
    """
    n, _, m, _ = g.shape
    if n < 2 or not (g.weights > 0).all():
        return None
    same, pair = g.verify[0, 0], g.verify[0, 1]
    if not (pair == pair.T).all():
        return None
    eye = np.eye(n, dtype=bool)
    if not (g.verify[eye] == same).all() or not (g.verify[~eye] == pair).all():
        return None
    return same.diagonal(), pair


def perfect_classical_exists(g: NonlocalGame, exploit_symmetry: bool = True) -> PerfectSearchResult:
    """Decide whether a deterministic strategy wins with probability one.

    Only question pairs with positive probability constrain the answers.
    For synchronous games with positive diagonal probability a perfect
    strategy must answer identically on both sides, so a single answer map
    is searched.  When additionally all questions are interchangeable the
    problem is a clique search on answers, solved by branch and bound
    (disable with ``exploit_symmetry=False``).
    """
    na, nb, oa, ob = g.shape
    shared = is_synchronous(g) and all(g.weights[x, x] > 0 for x in range(na))
    if shared and exploit_symmetry:
        inter = _interchangeable_questions(g)
        if inter is not None:
            diag, pair = inter
            values = [a for a in range(oa) if diag[a]]
            for a in values:
                if pair[a, a]:
                    f = (a,) * na
                    return PerfectSearchResult(True, DeterministicStrategy(f, f))
            nbrs = []
            for a in values:
                nbrs.append(sum(1 << j for j, b in enumerate(values) if b != a and pair[a, b]))
            size, clique = max_clique(nbrs, target=na)
            if size >= na:
                f = tuple(values[j] for j in clique[:na])
                return PerfectSearchResult(True, DeterministicStrategy(f, f))
            return PerfectSearchResult(False, None)
    domains, support, degree = _constraint_network(g, shared)
    sol = _backtrack(domains, support, degree)
    if sol is None:
        return PerfectSearchResult(False, None)
    if shared:
        return PerfectSearchResult(True, DeterministicStrategy(sol, sol))
    return PerfectSearchResult(True, DeterministicStrategy(sol[:na], sol[na:]))


def trivial_game(n_questions: int = 1, n_answers: int = 1) -> NonlocalGame:
    """Game with ``n`` questions and answers per side that is always won."""
    q = [str(i) for i in range(n_questions)]
    a = [str(i) for i in range(n_answers)]
    return NonlocalGame.uniform(q, q, a, a, np.ones((n_questions, n_questions, n_answers, n_answers), bool))


def agreement_game(n_answers: int = 2) -> NonlocalGame:
    """One question per side; the players win iff their answers agree."""
    a = [str(i) for i in range(n_answers)]
    v = np.eye(n_answers, dtype=bool)[None, None]
    return NonlocalGame.uniform(["0"], ["0"], a, a, v)
