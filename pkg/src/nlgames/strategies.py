"""Quantum strategies: evaluation, support restriction and dilation certificates."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexMismatch,
    NotIsometry,
    ShapeMismatch,
    SupportNotInvariant,
)
from .games import DeterministicStrategy, NonlocalGame
from .numerics import (
    DEFAULT_TOL,
    BipartiteState,
    Tolerance,
    dagger,
    frob,
    is_isometry,
    is_povm,
    schmidt,
)


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    """Shared state plus one POVM per question for each player.

    ``povms_a[x, a]`` is Alice's operator for question ``x`` and answer ``a``
    (shape ``(n_questions, n_answers, dim_a, dim_a)``); likewise for Bob.
    Zero operators are allowed so answer sets can be padded.
    """

    state: BipartiteState
    povms_a: np.ndarray
    povms_b: np.ndarray

    def __post_init__(self):
        ea = np.array(self.povms_a, dtype=complex)
        fb = np.array(self.povms_b, dtype=complex)
        if ea.ndim != 4 or ea.shape[2:] != (self.state.dim_a, self.state.dim_a):
            raise DimensionMismatch(f"Alice operators of shape {ea.shape} do not act on C^{self.state.dim_a}")
        if fb.ndim != 4 or fb.shape[2:] != (self.state.dim_b, self.state.dim_b):
            raise DimensionMismatch(f"Bob operators of shape {fb.shape} do not act on C^{self.state.dim_b}")
        ea.setflags(write=False)
        fb.setflags(write=False)
        object.__setattr__(self, "povms_a", ea)
        object.__setattr__(self, "povms_b", fb)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        """``(questions_a, questions_b, answers_a, answers_b)``."""
        return (self.povms_a.shape[0], self.povms_b.shape[0], self.povms_a.shape[1], self.povms_b.shape[1])

    def povm_failures(self, tol: Tolerance = DEFAULT_TOL) -> list[tuple[str, int]]:
        bad = [("A", x) for x in range(self.shape[0]) if not is_povm(self.povms_a[x], tol)]
        bad += [("B", y) for y in range(self.shape[1]) if not is_povm(self.povms_b[y], tol)]
        return bad

    def is_valid(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return abs(self.state.norm - 1) <= tol.eq and not self.povm_failures(tol)

    def alice_vectors(self) -> np.ndarray:
        """``(E_xa (x) 1) psi`` as coefficient matrices, shape ``(nx, na, dA, dB)``."""
        return np.einsum("xaik,kl->xail", self.povms_a, self.state.matrix)

    def bob_vectors(self) -> np.ndarray:
        """``(1 (x) F_yb) psi`` as coefficient matrices, shape ``(ny, nb, dA, dB)``."""
        return np.einsum("ybjl,kl->ybkj", self.povms_b, self.state.matrix)

    # -- serialisation -------------------------------------------------

    def to_dict(self, game: NonlocalGame) -> dict:
        _check_compatible(game, self)

        def mat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        return {
            "dimA": self.state.dim_a,
            "dimB": self.state.dim_b,
            "state": [[float(z.real), float(z.imag)] for z in self.state.amplitudes],
            "povmsA": {q: {a: mat(self.povms_a[x, i]) for i, a in enumerate(game.outputs_a)}
                       for x, q in enumerate(game.inputs_a)},
            "povmsB": {q: {b: mat(self.povms_b[y, j]) for j, b in enumerate(game.outputs_b)}
                       for y, q in enumerate(game.inputs_b)},
        }

    @classmethod
    def from_dict(cls, d: dict, game: NonlocalGame) -> "QuantumStrategy":
        da, db = int(d["dimA"]), int(d["dimB"])
        amps = np.array([complex(re, im) for re, im in d["state"]])
        state = BipartiteState(da, db, amps)

        def side(block, questions, answers, dim):
            ops = np.zeros((len(questions), len(answers), dim, dim), dtype=complex)
            if set(block) != set(questions):
                raise IndexMismatch("strategy questions do not match the game")
            for x, q in enumerate(questions):
                fam = block[q]
                unknown = set(fam) - set(answers)
                if unknown:
                    raise IndexMismatch(f"unknown answers {sorted(unknown)} for question {q!r}")
                for i, a in enumerate(answers):
                    if a in fam:
                        m = np.array(fam[a], dtype=float)
                        ops[x, i] = m[..., 0] + 1j * m[..., 1]
            return ops

        return cls(state,
                   side(d["povmsA"], game.inputs_a, game.outputs_a, da),
                   side(d["povmsB"], game.inputs_b, game.outputs_b, db))

    def to_json(self, game: NonlocalGame) -> str:
        return json.dumps(self.to_dict(game))

    @classmethod
    def from_json(cls, text: str, game: NonlocalGame) -> "QuantumStrategy":
        return cls.from_dict(json.loads(text), game)


def _check_compatible(g: NonlocalGame, s: QuantumStrategy):
    if g.shape != s.shape:
        raise IndexMismatch(f"strategy indexed {s.shape} but game has shape {g.shape}")


def correlation(s: QuantumStrategy) -> np.ndarray:
    """``p[x, y, a, b] = <psi| E_xa (x) F_yb |psi>``, real, small negatives clamped."""
    m = s.state.matrix
    ea_psi = np.einsum("xaik,kl->xail", s.povms_a, m)
    p = np.einsum("ij,xail,ybjl->xyab", np.conj(m), ea_psi, s.povms_b, optimize=True)
    p = p.real
    p[(p < 0) & (p > -1e-12)] = 0.0
    return p


def win_prob(g: NonlocalGame, s: QuantumStrategy) -> float:
    """Winning probability as a weighted sum of inner products
    ``<(E_xa (x) 1) psi, (1 (x) F_yb) psi>`` over winning tuples."""
    _check_compatible(g, s)
    nx, ny, na, nb = s.shape
    va = s.alice_vectors().reshape(nx * na, -1)
    vb = s.bob_vectors().reshape(ny * nb, -1)
    gram = (np.conj(va) @ vb.T).reshape(nx, na, ny, nb).transpose(0, 2, 1, 3)
    total = np.sum(g.dist_array[:, :, None, None] * np.where(g.verify, gram, 0))
    if abs(total.imag) > 1e-9:
        raise ValueError(f"winning probability has imaginary part {total.imag:.3e}")
    return float(total.real)


def win_prob_from_correlation(g: NonlocalGame, p: np.ndarray) -> float:
    return float(np.sum(g.dist_array[:, :, None, None] * np.where(g.verify, p, 0.0)))


def embed_deterministic(g: NonlocalGame, det: DeterministicStrategy) -> QuantumStrategy:
    """One-dimensional strategy reproducing a deterministic one."""
    nx, ny, na, nb = g.shape
    ea = np.zeros((nx, na, 1, 1), dtype=complex)
    fb = np.zeros((ny, nb, 1, 1), dtype=complex)
    ea[np.arange(nx), list(det.f_a)] = 1
    fb[np.arange(ny), list(det.f_b)] = 1
    return QuantumStrategy(BipartiteState(1, 1, [1.0]), ea, fb)


def direct_sum(s1: QuantumStrategy, s2: QuantumStrategy, weight: float = 0.5) -> QuantumStrategy:
    """Strategy on ``(H1 + H2) (x) (K1 + K2)`` with block-diagonal operators and state
    ``sqrt(w) psi1 + sqrt(1 - w) psi2``."""
    if s1.shape != s2.shape:
        raise ShapeMismatch("direct sum needs strategies with equal question/answer counts")
    a1, b1 = s1.state.dim_a, s1.state.dim_b
    a2, b2 = s2.state.dim_a, s2.state.dim_b
    m = np.zeros((a1 + a2, b1 + b2), dtype=complex)
    m[:a1, :b1] = np.sqrt(weight) * s1.state.matrix
    m[a1:, b1:] = np.sqrt(1 - weight) * s2.state.matrix

    def block(o1, o2):
        n1, n2 = o1.shape[-1], o2.shape[-1]
        out = np.zeros(o1.shape[:2] + (n1 + n2, n1 + n2), dtype=complex)
        out[..., :n1, :n1] = o1
        out[..., n1:, n1:] = o2
        return out

    return QuantumStrategy(BipartiteState.from_matrix(m), block(s1.povms_a, s2.povms_a),
                           block(s1.povms_b, s2.povms_b))


def local_unitary(s: QuantumStrategy, u_a: np.ndarray, u_b: np.ndarray) -> QuantumStrategy:
    """Conjugate by ``u_a (x) u_b``: state ``(u_a (x) u_b) psi``, operators ``u E u*``."""
    m = u_a @ s.state.matrix @ u_b.T
    return QuantumStrategy(BipartiteState.from_matrix(m),
                           u_a @ s.povms_a @ dagger(u_a),
                           u_b @ s.povms_b @ dagger(u_b))


def restrict_to_support(s: QuantumStrategy, tol: Tolerance = DEFAULT_TOL) -> QuantumStrategy:
    """Compress a strategy onto the local supports of its state.

    With ``psi = sum_i alpha_i xi_i (x) eta_i`` and isometries
    ``U_A = sum_i xi_i e_i*``, ``U_B = sum_i eta_i e_i*`` the result uses
    ``U_A* E U_A``, ``U_B* F U_B`` and ``(U_A* (x) U_B*) psi = sum_i alpha_i e_i (x) e_i``.
    The supports must be invariant under every operator; this is checked.
    """
    dec = schmidt(s.state, tol)
    ua, ub = dec.left, dec.right
    for side, ops, u in (("Alice", s.povms_a, ua), ("Bob", s.povms_b, ub)):
        proj = u @ dagger(u)
        leak = (np.eye(proj.shape[0]) - proj) @ ops @ proj
        norms = np.linalg.norm(leak, axis=(2, 3))
        x, a = np.unravel_index(int(np.argmax(norms)), norms.shape)
        if norms[x, a] > tol.eq:
            raise SupportNotInvariant(side, int(x), int(a), float(norms[x, a]))
    state = BipartiteState.from_matrix(np.diag(dec.coefficients).astype(complex))
    return QuantumStrategy(state, dagger(ua) @ s.povms_a @ ua, dagger(ub) @ s.povms_b @ ub)


def check_sync_identity(s: QuantumStrategy, x: int, a: int) -> float:
    """``|| (E_xa (x) 1) psi - (1 (x) F_xa) psi ||``."""
    nx, ny, na, nb = s.shape
    if nx != ny or na != nb:
        raise ShapeMismatch("synchronous identity needs equal question and answer sets")
    if not (0 <= x < nx and 0 <= a < na):
        raise IndexMismatch(f"question/answer ({x}, {a}) out of range")
    m = s.state.matrix
    lhs = s.povms_a[x, a] @ m
    rhs = m @ s.povms_b[x, a].T
    return frob(lhs - rhs)


@dataclass(frozen=True)
class DilationReport:
    state_residual: float
    alice_residual: float
    bob_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.state_residual, self.alice_residual, self.bob_residual)

    def holds(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.max_residual <= tol.eq


def check_local_dilation(
    s: QuantumStrategy,
    ref: QuantumStrategy,
    u_a: np.ndarray,
    u_b: np.ndarray,
    aux: BipartiteState,
    tol: Tolerance = DEFAULT_TOL,
) -> DilationReport:
    """Residuals of the three local-dilation equations for given isometries.

    ``u_a`` maps ``C^dA`` into ``C^(ref dA) (x) C^(aux dA)``.  Both sides are
    compared in the ordering ``ref_A, aux_A, ref_B, aux_B``; the reference
    side is built as ``ref_A, ref_B, aux_A, aux_B`` and its middle factors
    swapped.
    """
    u_a = np.asarray(u_a, dtype=complex)
    u_b = np.asarray(u_b, dtype=complex)
    ra, rb, ka, kb = ref.state.dim_a, ref.state.dim_b, aux.dim_a, aux.dim_b
    if u_a.shape != (ra * ka, s.state.dim_a) or u_b.shape != (rb * kb, s.state.dim_b):
        raise DimensionMismatch("isometry shapes do not match the strategy, reference and auxiliary spaces")
    if not is_isometry(u_a, tol) or not is_isometry(u_b, tol):
        raise NotIsometry("u_a and u_b must satisfy u* u = 1")
    if s.shape != ref.shape:
        raise IndexMismatch("strategies are indexed differently")

    def lifted(m):
        return (u_a @ m @ u_b.T).reshape(-1)

    def with_aux(m):
        t = np.einsum("ij,kl->ijkl", m, aux.matrix)
        return t.transpose(0, 2, 1, 3).reshape(-1)

    m, mr = s.state.matrix, ref.state.matrix
    state_res = float(np.linalg.norm(lifted(m) - with_aux(mr)))
    alice = bob = 0.0
    nx, ny, na, nb = s.shape
    for x in range(nx):
        for a in range(na):
            r = np.linalg.norm(lifted(s.povms_a[x, a] @ m) - with_aux(ref.povms_a[x, a] @ mr))
            alice = max(alice, float(r))
    for y in range(ny):
        for b in range(nb):
            r = np.linalg.norm(lifted(m @ s.povms_b[y, b].T) - with_aux(mr @ ref.povms_b[y, b].T))
            bob = max(bob, float(r))
    return DilationReport(state_res, alice, bob)
