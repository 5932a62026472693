"""Magic square game, its synchronous version, and the Pauli reference strategies."""

from __future__ import annotations

import numpy as np

from .games import NonlocalGame
from .numerics import PAULI_I as I, PAULI_X as X, PAULI_Y as Y, PAULI_Z as Z
from .numerics import maximally_entangled
from .strategies import QuantumStrategy

ROWS = ("r1", "r2", "r3")
COLS = ("c1", "c2", "c3")

# Sign triples with product +1 (row answers) and -1 (column answers), in a fixed order.
EVEN = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))
ODD = ((-1, -1, -1), (-1, 1, 1), (1, -1, 1), (1, 1, -1))


def sign_label(t) -> str:
    return "".join("+" if s > 0 else "-" for s in t)


def _triples(parity: int):
    out = EVEN if parity > 0 else ODD
    assert all(int(np.prod(t)) == parity for t in out)
    return out


def pauli_table() -> list[list[np.ndarray]]:
    """3x3 grid of two-qubit observables; rows multiply to +1, columns to -1."""
    return [
        [np.kron(I, Z), np.kron(Z, I), np.kron(Z, Z)],
        [np.kron(X, I), np.kron(I, X), np.kron(X, X)],
        [-np.kron(X, Z), -np.kron(Z, X), np.kron(Y, Y)],
    ]


def magic_square_game() -> NonlocalGame:
    """Alice gets a row, Bob a column; they win iff they agree on the shared cell."""
    v = np.zeros((3, 3, 4, 4), dtype=bool)
    for i in range(3):
        for j in range(3):
            for ai, a in enumerate(EVEN):
                for bi, b in enumerate(ODD):
                    v[i, j, ai, bi] = a[j] == b[i]
    return NonlocalGame.uniform(ROWS, COLS, [sign_label(t) for t in EVEN], [sign_label(t) for t in ODD], v)


def sync_magic_square_game() -> NonlocalGame:
    """Both players get one of the six equations and answer with any satisfying
    assignment of its three variables; answers must agree on shared variables
    and, for equal questions, be identical."""
    answers = EVEN + ODD
    v = np.zeros((6, 6, 8, 8), dtype=bool)
    for x in range(6):
        for y in range(6):
            for ai, a in enumerate(answers):
                for bi, b in enumerate(answers):
                    a_even, b_even = ai < 4, bi < 4
                    if x < 3 and y >= 3:
                        ok = a_even and not b_even and a[y - 3] == b[x]
                    elif x >= 3 and y < 3:
                        ok = not a_even and b_even and b[x - 3] == a[y]
                    elif x == y:
                        ok = ai == bi and (a_even == (x < 3))
                    else:
                        ok = a_even == b_even == (x < 3)
                    v[x, y, ai, bi] = ok
    labels = [sign_label(t) for t in answers]
    return NonlocalGame.uniform(ROWS + COLS, ROWS + COLS, labels, labels, v)


def _product_projector(observables, signs) -> np.ndarray:
    p = np.eye(4, dtype=complex)
    for obs, s in zip(observables, signs):
        p = p @ (np.eye(4) + s * obs)
    return p / 8


def row_projectors() -> np.ndarray:
    """``E[x, a]`` for rows ``x`` and even triples ``a``, shape (3, 4, 4, 4)."""
    t = pauli_table()
    return np.array([[_product_projector(t[x], a) for a in EVEN] for x in range(3)])


def column_projectors(transpose: bool = True) -> np.ndarray:
    """``F[y, b]`` built from the (transposed) column observables, shape (3, 4, 4, 4)."""
    t = pauli_table()
    cols = [[t[i][y].T if transpose else t[i][y] for i in range(3)] for y in range(3)]
    return np.array([[_product_projector(cols[y], b) for b in ODD] for y in range(3)])


def magic_square_reference_strategy() -> QuantumStrategy:
    return QuantumStrategy(maximally_entangled(4), row_projectors(), column_projectors())


def sync_magic_square_reference_strategy() -> QuantumStrategy:
    """Row questions use the row projectors on even triples, column questions the
    transposed column projectors on odd triples; every other operator is zero.
    Bob's side is the mirror image."""
    e, f = row_projectors(), column_projectors()
    ea = np.zeros((6, 8, 4, 4), dtype=complex)
    fb = np.zeros((6, 8, 4, 4), dtype=complex)
    ea[:3, :4] = e
    ea[3:, 4:] = np.swapaxes(f, -1, -2)
    fb[3:, 4:] = f
    fb[:3, :4] = np.swapaxes(e, -1, -2)
    return QuantumStrategy(maximally_entangled(4), ea, fb)
