"""Exact maximum clique by branch and bound over integer bitsets.

Greedy colouring bounds the clique size reachable from each candidate set
(Tomita's MCQ with San Segundo's bitset colouring).  Vertices are relabelled
by non-increasing degree, ties by original index, so the returned witness is
deterministic.
"""

from __future__ import annotations

from .errors import BudgetExceeded


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def max_clique(neighbours: list[int], budget: int | None = None, target: int | None = None):
    """Return ``(size, clique)`` for the graph given by neighbour bitmasks.

    ``neighbours[v]`` has bit ``u`` set iff ``u`` and ``v`` are adjacent.  With
    ``target`` set the search stops as soon as a clique of that size is found.
    ``budget`` caps the number of search nodes.
    """
    n = len(neighbours)
    if n == 0:
        return 0, ()
    degree = [bin(m).count("1") for m in neighbours]
    order = sorted(range(n), key=lambda v: (-degree[v], v))
    pos = {v: i for i, v in enumerate(order)}
    adj = [0] * n
    for v in range(n):
        m = 0
        for u in _bits(neighbours[v]):
            m |= 1 << pos[u]
        adj[pos[v]] = m

    best: list[int] = []
    nodes = 0

    def colour(cands: int):
        verts, cols = [], []
        uncoloured = cands
        k = 0
        while uncoloured:
            k += 1
            q = uncoloured
            while q:
                low = q & -q
                v = low.bit_length() - 1
                q &= ~adj[v] & ~low
                uncoloured &= ~low
                verts.append(v)
                cols.append(k)
        return verts, cols

    def expand(clique: list[int], cands: int) -> bool:
        nonlocal best, nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded(nodes)
        verts, cols = colour(cands)
        for i in range(len(verts) - 1, -1, -1):
            if len(clique) + cols[i] <= len(best):
                return False
            v = verts[i]
            clique.append(v)
            sub = cands & adj[v]
            if sub:
                if expand(clique, sub):
                    return True
            elif len(clique) > len(best):
                best = list(clique)
                if target is not None and len(best) >= target:
                    return True
            clique.pop()
            cands &= ~(1 << v)
        return False

    expand([], (1 << n) - 1)
    witness = tuple(sorted(order[v] for v in best))
    return len(witness), witness
