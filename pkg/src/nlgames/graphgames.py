"""Graphs, independence numbers, independent set games and quantum independent sets."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .cliques import max_clique
from .errors import QISInvalid
from .games import NonlocalGame
from .numerics import DEFAULT_TOL, Tolerance, frob, maximally_entangled, projection_residual
from .strategies import QuantumStrategy


@dataclass(frozen=True)
class Graph:
    """Finite simple undirected graph on vertices ``0..n-1``."""

    vertex_count: int
    edges: frozenset
    labels: tuple = ()
    masks: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        norm = set()
        for e in self.edges:
            u, v = (int(t) for t in e)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) out of range")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))
        labels = tuple(str(l) for l in self.labels) or tuple(str(i) for i in range(self.vertex_count))
        if len(labels) != self.vertex_count:
            raise ValueError("one label per vertex required")
        object.__setattr__(self, "labels", labels)
        masks = [0] * self.vertex_count
        for u, v in norm:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        object.__setattr__(self, "masks", tuple(masks))

    def adjacent(self, u: int, v: int) -> bool:
        return bool(self.masks[u] >> v & 1)

    def degree(self, v: int) -> int:
        return bin(self.masks[v]).count("1")

    def complement(self) -> "Graph":
        n = self.vertex_count
        edges = {(u, v) for u in range(n) for v in range(u + 1, n) if not self.adjacent(u, v)}
        return Graph(n, frozenset(edges), self.labels)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.vertex_count,) * 2, dtype=bool)
        for u, v in self.edges:
            a[u, v] = a[v, u] = True
        return a

    def is_independent(self, vertices) -> bool:
        vs = list(vertices)
        return all(not self.adjacent(u, v) for i, u in enumerate(vs) for v in vs[i + 1:]) and len(set(vs)) == len(vs)

    # -- text formats --------------------------------------------------

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        for i, l in enumerate(self.labels):
            lines.append(f'  {i} [label="{l}"];')
        for u, v in sorted(self.edges):
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dot(cls, text: str) -> "Graph":
        """Parse the undirected DOT subset written by :meth:`to_dot` (numeric node ids)."""
        labels: dict[int, str] = {}
        edges = set()
        for m in re.finditer(r'^\s*(\d+)\s*\[\s*label\s*=\s*"([^"]*)"\s*\]', text, re.M):
            labels[int(m.group(1))] = m.group(2)
        for m in re.finditer(r"(\d+)\s*--\s*(\d+)", text):
            edges.add((int(m.group(1)), int(m.group(2))))
        n = max([*labels, *(max(e) for e in edges)], default=-1) + 1
        return cls(n, frozenset(edges), tuple(labels.get(i, str(i)) for i in range(n)))

    def to_edgelist(self) -> str:
        head = f"# vertices {self.vertex_count}\n"
        return head + "".join(f"{u} {v}\n" for u, v in sorted(self.edges))

    @classmethod
    def from_edgelist(cls, text: str, vertex_count: int | None = None) -> "Graph":
        edges = set()
        n = vertex_count
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = re.match(r"#\s*vertices\s+(\d+)", line)
                if m and n is None:
                    n = int(m.group(1))
                continue
            u, v = line.split()
            edges.add((int(u), int(v)))
        if n is None:
            n = max((max(e) for e in edges), default=-1) + 1
        return cls(n, frozenset(edges))


def complete_graph(n: int) -> Graph:
    return Graph(n, frozenset((u, v) for u in range(n) for v in range(u + 1, n)))


def empty_graph(n: int) -> Graph:
    return Graph(n, frozenset())


def independence_number(g: Graph, budget: int | None = 10**7) -> tuple[int, tuple[int, ...]]:
    """Exact independence number with a witness, via maximum clique in the complement."""
    n = g.vertex_count
    full = (1 << n) - 1
    comp = [full & ~g.masks[v] & ~(1 << v) for v in range(n)]
    return max_clique(comp, budget=budget)


def independent_set_game(g: Graph, t: int) -> NonlocalGame:
    """Questions are ``1..t``, answers are vertices.  Equal questions need equal
    vertices; different questions need distinct, non-adjacent vertices."""
    if t < 1:
        raise ValueError("t must be at least 1")
    n = g.vertex_count
    adj = g.adjacency_matrix()
    same = np.eye(n, dtype=bool)
    diff = ~same & ~adj
    qs = np.eye(t, dtype=bool)[:, :, None, None]
    v = np.where(qs, same[None, None], diff[None, None])
    return NonlocalGame.uniform([str(i + 1) for i in range(t)], [str(i + 1) for i in range(t)],
                                g.labels, g.labels, v)


@dataclass(frozen=True, eq=False)
class QuantumIndependentSet:
    """``operators[x, u]`` is the projection for question ``x`` and vertex ``u``."""

    operators: np.ndarray

    def __post_init__(self):
        ops = np.array(self.operators, dtype=complex)
        if ops.ndim != 4 or ops.shape[2] != ops.shape[3]:
            raise ValueError(f"operators must have shape (t, |V|, d, d), got {ops.shape}")
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def size(self) -> int:
        return self.operators.shape[0]

    @property
    def dim(self) -> int:
        return self.operators.shape[2]

    @classmethod
    def from_classical(cls, g: Graph, vertices) -> "QuantumIndependentSet":
        """One-dimensional encoding ``P_xu = [u == v_x]`` of a vertex list."""
        vs = list(vertices)
        ops = np.zeros((len(vs), g.vertex_count, 1, 1), dtype=complex)
        ops[np.arange(len(vs)), vs] = 1
        return cls(ops)


@dataclass(frozen=True)
class QISCheck:
    projection: float
    completeness: float
    edges: float
    repeated_vertex: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.projection, self.completeness, self.edges, self.repeated_vertex) <= self.tolerance


def check_qis(g: Graph, q: QuantumIndependentSet, tol: Tolerance = DEFAULT_TOL) -> QISCheck:
    """Residuals of the quantum independent set conditions: every operator a
    projection, completeness per question, orthogonality along edges for all
    question pairs, and orthogonality of distinct questions on one vertex."""
    ops = q.operators
    t, n, d, _ = ops.shape
    if n != g.vertex_count:
        raise QISInvalid(f"{n} operator columns for a graph with {g.vertex_count} vertices")
    proj = max((projection_residual(ops[x, u]) for x in range(t) for u in range(n)), default=0.0)
    comp = max(frob(ops[x].sum(axis=0) - np.eye(d)) for x in range(t)) if t else 0.0
    edge = 0.0
    for u, v in g.edges:
        prod = np.einsum("xij,yjk->xyik", ops[:, u], ops[:, v])
        edge = max(edge, float(np.linalg.norm(prod, axis=(2, 3)).max()))
    rep = 0.0
    if t > 1:
        prod = np.einsum("xuij,yujk->xyuik", ops, ops)
        norms = np.linalg.norm(prod, axis=(3, 4))
        norms[np.arange(t), np.arange(t)] = 0.0
        rep = float(norms.max())
    return QISCheck(proj, comp, edge, rep, tol.eq)


def strategy_from_qis(g: Graph, q: QuantumIndependentSet, tol: Tolerance = DEFAULT_TOL) -> QuantumStrategy:
    """Maximally entangled state with Alice using ``P`` and Bob the transposes."""
    chk = check_qis(g, q, tol)
    if not chk.passed:
        raise QISInvalid(f"not a quantum independent set: {chk}")
    return QuantumStrategy(maximally_entangled(q.dim), q.operators, np.swapaxes(q.operators, -1, -2))
