"""Ray sets, Kochen-Specker checks, orthogonality graphs and the induced
quantum independent sets.

Ray components may be given exactly as elements ``p + q*sqrt2`` of Z[sqrt2];
orthogonality between exact rays is then decided in integer arithmetic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionTooLarge, NotWeakKS
from .graphgames import Graph, QuantumIndependentSet
from .numerics import DEFAULT_TOL, Tolerance, frob

SQRT2 = np.sqrt(2.0)
MAX_DIM = 4

# Permutations and sign changes of (0,0,1), (0,1,+-1), (0,1,+-sqrt2) and
# (1,+-1,+-sqrt2), one representative per ray.
PERES_33_TEXT = """\
1 0 0
0 1 0
0 0 1
0 1 1
0 1 -1
1 0 1
1 0 -1
1 1 0
1 -1 0
0 1 sqrt2
0 1 -sqrt2
0 sqrt2 1
0 sqrt2 -1
1 0 sqrt2
1 0 -sqrt2
sqrt2 0 1
sqrt2 0 -1
1 sqrt2 0
1 -sqrt2 0
sqrt2 1 0
sqrt2 -1 0
1 1 sqrt2
1 1 -sqrt2
1 -1 sqrt2
1 -1 -sqrt2
1 sqrt2 1
1 sqrt2 -1
1 -sqrt2 1
1 -sqrt2 -1
sqrt2 1 1
sqrt2 1 -1
sqrt2 -1 1
sqrt2 -1 -1
"""

_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*(sqrt2)?")


def parse_exact(expr: str) -> tuple[int, int]:
    """Parse an integer combination of 1 and sqrt2, e.g. ``-2*sqrt2+1``, into ``(p, q)``."""
    s = expr.replace(" ", "")
    if not s:
        raise ValueError("empty component")
    p = q = 0
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or not (m.group(2) or m.group(3)):
            raise ValueError(f"cannot parse exact component {expr!r}")
        sign = -1 if m.group(1) == "-" else 1
        coef = int(m.group(2)) if m.group(2) else 1
        if m.group(3):
            q += sign * coef
        else:
            p += sign * coef
        pos = m.end()
        if pos < len(s) and s[pos] not in "+-":
            raise ValueError(f"cannot parse exact component {expr!r}")
    return p, q


def _exact_dot(u, v) -> tuple[int, int]:
    p = q = 0
    for (a, b), (c, d) in zip(u, v):
        p += a * c + 2 * b * d
        q += a * d + b * c
    return p, q


@dataclass(frozen=True, eq=False)
class RaySet:
    """Unit vectors in C^dim; ``exact`` holds the unnormalised Z[sqrt2] components
    when every ray was given exactly."""

    dim: int
    rays: np.ndarray
    exact: tuple | None = None

    def __post_init__(self):
        r = np.array(self.rays, dtype=complex).reshape(-1, self.dim)
        norms = np.linalg.norm(r, axis=1)
        if np.any(np.abs(norms - 1) > 1e-12):
            raise ValueError("rays must be normalised")
        gram = np.abs(np.conj(r) @ r.T)
        np.fill_diagonal(gram, 0)
        if r.shape[0] > 1 and gram.max() >= 1 - 1e-9:
            i, j = np.unravel_index(int(np.argmax(gram)), gram.shape)
            raise ValueError(f"rays {i} and {j} are parallel")
        r.setflags(write=False)
        object.__setattr__(self, "rays", r)

    def __len__(self) -> int:
        return self.rays.shape[0]

    @classmethod
    def from_exact(cls, components) -> "RaySet":
        comps = tuple(tuple(tuple(c) for c in ray) for ray in components)
        if not comps:
            raise ValueError("use RaySet.empty for an empty set")
        vals = np.array([[p + q * SQRT2 for p, q in ray] for ray in comps])
        vals = vals / np.linalg.norm(vals, axis=1, keepdims=True)
        return cls(len(comps[0]), vals, comps)

    @classmethod
    def empty(cls, dim: int) -> "RaySet":
        return cls(dim, np.zeros((0, dim)), ())

    @classmethod
    def from_text(cls, text: str) -> "RaySet":
        """One ray per line, components separated by whitespace or commas.

        Components are exact integer/sqrt2 expressions; any other number
        (floats, complex ``1+2j``) switches the whole set to the float path.
        """
        rows = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append([c for c in re.split(r"[,\s]+", line) if c])
        if not rows:
            raise ValueError("no rays given")
        try:
            return cls.from_exact([[parse_exact(c) for c in row] for row in rows])
        except ValueError:
            vals = np.array([[complex(c.replace("sqrt2", str(SQRT2))) for c in row] for row in rows])
            vals = vals / np.linalg.norm(vals, axis=1, keepdims=True)
            return cls(vals.shape[1], vals)

    def orthogonality(self, tol: float = 1e-9) -> np.ndarray:
        n = len(self)
        if self.exact is not None:
            out = np.zeros((n, n), dtype=bool)
            for i in range(n):
                for j in range(i + 1, n):
                    out[i, j] = out[j, i] = _exact_dot(self.exact[i], self.exact[j]) == (0, 0)
            return out
        out = np.abs(np.conj(self.rays) @ self.rays.T) <= tol
        np.fill_diagonal(out, False)
        return out


def peres_33() -> RaySet:
    return RaySet.from_text(PERES_33_TEXT)


def _cliques_of_size(orth: np.ndarray, size: int, eligible=None) -> list[tuple[int, ...]]:
    n = orth.shape[0]
    verts = [v for v in range(n) if eligible is None or eligible[v]]
    out = []

    def rec(chosen, cands):
        if len(chosen) == size:
            out.append(tuple(chosen))
            return
        for i, v in enumerate(cands):
            rec(chosen + [v], [w for w in cands[i + 1:] if orth[v, w]])

    rec([], verts)
    return out


def enumerate_bases(rs: RaySet) -> list[tuple[int, ...]]:
    """All orthonormal bases contained in the set, as sorted index tuples."""
    if rs.dim > MAX_DIM:
        raise DimensionTooLarge(f"basis enumeration supports dim <= {MAX_DIM}, got {rs.dim}")
    if len(rs) == 0:
        return []
    return sorted(_cliques_of_size(rs.orthogonality(), rs.dim))


class KSVerdict(Enum):
    KS = "KS"
    WEAK_KS = "WeakKS"
    NOT_WEAK_KS = "NotWeakKS"


@dataclass(frozen=True)
class KSResult:
    verdict: KSVerdict
    bases: tuple
    witness: tuple | None = None  # marking function without a marked orthogonal pair
    note: str = ""

    @property
    def is_weak_ks(self) -> bool:
        return self.verdict is not KSVerdict.NOT_WEAK_KS


def _search_marking(n, bases, orth, forbid_orthogonal_marks):
    """Backtrack over bases, choosing the marked member of each.

    Rays outside every basis stay unmarked.  Returns a full marking tuple or None.
    """
    marks = [None] * n

    def rec(k):
        if k == len(bases):
            return True
        b = bases[k]
        ones = [r for r in b if marks[r] == 1]
        if len(ones) > 1:
            return False
        free = [r for r in b if marks[r] is None]
        if ones:
            for r in free:
                marks[r] = 0
            if rec(k + 1):
                return True
            for r in free:
                marks[r] = None
            return False
        for c in free:
            if forbid_orthogonal_marks and any(marks[o] == 1 for o in np.flatnonzero(orth[c])):
                continue
            marks[c] = 1
            for r in free:
                if r != c:
                    marks[r] = 0
            if rec(k + 1):
                return True
            for r in free:
                marks[r] = None
        return False

    if not rec(0):
        return None
    return tuple(0 if m is None else m for m in marks)


def is_weak_ks(rs: RaySet) -> KSResult:
    """Classify a ray set by its marking functions (one marked ray per basis).

    ``KS`` if no marking function exists, ``WeakKS`` if every marking function
    marks some orthogonal pair, ``NotWeakKS`` (with witness) otherwise.
    """
    bases = enumerate_bases(rs)
    n = len(rs)
    if not bases:
        return KSResult(KSVerdict.NOT_WEAK_KS, (), (0,) * n,
                        "no orthonormal basis in the set; the zero function is a marking function")
    orth = rs.orthogonality()
    free = _search_marking(n, bases, orth, forbid_orthogonal_marks=True)
    if free is not None:
        return KSResult(KSVerdict.NOT_WEAK_KS, tuple(bases), free)
    if _search_marking(n, bases, orth, forbid_orthogonal_marks=False) is None:
        return KSResult(KSVerdict.KS, tuple(bases))
    return KSResult(KSVerdict.WEAK_KS, tuple(bases))


@dataclass(frozen=True, eq=False)
class ProjectiveKSSet:
    dim: int
    projections: np.ndarray  # (m, dim, dim)
    bases: tuple            # index tuples, each summing to the identity

    @property
    def k(self) -> int:
        return len(self.bases)


def identity_subsets(projections: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> list[tuple[int, ...]]:
    """All subsets of pairwise orthogonal projections whose ranks add up to the
    dimension, i.e. all subsets summing to the identity."""
    m, d, _ = projections.shape
    if d > MAX_DIM:
        raise DimensionTooLarge(f"supports dim <= {MAX_DIM}, got {d}")
    ranks = [int(round(np.trace(p).real)) for p in projections]
    orth = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for j in range(i + 1, m):
            orth[i, j] = orth[j, i] = frob(projections[i] @ projections[j]) <= tol.eq
    out = []

    def rec(chosen, total, cands):
        if total == d:
            out.append(tuple(chosen))
            return
        for i, v in enumerate(cands):
            if ranks[v] and total + ranks[v] <= d:
                rec(chosen + [v], total + ranks[v], [w for w in cands[i + 1:] if orth[v, w]])

    rec([], 0, list(range(m)))
    return sorted(out)


def to_projective_ks(rs: RaySet, tol: Tolerance = DEFAULT_TOL, verdict: KSResult | None = None) -> ProjectiveKSSet:
    """Rank-one projections ``v v*`` of a (weak) Kochen-Specker ray set."""
    res = verdict if verdict is not None else is_weak_ks(rs)
    if not res.is_weak_ks:
        raise NotWeakKS(f"ray set is not weak Kochen-Specker ({res.verdict.value})")
    projs = np.einsum("ri,rj->rij", rs.rays, np.conj(rs.rays))
    bases = identity_subsets(projs, tol)
    for b in bases:
        if frob(projs[list(b)].sum(axis=0) - np.eye(rs.dim)) > tol.eq:
            raise ArithmeticError(f"subset {b} does not sum to the identity")
    return ProjectiveKSSet(rs.dim, projs, tuple(bases))


@dataclass(frozen=True)
class OrthogonalityGraph:
    graph: Graph
    vertices: tuple  # (basis index a, position b, projection index) per vertex


def orthogonality_graph(ks: ProjectiveKSSet, tol: Tolerance = DEFAULT_TOL) -> OrthogonalityGraph:
    """Graph on the disjoint union of the bases; edges join vertices whose
    projections multiply to zero.  Repeated projections give distinct,
    non-adjacent vertices."""
    verts = [(a, b, p) for a, basis in enumerate(ks.bases) for b, p in enumerate(basis)]
    edges = set()
    for i, (_, _, p) in enumerate(verts):
        for j in range(i + 1, len(verts)):
            q = verts[j][2]
            if frob(ks.projections[p] @ ks.projections[q]) <= tol.eq:
                edges.add((i, j))
    labels = tuple(f"{a + 1},{b + 1}" for a, b, _ in verts)
    return OrthogonalityGraph(Graph(len(verts), frozenset(edges), labels), tuple(verts))


def quantum_independent_set_from_ks(ks: ProjectiveKSSet, og: OrthogonalityGraph | None = None) -> QuantumIndependentSet:
    """``Q[j, (a, b)] = p_ab`` if ``a == j`` else 0; one question per basis."""
    og = og if og is not None else orthogonality_graph(ks)
    ops = np.zeros((ks.k, len(og.vertices), ks.dim, ks.dim), dtype=complex)
    for v, (a, _, p) in enumerate(og.vertices):
        ops[a, v] = ks.projections[p]
    return QuantumIndependentSet(ops)
