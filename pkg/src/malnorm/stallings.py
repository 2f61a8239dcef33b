"""Stallings subgroup graphs of finitely generated subgroups of free groups.

A :class:`SubgroupGraph` is the folded core graph of a subgroup ``H``: a
connected, based graph with edges labelled by the generators, with at most
one edge of each label entering and leaving each vertex, and with every
vertex except possibly the basepoint meeting at least two edge ends.  The
reduced words labelling loops at the basepoint are exactly the elements
of ``H``.

Graphs are canonical: vertices are numbered by breadth-first search from
the basepoint (which is vertex 0), exploring labels in the order
``x1 < X1 < x2 < X2 < ...``.  Two graphs are equal exactly when they
describe the same subgroup.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .words import (
    Word,
    WordError,
    cyclic_reduce,
    free_reduce,
    invert,
    letter_key,
    multiply,
    parse_letters,
    shortlex_key,
)

__all__ = [
    "SubgroupGraph",
    "PullbackComponent",
    "MalnormalityReport",
    "INFINITE",
    "build_subgroup_graph",
    "contains",
    "index",
    "basis",
    "basis_decomposition",
    "reads_path",
    "conjugate_into",
    "conjugator_into",
    "power_conjugate_into",
    "pullback",
    "is_malnormal",
    "conjugacy_disjoint",
    "common_conjugate",
    "violating_double_cosets",
    "parse_subgroup_text",
    "read_subgroup_file",
    "graph_from_text",
]

INFINITE = math.inf

Adjacency = dict[int, dict[int, int]]


def _label_order(rank: int) -> list[int]:
    return sorted((s * k for k in range(1, rank + 1) for s in (1, -1)), key=letter_key)


class SubgroupGraph:
    """Folded based core graph of a subgroup; immutable.

    Use :func:`build_subgroup_graph` or :meth:`from_edges` rather than the
    constructor.
    """

    __slots__ = ("rank", "_adj", "_tree", "_tree_edge")

    basepoint = 0

    def __init__(self, rank: int, adj: Sequence[dict[int, int]], tree: Sequence[tuple[int, ...]]):
        self.rank = rank
        self._adj = tuple(adj)
        self._tree = tuple(tree)
        # vertex -> (parent, signed label) along the BFS tree
        self._tree_edge: dict[int, tuple[int, int]] = {}
        for v, word in enumerate(self._tree):
            if word:
                x = word[-1]
                self._tree_edge[v] = (self._adj[v][-x], x)

    @classmethod
    def from_edges(
        cls, rank: int, edges: Iterable[tuple[int, int, int]], basepoint: int = 0
    ) -> SubgroupGraph:
        """Fold, trim and canonicalize an arbitrary labelled graph.

        ``edges`` holds ``(source, generator, target)`` triples with
        ``generator`` in ``1..rank`` (a negative generator flips the edge).
        """
        folder = _Folder()
        folder.vertex(basepoint)
        for u, k, v in edges:
            if k == 0 or abs(k) > rank:
                raise WordError(f"edge label {k} out of range for rank {rank}")
            if k < 0:
                u, k, v = v, -k, u
            folder.add_edge(u, k, v)
        adj, base = folder.result(basepoint)
        return _canonical(rank, adj, base)

    @property
    def num_vertices(self) -> int:
        return len(self._adj)

    @property
    def vertices(self) -> range:
        return range(len(self._adj))

    @property
    def num_edges(self) -> int:
        return sum(1 for d in self._adj for x in d if x > 0)

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Positive edges ``(source, generator, target)`` in canonical order."""
        for u, d in enumerate(self._adj):
            for k in range(1, self.rank + 1):
                v = d.get(k)
                if v is not None:
                    yield u, k, v

    def step(self, v: int, letter: int) -> int | None:
        return self._adj[v].get(letter)

    def read(self, v: int, letters: Iterable[int]) -> int | None:
        """End vertex of the path from ``v`` labelled ``letters``, if any."""
        adj = self._adj
        for x in letters:
            nxt = adj[v].get(x)
            if nxt is None:
                return None
            v = nxt
        return v

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def labels_at(self, v: int) -> dict[int, int]:
        return dict(self._adj[v])

    def tree_word(self, v: int) -> Word:
        """Label of the BFS-tree path from the basepoint to ``v``."""
        return Word(self._tree[v], self.rank)

    @property
    def subgroup_rank(self) -> int:
        return self.num_edges - self.num_vertices + 1

    def is_trivial(self) -> bool:
        return not self._adj[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubgroupGraph):
            return NotImplemented
        return self.rank == other.rank and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((self.rank, tuple(tuple(sorted(d.items())) for d in self._adj)))

    def __repr__(self) -> str:
        return (
            f"SubgroupGraph(rank={self.rank}, vertices={self.num_vertices}, "
            f"edges={self.num_edges})"
        )

    def to_text(self) -> str:
        """Adjacency-list export; deterministic since numbering is canonical."""
        if self.rank > 26:
            raise WordError("text export supports at most 26 generators")
        lines = [f"basepoint {self.basepoint}"]
        for u, k, v in self.edges():
            lines.append(f"{u} --{chr(ord('a') + k - 1)}--> {v}")
        return "\n".join(lines) + "\n"


class _Folder:
    """Incremental Stallings folding over a union-find of vertices."""

    def __init__(self) -> None:
        self.parent: dict[int, int] = {}
        self.adj: dict[int, dict[int, int]] = {}
        self._pending: list[tuple[int, int]] = []
        self._fresh = 0

    def vertex(self, v: int) -> int:
        if v not in self.parent:
            self.parent[v] = v
            self.adj[v] = {}
            self._fresh = max(self._fresh, v + 1)
        return v

    def new_vertex(self) -> int:
        return self.vertex(self._fresh)

    def find(self, v: int) -> int:
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def _merge_pending(self) -> None:
        adj = self.adj
        while self._pending:
            a, b = self._pending.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if len(adj[a]) < len(adj[b]):
                a, b = b, a
            self.parent[b] = a
            moved = adj.pop(b)
            target = adj[a]
            for lab, w in moved.items():
                cur = target.get(lab)
                if cur is None:
                    target[lab] = w
                else:
                    self._pending.append((cur, w))

    def add_edge(self, u: int, k: int, v: int) -> None:
        self.vertex(u)
        self.vertex(v)
        u, v = self.find(u), self.find(v)
        cur = self.adj[u].get(k)
        if cur is not None:
            self._pending.append((cur, v))
            self._merge_pending()
            return
        self.adj[u][k] = v
        cur = self.adj[v].get(-k)
        if cur is not None:
            self._pending.append((cur, u))
            self._merge_pending()
        else:
            self.adj[v][-k] = u

    def add_loop_word(self, base: int, letters: Sequence[int]) -> None:
        if not letters:
            return
        v = base
        for i, x in enumerate(letters):
            w = base if i == len(letters) - 1 else self.new_vertex()
            if x > 0:
                self.add_edge(v, x, w)
            else:
                self.add_edge(w, -x, v)
            v = w

    def result(self, base: int) -> tuple[Adjacency, int]:
        find = self.find
        adj = {v: {lab: find(w) for lab, w in d.items()} for v, d in self.adj.items()}
        return adj, find(base)


def _trim(adj: Adjacency, keep: int | None) -> None:
    """Delete vertices of degree at most one, except ``keep``; in place."""
    queue = deque(v for v, d in adj.items() if len(d) <= 1 and v != keep)
    while queue:
        v = queue.popleft()
        d = adj.get(v)
        if d is None or len(d) > 1:
            continue
        del adj[v]
        for lab, w in d.items():
            if w == v:
                continue
            nbr = adj[w]
            nbr.pop(-lab, None)
            if len(nbr) <= 1 and w != keep:
                queue.append(w)


def _canonical(rank: int, adj: Adjacency, base: int) -> SubgroupGraph:
    _trim(adj, base)
    order = _label_order(rank)
    number = {base: 0}
    tree: list[tuple[int, ...]] = [()]
    queue = deque([base])
    while queue:
        v = queue.popleft()
        d = adj[v]
        for x in order:
            w = d.get(x)
            if w is not None and w not in number:
                number[w] = len(tree)
                tree.append(tree[number[v]] + (x,))
                queue.append(w)
    new_adj: list[dict[int, int]] = [{} for _ in tree]
    for v, i in number.items():
        new_adj[i] = {x: number[w] for x, w in sorted(adj[v].items(), key=lambda t: letter_key(t[0]))}
    return SubgroupGraph(rank, new_adj, tree)


def build_subgroup_graph(generators: Sequence[Word], rank: int | None = None) -> SubgroupGraph:
    """Stallings graph of the subgroup generated by ``generators``."""
    if rank is None:
        if not generators:
            raise WordError("rank is required when there are no generators")
        rank = generators[0].rank
    for g in generators:
        if g.rank != rank:
            raise WordError(f"rank mismatch: {g.rank} vs {rank}")
    folder = _Folder()
    base = folder.vertex(0)
    for g in generators:
        folder.add_loop_word(base, g.letters)
    adj, base = folder.result(base)
    return _canonical(rank, adj, base)


def _same_rank(graph: SubgroupGraph, w: Word) -> None:
    if graph.rank != w.rank:
        raise WordError(f"rank mismatch: graph {graph.rank} vs word {w.rank}")


def contains(graph: SubgroupGraph, w: Word) -> bool:
    _same_rank(graph, w)
    return graph.read(0, w.letters) == 0


def index(graph: SubgroupGraph) -> int | float:
    """Index of the subgroup in the free group, or ``INFINITE``."""
    full = 2 * graph.rank
    if all(graph.degree(v) == full for v in graph.vertices):
        return graph.num_vertices
    return INFINITE


def _spanning_basis(graph: SubgroupGraph) -> list[tuple[int, int, int]]:
    tree = set()
    for v, (p, x) in graph._tree_edge.items():
        if x > 0:
            tree.add((p, x, v))
        else:
            tree.add((v, -x, p))
    return [e for e in graph.edges() if e not in tree]


def basis(graph: SubgroupGraph) -> list[Word]:
    """Free basis read off the canonical BFS spanning tree."""
    out = []
    for u, k, v in _spanning_basis(graph):
        w = multiply(multiply(graph.tree_word(u), Word((k,), graph.rank)), invert(graph.tree_word(v)))
        out.append(w)
    return out


def basis_decomposition(graph: SubgroupGraph, w: Word) -> list[tuple[int, int]] | None:
    """Express ``w`` in the basis returned by :func:`basis`.

    Returns ``[(i, e), ...]`` meaning ``basis[i] ** e`` multiplied left to
    right, or ``None`` when ``w`` is not in the subgroup.
    """
    _same_rank(graph, w)
    positions = {e: i for i, e in enumerate(_spanning_basis(graph))}
    out: list[tuple[int, int]] = []
    v = 0
    for x in w.letters:
        nxt = graph.step(v, x)
        if nxt is None:
            return None
        edge = (v, x, nxt) if x > 0 else (nxt, -x, v)
        i = positions.get(edge)
        if i is not None:
            out.append((i, 1 if x > 0 else -1))
        v = nxt
    return out if v == 0 else None


def reads_path(graph: SubgroupGraph, w: Word) -> bool:
    """True iff ``w`` labels a path starting at some vertex of the core."""
    _same_rank(graph, w)
    return any(graph.read(v, w.letters) is not None for v in graph.vertices)


def conjugator_into(graph: SubgroupGraph, w: Word) -> Word | None:
    """Some ``c`` with ``c w c^-1`` in the subgroup, or ``None``."""
    _same_rank(graph, w)
    if not w:
        raise WordError("conjugacy test needs a nontrivial word")
    core, k = cyclic_reduce(w)
    for v in graph.vertices:
        if graph.read(v, core.core.letters) == v:
            # p core p^-1 lies in H and core = k^-1 w k
            return multiply(graph.tree_word(v), invert(k))
    return None


def conjugate_into(graph: SubgroupGraph, w: Word) -> bool:
    return conjugator_into(graph, w) is not None


def power_conjugate_into(graph: SubgroupGraph, w: Word) -> int | None:
    """Smallest ``p >= 1`` with a conjugate of ``w^p`` in the subgroup."""
    _same_rank(graph, w)
    if not w:
        raise WordError("conjugacy test needs a nontrivial word")
    letters = cyclic_reduce(w)[0].core.letters
    sigma = [graph.read(v, letters) for v in graph.vertices]
    best = None
    n = graph.num_vertices
    for v in graph.vertices:
        x = v
        for p in range(1, n + 1):
            x = sigma[x]
            if x is None:
                break
            if x == v:
                if best is None or p < best:
                    best = p
                break
    return best


def _check_pair(g1: SubgroupGraph, g2: SubgroupGraph) -> None:
    if g1.rank != g2.rank:
        raise WordError(f"rank mismatch: {g1.rank} vs {g2.rank}")


@dataclass(frozen=True)
class PullbackComponent:
    vertex_pairs: frozenset[tuple[int, int]]
    representative: Word
    intersection: SubgroupGraph
    is_diagonal: bool


def _product_components(g1: SubgroupGraph, g2: SubgroupGraph) -> list[list[tuple[int, int]]]:
    seen: set[tuple[int, int]] = set()
    components = []
    for start in ((u, v) for u in g1.vertices for v in g2.vertices):
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            u, v = queue.popleft()
            d2 = g2._adj[v]
            for x, u2 in g1._adj[u].items():
                v2 = d2.get(x)
                if v2 is not None and (u2, v2) not in seen:
                    seen.add((u2, v2))
                    comp.append((u2, v2))
                    queue.append((u2, v2))
        components.append(comp)
    return components


def _product_loop_basis(
    g1: SubgroupGraph, g2: SubgroupGraph, root: tuple[int, int]
) -> list[tuple[int, ...]]:
    """Free basis of loops at ``root`` in the product graph, as letter tuples."""
    order = _label_order(g1.rank)
    path = {root: ()}
    queue = deque([root])
    tree_edges = set()
    while queue:
        p = queue.popleft()
        u, v = p
        for x in order:
            u2 = g1._adj[u].get(x)
            v2 = g2._adj[v].get(x) if u2 is not None else None
            if v2 is None:
                continue
            q = (u2, v2)
            if q not in path:
                path[q] = path[p] + (x,)
                tree_edges.add((p, x, q) if x > 0 else (q, -x, p))
                queue.append(q)
    loops = []
    for p in sorted(path, key=lambda q: (len(path[q]), [letter_key(x) for x in path[q]])):
        u, v = p
        for k in range(1, g1.rank + 1):
            u2 = g1._adj[u].get(k)
            v2 = g2._adj[v].get(k) if u2 is not None else None
            if v2 is None:
                continue
            q = (u2, v2)
            if (p, k, q) in tree_edges:
                continue
            pinv = tuple(-x for x in reversed(path[q]))
            loops.append(path[p] + (k,) + pinv)
    return loops


def pullback(g1: SubgroupGraph, g2: SubgroupGraph) -> list[PullbackComponent]:
    """Components of the fiber product that carry a nontrivial intersection.

    Each component yields a double coset representative ``z`` and the
    subgroup ``H1 ∩ z H2 z^-1``.  The component through the pair of
    basepoints (``z`` trivial) comes first.
    """
    _check_pair(g1, g2)
    rank = g1.rank
    same = g1 == g2
    out = []
    for comp in _product_components(g1, g2):
        edges = 0
        for u, v in comp:
            d2 = g2._adj[v]
            edges += sum(1 for x in g1._adj[u] if x > 0 and x in d2)
        if edges < len(comp):
            continue  # a tree: trivial intersection
        best_key = None
        best = None
        for u, v in comp:
            z = multiply(g1.tree_word(u), invert(g2.tree_word(v)))
            key = shortlex_key(z)
            if best_key is None or key < best_key:
                best_key, best = key, (z, (u, v))
        z, root = best
        p1 = g1.tree_word(root[0])
        gens = []
        for loop in _product_loop_basis(g1, g2, root):
            gens.append(multiply(multiply(p1, free_reduce(loop, rank)), invert(p1)))
        inter = build_subgroup_graph(gens, rank)
        out.append(
            PullbackComponent(
                vertex_pairs=frozenset(comp),
                representative=z,
                intersection=inter,
                is_diagonal=same and (0, 0) in comp,
            )
        )
    out.sort(key=lambda c: ((0, 0) not in c.vertex_pairs, shortlex_key(c.representative)))
    return out


@dataclass(frozen=True)
class MalnormalityReport:
    """``violations`` holds ``(z, h, h')`` with ``z`` outside H and ``z h z^-1 = h'``."""

    verdict: bool
    violations: tuple[tuple[Word, Word, Word], ...]


def _require_nontrivial(graph: SubgroupGraph) -> None:
    if graph.is_trivial():
        raise WordError("subgroup is trivial")


def violating_double_cosets(graph: SubgroupGraph) -> list[tuple[Word, list[Word]]]:
    """Double cosets ``HzH`` with ``z`` outside H and ``H ∩ zHz^-1`` nontrivial.

    One entry per non-diagonal self-pullback component.  For each listed
    basis element ``g`` both ``g`` and ``z^-1 g z`` lie in H.
    """
    _require_nontrivial(graph)
    return [
        (c.representative, basis(c.intersection))
        for c in pullback(graph, graph)
        if not c.is_diagonal
    ]


def is_malnormal(graph: SubgroupGraph) -> MalnormalityReport:
    violations = []
    for z, gens in violating_double_cosets(graph):
        zinv = invert(z)
        for g in gens:
            violations.append((z, multiply(multiply(zinv, g), z), g))
    return MalnormalityReport(not violations, tuple(violations))


def _unbased_core(graph: SubgroupGraph) -> Adjacency:
    adj = {v: graph.labels_at(v) for v in graph.vertices}
    _trim(adj, None)
    return adj


def _product_core(g1: SubgroupGraph, g2: SubgroupGraph) -> Adjacency:
    a1, a2 = _unbased_core(g1), _unbased_core(g2)
    prod: Adjacency = {}
    for u, d1 in a1.items():
        for v, d2 in a2.items():
            prod[(u, v)] = {x: (u2, d2[x]) for x, u2 in d1.items() if x in d2}
    _trim(prod, None)
    return prod


def conjugacy_disjoint(g1: SubgroupGraph, g2: SubgroupGraph) -> bool:
    """True iff no nontrivial element of H1 is conjugate to an element of H2."""
    _check_pair(g1, g2)
    return not _product_core(g1, g2)


def common_conjugate(g1: SubgroupGraph, g2: SubgroupGraph) -> Word | None:
    """A nontrivial cyclically reduced word conjugate into both subgroups."""
    _check_pair(g1, g2)
    prod = _product_core(g1, g2)
    if not prod:
        return None
    # every vertex has degree >= 2, so a non-backtracking walk closes up
    start = min(prod)
    seen = {start: 0}
    letters: list[int] = []
    v, last = start, 0
    while True:
        x = next(x for x in sorted(prod[v], key=letter_key) if x != -last)
        letters.append(x)
        v, last = prod[v][x], x
        if v in seen:
            loop = letters[seen[v] :]
            break
        seen[v] = len(letters)
    w = free_reduce(loop, g1.rank)
    return cyclic_reduce(w)[0].core


_RANK_LINE = re.compile(r"^rank\s*=\s*(\d+)$")


def parse_subgroup_text(text: str, rank: int | None = None) -> tuple[list[Word], int]:
    """Parse the one-word-per-line subgroup format.

    ``#`` starts a comment, blank lines are skipped, and the first
    remaining line may read ``rank=N``.  An explicit ``rank`` argument wins
    over the file; otherwise the rank is the largest generator index used.
    """
    raw: list[list[int]] = []
    declared = None
    first = True
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RANK_LINE.match(line)
        if m and first:
            declared = int(m.group(1))
            first = False
            continue
        first = False
        try:
            raw.append(parse_letters(line))
        except WordError as exc:
            raise WordError(f"line {lineno}: {exc}") from None
    if rank is None:
        rank = declared
    if rank is None:
        rank = max((abs(x) for letters in raw for x in letters), default=1)
    words = []
    for letters in raw:
        words.append(free_reduce(letters, rank))
    return words, rank


def read_subgroup_file(path: str | Path, rank: int | None = None) -> tuple[list[Word], int]:
    return parse_subgroup_text(Path(path).read_text(encoding="utf-8"), rank)


_EDGE_LINE = re.compile(r"^(\d+)\s+--([a-z])-->\s+(\d+)$")


def graph_from_text(text: str, rank: int) -> SubgroupGraph:
    """Inverse of :meth:`SubgroupGraph.to_text`."""
    base = 0
    edges = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("basepoint"):
            base = int(line.split()[1])
            continue
        m = _EDGE_LINE.match(line)
        if not m:
            raise WordError(f"bad edge line {line!r}")
        edges.append((int(m.group(1)), ord(m.group(2)) - ord("a") + 1, int(m.group(3))))
    return SubgroupGraph.from_edges(rank, edges, base)
