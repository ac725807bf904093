"""Counting ordered tree embeddings in a graph.

The census statistic for a tree T on vertices 0..k-1 is the number of
injective maps phi from T-vertices to graph vertices such that every
tree edge lands on a graph edge.  Ordered means each unlabeled copy is
counted once per automorphism of T.

Counts are exact Python integers.  Closed-form fast paths cover single
edges and stars (hence every tree on at most 3 vertices); other shapes
use backtracking over a BFS order of the tree, which is intended for
small k.  An optional depth cutoff restricts the census to vertices
whose payload (depth for hyperbolic builds) is at most the cutoff.

``add_one_cost`` and ``second_difference`` count embeddings that hit
one, respectively two, extra vertices grafted onto the graph; these are
the discrete derivatives of the census under point insertion.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graph import Graph

__all__ = [
    "TreeSpec",
    "count_tree_embeddings",
    "count_tree_embeddings_bruteforce",
    "add_one_cost",
    "second_difference",
]

_BRUTE_FORCE_CAP = 2_000_000


@lru_cache(maxsize=None)
def _automorphism_count(k: int, edges: tuple) -> int:
    if k > 8:
        raise ValueError("automorphism count by enumeration capped at k = 8")
    eset = set(edges)
    hits = 0
    for perm in itertools.permutations(range(k)):
        if all(tuple(sorted((perm[a], perm[b]))) in eset for a, b in edges):
            hits += 1
    return hits


@dataclass(frozen=True)
class TreeSpec:
    """A tree on vertices 0..k-1 given by its edge set."""

    k: int
    edges: tuple

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("a tree needs at least one vertex")
        canon = tuple(sorted(tuple(sorted(map(int, e))) for e in self.edges))
        object.__setattr__(self, "edges", canon)
        if len(canon) != self.k - 1:
            raise ValueError(f"a tree on {self.k} vertices has {self.k - 1} edges")
        seen = {v for e in canon for v in e}
        if seen and (min(seen) < 0 or max(seen) >= self.k):
            raise ValueError("edge labels must lie in 0..k-1")
        if len(set(canon)) != len(canon):
            raise ValueError("duplicate edge")
        if any(a == b for a, b in canon):
            raise ValueError("self-loop")
        if self.k > 1 and len(self._bfs_reach(0)) != self.k:
            raise ValueError("edges do not form a connected tree")

    # -- construction helpers ------------------------------------------------

    @classmethod
    def path(cls, k: int) -> "TreeSpec":
        return cls(k, tuple((i, i + 1) for i in range(k - 1)))

    @classmethod
    def star(cls, k: int) -> "TreeSpec":
        return cls(k, tuple((0, i) for i in range(1, k)))

    @classmethod
    def parse(cls, text: str) -> "TreeSpec":
        """Parse 'path:K', 'star:K' or 'edges:0-1,1-2,...'."""
        kind, _, rest = text.partition(":")
        if kind == "path":
            return cls.path(int(rest))
        if kind == "star":
            return cls.star(int(rest))
        if kind == "edges":
            edges = tuple(tuple(int(x) for x in pair.split("-"))
                          for pair in rest.split(",") if pair)
            k = 1 + max((v for e in edges for v in e), default=0)
            return cls(k, edges)
        raise ValueError(f"cannot parse tree description {text!r}")

    # -- structure -----------------------------------------------------------

    @property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.k, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    @property
    def degree_sequence(self) -> tuple:
        """Degrees sorted descending."""
        return tuple(sorted((int(x) for x in self.degrees), reverse=True))

    @property
    def max_degree(self) -> int:
        return self.degree_sequence[0] if self.k > 1 else 0

    @property
    def is_path(self) -> bool:
        return self.k == 1 or self.max_degree <= 2

    @property
    def is_star(self) -> bool:
        return self.k >= 2 and self.max_degree == self.k - 1

    def automorphisms(self) -> int:
        return _automorphism_count(self.k, self.edges)

    def label(self) -> str:
        if self.is_path:
            return f"path-{self.k}"
        if self.is_star:
            return f"star-{self.k}"
        return f"tree-{self.k}v"

    def _adjacency(self) -> list:
        adj = [[] for _ in range(self.k)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(row) for row in adj]

    def _bfs_reach(self, root: int) -> set:
        adj = self._adjacency()
        seen = {root}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return seen

    def bfs_order(self, root: int | None = None):
        """Vertex order plus, for each later vertex, its parent's index.

        Every vertex after the first has exactly one earlier neighbor,
        so embeddings can be grown one vertex at a time.  Default root
        is a vertex of maximal degree.
        """
        if root is None:
            root = int(np.argmax(self.degrees)) if self.k > 1 else 0
        adj = self._adjacency()
        order = [root]
        parent_index = [-1]
        position = {root: 0}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if u not in position:
                    position[u] = len(order)
                    parent_index.append(position[v])
                    order.append(u)
                    queue.append(u)
        return order, parent_index


# ---------------------------------------------------------------------------
# counting


def _eligible_mask(graph: Graph, max_depth):
    if max_depth is None:
        return None
    return graph.vertex_payload <= float(max_depth)


def _count_edge(graph: Graph, mask) -> int:
    if mask is None:
        return 2 * graph.num_edges
    edges = graph.edge_array()
    if edges.shape[0] == 0:
        return 0
    return 2 * int(np.count_nonzero(mask[edges[:, 0]] & mask[edges[:, 1]]))


def _eligible_neighbor_counts(graph: Graph, mask) -> np.ndarray:
    if mask is None:
        return graph.degrees.astype(np.int64)
    src = np.repeat(np.arange(graph.num_vertices), graph.degrees)
    good = mask[graph.indices].astype(np.int64)
    return np.bincount(src, weights=good, minlength=graph.num_vertices).astype(np.int64)


def _count_star(graph: Graph, leaves: int, mask) -> int:
    m = _eligible_neighbor_counts(graph, mask)
    centers = range(graph.num_vertices) if mask is None else np.flatnonzero(mask)
    return sum(math.perm(int(m[v]), leaves) for v in centers)


def _backtrack(neighbors, n_base, order, parent_index, pins, root_candidates):
    """Count embeddings grown along ``order``; ``pins`` maps tree vertex -> forced id.

    Unpinned tree vertices may only occupy ids below ``n_base``; pinned
    ones land exactly on their forced id.  ``neighbors(v)`` must return
    a sorted array of admissible neighbor ids.
    """
    k = len(order)
    pin_at = [pins.get(v) for v in order]
    assign = [0] * k
    used = set()

    def rec(i: int) -> int:
        row = neighbors(assign[parent_index[i]])
        target = pin_at[i]
        if target is not None:
            pos = np.searchsorted(row, target)
            if pos >= row.shape[0] or row[pos] != target or target in used:
                return 0
            if i == k - 1:
                return 1
            assign[i] = target
            used.add(target)
            total = rec(i + 1)
            used.discard(target)
            return total
        cut = int(np.searchsorted(row, n_base))
        row = row[:cut]
        if i == k - 1:
            hits = row.shape[0]
            for u in used:
                if u < n_base:
                    pos = np.searchsorted(row, u)
                    if pos < row.shape[0] and row[pos] == u:
                        hits -= 1
            return hits
        total = 0
        for cand in row:
            cand = int(cand)
            if cand in used:
                continue
            assign[i] = cand
            used.add(cand)
            total += rec(i + 1)
            used.discard(cand)
        return total

    root_pin = pin_at[0]
    total = 0
    for r in root_candidates:
        r = int(r)
        if root_pin is not None and r != root_pin:
            continue
        if k == 1:
            total += 1
            continue
        assign[0] = r
        used.add(r)
        total += rec(1)
        used.discard(r)
    return total


def _plain_neighbors(graph: Graph, mask):
    if mask is None:
        return graph.neighbors
    def nbrs(v: int) -> np.ndarray:
        row = graph.neighbors(v)
        return row[mask[row]]
    return nbrs


def count_tree_embeddings(graph: Graph, tree: TreeSpec, *, max_depth=None,
                          strategy: str = "auto") -> int:
    """Number of ordered injective embeddings of ``tree`` into ``graph``.

    ``strategy`` is "auto" (closed forms where available), "backtrack"
    (always enumerate; useful to cross-check the closed forms) or
    "fast" (closed form or error).
    """
    if strategy not in ("auto", "fast", "backtrack"):
        raise ValueError(f"unknown strategy {strategy!r}")
    mask = _eligible_mask(graph, max_depth)
    if strategy != "backtrack":
        if tree.k == 1:
            n = graph.num_vertices if mask is None else int(np.count_nonzero(mask))
            return n
        if tree.k == 2:
            return _count_edge(graph, mask)
        if tree.is_star:
            return _count_star(graph, tree.k - 1, mask)
        if strategy == "fast":
            raise ValueError(f"no closed form for {tree.label()}")
    order, parent_index = tree.bfs_order()
    roots = (range(graph.num_vertices) if mask is None
             else np.flatnonzero(mask))
    return _backtrack(_plain_neighbors(graph, mask), graph.num_vertices,
                      order, parent_index, {}, roots)


@lru_cache(maxsize=128)
def _permutation_table(m: int, k: int) -> np.ndarray:
    """All ordered k-tuples of distinct indices from range(m), one per row."""
    if k == 0:
        return np.empty((1, 0), dtype=np.int64)
    return np.fromiter(
        itertools.chain.from_iterable(itertools.permutations(range(m), k)),
        dtype=np.int64, count=math.perm(m, k) * k,
    ).reshape(-1, k)


def count_tree_embeddings_bruteforce(graph: Graph, tree: TreeSpec, *,
                                     max_depth=None) -> int:
    """Reference count by exhausting ordered vertex tuples (small graphs)."""
    mask = _eligible_mask(graph, max_depth)
    ids = (np.arange(graph.num_vertices) if mask is None
           else np.flatnonzero(mask))
    m = len(ids)
    if math.perm(m, tree.k) > _BRUTE_FORCE_CAP:
        raise ValueError("graph too large for the brute-force reference")
    if m < tree.k:
        return 0
    A = np.zeros((graph.num_vertices, graph.num_vertices), dtype=bool)
    for v in range(graph.num_vertices):
        A[v, graph.neighbors(v)] = True
    A = A[np.ix_(ids, ids)]
    perms = _permutation_table(m, tree.k)
    ok = np.ones(len(perms), dtype=bool)
    for a, b in tree.edges:
        ok &= A[perms[:, a], perms[:, b]]
    return int(np.count_nonzero(ok))


# ---------------------------------------------------------------------------
# discrete derivatives under point insertion


def _augmented_neighbors(graph: Graph, mask, extra_rows: list, extra_links: dict):
    """Neighbor lookup for the graph plus len(extra_rows) grafted vertices.

    ``extra_rows[i]`` lists base neighbors of grafted id n+i (already
    eligibility-filtered, sorted).  ``extra_links`` maps a grafted id to
    other grafted ids it touches.
    """
    n = graph.num_vertices
    touch = [np.zeros(n, dtype=bool) for _ in extra_rows]
    for i, row in enumerate(extra_rows):
        touch[i][row] = True

    def nbrs(v: int) -> np.ndarray:
        if v >= n:
            i = v - n
            tail = sorted(extra_links.get(v, ()))
            return np.concatenate([extra_rows[i], np.asarray(tail, dtype=np.int64)]) \
                if tail else extra_rows[i]
        row = graph.neighbors(v)
        if mask is not None:
            row = row[mask[row]]
        tail = [n + i for i in range(len(extra_rows)) if touch[i][v]]
        if tail:
            row = np.concatenate([row, np.asarray(tail, dtype=np.int64)])
        return row

    return nbrs


def _prep_row(graph: Graph, mask, ids) -> np.ndarray:
    row = np.unique(np.asarray(ids, dtype=np.int64))
    if row.size and (row[0] < 0 or row[-1] >= graph.num_vertices):
        raise ValueError("grafted neighbor id out of range")
    if mask is not None:
        row = row[mask[row]]
    return row


def add_one_cost(graph: Graph, tree: TreeSpec, new_neighbors, *,
                 new_payload: float = 0.0, max_depth=None) -> int:
    """Census increase when one vertex with the given neighbors is grafted on.

    Equals the number of embeddings that use the new vertex.
    """
    mask = _eligible_mask(graph, max_depth)
    if max_depth is not None and new_payload > float(max_depth):
        return 0
    x = graph.num_vertices
    row = _prep_row(graph, mask, new_neighbors)
    nbrs = _augmented_neighbors(graph, mask, [row], {})
    total = 0
    for pinned_vertex in range(tree.k):
        order, parent_index = tree.bfs_order(root=pinned_vertex)
        total += _backtrack(nbrs, x, order, parent_index,
                            {pinned_vertex: x}, [x])
    return total


def second_difference(graph: Graph, tree: TreeSpec, x_neighbors, y_neighbors, *,
                      xy_adjacent: bool = False, x_payload: float = 0.0,
                      y_payload: float = 0.0, max_depth=None) -> int:
    """Census embeddings that use both of two grafted vertices.

    This is the mixed second difference of the census under inserting
    the two points, and is symmetric in them.
    """
    mask = _eligible_mask(graph, max_depth)
    if max_depth is not None and (x_payload > float(max_depth)
                                  or y_payload > float(max_depth)):
        return 0
    n = graph.num_vertices
    x, y = n, n + 1
    rows = [_prep_row(graph, mask, x_neighbors),
            _prep_row(graph, mask, y_neighbors)]
    links = {x: (y,), y: (x,)} if xy_adjacent else {}
    nbrs = _augmented_neighbors(graph, mask, rows, links)
    total = 0
    for px in range(tree.k):
        for py in range(tree.k):
            if px == py:
                continue
            order, parent_index = tree.bfs_order(root=px)
            total += _backtrack(nbrs, n, order, parent_index,
                                {px: x, py: y}, [x])
    return total
