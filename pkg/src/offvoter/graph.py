"""Mutable population graph and the discordant-edge pool.

Both structures use the dense-array-plus-index-map layout: items live in a
list, a dict maps item -> position, insertion appends, and removal swaps
the last item into the vacated slot.  That gives O(1) membership, O(1)
removal, and O(1) uniform sampling by index.

The array order left behind by a sequence of operations is part of the
determinism contract: the compiled engine maintains the same layout with
flat arrays, replaying identical append/swap sequences, so a sampled index
resolves to the same edge in both engines.

Edges are undirected and stored once under a canonical key (a, b) with
a < b.  Vertices are labelled 1..n.  Edges are only removed after
construction, never inserted.
"""

from __future__ import annotations


class NoSuchEdge(KeyError):
    """Removal or lookup of an edge that is not present."""


class EmptySet(LookupError):
    """Uniform sample requested from an empty pool."""


def edge_key(a: int, b: int) -> tuple:
    """Return the canonical (min, max) key for an undirected edge."""
    if a == b:
        raise ValueError("self-loop (%r, %r) is not an edge" % (a, b))
    return (a, b) if a < b else (b, a)


class IndexedSet:
    """Dense-index set: O(1) add, remove, membership and sampling."""

    __slots__ = ("_items", "_pos")

    def __init__(self, items=()):
        self._items = []
        self._pos = {}
        for x in items:
            self.add(x)

    def __len__(self):
        return len(self._items)

    def __contains__(self, x):
        return x in self._pos

    def __iter__(self):
        """Iterate in dense-array order (append/swap history order)."""
        return iter(self._items)

    def add(self, x) -> None:
        """Insert x; no-op if already present."""
        if x in self._pos:
            return
        self._pos[x] = len(self._items)
        self._items.append(x)

    def remove(self, x) -> None:
        """Swap-remove x; KeyError if absent."""
        i = self._pos.pop(x)
        last = self._items.pop()
        if i < len(self._items):  # x was not in the final slot
            self._items[i] = last
            self._pos[last] = i

    def item_at(self, i: int):
        return self._items[i]

    def sample(self, rng):
        """Uniform element via one rand_below draw; EmptySet if empty."""
        if not self._items:
            raise EmptySet("sample from empty set")
        return self._items[rng.rand_below(len(self._items))]

    def copy(self) -> "IndexedSet":
        new = self.__class__()
        new._items = list(self._items)
        new._pos = dict(self._pos)
        return new


class IndexedEdgeSet(IndexedSet):
    """Pool of canonical edges, e.g. the discordant edges of a state."""

    def remove(self, e) -> None:
        try:
            super().remove(e)
        except KeyError:
            raise NoSuchEdge(e) from None


def sample_uniform(edge_set: IndexedSet, rng):
    """Uniformly sampled element of edge_set; raises EmptySet if empty."""
    return edge_set.sample(rng)


class DynamicGraph:
    """Undirected graph on vertices 1..n supporting only edge deletion.

    Adjacency is one IndexedSet per vertex, so neighbor iteration order is
    deterministic given the construction and deletion history.
    """

    __slots__ = ("n", "_adj", "_n_edges")

    def __init__(self, n: int, edges=()):
        if n < 1:
            raise ValueError("need at least one vertex")
        self.n = n
        self._adj = [None] + [IndexedSet() for _ in range(n)]
        self._n_edges = 0
        for a, b in edges:
            self.add_edge(a, b)

    @property
    def edge_count(self) -> int:
        return self._n_edges

    def _check_vertex(self, x: int) -> None:
        if not 1 <= x <= self.n:
            raise ValueError("vertex %r outside 1..%d" % (x, self.n))

    def add_edge(self, a: int, b: int) -> None:
        """Insert an edge during construction; no-op if present."""
        a, b = edge_key(a, b)
        self._check_vertex(a)
        self._check_vertex(b)
        if b in self._adj[a]:
            return
        self._adj[a].add(b)
        self._adj[b].add(a)
        self._n_edges += 1

    def has_edge(self, a: int, b: int) -> bool:
        a, b = edge_key(a, b)
        if not (1 <= a <= self.n and 1 <= b <= self.n):
            return False
        return b in self._adj[a]

    def remove_edge(self, a: int, b: int) -> None:
        """Delete an edge; NoSuchEdge if absent."""
        a, b = edge_key(a, b)
        self._check_vertex(a)
        self._check_vertex(b)
        if b not in self._adj[a]:
            raise NoSuchEdge((a, b))
        self._adj[a].remove(b)
        self._adj[b].remove(a)
        self._n_edges -= 1

    def neighbors(self, x: int) -> IndexedSet:
        self._check_vertex(x)
        return self._adj[x]

    def degree(self, x: int) -> int:
        self._check_vertex(x)
        return len(self._adj[x])

    def min_degree(self) -> int:
        return min(len(self._adj[x]) for x in range(1, self.n + 1))

    def edges(self):
        """Yield each present edge once as a canonical (a, b) pair."""
        for a in range(1, self.n + 1):
            for b in self._adj[a]:
                if a < b:
                    yield (a, b)

    def connected_components(self) -> list:
        """Component sizes in descending order; they sum to n."""
        seen = bytearray(self.n + 1)
        sizes = []
        for start in range(1, self.n + 1):
            if seen[start]:
                continue
            seen[start] = 1
            stack = [start]
            size = 0
            while stack:
                v = stack.pop()
                size += 1
                for w in self._adj[v]:
                    if not seen[w]:
                        seen[w] = 1
                        stack.append(w)
            sizes.append(size)
        sizes.sort(reverse=True)
        return sizes

    def copy(self) -> "DynamicGraph":
        new = DynamicGraph.__new__(DynamicGraph)
        new.n = self.n
        new._adj = [None] + [self._adj[x].copy() for x in range(1, self.n + 1)]
        new._n_edges = self._n_edges
        return new


def remove_edge(g: DynamicGraph, e) -> None:
    g.remove_edge(*e)


def connected_components(g: DynamicGraph) -> list:
    return g.connected_components()


def min_degree(g: DynamicGraph) -> int:
    return g.min_degree()
