"""The IAC graph: precoding vectors as vertices, alignment equations as edges.

Vertices are the streams of MACs ``2..K``; every alignment equation formed
at receiver ``k`` becomes one edge labelled ``k``.  Parallel edges are
legal.  A plan is solvable exactly when every connected component holds at
most one cycle (a pseudoforest).
"""

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .exceptions import MoreThanOneLoopError, UnknownVertexError

__all__ = [
    "Edge",
    "OrientedEdge",
    "IacGraph",
    "ComponentSummary",
    "Traversal",
    "PseudoforestState",
    "build_graph",
    "components",
    "check_proposition1",
    "traversal_order",
    "to_dot",
]


class Edge(NamedTuple):
    u: tuple
    v: tuple
    label: int


class OrientedEdge(NamedTuple):
    """An edge walked from ``src`` to ``dst``; ``index`` points into ``graph.edges``."""

    src: tuple
    dst: tuple
    label: int
    index: int


@dataclass(frozen=True)
class IacGraph:
    vertices: tuple
    edges: tuple

    def adjacency(self):
        adj = {v: [] for v in self.vertices}
        for i, (u, v, label) in enumerate(self.edges):
            adj[u].append((v, label, i))
            adj[v].append((u, label, i))
        for nbrs in adj.values():
            nbrs.sort()
        return adj


@dataclass(frozen=True)
class ComponentSummary:
    index: int
    vertices: tuple
    edge_indices: tuple

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edge_indices)

    @property
    def cycles(self):
        return self.n_edges - self.n_vertices + 1


def build_graph(config, plan):
    """One vertex per stream of MACs ``2..K`` and one labelled edge per pairing."""
    from .planner import streams

    vertices = tuple(s for s in streams(config) if s.mac >= 2)
    edges = []
    for rp in plan.receivers:
        for aligned, onto in rp.pairings:
            edges.append(Edge(aligned.source, onto.source, rp.receiver))
    return IacGraph(vertices, tuple(edges))


def components(graph):
    """Connected components with vertex/edge counts, in order of their smallest vertex."""
    adj = graph.adjacency()
    seen = set()
    out = []
    for root in sorted(graph.vertices):
        if root in seen:
            continue
        seen.add(root)
        verts, eidx = [root], set()
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y, _, i in adj[x]:
                eidx.add(i)
                if y not in seen:
                    seen.add(y)
                    verts.append(y)
                    queue.append(y)
        out.append(ComponentSummary(len(out), tuple(sorted(verts)), tuple(sorted(eidx))))
    return out


def check_proposition1(graph):
    """True iff every connected component contains at most one cycle."""
    return all(c.cycles <= 1 for c in components(graph))


class PseudoforestState:
    """Incremental pseudoforest over a fixed vertex set.

    Union-find (union by size, no path compression) with one has-cycle flag
    per component.  Every mutation is journalled so the planner can roll
    back to an earlier :meth:`mark`.
    """

    def __init__(self, vertices):
        self._parent = {v: v for v in vertices}
        self._size = {v: 1 for v in vertices}
        self._cyclic = {v: False for v in vertices}
        self._journal = []

    def find(self, x):
        if x not in self._parent:
            raise UnknownVertexError(x)
        while self._parent[x] != x:
            x = self._parent[x]
        return x

    def is_cyclic(self, x):
        return self._cyclic[self.find(x)]

    def component_size(self, x):
        return self._size[self.find(x)]

    def probe(self, u, v):
        """Classify adding edge ``u-v`` without applying it.

        Returns one of ``"merge-trees"``, ``"merge-into-cycle"``,
        ``"close-cycle"`` or ``None`` when the edge would break the pseudoforest.
        """
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return None if self._cyclic[ru] else "close-cycle"
        cu, cv = self._cyclic[ru], self._cyclic[rv]
        if cu and cv:
            return None
        return "merge-into-cycle" if (cu or cv) else "merge-trees"

    def try_add_edge(self, u, v, label=None):
        """Add edge ``u-v`` if the graph stays a pseudoforest; return whether it was added."""
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            if self._cyclic[ru]:
                return False
            self._journal.append(("flag", ru))
            self._cyclic[ru] = True
            return True
        if self._cyclic[ru] and self._cyclic[rv]:
            return False
        if self._size[ru] < self._size[rv]:
            ru, rv = rv, ru
        self._journal.append(("union", ru, rv, self._cyclic[ru]))
        self._parent[rv] = ru
        self._size[ru] += self._size[rv]
        self._cyclic[ru] = self._cyclic[ru] or self._cyclic[rv]
        return True

    def mark(self):
        return len(self._journal)

    def rollback(self, mark):
        while len(self._journal) > mark:
            entry = self._journal.pop()
            if entry[0] == "flag":
                self._cyclic[entry[1]] = False
            else:
                _, ru, rv, was_cyclic = entry
                self._parent[rv] = rv
                self._size[ru] -= self._size[rv]
                self._cyclic[ru] = was_cyclic


@dataclass(frozen=True)
class Traversal:
    """Solve order for one component.

    ``cycle`` is empty for trees.  For a unicyclic component ``seed`` is
    ``cycle[0].src`` and walking ``cycle`` returns to it; ``tree`` lists the
    remaining edges parent-to-child, breadth-first from the cycle (or seed).
    """

    seed: tuple
    cycle: tuple
    tree: tuple


def _cycle_edges(comp, adj):
    """Edge indices on the unique cycle, found by repeatedly stripping leaves."""
    degree = {v: len(adj[v]) for v in comp.vertices}
    alive_edges = set(comp.edge_indices)
    leaves = deque(sorted(v for v, d in degree.items() if d == 1))
    removed = set()
    while leaves:
        x = leaves.popleft()
        if x in removed:
            continue
        removed.add(x)
        for y, _, i in adj[x]:
            if i in alive_edges:
                alive_edges.discard(i)
                degree[y] -= 1
                if degree[y] == 1:
                    leaves.append(y)
    return alive_edges


def traversal_order(component, graph):
    """Deterministic solve order for a component with at most one cycle.

    Neighbours are visited in lexicographic ``(vertex, label, edge)`` order.
    The cycle walk starts at its lexicographically smallest vertex; a tree
    is seeded at its highest-degree vertex (smallest id on ties).
    """
    if component.cycles > 1:
        raise MoreThanOneLoopError(
            f"component {component.index} has {component.cycles} independent cycles"
        )
    adj = graph.adjacency()
    cycle = []
    if component.cycles == 1:
        on_cycle = _cycle_edges(component, adj)
        cyc_vertices = sorted({x for i in on_cycle for x in graph.edges[i][:2]})
        start = cyc_vertices[0]
        used = set()
        x = start
        while True:
            y, label, i = next((y, l, i) for y, l, i in adj[x] if i in on_cycle and i not in used)
            used.add(i)
            cycle.append(OrientedEdge(x, y, label, i))
            x = y
            if x == start:
                break
        seed = start
        roots = cyc_vertices
        tree_edges_used = set(on_cycle)
    else:
        seed = min(component.vertices, key=lambda v: (-len(adj[v]), v))
        roots = [seed]
        tree_edges_used = set()
    tree = []
    visited = set(roots)
    queue = deque(roots)
    while queue:
        x = queue.popleft()
        for y, label, i in adj[x]:
            if i in tree_edges_used or y in visited:
                continue
            tree_edges_used.add(i)
            visited.add(y)
            tree.append(OrientedEdge(x, y, label, i))
            queue.append(y)
    return Traversal(seed, tuple(cycle), tuple(tree))


def _vlabel(v):
    return ".".join(str(x) for x in v)


def to_dot(graph, name="iac"):
    """Graphviz DOT text; vertices are ``mac.user.stream``, edge labels the receiver."""
    lines = [f"graph {name} {{"]
    for v in graph.vertices:
        lines.append(f'  "{_vlabel(v)}";')
    for u, v, label in graph.edges:
        lines.append(f'  "{_vlabel(u)}" -- "{_vlabel(v)}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

