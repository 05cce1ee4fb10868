"""Multigraph and instance model for edge-disjoint path problems.

Vertices are positive integers.  Parallel edges are first-class: every edge
carries an integer edge id, and two edges between the same endpoints stay
distinguishable.  Self-loops are rejected everywhere.

Public operations never mutate their arguments; anything that rewrites a
graph or an instance works on a copy, so values can be shared freely
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping


class ParseError(ValueError):
    """Malformed instance or decomposition text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StructureError(ValueError):
    """An operation's structural precondition does not hold."""


class MultiGraph:
    """Undirected multigraph with stable integer vertex and edge ids."""

    __slots__ = ("_vertices", "_edges", "_incidence")

    def __init__(self, vertices: Iterable[int] = (), edges: Mapping[int, tuple[int, int]] | None = None):
        self._vertices: set[int] = set()
        self._edges: dict[int, tuple[int, int]] = {}
        self._incidence: dict[int, list[int]] = {}
        for v in vertices:
            self.add_vertex(v)
        if edges:
            for eid in sorted(edges):
                u, v = edges[eid]
                self.add_edge(u, v, eid)

    # -- construction ------------------------------------------------

    def add_vertex(self, v: int) -> int:
        if v <= 0:
            raise StructureError(f"vertex ids must be positive, got {v}")
        if v not in self._vertices:
            self._vertices.add(v)
            self._incidence[v] = []
        return v

    def fresh_vertex(self) -> int:
        v = max(self._vertices, default=0) + 1
        return self.add_vertex(v)

    def add_edge(self, u: int, v: int, eid: int | None = None) -> int:
        if u == v:
            raise StructureError(f"self-loop on vertex {u}")
        if u not in self._vertices or v not in self._vertices:
            raise StructureError(f"edge {{{u},{v}}} references unknown vertex")
        if eid is None:
            eid = max(self._edges, default=0) + 1
        elif eid in self._edges:
            raise StructureError(f"duplicate edge id {eid}")
        self._edges[eid] = (u, v) if u < v else (v, u)
        self._incidence[u].append(eid)
        self._incidence[v].append(eid)
        return eid

    def remove_edge(self, eid: int) -> None:
        u, v = self._edges.pop(eid)
        self._incidence[u].remove(eid)
        self._incidence[v].remove(eid)

    def remove_vertex(self, v: int) -> None:
        for eid in list(self._incidence[v]):
            self.remove_edge(eid)
        self._vertices.remove(v)
        del self._incidence[v]

    def copy(self) -> "MultiGraph":
        g = MultiGraph()
        g._vertices = set(self._vertices)
        g._edges = dict(self._edges)
        g._incidence = {v: list(inc) for v, inc in self._incidence.items()}
        return g

    # -- queries -----------------------------------------------------

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self._vertices)

    @property
    def edges(self) -> Mapping[int, tuple[int, int]]:
        return dict(self._edges)

    def num_vertices(self) -> int:
        return len(self._vertices)

    def num_edges(self) -> int:
        return len(self._edges)

    def has_vertex(self, v: int) -> bool:
        return v in self._vertices

    def has_edge(self, eid: int) -> bool:
        return eid in self._edges

    def endpoints(self, eid: int) -> tuple[int, int]:
        return self._edges[eid]

    def other_end(self, eid: int, v: int) -> int:
        u, w = self._edges[eid]
        if v == u:
            return w
        if v == w:
            return u
        raise StructureError(f"vertex {v} is not an endpoint of edge {eid}")

    def incident(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(self._incidence[v]))

    def degree(self, v: int) -> int:
        return len(self._incidence[v])

    def neighbors(self, v: int) -> frozenset[int]:
        return frozenset(self.other_end(e, v) for e in self._incidence[v])

    def edges_between(self, u: int, v: int) -> tuple[int, ...]:
        key = (u, v) if u < v else (v, u)
        return tuple(e for e in self.incident(u) if self._edges[e] == key)

    def sorted_vertices(self) -> list[int]:
        return sorted(self._vertices)

    def sorted_edges(self) -> list[int]:
        return sorted(self._edges)

    def induced(self, keep: Iterable[int]) -> "MultiGraph":
        """Subgraph induced on `keep`, preserving vertex and edge ids."""
        keep = set(keep)
        g = MultiGraph(sorted(keep & self._vertices))
        for eid in self.sorted_edges():
            u, v = self._edges[eid]
            if u in keep and v in keep:
                g.add_edge(u, v, eid)
        return g

    def connected_components(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        comps = []
        for start in self.sorted_vertices():
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for eid in self._incidence[x]:
                    y = self.other_end(eid, x)
                    if y not in comp:
                        comp.add(y)
                        stack.append(y)
            seen |= comp
            comps.append(frozenset(comp))
        return comps

    def is_forest(self) -> bool:
        # parallel edges count as cycles, so compare edge and vertex counts
        return all(
            sum(1 for e in self._edges.values() if e[0] in comp) == len(comp) - 1
            for comp in self.connected_components()
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __repr__(self) -> str:
        return f"MultiGraph(|V|={len(self._vertices)}, |E|={len(self._edges)})"


class EDPInstance:
    """A multigraph plus terminal pairs; the object every solver consumes.

    Pairs carry their own ids so that reductions may create two pairs with
    equal content without collapsing them.
    """

    __slots__ = ("graph", "_pairs")

    def __init__(self, graph: MultiGraph | None = None, pairs: Mapping[int, frozenset[int]] | None = None):
        self.graph = graph if graph is not None else MultiGraph()
        self._pairs: dict[int, frozenset[int]] = {}
        if pairs:
            for pid in sorted(pairs):
                a, b = sorted(pairs[pid])
                self.add_pair(a, b, pid)

    @property
    def pairs(self) -> Mapping[int, frozenset[int]]:
        return dict(self._pairs)

    def add_pair(self, a: int, b: int, pid: int | None = None) -> int:
        if a == b:
            raise StructureError(f"self-pair {{{a},{a}}}")
        if not (self.graph.has_vertex(a) and self.graph.has_vertex(b)):
            raise StructureError(f"pair {{{a},{b}}} references unknown vertex")
        if pid is None:
            pid = max(self._pairs, default=0) + 1
        elif pid in self._pairs:
            raise StructureError(f"duplicate pair id {pid}")
        self._pairs[pid] = frozenset((a, b))
        return pid

    def remove_pair(self, pid: int) -> None:
        del self._pairs[pid]

    def pair(self, pid: int) -> frozenset[int]:
        return self._pairs[pid]

    def sorted_pairs(self) -> list[int]:
        return sorted(self._pairs)

    def pairs_at(self, v: int) -> tuple[int, ...]:
        return tuple(pid for pid in self.sorted_pairs() if v in self._pairs[pid])

    def terminals(self) -> frozenset[int]:
        out: set[int] = set()
        for members in self._pairs.values():
            out |= members
        return frozenset(out)

    def copy(self) -> "EDPInstance":
        inst = EDPInstance(self.graph.copy())
        inst._pairs = dict(self._pairs)
        return inst

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EDPInstance):
            return NotImplemented
        return self.graph == other.graph and self._pairs == other._pairs

    def __repr__(self) -> str:
        return f"EDPInstance(|V|={self.graph.num_vertices()}, |E|={self.graph.num_edges()}, |P|={len(self._pairs)})"


@dataclass(frozen=True)
class TerminalGraph:
    """The pair set viewed as a graph on the instance's vertices."""

    vertices: frozenset[int]
    edges: Mapping[int, frozenset[int]]  # pair id -> endpoints

    def pair_degree(self, v: int) -> int:
        return sum(1 for members in self.edges.values() if v in members)

    def incident_pairs(self, v: int) -> tuple[int, ...]:
        return tuple(pid for pid in sorted(self.edges) if v in self.edges[pid])


# -- text format ----------------------------------------------------------
#
# Instance format (line oriented, '#' comments):
#   p edp <n> <m> <q>
#   e <u> <v>        (m lines, edge ids 1..m in file order)
#   t <a> <b>        (q lines, pair ids 1..q in file order)


def parse_instance(text: str | bytes) -> EDPInstance:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    n = m = q = None
    edges_seen = 0
    pairs_seen = 0
    inst: EDPInstance | None = None
    seen_pair_contents: set[frozenset[int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "p":
            if inst is not None:
                raise ParseError("duplicate header", lineno)
            if len(fields) != 5 or fields[1] != "edp":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                n, m, q = (int(x) for x in fields[2:5])
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if n < 0 or m < 0 or q < 0:
                raise ParseError(f"malformed header {line!r}", lineno)
            inst = EDPInstance(MultiGraph(range(1, n + 1)))
        elif fields[0] == "e":
            if inst is None:
                raise ParseError("edge before header", lineno)
            if len(fields) != 3:
                raise ParseError(f"malformed edge line {line!r}", lineno)
            u, v = int(fields[1]), int(fields[2])
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(f"vertex id out of range in {line!r}", lineno)
            if u == v:
                raise ParseError(f"self-loop edge {{{u},{v}}}", lineno)
            edges_seen += 1
            if edges_seen > m:
                raise ParseError("more edge lines than declared", lineno)
            inst.graph.add_edge(u, v, edges_seen)
        elif fields[0] == "t":
            if inst is None:
                raise ParseError("pair before header", lineno)
            if len(fields) != 3:
                raise ParseError(f"malformed pair line {line!r}", lineno)
            a, b = int(fields[1]), int(fields[2])
            if not (1 <= a <= n and 1 <= b <= n):
                raise ParseError(f"vertex id out of range in {line!r}", lineno)
            if a == b:
                raise ParseError(f"self-pair {{{a},{a}}}", lineno)
            content = frozenset((a, b))
            if content in seen_pair_contents:
                raise ParseError(f"duplicated pair {{{min(content)},{max(content)}}}", lineno)
            seen_pair_contents.add(content)
            pairs_seen += 1
            if pairs_seen > q:
                raise ParseError("more pair lines than declared", lineno)
            inst.add_pair(a, b, pairs_seen)
        else:
            raise ParseError(f"unknown line {line!r}", lineno)
    if inst is None:
        raise ParseError("missing header")
    if edges_seen != m:
        raise ParseError(f"declared {m} edges, found {edges_seen}")
    if pairs_seen != q:
        raise ParseError(f"declared {q} pairs, found {pairs_seen}")
    return inst


def serialize_instance(inst: EDPInstance) -> str:
    """Inverse of parse_instance on instances with contiguous vertex ids 1..n.

    Instances with id gaps serialize with n = max id; the gap ids reappear
    as isolated vertices on reparse (see relabel_compact for exact output).
    """
    n = max(inst.graph.vertices, default=0)
    lines = [f"p edp {n} {inst.graph.num_edges()} {len(inst.pairs)}"]
    for eid in inst.graph.sorted_edges():
        u, v = inst.graph.endpoints(eid)
        lines.append(f"e {u} {v}")
    for pid in inst.sorted_pairs():
        a, b = sorted(inst.pair(pid))
        lines.append(f"t {a} {b}")
    return "\n".join(lines) + "\n"


def relabel_compact(inst: EDPInstance) -> tuple[EDPInstance, dict[int, int]]:
    """Relabel vertices to 1..n (and edges/pairs to file order); returns the
    old->new vertex mapping."""
    mapping = {v: i for i, v in enumerate(inst.graph.sorted_vertices(), start=1)}
    g = MultiGraph(range(1, len(mapping) + 1))
    for i, eid in enumerate(inst.graph.sorted_edges(), start=1):
        u, v = inst.graph.endpoints(eid)
        g.add_edge(mapping[u], mapping[v], i)
    out = EDPInstance(g)
    for i, pid in enumerate(inst.sorted_pairs(), start=1):
        a, b = sorted(inst.pair(pid))
        out.add_pair(mapping[a], mapping[b], i)
    return out, mapping


# -- derived structures ----------------------------------------------------


def feedback_edge_set(g: MultiGraph) -> frozenset[int]:
    """Non-tree edges of a spanning forest built in edge-id order.

    The result is a minimum feedback edge set: |X| = |E| - |V| + #components,
    and every parallel copy beyond the first between two endpoints lands in X.
    """
    parent: dict[int, int] = {v: v for v in g.vertices}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    extra = set()
    for eid in g.sorted_edges():
        u, v = g.endpoints(eid)
        ru, rv = find(u), find(v)
        if ru == rv:
            extra.add(eid)
        else:
            parent[ru] = rv
    return frozenset(extra)


def terminal_normalize(inst: EDPInstance) -> EDPInstance:
    """Attach a fresh leaf per terminal occurrence and move the pair onto the
    leaves.

    Afterwards every vertex occurs in at most one pair, terminals have degree
    one, and the two members of a pair are non-adjacent.  Leaves are added
    even for terminals that already look normalized; the answer is unchanged
    either way.
    """
    out = inst.copy()
    for pid in inst.sorted_pairs():
        a, b = sorted(inst.pair(pid))
        la = out.graph.fresh_vertex()
        out.graph.add_edge(a, la)
        lb = out.graph.fresh_vertex()
        out.graph.add_edge(b, lb)
        out.remove_pair(pid)
        out.add_pair(la, lb, pid)
    return out


def terminal_graph(inst: EDPInstance) -> TerminalGraph:
    return TerminalGraph(inst.graph.vertices, dict(inst.pairs))


def restrict_pairs(inst: EDPInstance, subset: Iterable[int]) -> dict[int, frozenset[int]]:
    """Pairs of the instance whose both members lie in `subset`."""
    keep = set(subset)
    unknown = keep - inst.graph.vertices
    if unknown:
        raise StructureError(f"subset contains non-vertices {sorted(unknown)}")
    return {pid: members for pid, members in inst.pairs.items() if members <= keep}


def induced_instance(inst: EDPInstance, subset: Iterable[int]) -> EDPInstance:
    """Instance induced on a vertex subset: induced subgraph plus the pairs
    fully inside, all ids preserved."""
    keep = set(subset)
    out = EDPInstance(inst.graph.induced(keep))
    for pid, members in sorted(restrict_pairs(inst, keep).items()):
        a, b = sorted(members)
        out.add_pair(a, b, pid)
    return out
