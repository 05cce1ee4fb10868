"""Small-scale ground-truth solvers.

Backtracking searches for edge- and vertex-disjoint paths, the linear-time
forest check, and the subset-sum oracle.  These are deliberately naive and
exist to certify the clever solvers on small instances; size caps keep
accidental blowups from hanging a test run.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .graphs import EDPInstance, MultiGraph, StructureError


class CapExceeded(RuntimeError):
    """Instance exceeds the configured brute-force size cap."""


@dataclass(frozen=True)
class OracleCaps:
    """Size limits for the brute-force searches; None disables a limit."""

    max_edges: int | None = 20
    max_vertices: int | None = 12


@dataclass(frozen=True)
class RoutedPath:
    """One witness path: vertex sequence and the edge ids it uses, in order."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]


@dataclass(frozen=True)
class SolveResult:
    feasible: bool
    routes: dict[int, RoutedPath] | None = None  # pair id -> path, when feasible

    def __bool__(self) -> bool:
        return self.feasible


def _ordered_pairs(inst: EDPInstance) -> list[int]:
    # deterministic runs: pairs by (min member, max member), then id
    return sorted(inst.sorted_pairs(), key=lambda pid: (min(inst.pair(pid)), max(inst.pair(pid)), pid))


def brute_force_edp(inst: EDPInstance, caps: OracleCaps | None = OracleCaps()) -> SolveResult:
    """Decide EDP by backtracking over simple paths on unused edges."""
    if caps is not None and caps.max_edges is not None and inst.graph.num_edges() > caps.max_edges:
        raise CapExceeded(f"{inst.graph.num_edges()} edges exceeds cap {caps.max_edges}")
    g = inst.graph
    order = _ordered_pairs(inst)
    used: set[int] = set()
    routes: dict[int, RoutedPath] = {}

    def paths_from(v: int, target: int, visited: set[int], verts: list[int], eids: list[int]):
        if v == target:
            yield RoutedPath(tuple(verts), tuple(eids))
            return
        for eid in g.incident(v):
            if eid in used or eid in eids:
                continue
            w = g.other_end(eid, v)
            if w in visited:
                continue
            visited.add(w)
            verts.append(w)
            eids.append(eid)
            yield from paths_from(w, target, visited, verts, eids)
            visited.remove(w)
            verts.pop()
            eids.pop()

    def place(i: int) -> bool:
        if i == len(order):
            return True
        pid = order[i]
        a, b = sorted(inst.pair(pid))
        for route in paths_from(a, b, {a}, [a], []):
            used.update(route.edges)
            routes[pid] = route
            if place(i + 1):
                return True
            used.difference_update(route.edges)
            del routes[pid]
        return False

    if place(0):
        return SolveResult(True, dict(routes))
    return SolveResult(False)


def brute_force_vdp(inst: EDPInstance, caps: OracleCaps | None = OracleCaps()) -> SolveResult:
    """Decide VDP: paths pairwise vertex-disjoint, endpoints included."""
    if caps is not None and caps.max_vertices is not None and inst.graph.num_vertices() > caps.max_vertices:
        raise CapExceeded(f"{inst.graph.num_vertices()} vertices exceeds cap {caps.max_vertices}")
    g = inst.graph
    order = _ordered_pairs(inst)
    taken: set[int] = set()
    routes: dict[int, RoutedPath] = {}

    def paths_from(v: int, target: int, visited: set[int], verts: list[int], eids: list[int]):
        if v == target:
            yield RoutedPath(tuple(verts), tuple(eids))
            return
        for eid in g.incident(v):
            w = g.other_end(eid, v)
            if w in visited or (w in taken and w != target):
                continue
            visited.add(w)
            verts.append(w)
            eids.append(eid)
            yield from paths_from(w, target, visited, verts, eids)
            visited.remove(w)
            verts.pop()
            eids.pop()

    def place(i: int) -> bool:
        if i == len(order):
            return True
        pid = order[i]
        a, b = sorted(inst.pair(pid))
        if a in taken or b in taken:
            return False
        for route in paths_from(a, b, {a}, [a], []):
            taken.update(route.vertices)
            routes[pid] = route
            if place(i + 1):
                return True
            taken.difference_update(route.vertices)
            del routes[pid]
        return False

    if place(0):
        return SolveResult(True, dict(routes))
    return SolveResult(False)


def _forest_route(g: MultiGraph, a: int, b: int) -> RoutedPath | None:
    """Unique a-b path in a forest, or None when a,b sit in different trees."""
    prev: dict[int, tuple[int, int]] = {}
    stack = [a]
    seen = {a}
    while stack:
        x = stack.pop()
        if x == b:
            break
        for eid in g.incident(x):
            y = g.other_end(eid, x)
            if y not in seen:
                seen.add(y)
                prev[y] = (x, eid)
                stack.append(y)
    if b not in seen:
        return None
    verts = [b]
    eids = []
    while verts[-1] != a:
        x, eid = prev[verts[-1]]
        verts.append(x)
        eids.append(eid)
    return RoutedPath(tuple(reversed(verts)), tuple(reversed(eids)))


def tree_edp_feasible(g: MultiGraph, pairs: dict[int, frozenset[int]]) -> bool:
    """EDP on a forest: route every pair along its unique tree path and check
    no edge carries two paths.  Raises on cyclic input."""
    return tree_edp_routes(g, pairs) is not None


def tree_edp_routes(g: MultiGraph, pairs: dict[int, frozenset[int]]) -> dict[int, RoutedPath] | None:
    if not g.is_forest():
        raise StructureError("graph has a cycle; forest required")
    load: set[int] = set()
    routes: dict[int, RoutedPath] = {}
    for pid in sorted(pairs):
        a, b = sorted(pairs[pid])
        route = _forest_route(g, a, b)
        if route is None:
            return None
        if load & set(route.edges):
            return None
        load.update(route.edges)
        routes[pid] = route
    return routes


def brute_force_mss(k: int, items: Sequence[Sequence[int]], target: Sequence[int], min_count: int) -> bool:
    """Is there a subset of >= min_count item vectors with componentwise sum
    <= target?

    Entries are non-negative, so shrinking a feasible subset keeps it
    feasible; checking subsets of size exactly min_count suffices.
    """
    if len(items) > 20:
        raise CapExceeded(f"{len(items)} items exceeds cap 20")
    if len(target) != k or any(len(s) != k for s in items):
        raise ValueError("vector dimension mismatch")
    if any(x < 0 for s in items for x in s) or any(x < 0 for x in target):
        raise ValueError("entries must be non-negative")
    if min_count <= 0:
        return True
    if min_count > len(items):
        return False
    for chosen in combinations(items, min_count):
        if all(sum(s[i] for s in chosen) <= target[i] for i in range(k)):
            return True
    return False


def check_witness(inst: EDPInstance, routes: dict[int, RoutedPath], vertex_disjoint: bool = False) -> None:
    """Validate a witness: every pair routed, consecutive edges real, no edge
    (or vertex, for VDP) reused.  Raises ValueError on any violation."""
    if set(routes) != set(inst.pairs):
        raise ValueError("witness does not cover the pair set exactly")
    seen_edges: set[int] = set()
    seen_vertices: set[int] = set()
    for pid in inst.sorted_pairs():
        route = routes[pid]
        if frozenset((route.vertices[0], route.vertices[-1])) != inst.pair(pid):
            raise ValueError(f"pair {pid} endpoints mismatch")
        if len(route.edges) != len(route.vertices) - 1:
            raise ValueError(f"pair {pid} malformed route")
        if len(set(route.vertices)) != len(route.vertices):
            raise ValueError(f"pair {pid} revisits a vertex")
        for i, eid in enumerate(route.edges):
            if not inst.graph.has_edge(eid):
                raise ValueError(f"pair {pid} uses unknown edge {eid}")
            want = frozenset(route.vertices[i : i + 2])
            if frozenset(inst.graph.endpoints(eid)) != want:
                raise ValueError(f"pair {pid} edge {eid} does not match its step")
            if eid in seen_edges:
                raise ValueError(f"edge {eid} used by two paths")
            seen_edges.add(eid)
        if vertex_disjoint:
            if seen_vertices & set(route.vertices):
                raise ValueError(f"pair {pid} shares a vertex with another path")
            seen_vertices.update(route.vertices)
