"""Shared test helpers: witness-to-record correspondence and small random
instance builders used across suites."""

from __future__ import annotations

import random

from edpsolve.decomposition import TreecutDecomposition, node_views
from edpsolve.graphs import EDPInstance, MultiGraph
from edpsolve.oracle import RoutedPath
from edpsolve.treecut_dp import FOREIGN, INTERNAL, LEAVING, UNUSED, Record


def correspondence(
    inst: EDPInstance,
    dec: TreecutDecomposition,
    node: int,
    routes: dict[int, RoutedPath],
) -> Record:
    """The unique record a concrete solution induces at a node: crossing
    edges are read off each path in order and paired up per the path's
    relation to the subtree."""
    views = node_views(inst, dec, node)
    sub = views.subtree
    cut = set(views.cut)
    classes: dict[int, str] = {}
    internal: list[tuple[int, int]] = []
    foreign: list[tuple[int, int]] = []
    leaving: list[tuple[int, int]] = []
    for pid in sorted(routes):
        route = routes[pid]
        crossings = [e for e in route.edges if e in cut]
        if not crossings:
            continue
        first, last = route.vertices[0], route.vertices[-1]
        if first in sub and last in sub:
            assert len(crossings) % 2 == 0
            for i in range(0, len(crossings), 2):
                internal.append(tuple(sorted(crossings[i : i + 2])))
            for e in crossings:
                classes[e] = INTERNAL
        elif first not in sub and last not in sub:
            assert len(crossings) % 2 == 0
            for i in range(0, len(crossings), 2):
                foreign.append(tuple(sorted(crossings[i : i + 2])))
            for e in crossings:
                classes[e] = FOREIGN
        else:
            if first not in sub:
                crossings.reverse()
            assert len(crossings) % 2 == 1
            leaving.append((pid, crossings[0]))
            classes[crossings[0]] = LEAVING
            for i in range(1, len(crossings), 2):
                foreign.append(tuple(sorted(crossings[i : i + 2])))
                classes[crossings[i]] = FOREIGN
                classes[crossings[i + 1]] = FOREIGN
    delta = tuple((e, classes.get(e, UNUSED)) for e in views.cut)
    return Record(delta, tuple(sorted(internal)), tuple(sorted(foreign)), tuple(sorted(leaving)))


def random_small_instance(seed: int, max_n: int = 8, max_extra: int = 3, max_pairs: int = 4) -> EDPInstance:
    """Connected random multigraph instance, sized for the brute force."""
    rng = random.Random(seed)
    n = rng.randint(2, max_n)
    g = MultiGraph(range(1, n + 1))
    for v in range(2, n + 1):
        g.add_edge(rng.randrange(1, v), v)
    for _ in range(rng.randint(0, max_extra)):
        u, v = rng.sample(range(1, n + 1), 2)
        g.add_edge(u, v)
    inst = EDPInstance(g)
    seen = set()
    for _ in range(rng.randint(0, max_pairs)):
        a, b = rng.sample(range(1, n + 1), 2)
        if frozenset((a, b)) not in seen:
            seen.add(frozenset((a, b)))
            inst.add_pair(a, b)
    return inst


def random_simple_split(seed: int, max_hub: int = 4, max_sat: int = 6, max_pairs: int = 6, max_mult: int = 3):
    """Random hub/satellite instance within the pinned acceptance bounds:
    hub <= 4, satellites <= 6, pairs <= 6, hub-edge multiplicities <= 3."""
    rng = random.Random(seed)
    k = rng.randint(1, max_hub)
    hub = list(range(1, k + 1))
    sats = list(range(k + 1, k + 1 + rng.randint(0, max_sat)))
    g = MultiGraph(hub + sats)
    for i in range(len(hub)):
        for j in range(i + 1, len(hub)):
            if rng.random() < 0.6:
                for _ in range(rng.randint(1, max_mult)):
                    g.add_edge(hub[i], hub[j])
    for v in sats:
        for _ in range(rng.randint(0, 2)):
            g.add_edge(v, rng.choice(hub))
    inst = EDPInstance(g)
    seen = set()
    for _ in range(rng.randint(0, max_pairs)):
        if len(hub) + len(sats) < 2:
            break
        a, b = rng.sample(hub + sats, 2)
        if frozenset((a, b)) not in seen:
            seen.add(frozenset((a, b)))
            inst.add_pair(a, b)
    return inst, hub


def reference_graph() -> EDPInstance:
    """7 vertices, 9 edges, feedback edge set number 3; the pinned width-3
    regression graph."""
    g = MultiGraph(range(1, 8))
    for u, v in [(1, 2), (1, 4), (2, 4), (2, 3), (3, 4), (4, 5), (5, 6), (6, 4), (4, 7)]:
        g.add_edge(u, v)
    return EDPInstance(g)


def reference_decomposition() -> TreecutDecomposition:
    """The pinned decomposition for reference_graph: bags {4},{1},{2,3},{5},
    {6},{7} with {4} on top, plus a spliced empty root."""
    return TreecutDecomposition(
        parent={1: None, 2: 1, 3: 2, 4: 1, 5: 1, 6: 1},
        bags={1: {4}, 2: {1}, 3: {2, 3}, 4: {5}, 5: {6}, 6: {7}},
    ).ensure_empty_root()
