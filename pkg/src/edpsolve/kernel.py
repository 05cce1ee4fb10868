"""Kernelization for EDP parameterized by the feedback edge set size.

The input is terminal-normalized, split into connected components, and each
component is shrunk by four reduction rules until none fires: bare leaves
are dropped, degree-two vertices without a bypass edge are suppressed (the
feedback edge set is maintained through the suppression), pendant subtrees
hanging by a single edge are resolved with the forest solver, and matched
leaf twins sharing a neighbor are removed.  At the fixpoint a component is
rejected when some vertex carries more pendant terminals than it has edges
toward non-leaves; that local capacity argument is the sound core of the
leaf-counting rejection, which in its blanket form misfires on cycles
carrying pendant terminal pairs (see ComponentReport.forest_leaves for the
counted value).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .graphs import EDPInstance, MultiGraph, feedback_edge_set, terminal_normalize
from .oracle import tree_edp_feasible


@dataclass(frozen=True)
class KernelState:
    """One component mid-reduction: the instance, its maintained feedback
    edge set, and an answer once a rule settles the component."""

    inst: EDPInstance
    fes_edges: frozenset[int]
    answer: str | None = None  # "YES" | "NO" | None while open

    @property
    def anchors(self) -> frozenset[int]:
        """Endpoints of the feedback edge set."""
        out: set[int] = set()
        for eid in self.fes_edges:
            out.update(self.inst.graph.endpoints(eid))
        return frozenset(out)

    def forest_part(self) -> MultiGraph:
        g = self.inst.graph
        return MultiGraph(g.vertices, {e: g.endpoints(e) for e in g.edges if e not in self.fes_edges})


def prune_leaf_vertices(state: KernelState, once: bool = False) -> KernelState:
    """Drop non-terminal vertices with at most one distinct neighbor,
    exhaustively; no path can use them."""
    inst = state.inst.copy()
    fes = set(state.fes_edges)
    changed = True
    fired = False
    while changed:
        changed = False
        for v in inst.graph.sorted_vertices():
            if inst.pairs_at(v) or len(inst.graph.neighbors(v)) > 1:
                continue
            fes.difference_update(inst.graph.incident(v))
            inst.graph.remove_vertex(v)
            changed = fired = True
            if once:
                changed = False
            break
    if not fired:
        return state
    return replace(state, inst=inst, fes_edges=frozenset(fes))


def suppress_degree_two(state: KernelState, once: bool = False) -> KernelState:
    """Replace a non-terminal degree-2 vertex with two distinct neighbors by
    a direct edge, provided no bypass edge exists; a suppressed feedback edge
    hands its membership to the replacement edge."""
    inst = state.inst.copy()
    fes = set(state.fes_edges)
    changed = True
    fired = False
    while changed:
        changed = False
        for v in inst.graph.sorted_vertices():
            g = inst.graph
            if inst.pairs_at(v) or g.degree(v) != 2:
                continue
            e1, e2 = g.incident(v)
            a, b = g.other_end(e1, v), g.other_end(e2, v)
            if a == b or g.edges_between(a, b):
                continue
            was_fes = e1 in fes or e2 in fes
            fes.discard(e1)
            fes.discard(e2)
            g.remove_vertex(v)
            new_edge = g.add_edge(a, b)
            if was_fes:
                fes.add(new_edge)
            changed = fired = True
            if once:
                changed = False
            break
    if not fired:
        return state
    return replace(state, inst=inst, fes_edges=frozenset(fes))


def prune_pendant_subtrees(state: KernelState, once: bool = False) -> KernelState:
    """Resolve components of G minus the feedback-edge endpoints that hang by
    a single edge.

    Such a piece is a tree: if its own pairs route, drop it; if exactly one
    terminal needs the outside and the tree routes with that terminal walked
    to the exit, reattach the terminal directly; otherwise the whole instance
    is a NO-instance.
    """
    state = _run_pendant(state, once)
    return state


def _run_pendant(state: KernelState, once: bool) -> KernelState:
    inst = state.inst.copy()
    fes = frozenset(state.fes_edges)
    fired = False
    while True:
        g = inst.graph
        anchors = set()
        for eid in fes:
            anchors.update(g.endpoints(eid))
        action = None
        for comp in g.induced(g.vertices - frozenset(anchors)).connected_components():
            boundary = [
                eid
                for eid in g.sorted_edges()
                if len(set(g.endpoints(eid)) & comp) == 1
            ]
            if len(boundary) != 1:
                continue
            bridge = boundary[0]
            ends = g.endpoints(bridge)
            local = next(iter(set(ends) & comp))
            outside = next(iter(set(ends) - comp))
            inner_pairs = {}
            unmatched = []
            for pid in inst.sorted_pairs():
                members = inst.pair(pid)
                got = members & comp
                if len(got) == 2:
                    inner_pairs[pid] = members
                elif len(got) == 1:
                    unmatched.append((pid, next(iter(got))))
            sub = g.induced(comp)
            if len(unmatched) == 0:
                if tree_edp_feasible(sub, inner_pairs):
                    action = ("drop", comp, inner_pairs, None, None, None)
                else:
                    action = ("no",)
            elif len(unmatched) == 1:
                pid, s = unmatched[0]
                trial = dict(inner_pairs)
                if s != local:
                    trial[max(list(inst.pairs) + [0]) + 1] = frozenset((s, local))
                if tree_edp_feasible(sub, trial):
                    if comp == {s}:
                        continue  # already a bare reattached terminal; nothing to shrink
                    action = ("reattach", comp, inner_pairs, pid, s, outside)
                else:
                    action = ("no",)
            else:
                action = ("no",)
            if action:
                break
        if action is None:
            break
        fired = True
        if action[0] == "no":
            return replace(state, inst=inst, fes_edges=fes, answer="NO")
        _, comp, inner_pairs, pid, s, outside = action
        for dead in inner_pairs:
            inst.remove_pair(dead)
        if action[0] == "drop":
            for v in sorted(comp):
                inst.graph.remove_vertex(v)
        else:
            partner = next(iter(inst.pair(pid) - {s}))
            inst.remove_pair(pid)
            for v in sorted(comp):
                inst.graph.remove_vertex(v)
            inst.graph.add_vertex(s)
            inst.graph.add_edge(outside, s)
            inst.add_pair(s, partner, pid)
        if once:
            break
    if not fired:
        return state
    return replace(state, inst=inst, fes_edges=fes)


def remove_matched_leaf_pairs(state: KernelState, once: bool = False) -> KernelState:
    """Delete a terminal pair of two leaves hanging off the same vertex; the
    two pendant edges route it and help nothing else."""
    inst = state.inst.copy()
    changed = True
    fired = False
    fes = set(state.fes_edges)
    while changed:
        changed = False
        for pid in inst.sorted_pairs():
            a, b = sorted(inst.pair(pid))
            g = inst.graph
            if g.degree(a) != 1 or g.degree(b) != 1:
                continue
            if g.neighbors(a) != g.neighbors(b):
                continue
            fes.difference_update(g.incident(a) + g.incident(b))
            inst.remove_pair(pid)
            g.remove_vertex(a)
            g.remove_vertex(b)
            changed = fired = True
            if once:
                changed = False
            break
    if not fired:
        return state
    return replace(state, inst=inst, fes_edges=frozenset(fes))


_RULES = (prune_leaf_vertices, suppress_degree_two, prune_pendant_subtrees, remove_matched_leaf_pairs)


def overloaded_vertex(inst: EDPInstance) -> int | None:
    """A vertex with more pendant terminal leaves than edges to non-leaves,
    if any; every such leaf's path must leave through a distinct non-leaf
    edge, so the instance is a NO-instance.  Assumes matched leaf twins were
    already removed."""
    g = inst.graph
    for y in g.sorted_vertices():
        if inst.pairs_at(y):
            continue  # a terminal's own path may end at y
        pendant = 0
        exits = 0
        for eid in g.incident(y):
            w = g.other_end(eid, y)
            if g.degree(w) == 1 and inst.pairs_at(w):
                pendant += 1
            elif g.degree(w) > 1:
                exits += 1
        if pendant > exits:
            return y
    return None


@dataclass(frozen=True)
class ComponentReport:
    vertices: int
    fes_size: int
    forest_leaves: int
    resolved: str | None  # "YES"/"NO" when the component got answered

    @property
    def size_bound(self) -> int:
        return 11 * self.fes_size - 2

    @property
    def leaf_bound(self) -> int:
        return 4 * self.fes_size


@dataclass(frozen=True)
class KernelResult:
    instance: EDPInstance  # union of unresolved components
    fes_edges: frozenset[int]
    answer: str | None  # "YES"/"NO" when the whole input got settled, else None
    components: tuple[ComponentReport, ...]

    @property
    def size_bound(self) -> int:
        return 11 * len(self.fes_edges) - 2


def kernelize(inst: EDPInstance) -> KernelResult:
    """Terminal-normalize, then reduce each connected component to its
    kernel.  Components that are forests (or become ones) are answered by
    the forest solver; a pair split across components answers NO outright."""
    normalized = terminal_normalize(inst)
    pending = _split_components(normalized)
    if pending is None:
        return KernelResult(EDPInstance(), frozenset(), "NO", ())

    reports: list[ComponentReport] = []
    kept: list[KernelState] = []
    answer_no = False
    while pending:
        comp_inst = pending.pop(0)
        g = comp_inst.graph
        if g.is_forest():
            feasible = tree_edp_feasible(g, dict(comp_inst.pairs))
            reports.append(ComponentReport(g.num_vertices(), 0, 0, "YES" if feasible else "NO"))
            if not feasible:
                answer_no = True
                break
            continue
        state = KernelState(comp_inst, feedback_edge_set(g))
        state = _fixpoint(state)
        if state.answer == "NO":
            reports.append(_report(state, "NO"))
            answer_no = True
            break
        parts = _split_components(state.inst)
        if parts is None:
            reports.append(_report(state, "NO"))
            answer_no = True
            break
        if len(parts) > 1:
            pending = parts + pending
            continue
        if not parts:
            reports.append(_report(state, "YES"))
            continue
        final = KernelState(parts[0], frozenset(e for e in state.fes_edges if parts[0].graph.has_edge(e)))
        if final.inst.graph.is_forest():
            feasible = tree_edp_feasible(final.inst.graph, dict(final.inst.pairs))
            reports.append(_report(final, "YES" if feasible else "NO"))
            if not feasible:
                answer_no = True
                break
            continue
        if overloaded_vertex(final.inst) is not None:
            reports.append(_report(final, "NO"))
            answer_no = True
            break
        reports.append(_report(final, None))
        kept.append(final)

    if answer_no:
        return KernelResult(EDPInstance(), frozenset(), "NO", tuple(reports))
    if not kept:
        return KernelResult(EDPInstance(), frozenset(), "YES", tuple(reports))
    merged = EDPInstance()
    fes: set[int] = set()
    for state in kept:
        for v in state.inst.graph.sorted_vertices():
            merged.graph.add_vertex(v)
        for eid in state.inst.graph.sorted_edges():
            u, v = state.inst.graph.endpoints(eid)
            merged.graph.add_edge(u, v, eid)
        for pid in state.inst.sorted_pairs():
            a, b = sorted(state.inst.pair(pid))
            merged.add_pair(a, b, pid)
        fes |= state.fes_edges
    return KernelResult(merged, frozenset(fes), None, tuple(reports))


def _fixpoint(state: KernelState) -> KernelState:
    while True:
        before = state
        for rule in _RULES:
            state = rule(state)
            if state.answer is not None:
                return state
        if state.inst == before.inst and state.fes_edges == before.fes_edges:
            return state


def _split_components(inst: EDPInstance) -> list[EDPInstance] | None:
    """Per-component instances; None when a pair straddles two components."""
    comps = inst.graph.connected_components()
    out = []
    for comp in comps:
        piece = EDPInstance(inst.graph.induced(comp))
        out.append(piece)
    for pid in inst.sorted_pairs():
        members = inst.pair(pid)
        homes = [i for i, comp in enumerate(comps) if members & comp]
        if len(homes) != 1:
            return None
        a, b = sorted(members)
        out[homes[0]].add_pair(a, b, pid)
    return out


def _forest_leaves(state: KernelState) -> int:
    q = state.forest_part()
    return sum(1 for v in q.vertices if q.degree(v) == 1)


def _report(state: KernelState, resolved: str | None) -> ComponentReport:
    return ComponentReport(
        state.inst.graph.num_vertices(),
        len(state.fes_edges),
        _forest_leaves(state),
        resolved,
    )
