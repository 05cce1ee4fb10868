"""Dynamic programming over treecut decompositions.

The DP state for a node is a record: a classification of the node's cut
edges into internal / leaving / foreign / unused, a perfect matching on the
internal edges, one on the foreign edges, and a bijection between the
subtree's unmatched terminals and the leaving edges.  A record is valid when
the subtree, extended with stub terminals describing the record, is solvable
on its own.  Leaves are decided by brute force; interior nodes branch over
their children's valid records, replace each child subtree by a small
degree-<=2 representative, and feed the residue to the hub/satellite solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .decomposition import (
    DecompositionError,
    TreecutDecomposition,
    node_views,
    verify_decomposition,
    verify_nice,
)
from .graphs import EDPInstance, StructureError, induced_instance
from .oracle import brute_force_edp
from .simple import preprocess_simple, solve_simple_edp

INTERNAL = "internal"
LEAVING = "leaving"
FOREIGN = "foreign"
UNUSED = "unused"


@dataclass(frozen=True)
class Record:
    """One interaction pattern between a solution and a node's cut edges."""

    classes: tuple[tuple[int, str], ...]  # (edge id, class), sorted by edge id
    internal_pairs: tuple[tuple[int, int], ...]
    foreign_pairs: tuple[tuple[int, int], ...]
    leaving: tuple[tuple[int, int], ...]  # (pair id, edge id), sorted by pair id

    def edges_of(self, cls: str) -> tuple[int, ...]:
        return tuple(e for e, c in self.classes if c == cls)

    def used_edges(self) -> tuple[int, ...]:
        return tuple(e for e, c in self.classes if c != UNUSED)

    def is_empty(self) -> bool:
        return not self.classes


EMPTY_RECORD = Record((), (), (), ())


@dataclass(frozen=True)
class RecordTable:
    node: int
    records: tuple[Record, ...]

    def __contains__(self, rec: Record) -> bool:
        return rec in self.records

    def __len__(self) -> int:
        return len(self.records)


def record_count_bound(width: int) -> int:
    return 4**width * math.factorial(width)


def unmatched_terminals(inst: EDPInstance, dec: TreecutDecomposition, node: int) -> tuple[tuple[int, int], ...]:
    """One (pair id, terminal) entry per pair straddling the node's subtree."""
    sub = dec.subtree_vertices(node)
    out = []
    for pid in inst.sorted_pairs():
        inside = inst.pair(pid) & sub
        if len(inside) == 1:
            out.append((pid, next(iter(inside))))
    return tuple(out)


def _perfect_matchings(items: tuple[int, ...]):
    if not items:
        yield ()
        return
    first = items[0]
    for i in range(1, len(items)):
        partner = items[i]
        rest = items[1:i] + items[i + 1 :]
        for rest_match in _perfect_matchings(rest):
            yield ((first, partner),) + rest_match


def _records_for(cut: tuple[int, ...], u_pids: tuple[int, ...]) -> list[Record]:
    out: list[Record] = []
    for assignment in itertools.product((INTERNAL, LEAVING, FOREIGN, UNUSED), repeat=len(cut)):
        internal = tuple(e for e, c in zip(cut, assignment) if c == INTERNAL)
        foreign = tuple(e for e, c in zip(cut, assignment) if c == FOREIGN)
        leaving = tuple(e for e, c in zip(cut, assignment) if c == LEAVING)
        if len(internal) % 2 or len(foreign) % 2 or len(leaving) != len(u_pids):
            continue
        classes = tuple(zip(cut, assignment))
        for imatch in _perfect_matchings(internal):
            for fmatch in _perfect_matchings(foreign):
                for perm in itertools.permutations(leaving):
                    out.append(Record(classes, imatch, fmatch, tuple(zip(u_pids, perm))))
    return out


def enumerate_records(inst: EDPInstance, dec: TreecutDecomposition, node: int) -> list[Record]:
    """All structurally well-formed records for the node, in a fixed order."""
    views = node_views(inst, dec, node)
    u_pids = tuple(pid for pid, _ in unmatched_terminals(inst, dec, node))
    return _records_for(views.cut, u_pids)


def build_record_instance(inst: EDPInstance, dec: TreecutDecomposition, node: int, rec: Record) -> EDPInstance:
    """The subtree instance extended with the record's stub structure; the
    record is valid exactly when this instance is solvable.

    Cut edges keep their ids: each used cut edge reappears attached to a
    fresh stub vertex in place of its outside endpoint.  An internal pair
    whose two inside endpoints coincide is dropped entirely (no simple path
    can leave and re-enter through the same vertex).
    """
    sub = dec.subtree_vertices(node)
    out = induced_instance(inst, sub)
    g = out.graph
    next_vertex = max(inst.graph.vertices | {0}) + 1
    next_pid = max(list(inst.pairs) + [0]) + 1

    def inside_end(eid: int) -> int:
        u, v = inst.graph.endpoints(eid)
        return u if u in sub else v

    def fresh() -> int:
        nonlocal next_vertex
        v = next_vertex
        next_vertex += 1
        g.add_vertex(v)
        return v

    for e1, e2 in sorted(rec.internal_pairs):
        a, c = inside_end(e1), inside_end(e2)
        if a == c:
            continue
        w = fresh()
        g.add_edge(a, w, e1)
        g.add_edge(c, w, e2)
    for pid, eid in sorted(rec.leaving):
        members = inst.pair(pid) & sub
        if len(members) != 1:
            raise StructureError(f"pair {pid} is not a straddling pair of node {node}")
        s = next(iter(members))
        leaf = fresh()
        g.add_edge(inside_end(eid), leaf, eid)
        out.add_pair(s, leaf, pid)
    for e1, e2 in sorted(rec.foreign_pairs):
        b = fresh()
        g.add_edge(inside_end(e1), b, e1)
        d = fresh()
        g.add_edge(inside_end(e2), d, e2)
        out.add_pair(b, d, next_pid)
        next_pid += 1
    return out


def leaf_valid_records(inst: EDPInstance, dec: TreecutDecomposition, leaf: int) -> RecordTable:
    """Decide every candidate record of a leaf by brute force on its small
    stub-extended instance."""
    if dec.children(leaf):
        raise StructureError(f"node {leaf} is not a leaf")
    valid = tuple(
        rec
        for rec in enumerate_records(inst, dec, leaf)
        if brute_force_edp(build_record_instance(inst, dec, leaf, rec), caps=None).feasible
    )
    return RecordTable(leaf, valid)


# -- simplification ----------------------------------------------------------


def _simplify_in(cur: EDPInstance, sub: frozenset[int], cut_ids: Iterable[int], rec: Record) -> EDPInstance | None:
    """Replace the subtree by the record's degree-<=2 fringe inside `cur`.

    Returns None when the record references a cut edge a sibling's
    simplification already consumed differently; such a branch cannot carry
    a solution and is skipped.
    """
    g = cur.graph
    cut_set = set(cut_ids)
    used = rec.used_edges()
    if not set(used) <= cut_set:
        raise StructureError("record references edges outside the node's cut")
    outside_end: dict[int, int] = {}
    for e in used:
        if not g.has_edge(e):
            return None
        u, v = g.endpoints(e)
        if (u in sub) == (v in sub):
            return None
        outside_end[e] = v if u in sub else u
    partner: dict[int, int] = {}
    for pid in cur.sorted_pairs():
        members = cur.pair(pid)
        inside = members & sub
        if len(inside) == 1:
            partner[pid] = next(iter(members - sub))
    if set(partner) != {pid for pid, _ in rec.leaving}:
        return None

    out = cur.copy()
    for pid in out.sorted_pairs():
        if out.pair(pid) & sub:
            out.remove_pair(pid)
    for v in sorted(sub):
        if out.graph.has_vertex(v):
            out.graph.remove_vertex(v)

    next_vertex = max(cur.graph.vertices | {0}) + 1
    next_pid = max(list(cur.pairs) + [0]) + 1

    def fresh() -> int:
        nonlocal next_vertex
        v = next_vertex
        next_vertex += 1
        out.graph.add_vertex(v)
        return v

    for pid, eid in sorted(rec.leaving):
        s = fresh()
        out.graph.add_edge(s, outside_end[eid], eid)
        out.add_pair(s, partner[pid], pid)
    for e1, e2 in sorted(rec.internal_pairs):
        s1 = fresh()
        out.graph.add_edge(s1, outside_end[e1], e1)
        s2 = fresh()
        out.graph.add_edge(s2, outside_end[e2], e2)
        out.add_pair(s1, s2, next_pid)
        next_pid += 1
    for e1, e2 in sorted(rec.foreign_pairs):
        w = fresh()
        out.graph.add_edge(w, outside_end[e1], e1)
        out.graph.add_edge(w, outside_end[e2], e2)
    return out


def simplify(inst: EDPInstance, dec: TreecutDecomposition, node: int, rec: Record) -> EDPInstance:
    """Public form of simplification on the original instance."""
    views = node_views(inst, dec, node)
    out = _simplify_in(inst, views.subtree, views.cut, rec)
    if out is None:
        raise StructureError("record does not fit the node's cut")
    return out


# -- reduction rules used by the dynamic step --------------------------------


def reduce_degree_two_edges(inst: EDPInstance, once: bool = False) -> tuple[EDPInstance, bool]:
    """Eliminate edges joining two degree-<=2 vertices; returns the reduced
    instance and whether it was recognized as a NO-instance.

    Cases, in order: an edge with a non-terminal endpoint is contracted into
    the other endpoint; an edge whose endpoints form a pair routes that pair
    directly (pair and edge are removed); an edge between two one-pair
    terminals is deleted; anything else rejects.
    """
    out = inst.copy()
    rejected = False
    while True:
        g = out.graph
        target = None
        for eid in g.sorted_edges():
            u, v = g.endpoints(eid)
            if g.degree(u) <= 2 and g.degree(v) <= 2:
                target = eid
                break
        if target is None:
            break
        u, v = g.endpoints(target)
        pairs_u, pairs_v = out.pairs_at(u), out.pairs_at(v)
        direct = [pid for pid in out.sorted_pairs() if out.pair(pid) == frozenset((u, v))]
        if not pairs_u or not pairs_v:
            drop, keep = (u, v) if not pairs_u else (v, u)
            for e in list(g.incident(drop)):
                w = g.other_end(e, drop)
                g.remove_edge(e)
                if w != keep:
                    g.add_edge(keep, w, e)
            g.remove_vertex(drop)
        elif direct:
            out.remove_pair(direct[0])
            g.remove_edge(target)
        elif len(pairs_u) == 1 and len(pairs_v) == 1:
            g.remove_edge(target)
        else:
            rejected = True
            break
        if once:
            break
    return out, rejected


def _replace_thin_in(
    cur: EDPInstance,
    sub: frozenset[int],
    cut_ids: tuple[int, ...],
    table: RecordTable,
) -> EDPInstance | None:
    """Swap a thin subtree for at most two degree-<=2 stub vertices chosen by
    its record table; None means no record fits, i.e. a NO verdict."""
    g = cur.graph
    for e in cut_ids:
        assert g.has_edge(e), f"cut edge {e} vanished before thin replacement"
    straddle: dict[int, int] = {}
    for pid in cur.sorted_pairs():
        members = cur.pair(pid)
        inside = members & sub
        if len(inside) == 1:
            straddle[pid] = next(iter(members - sub))
    u_pids = tuple(sorted(straddle))
    recs = set(table.records)

    def delta(*classes: str) -> tuple[tuple[int, str], ...]:
        return tuple(zip(cut_ids, classes))

    def removed() -> EDPInstance:
        out = cur.copy()
        for pid in out.sorted_pairs():
            if out.pair(pid) & sub:
                out.remove_pair(pid)
        for v in sorted(sub):
            if out.graph.has_vertex(v):
                out.graph.remove_vertex(v)
        return out

    def stub(out: EDPInstance, attach: list[tuple[int, int]], pair: tuple[int, int] | None) -> int:
        s = max(cur.graph.vertices | {0}) + 1
        while out.graph.has_vertex(s):
            s += 1
        out.graph.add_vertex(s)
        for eid, y in attach:
            out.graph.add_edge(s, y, eid)
        if pair is not None:
            out.add_pair(s, pair[1], pair[0])
        return s

    outside = {e: (set(g.endpoints(e)) - sub).pop() for e in cut_ids}

    if len(cut_ids) == 0:
        if not u_pids and EMPTY_RECORD in recs:
            return removed()
        return None

    if len(cut_ids) == 1:
        (e,) = cut_ids
        if len(u_pids) == 1:
            pid = u_pids[0]
            if Record(delta(LEAVING), (), (), ((pid, e),)) in recs:
                out = removed()
                stub(out, [(e, outside[e])], (pid, straddle[pid]))
                return out
            return None
        if not u_pids:
            if Record(delta(UNUSED), (), (), ()) in recs:
                return removed()
            return None
        return None

    if len(cut_ids) == 2:
        e1, e2 = cut_ids
        if not u_pids:
            if Record(delta(FOREIGN, FOREIGN), (), ((e1, e2),), ()) in recs:
                out = removed()
                stub(out, [(e1, outside[e1]), (e2, outside[e2])], None)
                return out
            if Record(delta(UNUSED, UNUSED), (), (), ()) in recs:
                return removed()
            if Record(delta(INTERNAL, INTERNAL), ((e1, e2),), (), ()) in recs:
                out = removed()
                next_pid = max(list(cur.pairs) + [0]) + 1
                s1 = stub(out, [(e1, outside[e1])], None)
                s2 = stub(out, [(e2, outside[e2])], None)
                out.add_pair(s1, s2, next_pid)
                return out
            return None
        if len(u_pids) == 1:
            pid = u_pids[0]
            r1 = Record(delta(LEAVING, UNUSED), (), (), ((pid, e1),))
            r2 = Record(delta(UNUSED, LEAVING), (), (), ((pid, e2),))
            attach = []
            if r1 in recs:
                attach.append((e1, outside[e1]))
            if r2 in recs:
                attach.append((e2, outside[e2]))
            if not attach:
                return None
            out = removed()
            stub(out, attach, (pid, straddle[pid]))
            return out
        if len(u_pids) == 2:
            p1, p2 = u_pids
            ra = Record(delta(LEAVING, LEAVING), (), (), ((p1, e1), (p2, e2)))
            rb = Record(delta(LEAVING, LEAVING), (), (), ((p1, e2), (p2, e1)))
            if ra in recs and rb in recs:
                out = removed()
                s = stub(out, [(e1, outside[e1]), (e2, outside[e2])], None)
                out.add_pair(s, straddle[p1], p1)
                out.add_pair(s, straddle[p2], p2)
                return out
            if ra in recs:
                out = removed()
                stub(out, [(e1, outside[e1])], (p1, straddle[p1]))
                stub(out, [(e2, outside[e2])], (p2, straddle[p2]))
                return out
            if rb in recs:
                out = removed()
                stub(out, [(e2, outside[e2])], (p1, straddle[p1]))
                stub(out, [(e1, outside[e1])], (p2, straddle[p2]))
                return out
            return None
        return None
    return None


def replace_thin_subtree(
    inst: EDPInstance, dec: TreecutDecomposition, node: int, table: RecordTable
) -> EDPInstance | None:
    """Public form of the thin-node replacement; None signals a NO-instance."""
    views = node_views(inst, dec, node)
    if views.adhesion > 2:
        raise StructureError(f"node {node} is not thin (adhesion {views.adhesion})")
    return _replace_thin_in(inst, views.subtree, views.cut, table)


# -- the dynamic step and full solve -----------------------------------------


def dynamic_step(
    inst: EDPInstance,
    dec: TreecutDecomposition,
    node: int,
    tables: Mapping[int, RecordTable],
) -> RecordTable:
    """Compute the node's valid records from its children's tables.

    For each candidate record, branch over one record per child needing full
    record-sets, simplify those subtrees, replace the absorbable thin
    children, clean up degree-two chains, and ask the hub/satellite solver
    whether the residue routes.
    """
    children = dec.children(node)
    if not children:
        raise StructureError(f"node {node} is a leaf; use leaf_valid_records")
    g = inst.graph
    child_views = {c: node_views(inst, dec, c) for c in children}
    bag = dec.bag(node)
    absorbable = []
    record_children = []
    for c in sorted(children):
        views = child_views[c]
        nbhd = frozenset().union(*(g.neighbors(v) for v in views.subtree)) - views.subtree if views.subtree else frozenset()
        if views.adhesion <= 2 and nbhd <= bag:
            absorbable.append(c)
        else:
            record_children.append(c)

    candidates = enumerate_records(inst, dec, node)
    if any(not tables[c].records for c in record_children):
        return RecordTable(node, ())
    valid = []
    for rec in candidates:
        base = build_record_instance(inst, dec, node, rec)
        found = False
        for combo in itertools.product(*(tables[c].records for c in record_children)):
            cur: EDPInstance | None = base
            for c, crec in zip(record_children, combo):
                cur = _simplify_in(cur, child_views[c].subtree, child_views[c].cut, crec)
                if cur is None:
                    break
            if cur is None:
                continue
            for b in absorbable:
                cur = _replace_thin_in(cur, child_views[b].subtree, child_views[b].cut, tables[b])
                if cur is None:
                    break
            if cur is None:
                continue
            cur, rejected = reduce_degree_two_edges(cur)
            if rejected:
                continue
            hub = bag & cur.graph.vertices
            si = preprocess_simple(cur, hub)
            if solve_simple_edp(si).feasible:
                found = True
                break
        if found:
            valid.append(rec)
    return RecordTable(node, tuple(valid))


@dataclass(frozen=True)
class TreecutResult:
    feasible: bool
    tables: Mapping[int, RecordTable]
    width: int

    def __bool__(self) -> bool:
        return self.feasible


def solve_treecut(inst: EDPInstance, dec: TreecutDecomposition) -> TreecutResult:
    """Leaf-to-root record computation; YES iff the root keeps the empty
    record.  The decomposition must be valid and nice (this artifact checks
    decompositions, it does not repair them)."""
    dec = dec.ensure_empty_root()
    wrep = verify_decomposition(inst, dec)
    if not wrep.valid:
        raise DecompositionError("invalid decomposition: " + "; ".join(wrep.errors))
    nrep = verify_nice(inst, dec)
    if not nrep.nice:
        raise DecompositionError(
            f"decomposition is not nice (offending thin nodes {list(nrep.offending)}); "
            "run verify_nice for details"
        )
    bound = record_count_bound(wrep.width)
    tables: dict[int, RecordTable] = {}
    for t in dec.postorder():
        if dec.children(t):
            tables[t] = dynamic_step(inst, dec, t, tables)
        else:
            tables[t] = leaf_valid_records(inst, dec, t)
        assert len(tables[t]) <= bound, f"node {t} exceeds the record-count bound"
    root_table = tables[dec.root]
    assert all(rec == EMPTY_RECORD for rec in root_table.records)
    return TreecutResult(bool(root_table.records), tables, wrep.width)
