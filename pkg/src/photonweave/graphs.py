"""Labeled simple graphs and the graph-state rewrite calculus.

A graph here *is* a multiqubit stabilizer state up to single-qubit
Cliffords: vertices are qubits and each edge records a CZ applied to a
pair of |+> qubits.  The module provides the three Pauli-measurement
rewrite rules (vertex deletion, local complementation + deletion, and
the three-step X rule), orbit search under local complementation, and
shape classification of the caterpillar/cycle family.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

Edge = tuple[int, int]

#: Pauli measurement axes accepted throughout the package.
AXES = ("X", "Y", "Z")


def _norm_edge(u: int, v: int) -> Edge:
    if u == v:
        raise ValueError(f"self-loop at vertex {u} is not allowed")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on integer-labeled vertices."""

    vertices: tuple[int, ...]
    edges: frozenset[Edge]

    def __init__(self, vertices: Iterable[int], edges: Iterable[tuple[int, int]] = ()):
        verts = tuple(dict.fromkeys(vertices))  # keep order, drop duplicates
        vset = set(verts)
        norm = frozenset(_norm_edge(u, v) for u, v in edges)
        for u, v in norm:
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u},{v}) references a missing vertex")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", norm)

    # -- basic queries ---------------------------------------------------

    def __contains__(self, v: int) -> bool:
        return v in set(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def neighbors(self, v: int) -> frozenset[int]:
        self._require(v)
        return frozenset(u if w == v else w for u, w in self.edges if v in (u, w))

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edges

    def _require(self, *vs: int) -> None:
        vset = set(self.vertices)
        for v in vs:
            if v not in vset:
                raise ValueError(f"unknown vertex {v}")

    # -- construction helpers --------------------------------------------

    def with_edges_toggled(self, pairs: Iterable[tuple[int, int]]) -> Graph:
        edges = set(self.edges)
        for u, v in pairs:
            e = _norm_edge(u, v)
            if e in edges:
                edges.remove(e)
            else:
                edges.add(e)
        return Graph(self.vertices, edges)

    def without_vertex(self, v: int) -> Graph:
        self._require(v)
        verts = tuple(u for u in self.vertices if u != v)
        edges = [e for e in self.edges if v not in e]
        return Graph(verts, edges)

    def add_vertex(self, v: int) -> Graph:
        if v in set(self.vertices):
            return self
        return Graph(self.vertices + (v,), self.edges)

    def add_edge(self, u: int, v: int) -> Graph:
        self._require(u, v)
        return Graph(self.vertices, set(self.edges) | {_norm_edge(u, v)})

    def induced(self, keep: Iterable[int]) -> Graph:
        kset = set(keep)
        self._require(*kset)
        verts = tuple(v for v in self.vertices if v in kset)
        edges = [e for e in self.edges if e[0] in kset and e[1] in kset]
        return Graph(verts, edges)

    def relabel(self, mapping: dict[int, int]) -> Graph:
        verts = tuple(mapping.get(v, v) for v in self.vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("relabeling collides")
        edges = [(mapping.get(u, u), mapping.get(v, v)) for u, v in self.edges]
        return Graph(verts, edges)

    def disjoint_union(self, other: Graph) -> Graph:
        overlap = set(self.vertices) & set(other.vertices)
        if overlap:
            raise ValueError(f"label collision: {sorted(overlap)}")
        return Graph(self.vertices + other.vertices, set(self.edges) | set(other.edges))

    # -- topology ----------------------------------------------------------

    def components(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        out = []
        for start in self.vertices:
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                v = queue.popleft()
                for w in self.neighbors(v):
                    if w not in comp:
                        comp.add(w)
                        queue.append(w)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) <= 1


# -- standard families ----------------------------------------------------


def empty_graph(n_or_labels: int | Iterable[int]) -> Graph:
    labels = range(1, n_or_labels + 1) if isinstance(n_or_labels, int) else n_or_labels
    return Graph(labels)


def path_graph(n_or_labels: int | Iterable[int]) -> Graph:
    labels = list(range(1, n_or_labels + 1)) if isinstance(n_or_labels, int) else list(n_or_labels)
    return Graph(labels, zip(labels, labels[1:]))


def cycle_graph(n_or_labels: int | Iterable[int]) -> Graph:
    labels = list(range(1, n_or_labels + 1)) if isinstance(n_or_labels, int) else list(n_or_labels)
    if len(labels) < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(labels, list(zip(labels, labels[1:])) + [(labels[-1], labels[0])])


def star_graph(center: int, leaves: Iterable[int]) -> Graph:
    leaves = list(leaves)
    return Graph([center] + leaves, [(center, u) for u in leaves])


def complete_graph(labels: Iterable[int]) -> Graph:
    labels = list(labels)
    return Graph(labels, itertools.combinations(labels, 2))


# -- graph states -----------------------------------------------------------


@dataclass(frozen=True)
class GraphState:
    """The stabilizer state obtained by applying CZ along every edge to all-|+>."""

    graph: Graph


def apply_cz(state: GraphState, u: int, v: int) -> GraphState:
    """Toggle the edge {u, v}; CZ is self-inverse on graph states."""
    if u == v:
        raise ValueError("CZ needs two distinct qubits")
    state.graph._require(u, v)
    return GraphState(state.graph.with_edges_toggled([(u, v)]))


# -- rewrite rules -----------------------------------------------------------


def local_complement(g: Graph, v: int) -> Graph:
    """Toggle every edge between pairs of neighbors of v."""
    nbrs = g.neighbors(v)
    return g.with_edges_toggled(itertools.combinations(sorted(nbrs), 2))


def measure_pauli(g: Graph, v: int, axis: str, x_partner: int | None = None) -> Graph:
    """Remove v from the graph according to a Pauli measurement on it.

    Z deletes the vertex, Y locally complements at v first, and X runs the
    three-step rule lc(v), lc(w), lc(v) before deleting, where w is a
    neighbor of v (smallest label unless ``x_partner`` overrides).  The
    result is one representative of the post-measurement state's class
    under single-qubit Cliffords; byproduct rotations are not tracked.
    """
    g._require(v)
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    if axis == "Z":
        return g.without_vertex(v)
    if axis == "Y":
        return local_complement(g, v).without_vertex(v)
    nbrs = g.neighbors(v)
    if not nbrs:
        return g.without_vertex(v)
    w = min(nbrs) if x_partner is None else x_partner
    if w not in nbrs:
        raise ValueError(f"x_partner {w} is not a neighbor of {v}")
    h = local_complement(g, v)
    h = local_complement(h, w)
    h = local_complement(h, v)
    return h.without_vertex(v)


# -- local equivalence --------------------------------------------------------

ORBIT_CAP = 10**6


def lc_orbit(g: Graph, cap: int = ORBIT_CAP) -> Iterator[Graph]:
    """Breadth-first enumeration of the local-complementation orbit of g."""
    seen = {g.edges}
    queue = deque([g])
    while queue:
        cur = queue.popleft()
        yield cur
        for v in cur.vertices:
            if cur.degree(v) < 2:  # lc is a no-op below degree 2
                continue
            nxt = local_complement(cur, v)
            if nxt.edges not in seen:
                if len(seen) >= cap:
                    raise RuntimeError(f"local-complementation orbit exceeds cap {cap}")
                seen.add(nxt.edges)
                queue.append(nxt)


ORBIT_VERTEX_LIMIT = 12


def locally_equivalent(
    g1: Graph,
    g2: Graph,
    allow_relabel: bool = False,
    cap: int = ORBIT_CAP,
) -> bool:
    """True iff g2 lies in the local-complementation orbit of g1.

    Label-preserving by default; with ``allow_relabel`` any vertex
    bijection is also allowed.  Orbit search is capped at desk scale.
    """
    if g1.n > ORBIT_VERTEX_LIMIT or g2.n > ORBIT_VERTEX_LIMIT:
        raise ValueError(f"orbit search limited to {ORBIT_VERTEX_LIMIT} vertices")
    if len(g1.vertices) != len(g2.vertices):
        return False
    if not allow_relabel:
        if set(g1.vertices) != set(g2.vertices):
            return False
        # components are invariant under lc: cheap rejection
        if sorted(g1.components()) != sorted(g2.components()):
            return False
        target = g2.edges
        return any(h.edges == target for h in lc_orbit(g1, cap))
    if sorted(len(c) for c in g1.components()) != sorted(len(c) for c in g2.components()):
        return False
    return any(_isomorphic(h, g2) for h in lc_orbit(g1, cap))


def _isomorphic(g1: Graph, g2: Graph) -> bool:
    """Backtracking isomorphism test with degree-sequence pruning (desk scale)."""
    if g1.n != g2.n or len(g1.edges) != len(g2.edges):
        return False
    deg1 = sorted(g1.degree(v) for v in g1.vertices)
    deg2 = sorted(g2.degree(v) for v in g2.vertices)
    if deg1 != deg2:
        return False
    order = sorted(g1.vertices, key=lambda v: -g1.degree(v))
    candidates = {
        v: [w for w in g2.vertices if g2.degree(w) == g1.degree(v)] for v in order
    }

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for w in candidates[v]:
            if w in used:
                continue
            ok = all(
                g1.has_edge(v, u) == g2.has_edge(w, mapping[u]) for u in mapping
            )
            if ok:
                mapping[v] = w
                used.add(w)
                if extend(i + 1):
                    return True
                del mapping[v]
                used.remove(w)
        return False

    return extend(0)


# -- shape classification -----------------------------------------------------


@dataclass(frozen=True)
class ComponentShape:
    """Witness for one connected component.

    ``spine`` is the ordered core path (or cycle) of the component and
    ``leaves`` maps each remaining vertex to its spine attachment point.
    The witness reconstructs the component exactly.
    """

    kind: str  # empty | path | star | cycle | caterpillar | leafed-cycle | other
    spine: tuple[int, ...]
    leaves: tuple[tuple[int, int], ...]  # (leaf, spine vertex)


@dataclass(frozen=True)
class ShapeClass:
    label: str
    components: tuple[ComponentShape, ...]
    contiguous_leaves: bool | None  # leaf-carrying spine vertices consecutive?


def _path_order(g: Graph, comp: frozenset[int]) -> tuple[int, ...] | None:
    """Return the vertices of comp in path order, or None if not a path."""
    degs = {v: len(g.neighbors(v) & comp) for v in comp}
    if len(comp) == 1:
        return (next(iter(comp)),)
    ends = [v for v, d in degs.items() if d == 1]
    if len(ends) != 2 or any(d > 2 for d in degs.values()):
        return None
    order = [min(ends)]
    prev = None
    while len(order) < len(comp):
        nxt = [w for w in g.neighbors(order[-1]) & comp if w != prev]
        if len(nxt) != 1:
            return None
        prev = order[-1]
        order.append(nxt[0])
    return tuple(order)


def _cycle_order(g: Graph, comp: frozenset[int]) -> tuple[int, ...] | None:
    degs = {v: len(g.neighbors(v) & comp) for v in comp}
    if len(comp) < 3 or any(d != 2 for d in degs.values()):
        return None
    start = min(comp)
    order = [start]
    prev = None
    while True:
        nbrs = sorted(g.neighbors(order[-1]) & comp)
        nxt = [w for w in nbrs if w != prev]
        step = min(nxt) if len(order) == 1 else nxt[0]
        if step == start:
            break
        prev = order[-1]
        order.append(step)
    return tuple(order) if len(order) == len(comp) else None


def _classify_component(g: Graph, comp: frozenset[int]) -> ComponentShape:
    sub = g.induced(comp)
    if len(comp) == 1:
        return ComponentShape("empty", tuple(comp), ())
    order = _path_order(sub, comp)
    if order is not None:
        return ComponentShape("path", order, ())
    cyc = _cycle_order(sub, comp)
    if cyc is not None:
        return ComponentShape("cycle", cyc, ())
    degs = {v: sub.degree(v) for v in comp}
    centers = [v for v, d in degs.items() if d == len(comp) - 1]
    if len(centers) == 1 and all(d == 1 for v, d in degs.items() if v != centers[0]):
        c = centers[0]
        return ComponentShape(
            "star", (c,), tuple((v, c) for v in sorted(comp) if v != c)
        )
    # strip degree-1 vertices once; a path core means caterpillar, a cycle
    # core means leafed cycle
    leaves = {v for v, d in degs.items() if d == 1}
    core = comp - leaves
    if core:
        core_sub = sub.induced(core)
        attach = {}
        ok = True
        for v in leaves:
            anchor = sub.neighbors(v) & core
            if len(anchor) != 1:
                ok = False
                break
            attach[v] = next(iter(anchor))
        if ok:
            order = _path_order(core_sub, frozenset(core))
            if order is not None:
                return ComponentShape(
                    "caterpillar", order, tuple(sorted(attach.items()))
                )
            cyc = _cycle_order(core_sub, frozenset(core))
            if cyc is not None:
                return ComponentShape(
                    "leafed-cycle", cyc, tuple(sorted(attach.items()))
                )
    return ComponentShape("other", tuple(sorted(comp)), ())


def _leaves_contiguous(shape: ComponentShape) -> bool:
    carriers = {s for _, s in shape.leaves}
    if not carriers or shape.kind not in ("caterpillar", "leafed-cycle", "star"):
        return True
    idx = sorted(shape.spine.index(s) for s in carriers)
    span = idx[-1] - idx[0] + 1
    if span == len(idx):
        return True
    if shape.kind == "leafed-cycle":
        # cyclic runs may wrap around the spine origin
        n = len(shape.spine)
        gaps = [(idx[(i + 1) % len(idx)] - idx[i]) % n for i in range(len(idx))]
        return max(gaps) == n - len(idx) + 1
    return False


def classify_graph(g: Graph) -> ShapeClass:
    """Classify into the caterpillar / leafed-cycle family with a witness."""
    comps = sorted(g.components(), key=min)
    shapes = tuple(_classify_component(g, c) for c in comps)
    contig = all(_leaves_contiguous(s) for s in shapes) if shapes else None
    if not shapes:
        return ShapeClass("empty", (), None)
    if all(s.kind == "empty" for s in shapes):
        return ShapeClass("empty", shapes, contig)
    if len(shapes) == 1:
        return ShapeClass(shapes[0].kind, shapes, contig)
    caterpillarish = {"empty", "path", "star", "caterpillar"}
    if all(s.kind in caterpillarish for s in shapes):
        return ShapeClass("caterpillar-forest", shapes, contig)
    return ShapeClass("other", shapes, contig)


def reconstruct_from_witness(shape_class: ShapeClass) -> Graph:
    """Rebuild the classified graph from its witness decomposition."""
    verts: list[int] = []
    edges: list[tuple[int, int]] = []
    for comp in shape_class.components:
        verts.extend(comp.spine)
        verts.extend(leaf for leaf, _ in comp.leaves)
        if comp.kind in ("path", "caterpillar", "empty", "star"):
            edges.extend(zip(comp.spine, comp.spine[1:]))
        elif comp.kind in ("cycle", "leafed-cycle"):
            edges.extend(zip(comp.spine, comp.spine[1:]))
            edges.append((comp.spine[-1], comp.spine[0]))
        else:
            raise ValueError("witness for 'other' components is not constructive")
        edges.extend(comp.leaves)
    return Graph(verts, edges)


# -- serialization ------------------------------------------------------------


def graph_to_json(g: Graph) -> str:
    payload = {
        "vertices": sorted(g.vertices),
        "edges": sorted([list(e) for e in g.edges]),
    }
    return json.dumps(payload, sort_keys=True)


def graph_from_json(text: str) -> Graph:
    payload = json.loads(text)
    return Graph(payload["vertices"], [tuple(e) for e in payload["edges"]])


def graph_to_dot(g: Graph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in sorted(g.vertices):
        lines.append(f"  {v};")
    for u, v in sorted(g.edges):
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_from_dot(text: str) -> Graph:
    verts: list[int] = []
    edges: list[tuple[int, int]] = []
    for raw in text.splitlines():
        line = raw.strip().rstrip(";")
        if not line or line.startswith("graph") or line == "}":
            continue
        if "--" in line:
            u, v = (int(part.strip()) for part in line.split("--"))
            edges.append((u, v))
        else:
            verts.append(int(line))
    return Graph(verts + [u for e in edges for u in e], edges)
