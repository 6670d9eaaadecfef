"""Circle-graph machinery for classifying distributable states.

The local-equivalence class of a cycle graph is carried by a 4-regular
circulant multigraph: every Eulerian tour on it has an interlacement
graph locally equivalent to the cycle.  Measuring out a vertex of the
cycle corresponds to rewiring the four edges at the matching multigraph
vertex in one of three ways (the X/Y/Z fragments), and attaching a leaf
corresponds to splitting a vertex along a tour (leaf expansion).  The
words over {X, Y, Z} that drive these rewirings classify everything a
zigzag- or honeycomb-shaped resource can hand to the users.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .graphs import (
    Graph,
    ShapeClass,
    classify_graph,
    complete_graph,
    cycle_graph,
    locally_equivalent,
    measure_pauli,
    path_graph,
)

# An edge end is (vertex, tag); tags +-1/+-2 record which of the four
# circulant slots the end occupies at its vertex, None for untagged ends.
End = tuple[int, int | None]
MEdge = tuple[End, End]

#: how each measurement letter pairs up the four slots at a vertex
FRAGMENT_PAIRINGS = {
    "X": ((-1, 1), (-2, 2)),
    "Y": ((1, -2), (-1, 2)),
    "Z": ((-1, -2), (1, 2)),
}


def check_word(word: str) -> str:
    if not word:
        raise ValueError("word is empty")
    bad = set(word) - set("XYZ")
    if bad:
        raise ValueError(f"word letters must be X/Y/Z, got {sorted(bad)}")
    return word


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph with tagged edge ends; loops count degree 2."""

    vertices: tuple[int, ...]
    edges: tuple[MEdge, ...]

    def __post_init__(self) -> None:
        vset = set(self.vertices)
        for (u, _), (v, _) in self.edges:
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u},{v}) references a missing vertex")

    @classmethod
    def from_pairs(cls, vertices: Iterable[int], pairs: Iterable[tuple[int, int]]) -> Multigraph:
        return cls(tuple(vertices), tuple(((u, None), (v, None)) for u, v in pairs))

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for (a, _), (b, _) in self.edges)

    def edge_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(tuple(sorted((a, b))) for (a, _), (b, _) in self.edges))

    def is_four_regular(self) -> bool:
        return all(self.degree(v) == 4 for v in self.vertices)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for (a, _), (b, _) in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)


def build_circulant(n: int) -> Multigraph:
    """The 4-regular multigraph carrying the LC class of the n-cycle.

    Vertices 0..n-1 with i ~ j iff |i - j| <= 2 (mod n).  Edge ends are
    tagged with their slot (+-1 for the near edges, +-2 for the skips).
    """
    if n < 5:
        raise ValueError("circulant needs n >= 5")
    edges: list[MEdge] = []
    for i in range(n):
        edges.append(((i, 1), ((i + 1) % n, -1)))
        edges.append(((i, 2), ((i + 2) % n, -2)))
    return Multigraph(tuple(range(n)), tuple(edges))


@dataclass(frozen=True)
class EulerianTour:
    """A closed tour: sequence[i] -- sequence[i+1] is edge edge_ids[i]."""

    sequence: tuple[int, ...]
    edge_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.sequence) != len(self.edge_ids):
            raise ValueError("need one edge per step (closed tour)")


def validate_tour(mg: Multigraph, tour: EulerianTour) -> None:
    if sorted(tour.edge_ids) != list(range(len(mg.edges))):
        raise ValueError("tour must use every edge exactly once")
    n = len(tour.sequence)
    for i in range(n):
        a, b = tour.sequence[i], tour.sequence[(i + 1) % n]
        (u, _), (v, _) = mg.edges[tour.edge_ids[i]]
        if {a, b} != {u, v} and not (a == b == u == v):
            raise ValueError(f"step {i} does not follow edge {tour.edge_ids[i]}")


def canonical_tour(n: int) -> EulerianTour:
    """The tour 0,2,1,3,2,4,... on the circulant whose interlacement is C_n."""
    if n % 2 != 0:
        raise ValueError("the canonical pattern needs even n; use find_tour instead")
    if n < 6:
        raise ValueError("canonical tour needs n >= 6")
    seq: list[int] = []
    ids: list[int] = []
    for j in range(n):
        seq.append(j)
        seq.append((j + 2) % n)
        ids.append(2 * j + 1)  # the (j, j+2) skip edge
        ids.append(2 * ((j + 1) % n))  # the (j+1, j+2) near edge, walked backwards
    return EulerianTour(tuple(seq), tuple(ids))


def find_tour(mg: Multigraph) -> EulerianTour:
    """Hierholzer's algorithm; deterministic given the edge ordering."""
    if not mg.is_connected():
        raise ValueError("multigraph is disconnected")
    if any(mg.degree(v) % 2 for v in mg.vertices):
        raise ValueError("odd-degree vertex; no Eulerian tour")
    if not mg.edges:
        raise ValueError("no edges to tour")
    incident: dict[int, list[int]] = {v: [] for v in mg.vertices}
    for idx, ((u, _), (v, _)) in enumerate(mg.edges):
        incident[u].append(idx)
        if v != u:
            incident[v].append(idx)
    for lst in incident.values():
        lst.sort(reverse=True)  # pop() takes the smallest id
    used = [False] * len(mg.edges)
    start = mg.vertices[0]
    stack: list[tuple[int, int | None]] = [(start, None)]  # (vertex, edge used to get here)
    path: list[tuple[int, int | None]] = []
    while stack:
        v, via = stack[-1]
        lst = incident[v]
        while lst and used[lst[-1]]:
            lst.pop()
        if not lst:
            path.append(stack.pop())
            continue
        eid = lst.pop()
        used[eid] = True
        (a, _), (b, _) = mg.edges[eid]
        nxt = b if a == v else a
        stack.append((nxt, eid))
    path.reverse()
    seq = tuple(v for v, _ in path[:-1])
    ids = tuple(e for _, e in path[1:])
    if len(ids) != len(mg.edges):
        raise ValueError("multigraph is disconnected")  # unreachable edges remain
    return EulerianTour(seq, ids)


def interlacement(tour: EulerianTour) -> Graph:
    """Two vertices are adjacent iff their visits alternate along the tour."""
    positions: dict[int, list[int]] = {}
    for i, v in enumerate(tour.sequence):
        positions.setdefault(v, []).append(i)
    for v, pos in positions.items():
        if len(pos) != 2:
            raise ValueError(f"vertex {v} visited {len(pos)} times; need a 4-regular tour")
    verts = sorted(positions)
    n = len(tour.sequence)
    edges = []
    for i, u in enumerate(verts):
        a1, a2 = positions[u]
        for w in verts[i + 1 :]:
            inside = sum(1 for p in positions[w] if a1 < p < a2)
            if inside == 1:
                edges.append((u, w))
    return Graph(verts, edges)


# ---------------------------------------------------------------------------
# transition fragments
# ---------------------------------------------------------------------------


def apply_word(mg: Multigraph, measured: Sequence[int], word: str) -> Multigraph:
    """Replace each measured vertex by its X/Y/Z fragment.

    Requires the ends at each measured vertex to carry the four circulant
    slot tags (build_circulant output, possibly already rewired at other
    vertices).  Fragments may disconnect the multigraph; closed wires
    that touch no surviving vertex are dropped.
    """
    check_word(word)
    if len(measured) != len(word):
        raise ValueError(f"{len(measured)} measured vertices but {len(word)} letters")
    edges: dict[int, list[End]] = {i: list(e) for i, e in enumerate(mg.edges)}
    next_id = len(mg.edges)
    for v, letter in zip(measured, word):
        slots: dict[int, tuple[int, int]] = {}  # tag -> (edge id, side)
        for eid, ends in edges.items():
            for side, (vert, tag) in enumerate(ends):
                if vert == v:
                    if tag is None or tag in slots:
                        raise ValueError(f"vertex {v} lacks distinct slot tags")
                    slots[tag] = (eid, side)
        if set(slots) != {-2, -1, 1, 2}:
            raise ValueError(f"vertex {v} does not have the four circulant slots")
        # junction partners among v's slots per the letter's pairing
        partner: dict[tuple[int, int], tuple[int, int]] = {}
        for ta, tb in FRAGMENT_PAIRINGS[letter]:
            partner[slots[ta]] = slots[tb]
            partner[slots[tb]] = slots[ta]
        # walk wires: from each external end, cross edges and junctions
        handled: set[tuple[int, int]] = set()
        new_edges: list[list[End]] = []
        for tag in (-2, -1, 1, 2):
            eid, side = slots[tag]
            if (eid, side) in handled:
                continue
            # walk outward: start at this junction slot
            chain_ends: list[End] = []
            cursor = (eid, side)
            closed = False
            while True:
                handled.add(cursor)
                cur_eid, cur_side = cursor
                far = edges[cur_eid][1 - cur_side]
                if (cur_eid, 1 - cur_side) in partner or far[0] == v:
                    # the far side is also a junction slot at v
                    handled.add((cur_eid, 1 - cur_side))
                    nxt = partner[(cur_eid, 1 - cur_side)]
                    if nxt in handled:
                        closed = True
                        break
                    cursor = nxt
                else:
                    chain_ends.append(far)
                    break
            if closed:
                continue  # free loop, dropped
            # walk the other direction from the starting slot's junction partner
            cursor = partner[(eid, side)]
            while True:
                handled.add(cursor)
                cur_eid, cur_side = cursor
                far = edges[cur_eid][1 - cur_side]
                if far[0] == v:
                    handled.add((cur_eid, 1 - cur_side))
                    cursor = partner[(cur_eid, 1 - cur_side)]
                else:
                    chain_ends.append(far)
                    break
            if len(chain_ends) == 2:
                new_edges.append(chain_ends)
        for eid in [eid for eid, ends in edges.items() if v in (ends[0][0], ends[1][0])]:
            del edges[eid]
        for ends in new_edges:
            edges[next_id] = ends
            next_id += 1
    survivors = tuple(v for v in mg.vertices if v not in set(measured))
    return Multigraph(survivors, tuple(tuple(e) for e in edges.values()))


def leaf_expansion(
    mg: Multigraph, tour: EulerianTour, v: int, leaf_label: int | None = None
) -> tuple[Multigraph, EulerianTour]:
    """Split v along the tour, adding a double edge between the halves.

    The vertex holding the first tour visit becomes a fresh leaf label;
    the second visit keeps the label v, so the inherited tour's
    interlacement graph equals the old one plus one leaf attached to v.
    """
    if v not in mg.vertices:
        raise ValueError(f"unknown vertex {v}")
    if any(a == b == v for (a, _), (b, _) in mg.edges):
        raise ValueError(f"vertex {v} carries a self-loop; expansion unsupported")
    validate_tour(mg, tour)
    positions = [i for i, w in enumerate(tour.sequence) if w == v]
    if len(positions) != 2:
        raise ValueError(f"vertex {v} must be visited exactly twice")
    if leaf_label is None:
        leaf_label = max(mg.vertices) + 1
    p1, _ = positions
    n = len(tour.sequence)
    visit1_edges = {tour.edge_ids[(p1 - 1) % n], tour.edge_ids[p1]}

    def reassign(eid: int, ends: MEdge) -> MEdge:
        return tuple(
            (leaf_label, tag) if vert == v and eid in visit1_edges else (vert, tag)
            for vert, tag in ends
        )

    new_edges = [reassign(eid, ends) for eid, ends in enumerate(mg.edges)]
    d1 = ((leaf_label, None), (v, None))
    d2 = ((leaf_label, None), (v, None))
    new_edges += [d1, d2]
    m1, m2 = len(mg.edges), len(mg.edges) + 1
    verts = tuple(list(mg.vertices) + [leaf_label])
    new_mg = Multigraph(verts, tuple(new_edges))
    # inherited tour: visit 1 becomes leaf, v2, leaf; visit 2 keeps v
    seq: list[int] = []
    ids: list[int] = []
    for i, w in enumerate(tour.sequence):
        if i == p1:
            seq += [leaf_label, v, leaf_label]
            ids += [m1, m2, tour.edge_ids[i]]
        else:
            seq.append(w)
            ids.append(tour.edge_ids[i])
    new_tour = EulerianTour(tuple(seq), tuple(ids))
    validate_tour(new_mg, new_tour)
    return new_mg, new_tour


# ---------------------------------------------------------------------------
# word classification
# ---------------------------------------------------------------------------


def predict_representative(
    word: str, close: bool, survivors: Sequence[int] | None = None
) -> Graph:
    """Build the graph a word is predicted to leave on the survivors.

    For a closed word of length k there are k survivors, ``survivors[i]``
    sitting just after the i-th measured vertex around the cycle; an open
    word has one more survivor at the head.  Y letters extend the spine,
    X letters hang the following survivor as a leaf off the most recent
    spine vertex, and Z letters cut.  With no Z a closed word's spine
    wraps into a cycle, degenerating to no edge below three spine
    vertices and to a complete graph for the all-X word.
    """
    check_word(word)
    k = len(word)
    n_survivors = k if close else k + 1
    if survivors is None:
        survivors = list(range(n_survivors))
    if len(survivors) != n_survivors:
        raise ValueError(f"need {n_survivors} survivor labels, got {len(survivors)}")
    if close:
        head = None
        after = list(survivors)  # after[i] follows measured vertex i
    else:
        head, *after = survivors

    edges: list[tuple[int, int]] = []
    if close and "Z" not in word:
        y_pos = [i for i, c in enumerate(word) if c == "Y"]
        if not y_pos:
            return complete_graph(after)
        spine = [after[i] for i in y_pos]
        if len(spine) >= 3:
            edges += list(zip(spine, spine[1:])) + [(spine[-1], spine[0])]
        for i, c in enumerate(word):
            if c == "X":
                prev_y = max((p for p in y_pos if p < i), default=y_pos[-1])
                edges.append((after[i], after[prev_y]))
        return Graph(after, edges)

    # cut at Z letters; each maximal Z-free run is one caterpillar component
    runs: list[tuple[int | None, list[int]]]  # (boundary letter index, letter run)
    if close:
        z_pos = [i for i, c in enumerate(word) if c == "Z"]
        runs = []
        for zi, z in enumerate(z_pos):
            nxt = z_pos[(zi + 1) % len(z_pos)]
            run = []
            i = (z + 1) % k
            while i != nxt:
                run.append(i)
                i = (i + 1) % k
            runs.append((z, run))
    else:
        bounds = [None] + [i for i, c in enumerate(word) if c == "Z"]
        runs = []
        for bi, b in enumerate(bounds):
            start = 0 if b is None else b + 1
            end = bounds[bi + 1] if bi + 1 < len(bounds) else k
            runs.append((b, list(range(start, end))))
    for boundary, run in runs:
        spine_tail = head if boundary is None else after[boundary]
        for i in run:
            if word[i] == "Y":
                if spine_tail is not None:
                    edges.append((spine_tail, after[i]))
                spine_tail = after[i]
            else:  # X
                edges.append((after[i], spine_tail))
    verts = ([head] if head is not None else []) + after
    return Graph(verts, edges)


def predict_class(word: str, close: bool) -> ShapeClass:
    """Classify what a measurement word leaves behind, with its witness."""
    rep = predict_representative(word, close)
    return classify_graph(rep)


def components_of(mg: Multigraph) -> list[Multigraph]:
    adj: dict[int, set[int]] = {v: set() for v in mg.vertices}
    for (a, _), (b, _) in mg.edges:
        adj[a].add(b)
        adj[b].add(a)
    seen: set[int] = set()
    out = []
    for v in mg.vertices:
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        while stack:
            for w in adj[stack.pop()]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        verts = tuple(u for u in mg.vertices if u in comp)
        edges = tuple(e for e in mg.edges if e[0][0] in comp)
        out.append(Multigraph(verts, edges))
    return out


def tour_interlacement(mg: Multigraph) -> Graph:
    """Interlacement graph of one Eulerian tour per connected component."""
    verts: list[int] = []
    edges: list[tuple[int, int]] = []
    for comp in components_of(mg):
        if not comp.edges:
            verts.extend(comp.vertices)
            continue
        g = interlacement(find_tour(comp))
        verts.extend(g.vertices)
        edges.extend(g.edges)
    return Graph(verts, edges)


# ---------------------------------------------------------------------------
# resources and the cross-check
# ---------------------------------------------------------------------------

RESOURCES = ("zigzag", "honeycomb", "path_every_third")


def zigzag_resource(n: int) -> tuple[Graph, list[int], list[int]]:
    """Closed zigzag: the n-cycle with the server holding every other vertex.

    Returns (graph, measured server vertices, survivor vertices); survivor
    i follows measured i around the cycle.
    """
    if n % 2 or n < 6:
        raise ValueError("zigzag needs even n >= 6")
    g = cycle_graph(range(n))
    measured = [2 * i for i in range(n // 2)]
    survivors = [2 * i + 1 for i in range(n // 2)]
    return g, measured, survivors


def honeycomb_resource(n: int) -> tuple[Graph, list[int], list[int]]:
    """The zigzag cycle with one extra user leaf on every unmeasured vertex."""
    g, measured, survivors = zigzag_resource(n)
    for s in survivors:
        g = g.add_vertex(100 + s).add_edge(s, 100 + s)
    return g, measured, survivors


def honeycomb_multigraph(n: int) -> tuple[Multigraph, EulerianTour]:
    """The 4-regular multigraph carrying the honeycomb's equivalence class.

    Built by leaf-expanding the circulant at every unmeasured vertex, so
    the inherited tour's interlacement graph is exactly the honeycomb
    (leaf 100+s attached to survivor s).  The measured vertices keep
    their original slot tags and can be rewired by apply_word.
    """
    mg = build_circulant(n)
    tour = canonical_tour(n)
    for s in range(1, n, 2):
        mg, tour = leaf_expansion(mg, tour, s, leaf_label=100 + s)
    return mg, tour


def path_every_third_resource(n: int) -> tuple[Graph, list[int], list[int]]:
    """An n-vertex path where the server holds every third vertex."""
    if n % 3 != 1 or n < 4:
        raise ValueError("needs n = 3m + 1 so both path ends are server-held")
    g = path_graph(range(n))
    measured = [3 * i for i in range(n // 3 + 1)]
    survivors = [v for v in range(n) if v % 3 != 0]
    return g, measured, survivors


def simulate_word(g: Graph, measured: Sequence[int], word: str) -> Graph:
    """Measure the listed vertices per the word using the rewrite rules."""
    check_word(word)
    if len(measured) != len(word):
        raise ValueError("one letter per measured vertex")
    for v, letter in zip(measured, word):
        g = measure_pauli(g, v, letter)
    return g


def crosscheck(n: int, word: str, resource: str = "zigzag") -> bool:
    """Does the word-level prediction match the rewrite-rule simulation?

    For the zigzag the prediction is the combinatorial spine/leaf rule;
    for the honeycomb it is the transition minor of the leaf-expanded
    multigraph (the naive read-the-leaves-back shortcut fails whenever an
    X byproduct has to cross a leaf edge).  Both compare to the
    rewrite-rule simulation up to local equivalence.  The
    path-every-third resource instead checks the shape bound: every
    component is a caterpillar admitting at most one leaf per spine
    vertex.
    """
    if n > 12:
        raise ValueError("crosscheck capped at n = 12")
    if resource == "zigzag":
        g, measured, survivors = zigzag_resource(n)
        if len(word) != len(measured):
            raise ValueError(f"word length must be {len(measured)} for n={n}")
        sim = simulate_word(g, measured, word)
        pred = predict_representative(word, close=True, survivors=survivors)
        return locally_equivalent(sim, pred)
    if resource == "honeycomb":
        g, measured, survivors = honeycomb_resource(n)
        if len(word) != len(measured):
            raise ValueError(f"word length must be {len(measured)} for n={n}")
        sim = simulate_word(g, measured, word)
        mg, _ = honeycomb_multigraph(n)
        pred = tour_interlacement(apply_word(mg, measured, word))
        return locally_equivalent(sim, pred)
    if resource == "path_every_third":
        g, measured, survivors = path_every_third_resource(n)
        if len(word) != len(measured):
            raise ValueError(f"word length must be {len(measured)} for n={n}")
        sim = simulate_word(g, measured, word)
        return all(_single_leaf_caterpillar(sim, comp) for comp in sim.components())
    raise ValueError(f"unknown resource {resource!r}; use one of {RESOURCES}")


def _single_leaf_caterpillar(g: Graph, comp: frozenset[int]) -> bool:
    """Is some LC representative of the component a max-degree-3 caterpillar?

    A caterpillar whose maximum degree is three can always be re-rooted
    so that each spine vertex carries at most one leaf.
    """
    from .graphs import lc_orbit

    sub = g.induced(comp)
    if len(comp) <= 2:
        return True
    for rep in lc_orbit(sub):
        if max(rep.degree(v) for v in rep.vertices) > 3:
            continue
        if classify_graph(rep).label in ("path", "star", "caterpillar", "empty"):
            return True
    return False


def crosscheck_report(n: int, word: str, resource: str = "zigzag") -> dict:
    """JSON-friendly classification report for one word."""
    ok = crosscheck(n, word, resource)
    predicted = predict_class(word, close=resource in ("zigzag", "honeycomb"))
    if resource == "zigzag":
        g, measured, _ = zigzag_resource(n)
    elif resource == "honeycomb":
        g, measured, _ = honeycomb_resource(n)
    else:
        g, measured, _ = path_every_third_resource(n)
    sim = simulate_word(g, measured, word)
    return {
        "word": word,
        "resource": resource,
        "n": n,
        "predicted": predicted.label,
        "simulated": classify_graph(sim).label,
        "equivalent": ok,
    }


# -- serialization ------------------------------------------------------------


def multigraph_to_json_dict(mg: Multigraph) -> dict:
    counts: dict[tuple[int, int], int] = {}
    for pair in mg.edge_pairs():
        counts[pair] = counts.get(pair, 0) + 1
    return {
        "vertices": sorted(mg.vertices),
        "edges": [[u, v, c] for (u, v), c in sorted(counts.items())],
    }


def multigraph_from_json_dict(payload: dict) -> Multigraph:
    pairs: list[tuple[int, int]] = []
    for u, v, c in payload["edges"]:
        pairs.extend([(u, v)] * c)
    return Multigraph.from_pairs(payload["vertices"], pairs)
