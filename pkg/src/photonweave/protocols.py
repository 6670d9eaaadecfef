"""Distribution protocols of the weaving server, run through both engines.

Every protocol exists twice: a graph-level runner that returns the
distributed graph, the exact dyadic success probability, and the
post-processing corrections, and an optics realization that builds the
actual PBS/HWP circuit at oracle scale.  Tests assert that the two
layers agree state-by-state.

Label conventions: users are 1..M in weaving order; server-held
vertices are 0 or negative.  Corrections are recorded in the frame of
``final_graph`` (where the distributed state *is* that graph state);
a graph-frame Z on a user is a polarization X on their photon, after
the frame Hadamards listed alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import optics as po
from .graphs import Graph, cycle_graph, measure_pauli, path_graph, star_graph
from .states import StateVector

BLOCK_KINDS = ("path4", "star4", "three")

#: per-block Bell-pair budget (shared pairs + server-internal pairs)
BLOCK_BELL_PAIRS = {"path4": 4, "star4": 4, "three": 3}
BLOCK_EXPONENTS = {"path4": 3, "star4": 3, "three": 2}


@dataclass(frozen=True)
class ProtocolResult:
    protocol: str
    final_graph: Graph
    success_exponent: int  # success probability is exactly 2**-success_exponent
    measurement_record: tuple[tuple[str, str], ...]  # (photon label, outcome)
    m_minus: int
    corrections: tuple[tuple[int, str], ...]  # (vertex, Pauli/H) in graph frame
    resources: dict[str, int] = field(default_factory=dict)

    @property
    def success_probability(self) -> Fraction:
        return Fraction(1, 2**self.success_exponent)


def _canonical_outcomes(outcomes: str | None, length: int) -> str:
    if outcomes is None:
        outcomes = "+" * length
    if len(outcomes) != length or any(c not in "+-" for c in outcomes):
        raise ValueError(f"need {length} outcomes over '+-', got {outcomes!r}")
    return outcomes


# ---------------------------------------------------------------------------
# GHZ protocol
# ---------------------------------------------------------------------------


def run_ghz(
    m_users: int,
    server_participates: bool = False,
    outcomes: str | None = None,
) -> ProtocolResult:
    """Distribute a GHZ state to m_users by interfering their shared photons.

    The server detects its photons in the +/- basis (keeping one photon
    when participating); an odd number of '-' results flips the GHZ
    parity and costs one Z correction.
    """
    if not 2 <= m_users <= 8:
        raise ValueError("ghz supports 2..8 users")
    detected = m_users - (1 if server_participates else 0)
    outcomes = _canonical_outcomes(outcomes, detected)
    m_minus = outcomes.count("-")
    users = list(range(1, m_users + 1))
    if server_participates:
        final = star_graph(0, users)
        center = 0
    else:
        final = star_graph(users[0], users[1:])
        center = users[0]
    corrections: list[tuple[int, str]] = [(u, "H") for u in final.vertices if u != center]
    if m_minus % 2 == 1:
        corrections.append((center, "Z"))
    record = tuple((f"b{j}", out) for j, out in enumerate(outcomes, start=1))
    return ProtocolResult(
        protocol="ghz",
        final_graph=final,
        success_exponent=m_users - 1,
        measurement_record=record,
        m_minus=m_minus,
        corrections=tuple(corrections),
        resources={"bell_pairs": m_users},
    )


def ghz_optics(
    m_users: int,
    server_participates: bool = False,
    outcomes: str | None = None,
) -> tuple[StateVector, float, tuple[tuple[str, str], ...]]:
    """Exact circuit for the GHZ protocol; returns (state, probability, record)."""
    s = po.prepare([po.GBell(100 + i, i) for i in range(1, m_users + 1)])
    for j in range(1, m_users):
        s = po.apply_pbs(s, j, j + 1)
    ports = [100 + i for i in range(1, m_users + 1)] + list(range(1, m_users + 1))
    s, prob = po.postselect_coincidence(s, ports)
    detected = m_users - (1 if server_participates else 0)
    outcomes = _canonical_outcomes(outcomes, detected)
    record = []
    for j, out in zip(range(1, detected + 1), outcomes):
        s = _pick(po.measure_polarization(s, j, "PM"), out)
        record.append((f"b{j}", out))
    port_map = {100 + i: i for i in range(1, m_users + 1)}
    if server_participates:
        port_map[m_users] = 0
    return po.extract_logical(s, port_map), prob, tuple(record)


# ---------------------------------------------------------------------------
# path / caterpillar / cycle protocols (graph-state weaving)
# ---------------------------------------------------------------------------


def _pick(branches, outcome):
    return next(b[2] for b in branches if b[0] == outcome)


def run_path(
    m_users: int,
    server_participates: bool = False,
    outcomes: str | None = None,
    weaver_outcome: str = "H",
) -> ProtocolResult:
    """Weave the users' photons into a path graph state over users 1..M.

    One shared photon acts as the weaving photon; the server detects the
    woven photons in +/- and the weaver in H/V.  With participation the
    weaver is stored instead and the server holds an outer path qubit.
    """
    if not 2 <= m_users <= 7:
        raise ValueError("path supports 2..7 users")
    outcomes = _canonical_outcomes(outcomes, m_users - 1)
    if weaver_outcome not in "HV":
        raise ValueError("weaver outcome is 'H' or 'V'")
    users = list(range(1, m_users + 1))
    final = path_graph(users + [0]) if server_participates else path_graph(users)
    corrections = [(u, "H") for u in users[1:]]
    m_minus = outcomes.count("-")
    for j, out in zip(range(2, m_users + 1), outcomes):
        if out == "-":
            corrections.append((j, "Z"))
    record = [(f"b{j}", out) for j, out in zip(range(2, m_users + 1), outcomes)]
    if not server_participates:
        record.append(("b1", weaver_outcome))
        if weaver_outcome == "V":
            corrections.append((m_users, "Z"))
    return ProtocolResult(
        protocol="path",
        final_graph=final,
        success_exponent=m_users - 1,
        measurement_record=tuple(record),
        m_minus=m_minus,
        corrections=tuple(corrections),
        resources={"bell_pairs": m_users},
    )


def comb_graph(m_users: int) -> Graph:
    """The exact intermediate of the path circuit, before server detection.

    A caterpillar with server spine b_2..b_M: user j hangs off b_j, while
    the weaving photon's user shares b_2 and the weaver itself hangs off
    b_M.  Server vertices are encoded as 200 + j.
    """
    users = list(range(1, m_users + 1))
    server = [200 + j for j in range(1, m_users + 1)]
    edges = [(200 + j, j) for j in range(2, m_users + 1)]
    edges += [(200 + j, 200 + j + 1) for j in range(2, m_users)]
    edges += [(200 + 2, 1), (200 + m_users, 201)]
    return Graph(users + server, edges)


def textbook_comb(m_users: int) -> Graph:
    """The stylized comb: an M-vertex server spine with one user leaf each."""
    edges = [(200 + j, j) for j in range(1, m_users + 1)]
    edges += [(200 + j, 200 + j + 1) for j in range(1, m_users)]
    return Graph(
        list(range(1, m_users + 1)) + [200 + j for j in range(1, m_users + 1)], edges
    )


def path_optics(
    m_users: int,
    server_participates: bool = False,
    outcomes: str | None = None,
    weaver_outcome: str = "H",
    stop_before_measurement: bool = False,
):
    """Exact circuit for the path protocol (weaver = shared photon b_1).

    With ``stop_before_measurement`` the postselected pre-detection state
    is returned instead, with server photons mapped to 200 + j.
    """
    s = po.prepare([po.GBell(100 + i, i) for i in range(1, m_users + 1)])
    for j in range(2, m_users + 1):
        s = po.apply_pbs(s, 1, j)
        s = po.apply_hwp(s, 1, 22.5)
    ports = [100 + i for i in range(1, m_users + 1)] + list(range(1, m_users + 1))
    s, prob = po.postselect_coincidence(s, ports)
    if stop_before_measurement:
        port_map = {100 + i: i for i in range(1, m_users + 1)}
        port_map |= {j: 200 + j for j in range(1, m_users + 1)}
        return po.extract_logical(s, port_map), prob, ()
    outcomes = _canonical_outcomes(outcomes, m_users - 1)
    record = []
    for j, out in zip(range(2, m_users + 1), outcomes):
        s = _pick(po.measure_polarization(s, j, "PM"), out)
        record.append((f"b{j}", out))
    port_map = {100 + i: i for i in range(1, m_users + 1)}
    if server_participates:
        port_map[1] = 0
    else:
        s = _pick(po.measure_polarization(s, 1, "HV"), weaver_outcome)
        record.append(("b1", weaver_outcome))
    return po.extract_logical(s, port_map), prob, tuple(record)


def run_cycle(m_users: int, outcomes: str | None = None, weaver_outcome: str = "H") -> ProtocolResult:
    """Weave a cycle over the users plus one stored server qubit.

    The weaving photon belongs to a server-internal pair; closing the
    path costs one extra fusion, giving the 2^-(M+1) success exponent.
    """
    if not 3 <= m_users <= 6:
        raise ValueError("cycle supports 3..6 users")
    outcomes = _canonical_outcomes(outcomes, m_users)
    users = list(range(1, m_users + 1))
    final = cycle_graph([0] + users)
    corrections = [(u, "H") for u in users]
    m_minus = outcomes.count("-")
    for j, out in zip(users, outcomes):
        if out == "-":
            corrections.append((j, "Z"))
    record = [(f"b{j}", out) for j, out in zip(users, outcomes)]
    record.append(("w", weaver_outcome))
    if weaver_outcome == "V":
        corrections.append((0, "Z"))
    return ProtocolResult(
        protocol="cycle",
        final_graph=final,
        success_exponent=m_users + 1,
        measurement_record=tuple(record),
        m_minus=m_minus,
        corrections=tuple(corrections),
        resources={"bell_pairs": m_users + 1},
    )


def cycle_optics(
    m_users: int, outcomes: str | None = None, weaver_outcome: str = "H"
) -> tuple[StateVector, float, tuple[tuple[str, str], ...]]:
    """Exact circuit for the cycle protocol: weave all users, then fuse ends.

    Closure follows the self-fusion recipe: the stored server photon and
    the weaver interfere at a PBS, the weaver side is rotated, and its
    H/V detection removes it as a leaf on the server qubit.
    """
    sources = [po.GBell(50, 0)] + [po.GBell(100 + i, i) for i in range(1, m_users + 1)]
    s = po.prepare(sources)
    for j in range(1, m_users + 1):
        s = po.apply_pbs(s, 50, j)
        s = po.apply_hwp(s, 50, 22.5)
    s = po.apply_pbs(s, 0, 50)
    s = po.apply_hwp(s, 50, 22.5)
    ports = [100 + i for i in range(1, m_users + 1)] + list(range(0, m_users + 1)) + [50]
    s, prob = po.postselect_coincidence(s, ports)
    outcomes = _canonical_outcomes(outcomes, m_users)
    record = []
    for j, out in zip(range(1, m_users + 1), outcomes):
        s = _pick(po.measure_polarization(s, j, "PM"), out)
        record.append((f"b{j}", out))
    s = _pick(po.measure_polarization(s, 50, "HV"), weaver_outcome)
    record.append(("w", weaver_outcome))
    port_map = {100 + i: i for i in range(1, m_users + 1)} | {0: 0}
    return po.extract_logical(s, port_map), prob, tuple(record)


# ---------------------------------------------------------------------------
# caterpillar protocol
# ---------------------------------------------------------------------------


def _check_layout(layout: Sequence[str]) -> None:
    if not layout:
        raise ValueError("layout is empty")
    if any(kind not in ("spine", "leaf") for kind in layout):
        raise ValueError("layout entries are 'spine' or 'leaf'")
    if layout[0] != "spine":
        raise ValueError("a leaf needs a spine vertex before it")


def caterpillar_layout_graph(layout: Sequence[str], close_cycle: bool = False) -> Graph:
    """The caterpillar (or leafed cycle) a layout describes over users 1..M.

    Leaf users attach to the most recent spine user; with close_cycle the
    spine closes through the stored server qubit 0.
    """
    _check_layout(layout)
    m = len(layout)
    spine = [i + 1 for i, kind in enumerate(layout) if kind == "spine"]
    edges: list[tuple[int, int]] = []
    last = None
    for i, kind in enumerate(layout):
        if kind == "spine":
            last = i + 1
        else:
            edges.append((last, i + 1))
    if close_cycle:
        if len(spine) < 2:
            raise ValueError("closing needs at least two spine users")
        ring = [0] + spine
        edges += list(zip(ring, ring[1:])) + [(ring[-1], ring[0])]
        return Graph([0] + list(range(1, m + 1)), edges)
    edges += list(zip(spine, spine[1:]))
    return Graph(range(1, m + 1), edges)


def run_caterpillar(layout: Sequence[str], close_cycle: bool = False) -> ProtocolResult:
    """Distribute the caterpillar described by the layout.

    Spine users extend the woven path; leaf users join the previous spine
    user's redundant cluster (a weave step without the polarization
    rotation).  Open runs cost 2^-(M-1); closing through a server pair
    costs 2^-(M+1).
    """
    _check_layout(layout)
    m = len(layout)
    if m > 7:
        raise ValueError("caterpillar supports up to 7 users")
    final = caterpillar_layout_graph(layout, close_cycle)
    exponent = m + 1 if close_cycle else m - 1
    corrections = tuple((u, "H") for u in range(2, m + 1))
    return ProtocolResult(
        protocol="caterpillar",
        final_graph=final,
        success_exponent=exponent,
        measurement_record=(),
        m_minus=0,
        corrections=corrections,
        resources={"bell_pairs": m + (1 if close_cycle else 0)},
    )


def caterpillar_optics(
    layout: Sequence[str], close_cycle: bool = False
) -> tuple[StateVector, float]:
    """Exact circuit for the caterpillar protocol, canonical outcomes."""
    _check_layout(layout)
    m = len(layout)
    sources = [po.GBell(100 + i, i) for i in range(1, m + 1)]
    if close_cycle:
        sources = [po.GBell(50, 0)] + sources
        s = po.prepare(sources)
        weaver = 50
        s = po.apply_pbs(s, weaver, 1)
        first_woven = 1
    else:
        s = po.prepare(sources)
        weaver = 1
        first_woven = 2
    for j in range(2, m + 1):
        if layout[j - 1] == "spine":
            s = po.apply_hwp(s, weaver, 22.5)
        s = po.apply_pbs(s, weaver, j)
    if close_cycle:
        s = po.apply_hwp(s, weaver, 22.5)
        s = po.apply_pbs(s, 0, weaver)
    s = po.apply_hwp(s, weaver, 22.5)
    ports = [100 + i for i in range(1, m + 1)] + list(range(first_woven - 1, m + 1))
    if close_cycle:
        ports.append(50)
        ports = sorted(set(ports + [0]))
    s, prob = po.postselect_coincidence(s, ports)
    for j in range(first_woven, m + 1):
        s = _pick(po.measure_polarization(s, j, "PM"), "+")
    s = _pick(po.measure_polarization(s, weaver, "HV"), "H")
    port_map = {100 + i: i for i in range(1, m + 1)}
    if close_cycle:
        port_map |= {0: 0}
    return po.extract_logical(s, port_map), prob


# ---------------------------------------------------------------------------
# graph-level fusion operations
# ---------------------------------------------------------------------------


def weave_graphs(g1: Graph, m: int, g2: Graph, n: int, aux: int | None = None) -> Graph:
    """Connect two disjoint graphs by weaving qubits m and n.

    The result is the union plus the edge {m, n}, with the fresh weaving
    photon left attached to n only.  The optical gate succeeds with
    probability 1/4 (two postselected interferences).
    """
    if set(g1.vertices) & set(g2.vertices):
        raise ValueError("graphs must carry disjoint labels")
    g1._require(m)
    g2._require(n)
    if aux is None:
        aux = max(list(g1.vertices) + list(g2.vertices)) + 1
    out = g1.disjoint_union(g2).add_vertex(aux)
    return out.add_edge(m, n).add_edge(n, aux)


def fuse_within(g: Graph, f: int, l: int) -> Graph:
    """Fuse two non-adjacent qubits of one graph state (PBS + rotation).

    Every neighbor of l is rewired onto f and l stays attached to f only.
    Fusing a path's ends this way closes it into a cycle with one leaf.
    The postselected optical fusion succeeds with probability 1/2.
    """
    g._require(f, l)
    if f == l:
        raise ValueError("need two distinct qubits")
    if g.has_edge(f, l):
        raise ValueError("adjacent qubits cannot be fused; postselection interferes")
    moved = g.neighbors(l) - {f}
    out = g.with_edges_toggled((l, x) for x in moved)  # detach l
    add = [(f, x) for x in moved if not out.has_edge(f, x)]
    out = out.with_edges_toggled(add)
    return out.add_edge(f, l)


def fuse_merge(g1: Graph, a: int, g2: Graph, b: int, merged: int) -> Graph:
    """Successful type-I fusion: qubits a and b collapse into one vertex.

    The merged vertex inherits the union of both neighborhoods.
    """
    if set(g1.vertices) & set(g2.vertices):
        raise ValueError("graphs must carry disjoint labels")
    nbrs = set(g1.neighbors(a)) | set(g2.neighbors(b))
    g = g1.disjoint_union(g2)
    keep = [v for v in g.vertices if v not in (a, b)]
    g = g.induced(keep).add_vertex(merged)
    for x in sorted(nbrs):
        g = g.add_edge(merged, x)
    return g


# ---------------------------------------------------------------------------
# building blocks and fusion chains
# ---------------------------------------------------------------------------


def _block_graph(kind: str, users: list[int], left: int, right: int) -> Graph:
    if kind == "three":
        return path_graph([left, users[0], right])
    if kind == "path4":
        return path_graph([left, users[0], users[1], right])
    return star_graph(users[0], [left, users[1], right])


def build_block(kind: str, index: int = 1) -> tuple[Graph, Fraction]:
    """One stored building block and its weaving success probability.

    path4: pL - u1 - u2 - pR with the server storing the outer photons;
    star4: a GHZ of both users and two stored photons; three: pL - u - pR
    around a single user.  Labels: users are 2k-1, 2k (or k for three),
    server photons are negative.
    """
    if kind not in BLOCK_KINDS:
        raise ValueError(f"unknown block kind {kind!r}")
    k = index
    left, right = -(2 * k - 1), -(2 * k)
    users = [k] if kind == "three" else [2 * k - 1, 2 * k]
    prob = Fraction(1, 2 ** BLOCK_EXPONENTS[kind])
    return _block_graph(kind, users, left, right), prob


def block_optics(kind: str) -> tuple[StateVector, float]:
    """Exact circuit for one building block (index 1 labels)."""
    if kind == "three":
        s = po.prepare([po.GBell(60, 50), po.GBell(101, 1), po.GBell(61, 51)])
        s = po.apply_pbs(s, 50, 1)
        s = po.apply_hwp(s, 50, 22.5)
        s = po.apply_pbs(s, 50, 51)
        s = po.apply_hwp(s, 50, 22.5)
        s, prob = po.postselect_coincidence(s, [60, 50, 101, 1, 61, 51])
        for p in (1, 51):
            s = _pick(po.measure_polarization(s, p, "PM"), "+")
        s = _pick(po.measure_polarization(s, 50, "HV"), "H")
        return po.extract_logical(s, {60: -1, 101: 1, 61: -2}), prob
    sources = [po.GBell(60, 50), po.GBell(101, 1), po.GBell(102, 2), po.GBell(61, 51)]
    s = po.prepare(sources)
    if kind == "path4":
        s = po.apply_pbs(s, 50, 1)
        for target in (2, 51):
            s = po.apply_hwp(s, 50, 22.5)
            s = po.apply_pbs(s, 50, target)
        s = po.apply_hwp(s, 50, 22.5)
        s, prob = po.postselect_coincidence(s, [60, 50, 101, 1, 102, 2, 61, 51])
        for p in (1, 2, 51):
            s = _pick(po.measure_polarization(s, p, "PM"), "+")
        s = _pick(po.measure_polarization(s, 50, "HV"), "H")
    elif kind == "star4":
        s = po.apply_pbs(s, 50, 1)
        s = po.apply_pbs(s, 1, 2)
        s = po.apply_pbs(s, 2, 51)
        s, prob = po.postselect_coincidence(s, [60, 50, 101, 1, 102, 2, 61, 51])
        for p in (50, 1, 2, 51):
            s = _pick(po.measure_polarization(s, p, "PM"), "+")
    else:
        raise ValueError(f"unknown block kind {kind!r}")
    return po.extract_logical(s, {60: -1, 101: 1, 102: 2, 61: -2}), prob


@dataclass(frozen=True)
class FusionPolicy:
    """Failure handling for chain fusions; only the published policy exists.

    On a failed fusion the incoming block is discarded, its users reset
    by Z measurements and re-entangled, and a fresh block is woven: a
    failure never restarts the chain.
    """

    on_failure: str = "discard-last-block"

    def __post_init__(self) -> None:
        if self.on_failure != "discard-last-block":
            raise ValueError("the only supported policy is 'discard-last-block'")


@dataclass(frozen=True)
class ChainResult:
    """Outcome of a fusion chain including its retry bookkeeping."""

    result: ProtocolResult | None  # None when a closure failure aborts
    succeeded: bool
    blocks_consumed: int
    bell_pairs_used: int
    fusion_attempts: int


def fuse_chain(
    blocks: Sequence[str],
    measurement_plan: Sequence[str | None] | None = None,
    close_cycle: bool = False,
    keep_server_ends: bool = False,
    rng: np.random.Generator | None = None,
    failure_schedule: Iterable[bool] | None = None,
    policy: FusionPolicy | None = None,
) -> ChainResult:
    """Fuse stored building blocks into one distributed graph state.

    Each fusion succeeds with probability 1/2.  On failure the incoming
    block is discarded (its users reset by Z measurements and re-entangle)
    and a fresh block is woven; the stored chain is untouched, so failures
    never restart the chain.  A closure-fusion failure aborts the whole
    cycle attempt instead.  ``measurement_plan`` gives one basis (or None)
    per joint, applied after all fusions; open-chain outer server photons
    are then removed unless ``keep_server_ends``.

    Fusion coins come from ``failure_schedule`` (True = fail) when given,
    otherwise from ``rng``; with neither, every fusion succeeds.
    """
    if policy is None:
        policy = FusionPolicy()
    blocks = [b.lower() for b in blocks]
    for b in blocks:
        if b not in BLOCK_KINDS:
            raise ValueError(f"unknown block kind {b!r}")
    if len(blocks) < 2:
        raise ValueError("a chain needs at least two blocks")
    joints = len(blocks) - 1 + (1 if close_cycle else 0)
    if measurement_plan is not None and len(measurement_plan) != joints:
        raise ValueError(f"plan length {len(measurement_plan)} != joints {joints}")
    schedule = iter(failure_schedule) if failure_schedule is not None else None

    def fusion_fails() -> bool:
        if schedule is not None:
            return bool(next(schedule, False))
        if rng is not None:
            return bool(rng.integers(0, 2))
        return False

    blocks_consumed = 0
    bell_pairs = 0
    attempts = 0
    joint_labels: list[int] = []
    next_user = 1

    def weave(kind: str, slot: int) -> tuple[Graph, int, int]:
        # users are numbered sequentially along the chain; retries reuse
        # the same labels since the block's users re-entangle
        nonlocal blocks_consumed, bell_pairs
        blocks_consumed += 1
        bell_pairs += BLOCK_BELL_PAIRS[kind]
        users = [next_user] if kind == "three" else [next_user, next_user + 1]
        left, right = -(2 * slot - 1), -(2 * slot)
        return _block_graph(kind, users, left, right), left, right

    chain, chain_left, chain_right = weave(blocks[0], 1)
    next_user += 1 if blocks[0] == "three" else 2
    next_joint = -1000
    for k, kind in enumerate(blocks[1:], start=2):
        incoming, in_left, in_right = weave(kind, k)
        attempts += 1
        while fusion_fails():
            attempts += 1
            incoming, in_left, in_right = weave(kind, k)
        next_user += 1 if kind == "three" else 2
        joint = next_joint
        next_joint -= 1
        chain = fuse_merge(chain, chain_right, incoming, in_left, joint)
        joint_labels.append(joint)
        chain_right = in_right
    closure_failed = False
    if close_cycle:
        attempts += 1
        if fusion_fails():
            closure_failed = True
        else:
            joint = next_joint
            nbrs = set(chain.neighbors(chain_right)) | set(chain.neighbors(chain_left))
            keep = [v for v in chain.vertices if v not in (chain_right, chain_left)]
            chain = chain.induced(keep).add_vertex(joint)
            for x in sorted(nbrs):
                chain = chain.add_edge(joint, x)
            joint_labels.append(joint)
    if closure_failed:
        return ChainResult(None, False, blocks_consumed, bell_pairs, attempts)

    if measurement_plan is not None:
        for joint, axis in zip(joint_labels, measurement_plan):
            if axis is None:
                continue
            chain = measure_pauli(chain, joint, axis)
    if not close_cycle and not keep_server_ends:
        for end in (chain_left, chain_right):
            if end in chain:
                chain = chain.without_vertex(end)

    exponent = sum(BLOCK_EXPONENTS[b] for b in blocks) + joints
    result = ProtocolResult(
        protocol="chain",
        final_graph=chain,
        success_exponent=exponent,
        measurement_record=(),
        m_minus=0,
        corrections=(),
        resources={
            "blocks": blocks_consumed,
            "bell_pairs": bell_pairs,
            "fusions": attempts,
        },
    )
    return ChainResult(result, True, blocks_consumed, bell_pairs, attempts)


# ---------------------------------------------------------------------------
# Monte Carlo estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloStats:
    trials: int
    successes: int
    estimated_probability: float
    std_error: float
    resource_means: dict[str, float]
    rng_seed: int
    analytic_probability: float | None = None
    deviation_sigmas: float | None = None
    flagged: bool = False  # estimate further than 3 sigma from analytic

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "estimated_probability": self.estimated_probability,
            "std_error": self.std_error,
            "resource_means": dict(sorted(self.resource_means.items())),
            "rng_seed": self.rng_seed,
            "analytic_probability": self.analytic_probability,
            "deviation_sigmas": self.deviation_sigmas,
            "flagged": self.flagged,
        }


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def run_request(request: dict, rng: np.random.Generator | None = None):
    """Run one protocol described by a request dict (see README schema)."""
    protocol = request["protocol"]
    if protocol == "ghz":
        return run_ghz(request["M"], request.get("server", False), request.get("outcomes"))
    if protocol == "path":
        return run_path(request["M"], request.get("server", False), request.get("outcomes"))
    if protocol == "cycle":
        return run_cycle(request["M"], request.get("outcomes"))
    if protocol == "caterpillar":
        return run_caterpillar(request["layout"], request.get("close", False))
    if protocol == "chain":
        chain = fuse_chain(
            request["blocks"],
            request.get("plan"),
            close_cycle=request.get("close", False),
            keep_server_ends=request.get("keep_server_ends", False),
            rng=rng,
        )
        return chain
    raise ValueError(f"unknown protocol {protocol!r}")


def monte_carlo(
    request: dict, trials: int, seed: int, trial_log: list | None = None
) -> MonteCarloStats:
    """Seeded Monte Carlo over protocol attempts.

    For postselected protocols each trial is one attempt (success with the
    analytic dyadic probability, outcomes sampled on success).  For chains
    each trial runs the full retry policy and records resource use.
    Per-trial generators are derived from (seed, trial) so results do not
    depend on evaluation order.  Pass a list as ``trial_log`` to collect
    (trial, success, resource...) rows for CSV export.
    """
    if trials < 1:
        raise ValueError("trials >= 1")
    protocol = request["protocol"]
    successes = 0
    resource_totals: dict[str, float] = {}
    analytic: float | None = None
    if protocol == "chain":
        for t in range(trials):
            rng = _trial_rng(seed, t)
            chain = run_request(request, rng=rng)
            if chain.succeeded:
                successes += 1
            resource_totals["blocks"] = resource_totals.get("blocks", 0) + chain.blocks_consumed
            resource_totals["bell_pairs"] = (
                resource_totals.get("bell_pairs", 0) + chain.bell_pairs_used
            )
            resource_totals["fusions"] = (
                resource_totals.get("fusions", 0) + chain.fusion_attempts
            )
            if trial_log is not None:
                trial_log.append(
                    (t, int(chain.succeeded), chain.blocks_consumed,
                     chain.bell_pairs_used, chain.fusion_attempts)
                )
        if request.get("close", False):
            analytic = 0.5  # the closure fusion is the only unrecoverable coin
        else:
            analytic = 1.0
    else:
        base = run_request(request)
        analytic = float(Fraction(1, 2**base.success_exponent))
        n_detect = len(base.measurement_record)
        pairs = base.resources.get("bell_pairs", 0)
        for t in range(trials):
            rng = _trial_rng(seed, t)
            success = rng.random() < analytic
            if success:
                successes += 1
                rng.integers(0, 2, size=max(n_detect, 1))  # sampled outcomes
            resource_totals["bell_pairs"] = resource_totals.get("bell_pairs", 0) + pairs
            if trial_log is not None:
                trial_log.append((t, int(success), pairs))
    p_hat = successes / trials
    std_error = math.sqrt(p_hat * (1 - p_hat) / trials)
    deviation = None
    flagged = False
    if analytic is not None:
        if std_error > 0:
            deviation = abs(p_hat - analytic) / std_error
            flagged = deviation > 3.0
        else:
            deviation = 0.0 if p_hat == analytic else math.inf
            flagged = p_hat != analytic
    return MonteCarloStats(
        trials=trials,
        successes=successes,
        estimated_probability=p_hat,
        std_error=std_error,
        resource_means={k: v / trials for k, v in resource_totals.items()},
        rng_seed=seed,
        analytic_probability=analytic,
        deviation_sigmas=deviation,
        flagged=flagged,
    )
