"""Executable verification suites behind the CLI ``verify`` verb.

Each suite re-derives its expected values from an independent route
(explicit circuit simulation, exhaustive enumeration, or state-vector
projection) and checks the package against them at fixed tolerances.
The acceptance test module runs the same suites.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import minors, optics as po, protocols as pr
from .graphs import (
    Graph,
    cycle_graph,
    local_complement,
    measure_pauli,
    path_graph,
    star_graph,
)
from .states import StateVector, state_locally_equivalent, to_state_vector

PROB_TOL = 1e-12
AMP_TOL = 1e-10


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    details: str
    seconds: float


def _result(name: str, passed: bool, details: str, t0: float) -> CriterionResult:
    return CriterionResult(name, passed, details, time.time() - t0)


def check_ghz_postselection() -> CriterionResult:
    """N-photon coincidence chain: probability 2^-(N-1), GHZ output."""
    t0 = time.time()
    for n in range(2, 9):
        s = po.prepare([po.Plus(i) for i in range(n)])
        for i in range(n - 1):
            s = po.apply_pbs(s, i, i + 1)
        s, prob = po.postselect_coincidence(s, list(range(n)))
        if abs(prob - 0.5 ** (n - 1)) > PROB_TOL:
            return _result("ghz-postselection", False, f"N={n}: prob {prob}", t0)
        for amp in s.terms.values():
            if abs(abs(amp) - 2**-0.5) > AMP_TOL:
                return _result("ghz-postselection", False, f"N={n}: amplitude {amp}", t0)
        sv = po.extract_logical(s, {i: i for i in range(n)})
        if not state_locally_equivalent(sv, star_graph(0, range(1, n))):
            return _result("ghz-postselection", False, f"N={n}: not a star state", t0)
    return _result("ghz-postselection", True, "N=2..8 exact", t0)


def check_cz_gate() -> CriterionResult:
    """Auxiliary-photon CZ: probability 1/4, the four-term state, recovery."""
    t0 = time.time()
    s = po.prepare([po.Plus(0), po.Plus(1), po.Plus(2)])
    for target in (1, 2):
        s = po.apply_pbs(s, 0, target)
        s = po.apply_hwp(s, 0, 22.5)
    s, prob = po.postselect_coincidence(s, [0, 1, 2])
    if abs(prob - 0.25) > PROB_TOL:
        return _result("cz-gate", False, f"prob {prob}", t0)
    # literal four-term target, auxiliary written in the +/- basis
    sv = po.extract_logical(s, {0: 0, 1: 1, 2: 2})
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    h = np.array([1, 0])
    v = np.array([0, 1])
    expected = (
        np.kron(plus, np.kron(h, h))
        + np.kron(minus, np.kron(h, v))
        + np.kron(plus, np.kron(v, h))
        - np.kron(minus, np.kron(v, v))
    ) / 4.0
    got = sv.amplitudes * math.sqrt(prob)  # undo the postselection renorm
    if np.max(np.abs(got - expected)) > AMP_TOL:
        return _result("cz-gate", False, "postselected state != four-term target", t0)
    # both auxiliary H/V branches recover the two-qubit path state
    z2 = np.diag([1.0, -1.0])
    for outcome, _, post in po.measure_polarization(s, 0, "HV"):
        branch = po.extract_logical(post, {1: 1, 2: 2})
        if outcome == "V":  # recorded correction: Z on the photon the weaver left
            from .states import apply_single_qubit

            branch = apply_single_qubit(branch, 2, z2)
        target = to_state_vector(path_graph(2))
        if np.abs(np.abs(np.vdot(branch.amplitudes, target.amplitudes)) - 1) > AMP_TOL:
            return _result("cz-gate", False, f"branch {outcome} not recovered", t0)
    return _result("cz-gate", True, "1/4 exact, four-term state, both branches recovered", t0)


def check_path_weaving() -> CriterionResult:
    """Weaving chain on N photons: probability 2^-N and an (N+1)-path."""
    t0 = time.time()
    for n in range(2, 8):
        s = po.prepare([po.Plus(i) for i in range(n + 1)])  # 0 is the weaver
        for i in range(1, n + 1):
            s = po.apply_pbs(s, 0, i)
            s = po.apply_hwp(s, 0, 22.5)
        s, prob = po.postselect_coincidence(s, list(range(n + 1)))
        if abs(prob - 0.5**n) > PROB_TOL:
            return _result("path-weaving", False, f"N={n}: prob {prob}", t0)
        sv = po.extract_logical(s, {i: i for i in range(1, n + 1)} | {0: n + 1})
        if not state_locally_equivalent(sv, path_graph(n + 1)):
            return _result("path-weaving", False, f"N={n}: not a path", t0)
    return _result("path-weaving", True, "N=2..7 exact", t0)


def check_protocol_exponents() -> CriterionResult:
    """All analytic success exponents, as exact integers."""
    t0 = time.time()
    checks: list[tuple[str, int, int]] = []
    for m in range(2, 9):
        checks.append((f"ghz M={m}", pr.run_ghz(m).success_exponent, m - 1))
    for m in range(2, 8):
        checks.append((f"path M={m}", pr.run_path(m).success_exponent, m - 1))
    for m in range(3, 7):
        checks.append((f"cycle M={m}", pr.run_cycle(m).success_exponent, m + 1))
    for m in range(2, 8):
        layout = ["spine"] + ["leaf" if i % 2 else "spine" for i in range(1, m)]
        checks.append(
            (f"caterpillar open M={m}", pr.run_caterpillar(layout).success_exponent, m - 1)
        )
        if sum(k == "spine" for k in layout) >= 2:
            checks.append(
                (
                    f"caterpillar closed M={m}",
                    pr.run_caterpillar(layout, close_cycle=True).success_exponent,
                    m + 1,
                )
            )
    from fractions import Fraction

    for kind, expected in (("path4", 3), ("star4", 3), ("three", 2)):
        _, p = pr.build_block(kind)
        if p != Fraction(1, 2**expected):
            return _result("protocol-exponents", False, f"block {kind}: {p}", t0)
    bad = [(name, got, want) for name, got, want in checks if got != want]
    if bad:
        return _result("protocol-exponents", False, f"mismatches: {bad[:3]}", t0)
    return _result("protocol-exponents", True, f"{len(checks)} exponents exact", t0)


def check_dual_path() -> CriterionResult:
    """Optics layer and graph layer agree for every protocol at M <= 5."""
    t0 = time.time()
    for m in range(2, 6):
        sv, prob, _ = pr.ghz_optics(m)
        res = pr.run_ghz(m)
        if abs(prob - float(res.success_probability)) > PROB_TOL:
            return _result("dual-path", False, f"ghz M={m} prob", t0)
        if not state_locally_equivalent(sv, res.final_graph):
            return _result("dual-path", False, f"ghz M={m} state", t0)
        sv, prob, _ = pr.ghz_optics(m, server_participates=True)
        if not state_locally_equivalent(sv, pr.run_ghz(m, True).final_graph):
            return _result("dual-path", False, f"ghz+server M={m} state", t0)
    for m in range(2, 6):
        comb_sv, prob, _ = pr.path_optics(m, stop_before_measurement=True)
        if not state_locally_equivalent(comb_sv, pr.comb_graph(m)):
            return _result("dual-path", False, f"path M={m} comb intermediate", t0)
        sv, prob, _ = pr.path_optics(m)
        res = pr.run_path(m)
        if abs(prob - float(res.success_probability)) > PROB_TOL:
            return _result("dual-path", False, f"path M={m} prob", t0)
        if not state_locally_equivalent(sv, res.final_graph):
            return _result("dual-path", False, f"path M={m} state", t0)
        sv, _, _ = pr.path_optics(m, server_participates=True)
        if not state_locally_equivalent(sv, pr.run_path(m, True).final_graph):
            return _result("dual-path", False, f"path+server M={m} state", t0)
    for m in range(3, 6):
        sv, prob, _ = pr.cycle_optics(m)
        res = pr.run_cycle(m)
        if abs(prob - float(res.success_probability)) > PROB_TOL:
            return _result("dual-path", False, f"cycle M={m} prob", t0)
        if not state_locally_equivalent(sv, res.final_graph):
            return _result("dual-path", False, f"cycle M={m} state", t0)
    layouts = [
        (["spine", "spine", "leaf"], False),
        (["spine", "leaf", "spine"], False),
        (["spine", "leaf", "leaf", "spine"], False),
        (["spine", "spine", "leaf"], True),
        (["spine", "spine", "spine", "leaf"], True),
    ]
    for layout, close in layouts:
        sv, prob = pr.caterpillar_optics(layout, close)
        res = pr.run_caterpillar(layout, close)
        if abs(prob - float(res.success_probability)) > PROB_TOL:
            return _result("dual-path", False, f"caterpillar {layout} close={close} prob", t0)
        if not state_locally_equivalent(sv, res.final_graph):
            return _result("dual-path", False, f"caterpillar {layout} close={close} state", t0)
    for kind in pr.BLOCK_KINDS:
        sv, prob = pr.block_optics(kind)
        g, p = pr.build_block(kind)
        if abs(prob - float(p)) > PROB_TOL or not state_locally_equivalent(sv, g):
            return _result("dual-path", False, f"block {kind}", t0)
    return _result("dual-path", True, "ghz/path/cycle/caterpillar/blocks agree at M<=5", t0)


def check_appendix_a() -> CriterionResult:
    """Self-fusion of path ends: a leafed cycle, exactly, for N = 4..8."""
    t0 = time.time()
    for n in range(4, 9):
        g = path_graph(n)
        fused = pr.fuse_within(g, 1, n)
        want = cycle_graph(range(1, n)).add_vertex(n).add_edge(1, n)
        if fused.edges != want.edges:
            return _result("appendix-a", False, f"N={n}: wrong rewiring", t0)
        # state-vector oracle: coincidence projection + rotation on the last qubit
        sv = to_state_vector(g)
        amps = sv.amplitudes.copy()
        for idx in range(2**n):
            if ((idx >> (n - 1)) & 1) != (idx & 1):  # qubits 1 and n disagree
                amps[idx] = 0.0
        prob = float(np.sum(np.abs(amps) ** 2))
        if abs(prob - 0.5) > PROB_TOL:
            return _result("appendix-a", False, f"N={n}: fusion prob {prob}", t0)
        from .states import apply_single_qubit

        fused_sv = StateVector(amps / math.sqrt(prob), sv.qubit_order)
        hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
        fused_sv = apply_single_qubit(fused_sv, n, hadamard)
        target = to_state_vector(fused)
        if np.max(np.abs(fused_sv.amplitudes - target.amplitudes)) > AMP_TOL:
            return _result("appendix-a", False, f"N={n}: state mismatch", t0)
    return _result("appendix-a", True, "P_N ends fuse to C_(N-1)+leaf, N=4..8", t0)


def check_appendix_b(
    zigzag_sizes: tuple[int, ...] = (6, 8, 10),
    honeycomb_words: int = 100,
    seed: int = 20240901,
) -> CriterionResult:
    """Exhaustive word sweeps for the classification machinery."""
    t0 = time.time()
    total = 0
    for n in zigzag_sizes:
        k = n // 2
        for letters in itertools.product("XYZ", repeat=k):
            word = "".join(letters)
            if not minors.crosscheck(n, word, "zigzag"):
                return _result("appendix-b", False, f"zigzag n={n} word {word}", t0)
            total += 1
    rng = np.random.default_rng(seed)
    for _ in range(honeycomb_words):
        word = "".join(rng.choice(list("XYZ"), size=4))
        if not minors.crosscheck(8, word, "honeycomb"):
            return _result("appendix-b", False, f"honeycomb word {word}", t0)
        total += 1
    for n in (7, 10):
        k = n // 3 + 1
        for letters in itertools.product("XYZ", repeat=k):
            word = "".join(letters)
            if not minors.crosscheck(n, word, "path_every_third"):
                return _result("appendix-b", False, f"path_every_third n={n} word {word}", t0)
            total += 1
    return _result("appendix-b", True, f"{total} words verified", t0)


def check_monte_carlo(trials: int = 100_000, seed: int = 7) -> CriterionResult:
    """Seeded estimates sit within 3 sigma and reruns are bit-identical."""
    t0 = time.time()
    stats = pr.monte_carlo({"protocol": "ghz", "M": 3}, trials, seed)
    if stats.flagged:
        return _result("monte-carlo", False, f"ghz(3) off: {stats.estimated_probability}", t0)
    if stats != pr.monte_carlo({"protocol": "ghz", "M": 3}, trials, seed):
        return _result("monte-carlo", False, "ghz rerun differs", t0)
    chain_req = {"protocol": "chain", "blocks": ["path4"] * 4}
    chain = pr.monte_carlo(chain_req, trials, seed)
    # analytic mean blocks: 1 + sum over 3 joints of geometric(1/2) retries = 7;
    # verified against exhaustive branch enumeration in the test suite
    mean_blocks = chain.resource_means["blocks"]
    # per-trial variance of 1 + 3 geometrics: 3 * 2 = 6
    se = math.sqrt(6.0 / trials)
    if abs(mean_blocks - 7.0) > 3 * se + 1e-9:
        return _result("monte-carlo", False, f"chain blocks mean {mean_blocks}", t0)
    if chain != pr.monte_carlo(chain_req, trials, seed):
        return _result("monte-carlo", False, "chain rerun differs", t0)
    return _result(
        "monte-carlo",
        True,
        f"ghz(3) p={stats.estimated_probability:.4f}, chain blocks={mean_blocks:.3f}",
        t0,
    )


def check_properties(seed: int = 3) -> CriterionResult:
    """Structural invariants at the sizes the module contracts state."""
    t0 = time.time()
    import random

    rnd = random.Random(seed)

    def random_graph(n: int) -> Graph:
        labels = list(range(1, n + 1))
        edges = [e for e in itertools.combinations(labels, 2) if rnd.random() < 0.5]
        return Graph(labels, edges)

    for _ in range(1000):
        g = random_graph(rnd.randint(1, 8))
        v = rnd.choice(g.vertices)
        if local_complement(local_complement(g, v), v).edges != g.edges:
            return _result("properties", False, "lc involution failed", t0)
    for _ in range(300):
        g = random_graph(rnd.randint(1, 8))
        v = rnd.choice(g.vertices)
        h = measure_pauli(g, v, "Z")
        want_edges = {e for e in g.edges if v not in e}
        if set(h.vertices) != set(g.vertices) - {v} or h.edges != frozenset(want_edges):
            return _result("properties", False, "Z-measure != deletion", t0)
    # unitarity and photon-number conservation through random circuits
    rng = np.random.default_rng(seed)
    for _ in range(40):
        s = po.prepare([po.GBell(0, 1), po.Plus(2), po.BellPsi(3, 4)])
        for _ in range(6):
            op = rng.integers(0, 2)
            ports = sorted(rng.choice(5, size=2, replace=False))
            if op == 0:
                s = po.apply_pbs(s, int(ports[0]), int(ports[1]))
            else:
                s = po.apply_hwp(s, int(ports[0]), 22.5 if rng.integers(0, 2) else 0)
            if abs(s.norm_squared() - 1.0) > 1e-12:
                return _result("properties", False, "unitarity violated", t0)
            if any(sum(c for _, c in pat) != s.total_photons for pat in s.terms):
                return _result("properties", False, "photon number not conserved", t0)
    # failure containment: retries at a later joint never disturb earlier blocks
    base = pr.fuse_chain(
        ["path4"] * 3, keep_server_ends=True, failure_schedule=[False, False]
    ).result.final_graph
    for schedule in ([False, True, False], [False, True, True, False]):
        retry = pr.fuse_chain(
            ["path4"] * 3, keep_server_ends=True, failure_schedule=schedule
        ).result.final_graph
        if retry.edges != base.edges:
            return _result("properties", False, "failure not contained", t0)
    return _result("properties", True, "involution, deletion, unitarity, containment", t0)


SUITES = {
    "ghz-postselection": check_ghz_postselection,
    "cz-gate": check_cz_gate,
    "path-weaving": check_path_weaving,
    "protocol-exponents": check_protocol_exponents,
    "dual-path": check_dual_path,
    "appendix-a": check_appendix_a,
    "appendix-b": check_appendix_b,
    "monte-carlo": check_monte_carlo,
    "properties": check_properties,
}


def run_suite(name: str, **kwargs) -> list[CriterionResult]:
    if name == "all":
        return [fn() for fn in SUITES.values()]
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; use one of {sorted(SUITES)} or 'all'")
    return [SUITES[name](**kwargs)]
