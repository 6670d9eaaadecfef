import itertools

import numpy as np
import pytest

from photonweave.graphs import (
    Graph,
    complete_graph,
    cycle_graph,
    empty_graph,
    local_complement,
    measure_pauli,
    path_graph,
    star_graph,
)
from photonweave.states import (
    StateVector,
    graph_form,
    pauli_eigenstates,
    project_qubit,
    schmidt_rank,
    state_locally_equivalent,
    to_state_vector,
)
from conftest import random_graph


def cz_matrix_oracle(g: Graph) -> np.ndarray:
    """Build the graph state by explicit CZ matrices on all-|+> (oracle)."""
    n = len(g.vertices)
    pos = {v: i for i, v in enumerate(g.vertices)}
    psi = (np.ones(2**n) / 2 ** (n / 2)).astype(complex)
    for u, v in g.edges:
        for idx in range(2**n):
            if (idx >> (n - 1 - pos[u])) & 1 and (idx >> (n - 1 - pos[v])) & 1:
                psi[idx] *= -1
    return psi


def test_single_vertex_is_plus():
    sv = to_state_vector(empty_graph(1))
    assert np.allclose(sv.amplitudes, np.array([1, 1]) / np.sqrt(2))


def test_cz_on_two_plus():
    sv = to_state_vector(path_graph(2))
    assert np.allclose(sv.amplitudes, np.array([1, 1, 1, -1]) / 2)


def test_state_vector_matches_cz_oracle(rnd):
    for _ in range(30):
        g = random_graph(rnd, rnd.randint(1, 6))
        assert np.allclose(to_state_vector(g).amplitudes, cz_matrix_oracle(g))


def test_size_limit():
    with pytest.raises(ValueError):
        to_state_vector(empty_graph(15))


def test_norm_validation():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0]), (1,))


# -- stabilizer decoding -------------------------------------------------------------


def test_graph_form_round_trip(rnd):
    for _ in range(25):
        g = random_graph(rnd, rnd.randint(1, 6))
        decoded = graph_form(to_state_vector(g))
        assert decoded is not None and decoded.edges == g.edges


def test_ghz_vector_is_star_class():
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / np.sqrt(2)
    sv = StateVector(ghz, (0, 1, 2))
    assert state_locally_equivalent(sv, star_graph(0, [1, 2]))
    assert state_locally_equivalent(sv, complete_graph([0, 1, 2]))


def test_non_stabilizer_is_rejected():
    # a T-rotated |+> is not Clifford-reachable from a graph state
    amps = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    assert graph_form(StateVector(amps, (1,))) is None
    assert not state_locally_equivalent(StateVector(amps, (1,)), empty_graph([1]))


def test_product_vs_entangled():
    zeros = np.zeros(8, dtype=complex)
    zeros[0] = 1.0
    sv = StateVector(zeros, (1, 2, 3))
    assert not state_locally_equivalent(sv, complete_graph([1, 2, 3]))
    assert schmidt_rank(sv, {1}) == 1
    assert schmidt_rank(to_state_vector(complete_graph([1, 2, 3])), {1}) == 2


def test_identity_case():
    sv = to_state_vector(path_graph(3))
    assert state_locally_equivalent(sv, path_graph(3))


def test_equivalence_size_limit():
    with pytest.raises(ValueError):
        state_locally_equivalent(
            to_state_vector(empty_graph(11)), empty_graph(11)
        )


# -- measurement soundness: projections vs rewrite rules ------------------------------


def all_graphs_upto(n):
    labels = list(range(1, n + 1))
    pairs = list(itertools.combinations(labels, 2))
    for bits in itertools.product([0, 1], repeat=len(pairs)):
        yield Graph(labels, [p for p, b in zip(pairs, bits) if b])


def _assert_measurement_sound(g, v, axis):
    sv = to_state_vector(g)
    expected = measure_pauli(g, v, axis)
    for direction in pauli_eigenstates(axis):
        prob, post = project_qubit(sv, v, direction)
        if post is None:
            assert axis == "X" and not g.neighbors(v)
            continue
        assert state_locally_equivalent(post, expected), (g.edges, v, axis)


def test_measurement_soundness_exhaustive_small():
    for n in (2, 3):
        for g in all_graphs_upto(n):
            for v in g.vertices:
                for axis in "XYZ":
                    _assert_measurement_sound(g, v, axis)


def test_measurement_soundness_sampled(rnd):
    for _ in range(60):
        g = random_graph(rnd, rnd.randint(4, 6))
        v = rnd.choice(g.vertices)
        axis = rnd.choice("XYZ")
        _assert_measurement_sound(g, v, axis)


def test_lc_preserves_state_class(rnd):
    for _ in range(40):
        g = random_graph(rnd, rnd.randint(2, 6))
        v = rnd.choice(g.vertices)
        assert state_locally_equivalent(to_state_vector(g), local_complement(g, v))


def test_cycle_five_not_ghz():
    sv = to_state_vector(cycle_graph(5))
    assert not state_locally_equivalent(sv, star_graph(1, [2, 3, 4, 5]))


def test_decoder_invariant_under_local_cliffords(rnd):
    # a graph state pushed through any single-qubit Clifford frame must
    # decode back into the same local-equivalence class
    from photonweave.graphs import locally_equivalent
    from photonweave.states import apply_single_qubit

    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j]).astype(complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    gates = [h, s, x, s @ h, h @ s, s @ h @ s]
    for _ in range(50):
        g = random_graph(rnd, rnd.randint(2, 6))
        sv = to_state_vector(g)
        for _ in range(rnd.randint(1, 6)):
            q = rnd.choice(g.vertices)
            sv = apply_single_qubit(sv, q, gates[rnd.randrange(len(gates))])
        decoded = graph_form(sv)
        assert decoded is not None
        assert locally_equivalent(decoded, g)
