"""Dense state vectors for small qubit registers and stabilizer decoding.

The vector layer is the oracle that ties the optics engine to the graph
calculus: any stabilizer vector can be decoded back to a graph (its
local-Clifford frame is discarded), after which equivalence questions
reduce to orbit search on graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, GraphState, locally_equivalent

NORM_TOL = 1e-10
STATE_VECTOR_LIMIT = 14
EQUIVALENCE_LIMIT = 10


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes over the computational basis of named qubits.

    ``qubit_order[i]`` owns bit i counted from the most significant end of
    the basis index.
    """

    amplitudes: np.ndarray
    qubit_order: tuple[int, ...]

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        n = len(self.qubit_order)
        if amps.shape != (2**n,):
            raise ValueError(f"expected {2**n} amplitudes for {n} qubits, got {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 = {norm}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "qubit_order", tuple(self.qubit_order))

    @property
    def n(self) -> int:
        return len(self.qubit_order)

    def bit_of(self, qubit: int) -> int:
        return self.n - 1 - self.qubit_order.index(qubit)


def to_state_vector(state: GraphState | Graph) -> StateVector:
    """Expand a graph state into its exact vector, amplitudes +-2^(-n/2)."""
    g = state.graph if isinstance(state, GraphState) else state
    n = len(g.vertices)
    if n > STATE_VECTOR_LIMIT:
        raise ValueError(f"state vector limited to {STATE_VECTOR_LIMIT} qubits, got {n}")
    order = tuple(g.vertices)
    pos = {v: n - 1 - i for i, v in enumerate(order)}
    idx = np.arange(2**n)
    signs = np.zeros(2**n, dtype=np.int64)
    for u, v in g.edges:
        signs += ((idx >> pos[u]) & 1) & ((idx >> pos[v]) & 1)
    amps = ((-1.0) ** signs) / np.sqrt(2.0**n)
    return StateVector(amps.astype(complex), order)


# -- measurement projections (oracle side) ------------------------------------

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_eigenstates(axis: str) -> list[np.ndarray]:
    """The +1 and -1 eigenvectors of a Pauli, in that order."""
    vals, vecs = np.linalg.eigh(_PAULI[axis])
    order = np.argsort(-vals)
    return [vecs[:, i].copy() for i in order]


def project_qubit(sv: StateVector, qubit: int, direction: np.ndarray) -> tuple[float, StateVector | None]:
    """Project one qubit onto a single-qubit state and drop it.

    Returns the outcome probability and the renormalized post-state on the
    remaining qubits (None for probability 0).
    """
    bit = sv.bit_of(qubit)
    n = sv.n
    amps = sv.amplitudes.reshape([2] * n)
    axis = n - 1 - bit  # numpy axis of this qubit
    contracted = np.tensordot(np.conj(direction), amps, axes=([0], [axis]))
    flat = contracted.reshape(-1)
    prob = float(np.sum(np.abs(flat) ** 2))
    if prob < NORM_TOL:
        return 0.0, None
    rest = tuple(q for q in sv.qubit_order if q != qubit)
    return prob, StateVector(flat / np.sqrt(prob), rest)


def apply_single_qubit(sv: StateVector, qubit: int, u: np.ndarray) -> StateVector:
    bit = sv.bit_of(qubit)
    n = sv.n
    amps = sv.amplitudes.reshape([2] * n)
    axis = n - 1 - bit
    rotated = np.tensordot(u, amps, axes=([1], [axis]))
    rotated = np.moveaxis(rotated, 0, axis)
    return StateVector(rotated.reshape(-1), sv.qubit_order)


def states_equal_up_to_phase(a: StateVector, b: StateVector, tol: float = NORM_TOL) -> bool:
    if a.qubit_order != b.qubit_order:
        return False
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    return abs(abs(overlap) - 1.0) < tol


# -- stabilizer decoding -------------------------------------------------------


def _fwht(values: np.ndarray) -> np.ndarray:
    """In-place Walsh-Hadamard transform over index parity."""
    out = values.copy()
    h = 1
    n = out.shape[0]
    while h < n:
        for start in range(0, n, h * 2):
            a = out[start : start + h].copy()
            b = out[start + h : start + 2 * h].copy()
            out[start : start + h] = a + b
            out[start + h : start + 2 * h] = a - b
        h *= 2
    return out


def stabilizer_generators(sv: StateVector, tol: float = 1e-8) -> list[tuple[int, int]] | None:
    """Find n independent stabilizers of sv as (x_mask, z_mask) pairs.

    A Pauli X^x Z^z (phases ignored) stabilizes sv iff
    |<psi| X^x Z^z |psi>| = 1.  Returns None if sv is not a stabilizer
    state.  Bit i of a mask refers to sv.qubit_order[i] counted from the
    most significant end, matching the amplitude indexing.
    """
    n = sv.n
    dim = 2**n
    psi = sv.amplitudes
    rows: list[tuple[int, int]] = []
    basis: list[int] = []  # GF(2) row space of (x|z) masks

    def independent(vec: int) -> bool:
        acc = vec
        for b in basis:
            acc = min(acc, acc ^ b)
        return acc != 0

    def insert(vec: int) -> None:
        acc = vec
        for b in basis:
            acc = min(acc, acc ^ b)
        basis.append(acc)
        basis.sort(reverse=True)

    for x in range(dim):
        overlap = np.conj(psi) * psi[np.arange(dim) ^ x]
        f = _fwht(overlap)
        hits = np.nonzero(np.abs(np.abs(f) - 1.0) < tol)[0]
        for z in hits:
            vec = (x << n) | int(z)
            if vec and independent(vec):
                rows.append((x, int(z)))
                insert(vec)
                if len(rows) == n:
                    return rows
    return None


def graph_form(sv: StateVector) -> Graph | None:
    """Decode a stabilizer vector to a graph in some local-Clifford frame.

    Returns None when sv is not a stabilizer state.  The local Cliffords
    relating sv to the returned graph's state are dropped; they never
    change the local-equivalence class.
    """
    gens = stabilizer_generators(sv)
    if gens is None:
        return None
    n = sv.n
    x_rows = [x for x, _ in gens]
    z_rows = [z for _, z in gens]

    # Make the X block invertible, pulling columns over from Z (a Hadamard
    # on that qubit) whenever elimination leaves an all-zero X row.
    for _ in range(n + 1):
        x_rows, z_rows = _gf2_eliminate(x_rows, z_rows, n)
        stuck = [r for r in range(n) if x_rows[r] == 0]
        if not stuck:
            break
        r = stuck[0]
        if z_rows[r] == 0:
            return None  # degenerate generator set
        mask = 1 << _lowest_set_bit(z_rows[r])
        for i in range(n):
            xb, zb = x_rows[i] & mask, z_rows[i] & mask
            x_rows[i] = (x_rows[i] & ~mask) | zb
            z_rows[i] = (z_rows[i] & ~mask) | xb
    else:
        return None

    # Row-reduce the X block to the identity; Z block becomes the adjacency.
    x_rows, z_rows = _gf2_solve_to_identity(x_rows, z_rows, n)
    if x_rows is None:
        return None
    adj = np.zeros((n, n), dtype=int)
    for r in range(n):
        for c in range(n):
            adj[r, c] = (z_rows[r] >> (n - 1 - c)) & 1
    np.fill_diagonal(adj, 0)  # diagonal Z bits are S-gate byproducts
    if not np.array_equal(adj, adj.T):
        return None
    edges = [
        (sv.qubit_order[i], sv.qubit_order[j])
        for i in range(n)
        for j in range(i + 1, n)
        if adj[i, j]
    ]
    return Graph(sv.qubit_order, edges)


def _lowest_set_bit(value: int) -> int:
    return (value & -value).bit_length() - 1


def _gf2_eliminate(x_rows: list[int], z_rows: list[int], n: int) -> tuple[list[int], list[int]]:
    """Gaussian elimination on the X block, mirroring row ops onto Z."""
    xs, zs = list(x_rows), list(z_rows)
    rank = 0
    for c in range(n - 1, -1, -1):
        mask = 1 << c
        pivot = next((i for i in range(rank, n) if xs[i] & mask), None)
        if pivot is None:
            continue
        xs[rank], xs[pivot] = xs[pivot], xs[rank]
        zs[rank], zs[pivot] = zs[pivot], zs[rank]
        for i in range(n):
            if i != rank and xs[i] & mask:
                xs[i] ^= xs[rank]
                zs[i] ^= zs[rank]
        rank += 1
    return xs, zs


def _gf2_solve_to_identity(
    x_rows: list[int], z_rows: list[int], n: int
) -> tuple[list[int] | None, list[int] | None]:
    xs, zs = _gf2_eliminate(x_rows, z_rows, n)
    # reorder rows so xs[r] has its pivot at column r
    out_x = [0] * n
    out_z = [0] * n
    for r in range(n):
        if xs[r] == 0:
            return None, None
        pivot_col = n - xs[r].bit_length()
        out_x[pivot_col] = xs[r]
        out_z[pivot_col] = zs[r]
    for r in range(n):
        if out_x[r] != (1 << (n - 1 - r)):
            return None, None
    return out_x, out_z


def state_locally_equivalent(sv: StateVector, g: Graph) -> bool:
    """True iff single-qubit Cliffords map sv onto the graph state of g."""
    if sv.n > EQUIVALENCE_LIMIT:
        raise ValueError(f"equivalence search limited to {EQUIVALENCE_LIMIT} qubits")
    if set(sv.qubit_order) != set(g.vertices):
        return False
    decoded = graph_form(sv)
    if decoded is None:
        return False
    return locally_equivalent(decoded, g)


def schmidt_rank(sv: StateVector, part: set[int]) -> int:
    """Rank of the bipartition (part | rest); 1 means product across the cut."""
    bits_a = sorted(sv.bit_of(q) for q in part)
    bits_b = sorted(sv.bit_of(q) for q in set(sv.qubit_order) - part)
    n = sv.n
    mat = np.zeros((2 ** len(bits_a), 2 ** len(bits_b)), dtype=complex)
    for idx, amp in enumerate(sv.amplitudes):
        ia = sum(((idx >> b) & 1) << k for k, b in enumerate(bits_a))
        ib = sum(((idx >> b) & 1) << k for k, b in enumerate(bits_b))
        mat[ia, ib] = amp
    return int(np.linalg.matrix_rank(mat, tol=1e-8))
