"""Exact multi-photon simulation of polarization qubits through PBS/HWP circuits.

States are sparse maps from bosonic occupation patterns over
(spatial port, polarization) modes to complex amplitudes.  None of the
circuits built here ever superpose different total photon numbers, and
coincidence postselection discards bunched terms, but the bosonic
sqrt(n!) factors are still applied so that the discarded probability is
accounted for exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .states import StateVector

MAX_PORTS = 16
MAX_PHOTONS = 16

Mode = tuple[int, str]  # (spatial port, "H" | "V")
Pattern = tuple[tuple[Mode, int], ...]  # sorted ((mode, count), ...)

AMP_TOL = 1e-12


@dataclass(frozen=True)
class Plus:
    """Single photon in (|H> + |V>)/sqrt(2) at one port."""

    port: int


@dataclass(frozen=True)
class BellPsi:
    """Photon pair in (|HH> + |VV>)/sqrt(2) across two ports."""

    port_a: int
    port_b: int


@dataclass(frozen=True)
class GBell:
    """Photon pair in (|+H> + |-V>)/sqrt(2); the +/- photon sits on port_a.

    This is exactly the two-vertex graph state in polarization encoding.
    """

    port_a: int
    port_b: int


Source = Plus | BellPsi | GBell


def _pattern(counts: dict[Mode, int]) -> Pattern:
    return tuple(sorted((m, c) for m, c in counts.items() if c))


def _pattern_ports(p: Pattern) -> dict[int, int]:
    ports: dict[int, int] = {}
    for (port, _), c in p:
        ports[port] = ports.get(port, 0) + c
    return ports


class PhotonicState:
    """Sparse superposition over occupation patterns; treat as immutable."""

    __slots__ = ("terms", "total_photons")

    def __init__(self, terms: dict[Pattern, complex], total_photons: int | None = None):
        cleaned = {p: complex(a) for p, a in terms.items() if abs(a) > AMP_TOL}
        totals = {sum(c for _, c in p) for p in cleaned}
        if total_photons is None:
            if len(totals) > 1:
                raise ValueError(f"mixed total photon numbers: {sorted(totals)}")
            total_photons = totals.pop() if totals else 0
        elif totals and totals != {total_photons}:
            raise ValueError("pattern photon counts disagree with total_photons")
        if total_photons > MAX_PHOTONS:
            raise ValueError(f"at most {MAX_PHOTONS} photons supported")
        self.terms = cleaned
        self.total_photons = total_photons

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def ports(self) -> set[int]:
        return {port for p in self.terms for (port, _), _ in p}

    def renormalized(self) -> PhotonicState:
        norm = math.sqrt(self.norm_squared())
        if norm < AMP_TOL:
            raise ValueError("cannot renormalize an empty state")
        return PhotonicState({p: a / norm for p, a in self.terms.items()}, self.total_photons)


def prepare(sources: list[Source]) -> PhotonicState:
    """Tensor product of the sources; errors on port collisions."""
    used: set[int] = set()
    for s in sources:
        ports = (s.port,) if isinstance(s, Plus) else (s.port_a, s.port_b)
        if isinstance(s, (BellPsi, GBell)) and s.port_a == s.port_b:
            raise ValueError("source ports must be distinct")
        for p in ports:
            if p in used:
                raise ValueError(f"port {p} used by two sources")
            if p < 0:
                raise ValueError("spatial ports are nonnegative")
            used.add(p)
    if len(used) > MAX_PORTS:
        raise ValueError(f"at most {MAX_PORTS} ports supported")

    state: dict[Pattern, complex] = {(): 1.0 + 0j}
    for s in sources:
        if isinstance(s, Plus):
            pieces = [(((s.port, "H"), 1),), (((s.port, "V"), 1),)]
            amps = [1 / math.sqrt(2)] * 2
        elif isinstance(s, BellPsi):
            pieces = [
                (((s.port_a, "H"), 1), ((s.port_b, "H"), 1)),
                (((s.port_a, "V"), 1), ((s.port_b, "V"), 1)),
            ]
            amps = [1 / math.sqrt(2)] * 2
        else:  # GBell: expand |+H> + |-V> in the H/V basis, amplitudes +-1/2
            pieces = [
                (((s.port_a, "H"), 1), ((s.port_b, "H"), 1)),
                (((s.port_a, "V"), 1), ((s.port_b, "H"), 1)),
                (((s.port_a, "H"), 1), ((s.port_b, "V"), 1)),
                (((s.port_a, "V"), 1), ((s.port_b, "V"), 1)),
            ]
            amps = [0.5, 0.5, 0.5, -0.5]
        new: dict[Pattern, complex] = {}
        for pat, amp in state.items():
            base = dict(pat)
            for piece, pa in zip(pieces, amps):
                counts = dict(base)
                for mode, c in piece:
                    counts[mode] = counts.get(mode, 0) + c
                new_pat = _pattern(counts)
                new[new_pat] = new.get(new_pat, 0) + amp * pa
        state = new
    return PhotonicState(state)


def apply_pbs(state: PhotonicState, port_a: int, port_b: int) -> PhotonicState:
    """Polarizing beam splitter: H transmits, V swaps between the two ports."""
    if port_a == port_b:
        raise ValueError("PBS needs two distinct ports")
    known = state.ports()
    for p in (port_a, port_b):
        if p not in known:
            raise ValueError(f"unknown port {p}")
    out: dict[Pattern, complex] = {}
    for pat, amp in state.terms.items():
        counts = dict(pat)
        va = counts.pop((port_a, "V"), 0)
        vb = counts.pop((port_b, "V"), 0)
        if vb:
            counts[(port_a, "V")] = vb
        if va:
            counts[(port_b, "V")] = va
        new_pat = _pattern(counts)
        out[new_pat] = out.get(new_pat, 0) + amp
    return PhotonicState(out, state.total_photons)


def _hwp_matrix(angle_degrees: float) -> np.ndarray:
    if angle_degrees == 22.5:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if angle_degrees == 0:
        return np.array([[1, 0], [0, -1]], dtype=complex)
    raise ValueError(f"unsupported HWP angle {angle_degrees}; use 0 or 22.5")


def _mode_mix_coeffs(n_h: int, n_v: int, u: np.ndarray) -> dict[tuple[int, int], complex]:
    """Second-quantized action of a 2x2 mode transform on |n_h, n_v>.

    Expands (u00 aH+ + u01 aV+)^nH (u10 aH+ + u11 aV+)^nV with the
    bosonic sqrt(n!) normalization.
    """
    total = n_h + n_v
    out: dict[tuple[int, int], complex] = {}
    for k in range(n_h + 1):
        for l in range(n_v + 1):
            m_h = k + l
            m_v = total - m_h
            coeff = (
                math.comb(n_h, k)
                * math.comb(n_v, l)
                * u[0, 0] ** k
                * u[0, 1] ** (n_h - k)
                * u[1, 0] ** l
                * u[1, 1] ** (n_v - l)
            )
            out[(m_h, m_v)] = out.get((m_h, m_v), 0) + coeff
    norm_in = math.sqrt(math.factorial(n_h) * math.factorial(n_v))
    return {
        (m_h, m_v): c * math.sqrt(math.factorial(m_h) * math.factorial(m_v)) / norm_in
        for (m_h, m_v), c in out.items()
        if abs(c) > AMP_TOL
    }


def apply_hwp(state: PhotonicState, port: int, angle_degrees: float) -> PhotonicState:
    """Half-wave plate on one port: 22.5 degrees maps H/V to +/-, 0 is a Pauli Z."""
    if port not in state.ports():
        raise ValueError(f"unknown port {port}")
    u = _hwp_matrix(angle_degrees)
    out: dict[Pattern, complex] = {}
    for pat, amp in state.terms.items():
        counts = dict(pat)
        n_h = counts.pop((port, "H"), 0)
        n_v = counts.pop((port, "V"), 0)
        if n_h == n_v == 0:
            out[pat] = out.get(pat, 0) + amp
            continue
        for (m_h, m_v), c in _mode_mix_coeffs(n_h, n_v, u).items():
            new_counts = dict(counts)
            if m_h:
                new_counts[(port, "H")] = m_h
            if m_v:
                new_counts[(port, "V")] = m_v
            new_pat = _pattern(new_counts)
            out[new_pat] = out.get(new_pat, 0) + amp * c
    return PhotonicState(out, state.total_photons)


def postselect_coincidence(
    state: PhotonicState, ports: list[int]
) -> tuple[PhotonicState, float]:
    """Keep patterns with exactly one photon per listed port and none elsewhere.

    Returns the renormalized kept state and the kept probability computed
    from the pre-normalization amplitudes.  Probability 0 is a value: the
    returned state is empty.
    """
    if len(set(ports)) != len(ports):
        raise ValueError("ports listed more than once")
    wanted = set(ports)
    kept: dict[Pattern, complex] = {}
    for pat, amp in state.terms.items():
        per_port = _pattern_ports(pat)
        if set(per_port) == wanted and all(c == 1 for c in per_port.values()):
            kept[pat] = amp
    prob = float(sum(abs(a) ** 2 for a in kept.values()))
    if prob < AMP_TOL:
        return PhotonicState({}, state.total_photons), 0.0
    norm = math.sqrt(prob)
    kept = {p: a / norm for p, a in kept.items()}
    return PhotonicState(kept, state.total_photons), prob


def _single_photon_port(state: PhotonicState, port: int) -> None:
    for pat in state.terms:
        per_port = _pattern_ports(pat)
        if per_port.get(port, 0) != 1:
            raise ValueError(f"port {port} does not hold exactly one photon in every term")


def measure_polarization(
    state: PhotonicState, port: int, basis: str
) -> list[tuple[str, float, PhotonicState]]:
    """Detect the photon at one port in the HV or PM basis.

    Returns every outcome branch as (outcome, probability, post-state);
    the photon is removed from the state.  Probabilities sum to 1.
    """
    if basis not in ("HV", "PM"):
        raise ValueError("basis must be 'HV' or 'PM'")
    _single_photon_port(state, port)
    # amplitude organized by the polarization present at `port`
    by_rest: dict[Pattern, dict[str, complex]] = {}
    for pat, amp in state.terms.items():
        counts = dict(pat)
        if counts.pop((port, "H"), 0):
            pol = "H"
        else:
            counts.pop((port, "V"))
            pol = "V"
        rest = _pattern(counts)
        bucket = by_rest.setdefault(rest, {})
        bucket[pol] = bucket.get(pol, 0) + amp

    if basis == "HV":
        combos = {"H": {"H": 1.0}, "V": {"V": 1.0}}
    else:
        s = 1 / math.sqrt(2)
        combos = {"+": {"H": s, "V": s}, "-": {"H": s, "V": -s}}

    branches = []
    for outcome, weights in combos.items():
        terms = {}
        for rest, pols in by_rest.items():
            amp = sum(np.conj(w) * pols.get(pol, 0) for pol, w in weights.items())
            if abs(amp) > AMP_TOL:
                terms[rest] = amp
        prob = float(sum(abs(a) ** 2 for a in terms.values()))
        post = (
            PhotonicState({p: a / math.sqrt(prob) for p, a in terms.items()},
                          state.total_photons - 1)
            if prob > AMP_TOL
            else PhotonicState({}, state.total_photons - 1)
        )
        branches.append((outcome, prob, post))
    return branches


def extract_logical(state: PhotonicState, port_to_qubit: dict[int, int]) -> StateVector:
    """Read the polarization qubits off the listed ports: H -> 0, V -> 1.

    Every term must occupy exactly the listed ports with one photon each.
    """
    ports = list(port_to_qubit)
    for port in ports:
        _single_photon_port(state, port)
    for pat in state.terms:
        extra = set(_pattern_ports(pat)) - set(ports)
        if extra:
            raise ValueError(f"terms occupy unlisted ports {sorted(extra)}")
    n = len(ports)
    qubits = tuple(port_to_qubit[p] for p in ports)
    amps = np.zeros(2**n, dtype=complex)
    for pat, amp in state.terms.items():
        pols = dict(((port, pol) for (port, pol), _ in pat))
        idx = 0
        for i, port in enumerate(ports):
            if pols[port] == "V":
                idx |= 1 << (n - 1 - i)
        amps[idx] = amp
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > 1e-9:
        amps = amps / norm
    return StateVector(amps, qubits)


# -- circuit description JSON ---------------------------------------------------


def _source_from_json(obj: dict) -> Source:
    if "plus" in obj:
        return Plus(obj["plus"][0] if isinstance(obj["plus"], list) else obj["plus"])
    if "bell_psi" in obj:
        a, b = obj["bell_psi"]
        return BellPsi(a, b)
    if "gbell" in obj:
        a, b = obj["gbell"]
        return GBell(a, b)
    raise ValueError(f"unknown source spec {obj}")


def run_circuit(spec: dict) -> dict:
    """Run a circuit description dict; see the package README for the schema.

    Keys: sources (list), elements (list of {"pbs": [a, b]} or
    {"hwp": [port, angle]}), postselect (port list), measure (list of
    {"port": p, "basis": "HV"|"PM"}).  Returns the postselection
    probability, the final state dump, and measurement branches.
    """
    state = prepare([_source_from_json(s) for s in spec.get("sources", [])])
    for element in spec.get("elements", []):
        if "pbs" in element:
            a, b = element["pbs"]
            state = apply_pbs(state, a, b)
        elif "hwp" in element:
            port, angle = element["hwp"]
            state = apply_hwp(state, port, angle)
        else:
            raise ValueError(f"unknown element {element}")
    result: dict = {}
    prob = None
    if "postselect" in spec:
        state, prob = postselect_coincidence(state, spec["postselect"])
        result["postselect_probability"] = prob
    branch_log = []
    for m in spec.get("measure", []):
        branches = measure_polarization(state, m["port"], m["basis"])
        picked = m.get("outcome")
        if picked is None:
            picked = branches[0][0]
        chosen = next(b for b in branches if b[0] == picked)
        branch_log.append(
            {
                "port": m["port"],
                "basis": m["basis"],
                "outcome": chosen[0],
                "probability": chosen[1],
                "alternatives": [(o, p) for o, p, _ in branches],
            }
        )
        state = chosen[2]
    result["measurements"] = branch_log
    result["state"] = state_to_json_dict(state)
    return result


def state_to_json_dict(state: PhotonicState) -> dict:
    terms = []
    for pat, amp in sorted(state.terms.items()):
        terms.append(
            {
                "occupations": [[port, pol, count] for (port, pol), count in pat],
                "amplitude": [amp.real, amp.imag],
            }
        )
    return {"total_photons": state.total_photons, "terms": terms}


def state_from_json_dict(payload: dict) -> PhotonicState:
    terms: dict[Pattern, complex] = {}
    for t in payload["terms"]:
        pat = _pattern({(port, pol): count for port, pol, count in t["occupations"]})
        re, im = t["amplitude"]
        terms[pat] = complex(re, im)
    return PhotonicState(terms, payload.get("total_photons"))


def state_to_json(state: PhotonicState) -> str:
    return json.dumps(state_to_json_dict(state), sort_keys=True)


def state_from_json(text: str) -> PhotonicState:
    return state_from_json_dict(json.loads(text))
