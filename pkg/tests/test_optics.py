import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonweave.graphs import path_graph, star_graph
from photonweave.optics import (
    BellPsi,
    GBell,
    PhotonicState,
    Plus,
    apply_hwp,
    apply_pbs,
    extract_logical,
    measure_polarization,
    postselect_coincidence,
    prepare,
    run_circuit,
    state_from_json,
    state_to_json,
)
from photonweave.states import state_locally_equivalent

S2 = 1 / math.sqrt(2)


def one(port, pol):
    return (((port, pol), 1),)


# -- sources ---------------------------------------------------------------------


def test_plus_source():
    s = prepare([Plus(0)])
    assert s.terms == pytest.approx({one(0, "H"): S2, one(0, "V"): S2})


def test_three_plus_photons():
    s = prepare([Plus(0), Plus(1), Plus(2)])
    assert len(s.terms) == 8
    assert all(abs(a - 2**-1.5) < 1e-12 for a in s.terms.values())


def test_gbell_expansion():
    s = prepare([GBell(0, 1)])
    assert len(s.terms) == 4
    expected = {
        (((0, "H"), 1), ((1, "H"), 1)): 0.5,
        (((0, "V"), 1), ((1, "H"), 1)): 0.5,
        (((0, "H"), 1), ((1, "V"), 1)): 0.5,
        (((0, "V"), 1), ((1, "V"), 1)): -0.5,
    }
    for pat, amp in expected.items():
        assert s.terms[tuple(sorted(pat))] == pytest.approx(amp)


def test_port_collision_rejected():
    with pytest.raises(ValueError):
        prepare([Plus(0), BellPsi(0, 1)])
    with pytest.raises(ValueError):
        prepare([GBell(2, 2)])


def test_capacity_limits():
    with pytest.raises(ValueError):
        prepare([Plus(i) for i in range(17)])


# -- elements --------------------------------------------------------------------


def test_pbs_transmits_h_reflects_v():
    # single H photon stays put; single V photon crosses
    s = PhotonicState({(((0, "H"), 1), ((1, "H"), 1)): 1.0})
    out = apply_pbs(s, 0, 1)
    assert out.terms == s.terms
    s = PhotonicState({(((0, "V"), 1), ((1, "H"), 1)): 1.0})
    out = apply_pbs(s, 0, 1)
    assert tuple(sorted((((1, "V"), 1), ((1, "H"), 1)))) in out.terms


def test_pbs_unknown_port():
    v_only = PhotonicState({one(0, "V"): 1.0})
    with pytest.raises(ValueError):
        apply_pbs(v_only, 0, 1)


def test_pbs_is_involution():
    s = prepare([GBell(0, 1), Plus(2)])
    twice = apply_pbs(apply_pbs(s, 1, 2), 1, 2)
    assert set(twice.terms) == set(s.terms)
    for pat, amp in s.terms.items():
        assert twice.terms[pat] == pytest.approx(amp)


def test_hwp_rotations():
    s = PhotonicState({one(0, "H"): 1.0})
    out = apply_hwp(s, 0, 22.5)
    assert out.terms[one(0, "H")] == pytest.approx(S2)
    assert out.terms[one(0, "V")] == pytest.approx(S2)
    s = PhotonicState({one(0, "V"): 1.0})
    assert apply_hwp(s, 0, 0).terms[one(0, "V")] == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        apply_hwp(s, 0, 45.0)


def test_hwp_is_an_involution():
    # the pinned 22.5-degree convention is the Hadamard, so squaring it is
    # the identity on both basis photons (a physical waveplate is a mirror)
    for pol in ("H", "V"):
        s = PhotonicState({one(0, pol): 1.0})
        out = apply_hwp(apply_hwp(s, 0, 22.5), 0, 22.5)
        assert out.terms[one(0, pol)] == pytest.approx(1.0)


def test_hwp_bosonic_factors():
    two = PhotonicState({(((0, "H"), 2),): 1.0})
    out = apply_hwp(two, 0, 22.5)
    probs = {pat: abs(a) ** 2 for pat, a in out.terms.items()}
    assert probs[(((0, "H"), 2),)] == pytest.approx(0.25)
    assert probs[(((0, "H"), 1), ((0, "V"), 1))] == pytest.approx(0.5)
    assert probs[(((0, "V"), 2),)] == pytest.approx(0.25)
    assert out.norm_squared() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.integers(0, 3), st.integers(0, 3)),
                min_size=1, max_size=8))
def test_unitarity_and_photon_number(ops):
    s = prepare([GBell(0, 1), Plus(2), BellPsi(3, 4)])
    n0 = s.total_photons
    for is_pbs, a, b in ops:
        if is_pbs and a != b:
            s = apply_pbs(s, a, b)
        else:
            s = apply_hwp(s, a, 22.5)
        assert abs(s.norm_squared() - 1.0) < 1e-12
        assert s.total_photons == n0
        assert all(sum(c for _, c in pat) == n0 for pat in s.terms)


# -- postselection and measurement --------------------------------------------------


def test_trivial_postselect():
    s = prepare([Plus(0)])
    out, prob = postselect_coincidence(s, [0])
    assert prob == pytest.approx(1.0)
    assert set(out.terms) == set(s.terms)


def test_zero_probability_is_a_value():
    s = prepare([Plus(0), Plus(1)])
    s = apply_pbs(s, 0, 1)
    # demanding two photons at port 0 and none at 1 == impossible coincidence set
    out, prob = postselect_coincidence(s, [0])
    assert prob == 0.0 and not out.terms


def test_measure_plus_photon():
    s = prepare([Plus(0)])
    branches = measure_polarization(s, 0, "HV")
    assert sorted((o, pytest.approx(p)) for o, p, _ in branches) == [
        ("H", pytest.approx(0.5)),
        ("V", pytest.approx(0.5)),
    ]


def test_measure_requires_definite_photon():
    s = prepare([Plus(0), Plus(1)])
    bunched = apply_pbs(s, 0, 1)  # port 0 can hold 0 or 2 photons now
    with pytest.raises(ValueError):
        measure_polarization(bunched, 0, "HV")


def test_ghz_pm_branches_are_bell_states():
    s = prepare([Plus(i) for i in range(3)])
    for i in range(2):
        s = apply_pbs(s, i, i + 1)
    s, _ = postselect_coincidence(s, [0, 1, 2])
    branches = measure_polarization(s, 2, "PM")
    for outcome, prob, post in branches:
        assert prob == pytest.approx(0.5)
        sv = extract_logical(post, {0: 0, 1: 1})
        target = np.zeros(4, dtype=complex)
        target[0] = S2
        target[3] = S2 if outcome == "+" else -S2
        assert abs(abs(np.vdot(sv.amplitudes, target)) - 1) < 1e-10


def test_extract_logical_plus():
    sv = extract_logical(prepare([Plus(0)]), {0: 1})
    assert np.allclose(sv.amplitudes, np.array([1, 1]) / np.sqrt(2))


def test_extract_logical_bell():
    s = prepare([Plus(0), Plus(1)])
    s = apply_pbs(s, 0, 1)
    s, prob = postselect_coincidence(s, [0, 1])
    assert prob == pytest.approx(0.5)
    sv = extract_logical(s, {0: 0, 1: 1})
    assert np.allclose(sv.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


# -- reference circuits ----------------------------------------------------------------


def test_cz_circuit_quarter_probability():
    s = prepare([Plus(0), Plus(1), Plus(2)])
    for t in (1, 2):
        s = apply_pbs(s, 0, t)
        s = apply_hwp(s, 0, 22.5)
    s, prob = postselect_coincidence(s, [0, 1, 2])
    assert prob == pytest.approx(0.25, abs=1e-12)
    sv = extract_logical(s, {1: 1, 2: 2, 0: 3})
    assert state_locally_equivalent(sv, path_graph(3))


def test_ghz_chain_probabilities():
    for n in range(2, 9):
        s = prepare([Plus(i) for i in range(n)])
        for i in range(n - 1):
            s = apply_pbs(s, i, i + 1)
        s, prob = postselect_coincidence(s, list(range(n)))
        assert prob == pytest.approx(0.5 ** (n - 1), abs=1e-12)
    sv = extract_logical(s, {i: i for i in range(8)})
    assert state_locally_equivalent(sv, star_graph(0, range(1, 8)))


def test_stagewise_halving():
    # the chain reads as sequential type-I fusions: each stage halves the norm
    n = 4
    s = prepare([Plus(i) for i in range(n + 1)])
    last = 1.0
    for i in range(1, n + 1):
        s = apply_pbs(s, 0, i)
        s = apply_hwp(s, 0, 22.5)
        kept, prob = postselect_coincidence(s, list(range(n + 1)))
        # conditioned on previous stages, each stage contributes exactly 1/2
        assert prob / last == pytest.approx(0.5, abs=1e-12)
        last = prob


# -- serialization -----------------------------------------------------------------------


def test_state_json_round_trip():
    s = prepare([GBell(0, 1)])
    back = state_from_json(state_to_json(s))
    assert set(back.terms) == set(s.terms)
    for pat, amp in s.terms.items():
        assert back.terms[pat] == pytest.approx(amp)


def test_run_circuit_json():
    spec = {
        "sources": [{"plus": [0]}, {"plus": [1]}, {"plus": [2]}],
        "elements": [
            {"pbs": [0, 1]},
            {"hwp": [0, 22.5]},
            {"pbs": [0, 2]},
            {"hwp": [0, 22.5]},
        ],
        "postselect": [0, 1, 2],
        "measure": [{"port": 0, "basis": "HV"}],
    }
    out = run_circuit(spec)
    assert out["postselect_probability"] == pytest.approx(0.25, abs=1e-12)
    assert out["measurements"][0]["outcome"] == "H"
    assert json.dumps(out["state"])  # JSON-serializable dump


def test_ghz3_state_dump_two_terms():
    s = prepare([Plus(i) for i in range(3)])
    for i in range(2):
        s = apply_pbs(s, i, i + 1)
    s, _ = postselect_coincidence(s, [0, 1, 2])
    payload = json.loads(state_to_json(s))
    assert len(payload["terms"]) == 2
    for term in payload["terms"]:
        re_part, im_part = term["amplitude"]
        assert abs(abs(re_part) - S2) < 1e-10 and abs(im_part) < 1e-12


def test_deterministic_branch_has_zero_probability_twin():
    s = PhotonicState({one(0, "H"): 1.0})
    branches = measure_polarization(s, 0, "HV")
    probs = {o: p for o, p, _ in branches}
    assert probs["H"] == pytest.approx(1.0) and probs["V"] == pytest.approx(0.0)


def test_run_circuit_outcome_selection():
    spec = {
        "sources": [{"gbell": [0, 1]}],
        "elements": [],
        "postselect": [0, 1],
        "measure": [{"port": 0, "basis": "PM", "outcome": "-"}],
    }
    out = run_circuit(spec)
    assert out["measurements"][0]["outcome"] == "-"
    assert out["measurements"][0]["probability"] == pytest.approx(0.5)
