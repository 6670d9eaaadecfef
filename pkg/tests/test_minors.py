import itertools

import pytest

from photonweave.graphs import (
    classify_graph,
    cycle_graph,
    locally_equivalent,
    measure_pauli,
    path_graph,
)
from photonweave.minors import (
    EulerianTour,
    Multigraph,
    apply_word,
    build_circulant,
    canonical_tour,
    crosscheck,
    crosscheck_report,
    find_tour,
    honeycomb_multigraph,
    honeycomb_resource,
    interlacement,
    leaf_expansion,
    multigraph_from_json_dict,
    multigraph_to_json_dict,
    path_every_third_resource,
    predict_class,
    predict_representative,
    simulate_word,
    tour_interlacement,
    validate_tour,
    zigzag_resource,
)

ALL_WORDS = lambda k: ("".join(p) for p in itertools.product("XYZ", repeat=k))


# -- circulant multigraph --------------------------------------------------------


def test_circulant_twelve():
    mg = build_circulant(12)
    assert len(mg.edges) == 24
    assert mg.is_four_regular()


def test_circulant_six_degrees():
    mg = build_circulant(6)
    assert all(mg.degree(v) == 4 for v in mg.vertices)
    assert all(len(set(pair)) == 2 for pair in mg.edge_pairs())


def test_circulant_five_is_k5():
    mg = build_circulant(5)
    assert sorted(set(mg.edge_pairs())) == [
        (a, b) for a in range(5) for b in range(a + 1, 5)
    ]
    assert mg.is_four_regular()


def test_circulant_too_small():
    with pytest.raises(ValueError):
        build_circulant(4)


# -- tours ------------------------------------------------------------------------


def test_canonical_tour_structure():
    tour = canonical_tour(12)
    assert tour.sequence[:8] == (0, 2, 1, 3, 2, 4, 3, 5)
    validate_tour(build_circulant(12), tour)


def test_canonical_tour_interlacement_is_cycle():
    for n in (6, 8, 10, 12):
        assert interlacement(canonical_tour(n)).edges == cycle_graph(range(n)).edges


def test_canonical_tour_covers_each_edge_once():
    tour = canonical_tour(10)
    assert sorted(tour.edge_ids) == list(range(20))


def test_canonical_tour_odd_rejected():
    with pytest.raises(ValueError):
        canonical_tour(7)


def test_find_tour_double_triangle():
    mg = Multigraph.from_pairs([0, 1, 2], [(0, 1), (0, 1), (1, 2), (1, 2), (0, 2), (0, 2)])
    tour = find_tour(mg)
    validate_tour(mg, tour)
    assert len(tour.sequence) == 6


def test_find_tour_circulant():
    mg = build_circulant(6)
    tour = find_tour(mg)
    validate_tour(mg, tour)
    assert len(tour.edge_ids) == 12


def test_find_tour_disconnected():
    mg = Multigraph.from_pairs(
        [0, 1, 2, 3],
        [(0, 1), (0, 1), (0, 1), (0, 1), (2, 3), (2, 3), (2, 3), (2, 3)],
    )
    with pytest.raises(ValueError):
        find_tour(mg)


def test_alternating_tour_is_single_edge():
    mg = Multigraph.from_pairs([5, 7], [(5, 7)] * 4)
    tour = EulerianTour((5, 7, 5, 7), (0, 1, 2, 3))
    validate_tour(mg, tour)
    assert interlacement(tour).edges == frozenset({(5, 7)})


def test_rerouted_tours_stay_locally_equivalent():
    mg = build_circulant(8)
    tour = find_tour(mg)  # a tour with a different edge ordering than canonical
    assert locally_equivalent(interlacement(tour), cycle_graph(range(8)))


# -- fragments ----------------------------------------------------------------------


@pytest.mark.parametrize("n", [6, 8])
def test_fragment_soundness_exhaustive(n):
    cyc = cycle_graph(range(n))
    for v in range(n):
        for letter in "XYZ":
            rewired = apply_word(build_circulant(n), [v], letter)
            assert all(rewired.degree(u) == 4 for u in rewired.vertices)
            ig = tour_interlacement(rewired)
            assert locally_equivalent(ig, measure_pauli(cyc, v, letter)), (n, v, letter)


def test_all_z_disconnects_everything():
    out = apply_word(build_circulant(6), [0, 2, 4], "ZZZ")
    ig = tour_interlacement(out)
    assert ig.edges == frozenset()
    assert set(ig.vertices) == {1, 3, 5}


def test_apply_word_preserves_regularity():
    out = apply_word(build_circulant(6), [2], "Y")
    assert all(out.degree(v) == 4 for v in out.vertices)


def test_apply_word_length_mismatch():
    with pytest.raises(ValueError):
        apply_word(build_circulant(6), [0, 2], "X")


def test_transition_minor_zigzag_style():
    # measuring out the even vertices leaves a 4-regular multigraph on the odds
    out = apply_word(build_circulant(12), [0, 2, 4, 6, 8, 10], "XXYYXZ")
    assert set(out.vertices) == {1, 3, 5, 7, 9, 11}
    assert all(out.degree(v) == 4 for v in out.vertices)


# -- leaf expansion --------------------------------------------------------------------


def test_leaf_expansion_adds_one_leaf():
    mg, tour = build_circulant(6), canonical_tour(6)
    for v in range(6):
        mg2, tour2 = leaf_expansion(mg, tour, v, leaf_label=50)
        want = cycle_graph(range(6)).add_vertex(50).add_edge(v, 50)
        assert interlacement(tour2).edges == want.edges


def test_leaf_expansion_doubles_up():
    mg, tour = build_circulant(6), canonical_tour(6)
    mg2, tour2 = leaf_expansion(mg, tour, 3, leaf_label=50)
    mg3, tour3 = leaf_expansion(mg2, tour2, 3, leaf_label=51)
    want = (
        cycle_graph(range(6))
        .add_vertex(50)
        .add_edge(3, 50)
        .add_vertex(51)
        .add_edge(3, 51)
    )
    assert interlacement(tour3).edges == want.edges


def test_leaf_expansion_counts():
    mg, tour = build_circulant(8), canonical_tour(8)
    mg2, tour2 = leaf_expansion(mg, tour, 5)
    assert len(mg2.vertices) == len(mg.vertices) + 1
    assert len(mg2.edges) == len(mg.edges) + 2
    assert len(interlacement(tour2).vertices) == 9


def test_leaf_expansion_unknown_vertex():
    with pytest.raises(ValueError):
        leaf_expansion(build_circulant(6), canonical_tour(6), 99)


# -- prediction --------------------------------------------------------------------------


def test_predict_all_x_open_is_star_class():
    rep = predict_representative("XXX", close=False)
    assert classify_graph(rep).label in ("star", "path")
    # the simulation route confirms the open-word rule on an alternating path
    sim = simulate_word(path_graph(range(5)), [1, 3], "XX")
    assert locally_equivalent(
        sim, predict_representative("XX", close=False, survivors=[0, 2, 4])
    )


def test_predict_all_z():
    rep = predict_representative("ZZZ", close=True)
    assert rep.edges == frozenset()
    assert predict_class("ZZZ", close=True).label == "empty"


def test_predict_no_z_with_y_closed_is_leafed_cycle():
    shape = predict_class("XYYYY", close=True)
    assert shape.label == "leafed-cycle"


def test_predict_word_validation():
    with pytest.raises(ValueError):
        predict_class("", close=True)
    with pytest.raises(ValueError):
        predict_class("XQ", close=True)


def test_z_split_locality():
    # letters on one side of a Z never affect the other side's component,
    # both in the prediction and in the zigzag simulation
    g, measured, survivors = zigzag_resource(10)
    for right in ("XX", "XY", "YX", "YY"):
        graphs = {}
        for left in ("X", "Y"):
            word = left + "Z" + right + "Z"
            sim = simulate_word(g, measured, word)
            rep = predict_representative(word, close=True, survivors=survivors)
            inner = {3, 5, 7}  # survivors strictly between the two Z cuts
            graphs[left] = (sim.induced(inner).edges, rep.induced(inner).edges)
        assert graphs["X"] == graphs["Y"]


# -- resources and crosscheck ---------------------------------------------------------------


def test_zigzag_resource_shape():
    g, measured, survivors = zigzag_resource(8)
    assert classify_graph(g).label == "cycle"
    assert measured == [0, 2, 4, 6] and survivors == [1, 3, 5, 7]


def test_honeycomb_resource_matches_expanded_multigraph():
    g, _, _ = honeycomb_resource(8)
    mg, tour = honeycomb_multigraph(8)
    assert interlacement(tour).edges == g.edges


def test_path_every_third_resource_shape():
    g, measured, survivors = path_every_third_resource(10)
    assert classify_graph(g).label == "path"
    assert measured == [0, 3, 6, 9]


@pytest.mark.parametrize("n", [6, 8])
def test_zigzag_sweep_exhaustive(n):
    for word in ALL_WORDS(n // 2):
        assert crosscheck(n, word, "zigzag"), word


def test_zigzag_examples():
    assert crosscheck(8, "XXXX", "zigzag")
    report = crosscheck_report(8, "XXXX", "zigzag")
    assert report["equivalent"] is True


def test_honeycomb_spot_words():
    for word in ("YYYY", "XXXX", "XYZX", "ZZZZ", "XZYX"):
        assert crosscheck(8, word, "honeycomb"), word


def test_path_every_third_bound():
    for word in ALL_WORDS(3):
        assert crosscheck(7, word, "path_every_third"), word


def test_crosscheck_validation():
    with pytest.raises(ValueError):
        crosscheck(14, "X" * 7, "zigzag")
    with pytest.raises(ValueError):
        crosscheck(8, "XXX", "zigzag")
    with pytest.raises(ValueError):
        crosscheck(8, "XXXX", "torus")


# -- serialization ----------------------------------------------------------------------------


def test_multigraph_json_round_trip():
    mg = build_circulant(6)
    payload = multigraph_to_json_dict(mg)
    back = multigraph_from_json_dict(payload)
    assert sorted(back.edge_pairs()) == sorted(mg.edge_pairs())
    assert multigraph_to_json_dict(back) == payload


def test_sampled_tours_all_equivalent_to_cycle():
    # rotating and reflecting the circulant reorders Hierholzer's choices,
    # giving genuinely different tours; all stay in the cycle's class
    base = build_circulant(8)
    tours = [find_tour(base)]
    for shift in (1, 3, 5):
        relabeled = Multigraph(
            base.vertices,
            tuple(
                (((a + shift) % 8, ta), ((b + shift) % 8, tb))
                for (a, ta), (b, tb) in base.edges
            ),
        )
        tours.append(find_tour(relabeled))
    seen = set()
    for tour in tours:
        ig = interlacement(tour)
        seen.add(ig.edges)
        assert locally_equivalent(ig, cycle_graph(range(8)))
    assert len(seen) > 1  # the sample really contains distinct tours


def test_zigzag_sweep_n12():
    for word in ALL_WORDS(6):
        assert crosscheck(12, word, "zigzag"), word


def test_honeycomb_sweep_exhaustive_n6():
    for word in ALL_WORDS(3):
        assert crosscheck(6, word, "honeycomb"), word


def test_reachable_classes_stay_in_the_caterpillar_family():
    # every word on every resource lands in the caterpillar / leafed-cycle
    # family; nothing unclassifiable is ever distributed
    family = {"empty", "path", "star", "cycle", "caterpillar",
              "leafed-cycle", "caterpillar-forest"}
    for builder, n in ((zigzag_resource, 8), (honeycomb_resource, 6),
                       (path_every_third_resource, 7)):
        g, measured, _ = builder(n)
        for letters in itertools.product("XYZ", repeat=len(measured)):
            sim = simulate_word(g, measured, "".join(letters))
            assert classify_graph(sim).label in family


def test_honeycomb_sweep_exhaustive_n10():
    for word in ALL_WORDS(5):
        assert crosscheck(10, word, "honeycomb"), word
