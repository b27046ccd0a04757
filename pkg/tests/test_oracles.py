"""Hand-checked cases for the oracles, so a wrong oracle cannot hide a wrong implementation."""

from fractions import Fraction

from oracles import NaiveEvaluator, brute_force_jenks, grid_jenks_table, within_ss


def test_within_ss_by_hand():
    assert within_ss([Fraction(1), Fraction(3)]) == 2
    assert within_ss([Fraction(5)]) == 0


def test_brute_force_two_clusters():
    cost, breaks = brute_force_jenks([1, 2, 10, 11], 2)
    assert breaks == (2,)
    assert cost == Fraction(1, 2) + Fraction(1, 2)


def test_brute_force_tie_prefers_smaller_breaks():
    # {0},{1,2} and {0,1},{2} cost the same
    cost, breaks = brute_force_jenks([0, 1, 2], 2)
    assert cost == Fraction(1, 2)
    assert breaks == (1,)


def test_brute_force_multiplicity():
    cost, breaks = brute_force_jenks([0, 0, 0, 1, 5], 2)
    # {0,0,0,1} | {5}: mean 1/4, ss = 3/16*3... computed directly
    assert breaks == (2,)
    assert cost == within_ss([Fraction(x) for x in (0, 0, 0, 1)])


def test_grid_table_matches_fraction_enumeration():
    pts = (0, 2, 3, 7, 11, 12)
    table = grid_jenks_table(pts, 4)
    from math import lcm

    L = lcm(*range(1, len(pts) + 1))
    for k, (scaled, breaks) in table.items():
        cost, ref = brute_force_jenks(pts, k)
        assert Fraction(scaled, L) == cost
        assert breaks == ref


def test_naive_evaluator_by_hand():
    raw = [
        {"year": 2016, "doc_type": "article", "oa_types": ["bronze"],
         "subject_categories": ["A", "B"], "affiliations": [{"country": "FR"}]},
        {"year": 2016, "doc_type": "article", "oa_types": [],
         "subject_categories": ["A"], "affiliations": [{"country": "DE"}]},
    ]
    ev = NaiveEvaluator(raw, "country", (2015, 2018), {"article"}, {"A": "x", "B": "y"}, {"FR", "DE"}, set())
    assert ev.zones() == ["DE", "FR"]
    assert ev.oa_share("FR") == 1.0
    assert ev.oa_share("WORLD") == 0.5
    # world A share 0.5/1.5, FR A share 1 -> OAI 3; B: 1/1 -> 1; weights .5/.5
    assert ev.noai("FR") == 2.0
    assert ev.noai("DE") == 0.0
    assert ev.specialization("DE", "x") == 1.0 / (1.5 / 2.0)
