import itertools

import pytest

from cutspace.errors import CapExceededError, DecisionError
from cutspace.model.decisions import (
    Decision,
    DecisionSet,
    check_decision,
    check_decision_set,
    count_breakdown,
    count_decision_sets,
    count_decisions,
    decision_modules,
    decision_set_from_dict,
    decision_to_dict,
    enumerate_decision_sets,
    enumerate_decisions,
    parse_decision_set,
    validate_decision,
)
from cutspace.model.modgraph import build_undirected, enumerate_orientations
from cutspace.model.modules import form_module_set, make_partition
from cutspace.model.network import network_from_dict

from .conftest import binary_child, binary_param


def _brute_force(n):
    """Every (tags, x, cond) satisfying the decision graph rules, generated blindly."""
    found = set()
    for tags in itertools.product("TC", repeat=n):
        c_pos = [i for i in range(1, n + 1) if tags[i - 1] == "C"]
        for x in range(1, n + 1):
            for targets in itertools.product(range(1, n + 1), repeat=len(c_pos)):
                if tags[0] != "T" or tags[x - 1] != "T":
                    continue
                if any(tags[t - 1] != "T" or t >= c for c, t in zip(c_pos, targets)):
                    continue
                found.add((tags, x, tuple(zip(c_pos, targets))))
    return found


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 3), (3, 10)])
def test_counts(n, expected):
    assert count_decisions(n) == expected
    assert len(list(enumerate_decisions(n))) == expected


def test_breakdown():
    assert count_breakdown(2) == [2, 1]
    assert count_breakdown(3) == [3, 2, 4, 1]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_enumeration_matches_brute_force(n):
    decisions = list(enumerate_decisions(n, "theta"))
    keys = {(d.tags, d.x, d.cond) for d in decisions}
    assert len(keys) == len(decisions)
    assert keys == _brute_force(n)
    assert all(validate_decision(d, n) is None for d in decisions)


@pytest.mark.parametrize("n", range(1, 7))
def test_taggings_and_counts(n):
    decisions = list(enumerate_decisions(n))
    assert len(decisions) == count_decisions(n)
    assert len({d.tags for d in decisions}) == 2 ** (n - 1)


def test_enumeration_order_for_two():
    decisions = list(enumerate_decisions(2, "theta"))
    assert [(d.tags, d.x, d.cond) for d in decisions] == [
        (("T", "T"), 1, ()),
        (("T", "T"), 2, ()),
        (("T", "C"), 1, ((2, 1),)),
    ]


@pytest.mark.parametrize("tags, x, cond, violation", [
    (["T"], 1, {}, "vertex-count"),
    (["T", "X"], 1, {}, "tag-values"),
    (["T", "T"], 3, {}, "x-range"),
    (["C", "T"], 2, {1: 2}, "first-vertex-update"),
    (["T", "C"], 2, {2: 1}, "kept-vertex-update"),
    (["T", "C"], 1, {2: 5}, "cond-position-range"),
    (["T", "C"], 1, {}, "condition-single-neighbour"),
    (["T", "T"], 1, {2: 1}, "bipartite"),
    (["T", "C", "C"], 1, {2: 1, 3: 2}, "bipartite"),
    (["T", "C", "T"], 1, {2: 3}, "condition-neighbour-earlier"),
])
def test_invalid_decisions(tags, x, cond, violation):
    d = Decision.build("theta", tags, x, cond)
    assert validate_decision(d, 2 if violation == "vertex-count" else len(tags)) == violation
    with pytest.raises(DecisionError) as e:
        check_decision(d, 2 if violation == "vertex-count" else len(tags))
    assert e.value.invariant == f"decision:{violation}"


def _two_shared_net():
    return network_from_dict({"nodes": [
        binary_child("X", ["a", "b"], [0.1, 0.2, 0.3, 0.4]),
        binary_child("Y", ["a", "b"], [0.5, 0.6, 0.7, 0.8]),
        binary_param("a"),
        binary_param("b"),
    ]})


def test_decision_set_counts(triad_modules):
    assert count_decision_sets(triad_modules) == 3
    net = _two_shared_net()
    ms = form_module_set(net, make_partition(net, [["X"], ["Y"]]))
    g = next(iter(enumerate_orientations(build_undirected(ms))))
    sets = list(enumerate_decision_sets(ms, g))
    assert len(sets) == 9
    assert len(set(sets)) == 9
    assert all(ds.thetas == ("a", "b") for ds in sets)


def test_no_shared_parameters(triad):
    ms = form_module_set(triad, make_partition(triad, [triad.data_nodes]))
    g = next(iter(enumerate_orientations(build_undirected(ms))))
    assert list(enumerate_decision_sets(ms, g)) == [DecisionSet()]


def test_decision_set_cap(triad_modules, triad_rbg):
    with pytest.raises(CapExceededError) as e:
        list(enumerate_decision_sets(triad_modules, triad_rbg, max_sets=2))
    assert e.value.invariant == "cap:max-decision-sets"


def test_decision_modules_follow_ordering(triad_modules, triad_rbg):
    assert decision_modules(triad_modules, triad_rbg, "theta") == (0, 1)
    green_first = [g for g in enumerate_orientations(build_undirected(triad_modules)) if g.rank(1) < g.rank(0)]
    assert len(green_first) == 3
    assert all(decision_modules(triad_modules, g, "theta") == (1, 0) for g in green_first)


def test_check_decision_set(triad_modules, cut_tc):
    check_decision_set(triad_modules, cut_tc)
    with pytest.raises(DecisionError) as e:
        check_decision_set(triad_modules, DecisionSet())
    assert e.value.invariant == "decision-set-cover"
    extra = DecisionSet.of(list(cut_tc) + [Decision.build("phi", ["T"], 1)])
    with pytest.raises(DecisionError) as e:
        check_decision_set(triad_modules, extra)
    assert e.value.invariant == "decision-set-shared-only"
    with pytest.raises(DecisionError) as e:
        DecisionSet.of([Decision.build("theta", ["T"], 1), Decision.build("theta", ["T"], 1)])
    assert e.value.invariant == "decision-set-unique"


def test_decision_documents(cut_tc):
    assert parse_decision_set('[{"theta": "theta", "tags": ["T", "C"], "x": 1, "cond": {"2": 1}}]') == cut_tc
    assert decision_set_from_dict({"theta": "theta", "tags": ["T", "C"], "x": 1, "cond": {"2": 1}}) == cut_tc
    assert decision_to_dict(cut_tc["theta"]) == {"theta": "theta", "tags": ["T", "C"], "x": 1, "cond": {"2": 1}}
    with pytest.raises(DecisionError) as e:
        decision_set_from_dict([{"theta": "theta", "tags": ["T", "Q"], "x": 1}])
    assert e.value.invariant == "schema"
