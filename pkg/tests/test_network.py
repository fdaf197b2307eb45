import networkx as nx
import numpy as np
import pytest

from cutspace.errors import NetworkError, ParseError
from cutspace.model.modgraph import is_acyclic
from cutspace.model.network import (
    Evidence,
    ancestors,
    network_from_dict,
    network_to_dict,
    parse_evidence,
    parse_network,
    render_network,
)
from cutspace.utils import load_network

from .conftest import binary_child, binary_param, fixture_path
from .netgen import random_network


def test_triad_structure(triad):
    assert len(triad.nodes) == 7
    assert triad.edge_count == 7
    assert triad.data_nodes == ("W", "X", "Y", "Z")
    assert triad.param_nodes == ("theta", "phi", "psi")
    assert triad.parents("Y") == ("W", "theta", "phi")
    assert triad.children("theta") == ("X", "Y")
    assert triad.is_discrete


def test_ancestors(triad):
    assert ancestors(triad, "X") == {"theta", "W", "psi"}
    assert ancestors(triad, "psi") == frozenset()
    with pytest.raises(NetworkError) as e:
        ancestors(triad, "nope")
    assert e.value.invariant == "unknown-node"


def test_cycle_is_named():
    with pytest.raises(NetworkError) as e:
        load_network(fixture_path("cyclic.json"))
    assert e.value.invariant == "acyclic"
    assert "cycle" in e.value.message


@pytest.mark.parametrize("nodes, invariant", [
    ([binary_param("t"), binary_param("t")], "node-id-unique"),
    ([{"id": "X", "kind": "data", "parents": ["t"]}], "parent-exists"),
    ([{"id": "X", "kind": "data", "parents": ["t", "t"]}, {"id": "t", "kind": "param"}], "parent-unique"),
    ([binary_child("X", ["t"], [0.2, 0.8]), {"id": "t", "kind": "param"}], "cpt-all-or-none"),
    ([binary_child("X", ["t"], [0.2]), binary_param("t")], "cpt-row-count"),
    ([{"id": "t", "kind": "param", "states": 2, "cpt": [[0.5, 0.6]]}], "cpt-row-sum"),
    ([{"id": "t", "kind": "param", "states": 2, "cpt": [[1.5, -0.5]]}], "cpt-nonnegative"),
    ([{"id": "t", "kind": "param", "cpt": [[1.0]]}], "cpt-states"),
    ([{"id": "t", "kind": "parameter"}], "schema"),
])
def test_invalid_networks(nodes, invariant):
    with pytest.raises(NetworkError) as e:
        network_from_dict({"nodes": nodes})
    assert e.value.invariant == invariant


def test_structure_only_network_is_valid():
    net = network_from_dict({"nodes": [
        {"id": "X", "kind": "data", "parents": ["theta"]},
        {"id": "theta", "kind": "param"},
    ]})
    assert not net.is_discrete
    with pytest.raises(NetworkError) as e:
        net.table("X")
    assert e.value.invariant == "discrete"


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_network('{"nodes": [\n  {"id": "X",,}\n]}')
    assert e.value.invariant == "parse"
    assert e.value.line == 2


def test_render_network_is_stable(triad):
    text = render_network(triad)
    assert parse_network(text) == triad
    assert render_network(parse_network(text)) == text


def test_cpt_table_layout(triad):
    table = triad.table("Y")
    assert table.shape == (2, 2, 2, 2)
    # last parent varies fastest
    assert table[1, 1, 0, 1] == pytest.approx(0.05)
    assert table[1, 0, 1, 1] == pytest.approx(0.95)


def test_yaml_network(tmp_path, triad):
    import yaml

    path = tmp_path / "triad.yaml"
    path.write_text(yaml.safe_dump(network_to_dict(triad)))
    assert load_network(str(path)) == triad


def test_evidence(triad):
    evidence = parse_evidence('{"observe": {"Z": 0, "W": 1}}', triad)
    assert evidence.observed == (("W", 1), ("Z", 0))
    assert "W" in evidence and "X" not in evidence
    assert evidence.without(["W"]).as_dict() == {"Z": 0}
    merged = evidence.merged(Evidence.from_mapping(triad, {"X": 1}), triad)
    assert merged.observed == (("W", 1), ("X", 1), ("Z", 0))


@pytest.mark.parametrize("observe, invariant", [
    ({"theta": 0}, "evidence-data-only"),
    ({"W": 2}, "evidence-state-range"),
    ({"Q": 0}, "unknown-node"),
])
def test_invalid_evidence(triad, observe, invariant):
    with pytest.raises(NetworkError) as e:
        Evidence.from_mapping(triad, observe)
    assert e.value.invariant == invariant


def test_random_networks_are_dags():
    rng = np.random.default_rng(7)
    for _ in range(50):
        net = random_network(rng, n_data=int(rng.integers(1, 5)), n_params=int(rng.integers(1, 4)), max_states=3)
        assert nx.is_directed_acyclic_graph(net.graph)
        for name in net.names:
            assert ancestors(net, name) == nx.ancestors(net.graph, name)


def _kahn_sorts_everything(size, arcs):
    indegree = [0] * size
    for _, v in arcs:
        indegree[v] += 1
    ready = [v for v in range(size) if indegree[v] == 0]
    visited = 0
    while ready:
        u = ready.pop()
        visited += 1
        for a, b in arcs:
            if a == u:
                indegree[b] -= 1
                if indegree[b] == 0:
                    ready.append(b)
    return visited == size


def test_acyclicity_matches_topological_sort():
    rng = np.random.default_rng(23)
    cyclic = 0
    for _ in range(200):
        size = int(rng.integers(2, 8))
        arcs = {(int(u), int(v)) for u in range(size) for v in range(u + 1, size) if rng.random() < 0.4}
        if rng.random() < 0.5:
            u, v = sorted(int(k) for k in rng.choice(size, size=2, replace=False))
            arcs |= {(u, v), (v, u)} if rng.random() < 0.3 else {(v, u)}
        arcs = sorted(arcs)
        expected = _kahn_sorts_everything(size, arcs)
        cyclic += not expected
        assert is_acyclic(size, arcs) == expected

        names = [f"t{k}" for k in range(size)]
        nodes = [{"id": names[v], "kind": "param", "parents": sorted(names[u] for u, w in arcs if w == v)}
                 for v in range(size)]
        if expected:
            assert network_from_dict({"nodes": nodes}).edge_count == len(arcs)
        else:
            with pytest.raises(NetworkError) as e:
                network_from_dict({"nodes": nodes})
            assert e.value.invariant == "acyclic"
    assert cyclic > 20
