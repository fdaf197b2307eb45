import os

import pytest

from cutspace.model.decisions import Decision, DecisionSet
from cutspace.model.modgraph import build_undirected
from cutspace.model.modules import form_module_set, make_partition
from cutspace.model.network import Evidence, network_from_dict
from cutspace.utils import load_evidence, load_network, load_orientation, load_partition

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def binary_param(name):
    return {"id": name, "kind": "param", "parents": [], "states": 2, "cpt": [[0.5, 0.5]]}


def binary_child(name, parents, p_one):
    """Binary data node; `p_one` lists P(node = 1) per parent-state row."""
    return {"id": name, "kind": "data", "parents": list(parents), "states": 2,
            "cpt": [[1.0 - p, p] for p in p_one]}


@pytest.fixture
def triad():
    return load_network(fixture_path("triad.json"))


@pytest.fixture
def triad_partition(triad):
    return load_partition(fixture_path("triad_partition.json"), triad)


@pytest.fixture
def triad_modules(triad, triad_partition):
    return form_module_set(triad, triad_partition)


@pytest.fixture
def triad_rbg(triad_modules):
    return load_orientation(fixture_path("triad_rbg.json"), triad_modules, build_undirected(triad_modules))


@pytest.fixture
def cut_tc():
    return DecisionSet.of([Decision.build("theta", ["T", "C"], 1, {2: 1})])


@pytest.fixture
def cut_tt():
    return DecisionSet.of([Decision.build("theta", ["T", "T"], 1)])


@pytest.fixture
def triad_evidence(triad):
    return load_evidence(fixture_path("triad_evidence.json"), triad)


@pytest.fixture
def misspecified():
    return load_network(fixture_path("misspecified.json"))


@pytest.fixture
def misspecified_partition(misspecified):
    return load_partition(fixture_path("misspecified_partition.json"), misspecified)


@pytest.fixture
def misspecified_train(misspecified):
    return load_evidence(fixture_path("misspecified_train.json"), misspecified)


@pytest.fixture
def misspecified_heldout(misspecified):
    return load_evidence(fixture_path("misspecified_heldout.json"), misspecified)


@pytest.fixture
def two_module_net():
    """theta -> X, theta -> Y, both binary."""
    return network_from_dict({"nodes": [
        binary_child("X", ["theta"], [0.2, 0.8]),
        binary_child("Y", ["theta"], [0.3, 0.9]),
        binary_param("theta"),
    ]})


@pytest.fixture
def two_module_partition(two_module_net):
    return make_partition(two_module_net, [["X"], ["Y"]])


@pytest.fixture
def star_net():
    """theta shared by five singleton modules X1..X5."""
    return network_from_dict({"nodes": [
        *[binary_child(f"X{i}", ["theta"], [0.3, 0.7]) for i in range(1, 6)],
        binary_param("theta"),
    ]})


@pytest.fixture
def observe():
    def make(net, **states):
        return Evidence.from_mapping(net, states)

    return make
