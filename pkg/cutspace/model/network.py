# Copyright 2025 The cutspace authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Bayesian network over data nodes X and parameter nodes Θ."""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional

import networkx as nx
import numpy as np
from pydantic import ValidationError

from cutspace.errors import NetworkError, ParseError
from cutspace.schemas import EvidenceDocument, NetworkDocument, validation_message

__all__ = [
    "NodeKind",
    "Node",
    "BayesNet",
    "Evidence",
    "parse_network",
    "render_network",
    "network_from_dict",
    "network_to_dict",
    "parse_evidence",
    "evidence_from_dict",
    "ancestors",
]

CPT_TOLERANCE = 1e-9


class NodeKind(str, Enum):
    DATA = "data"
    PARAM = "param"


@dataclass(frozen=True)
class Node:
    name: str
    kind: NodeKind
    parents: tuple[str, ...] = ()
    states: Optional[int] = None
    # One row per parent-state combination, last parent varying fastest.
    cpt: Optional[tuple[tuple[float, ...], ...]] = None

    @property
    def is_data(self) -> bool:
        return self.kind is NodeKind.DATA


@dataclass(frozen=True)
class BayesNet:
    """Immutable DAG with a declared data/parameter bipartition.

    Node order as given is the canonical order used for every derived object.
    """

    nodes: tuple[Node, ...]

    def __post_init__(self):
        _validate(self)

    @cached_property
    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(node.name for node in self.nodes)
        graph.add_edges_from((parent, node.name) for node in self.nodes for parent in node.parents)
        return graph

    @cached_property
    def _index(self) -> dict[str, int]:
        return {node.name: i for i, node in enumerate(self.nodes)}

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(node.name for node in self.nodes)

    @cached_property
    def data_nodes(self) -> tuple[str, ...]:
        return tuple(node.name for node in self.nodes if node.is_data)

    @cached_property
    def param_nodes(self) -> tuple[str, ...]:
        return tuple(node.name for node in self.nodes if not node.is_data)

    @property
    def edge_count(self) -> int:
        return sum(len(node.parents) for node in self.nodes)

    @property
    def is_discrete(self) -> bool:
        return bool(self.nodes) and self.nodes[0].cpt is not None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def node(self, name: str) -> Node:
        try:
            return self.nodes[self._index[name]]
        except KeyError:
            raise NetworkError("unknown-node", f"node {name!r} is not in the network") from None

    def is_data(self, name: str) -> bool:
        return self.node(name).is_data

    def parents(self, name: str) -> tuple[str, ...]:
        return self.node(name).parents

    def children(self, name: str) -> tuple[str, ...]:
        self.node(name)
        return self.sort(self.graph.successors(name))

    def order_key(self, name: str) -> int:
        return self._index[name]

    def sort(self, names: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(names, key=self._index.__getitem__))

    def states(self, name: str) -> int:
        node = self.node(name)
        if node.states is None:
            raise NetworkError("discrete", f"node {name!r} has no state count")
        return node.states

    def table(self, name: str) -> np.ndarray:
        """CPT of `name` as an array shaped (*parent states, own states)."""
        node = self.node(name)
        if node.cpt is None:
            raise NetworkError("discrete", f"node {name!r} carries no CPT")
        shape = tuple(self.states(p) for p in node.parents) + (node.states,)
        return np.asarray(node.cpt, dtype=float).reshape(shape)


def _validate(net: BayesNet):
    seen = set()
    for node in net.nodes:
        if not node.name:
            raise NetworkError("node-id-nonempty", "node ids must be nonempty strings")
        if node.name in seen:
            raise NetworkError("node-id-unique", f"node {node.name!r} is declared twice")
        seen.add(node.name)

    for node in net.nodes:
        for parent in node.parents:
            if parent not in seen:
                raise NetworkError("parent-exists", f"{node.name!r} lists unknown parent {parent!r}")
        if len(set(node.parents)) != len(node.parents):
            raise NetworkError("parent-unique", f"{node.name!r} lists a parent twice")

    try:
        cycle = nx.find_cycle(net.graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        path = " -> ".join([u for u, _ in cycle] + [cycle[0][0]])
        raise NetworkError("acyclic", f"cycle {path}")

    with_cpt = [node for node in net.nodes if node.cpt is not None]
    if with_cpt and len(with_cpt) != len(net.nodes):
        missing = [node.name for node in net.nodes if node.cpt is None]
        raise NetworkError("cpt-all-or-none", f"nodes without a CPT: {', '.join(missing)}")
    for node in with_cpt:
        _validate_cpt(net, node)


def _validate_cpt(net: BayesNet, node: Node):
    if node.states is None:
        raise NetworkError("cpt-states", f"{node.name!r} has a CPT but no state count")
    for parent in node.parents:
        if net.node(parent).states is None:
            raise NetworkError("cpt-states", f"parent {parent!r} of {node.name!r} has no state count")
    rows = math.prod(net.node(p).states for p in node.parents)
    if len(node.cpt) != rows:
        raise NetworkError("cpt-row-count", f"{node.name!r} needs {rows} CPT rows, found {len(node.cpt)}")
    for i, row in enumerate(node.cpt):
        if len(row) != node.states:
            raise NetworkError("cpt-row-length", f"{node.name!r} row {i} has {len(row)} entries, expected {node.states}")
        if any(value < 0 for value in row):
            raise NetworkError("cpt-nonnegative", f"{node.name!r} row {i} has a negative entry")
        if abs(sum(row) - 1.0) > CPT_TOLERANCE:
            raise NetworkError("cpt-row-sum", f"{node.name!r} row {i} sums to {sum(row)!r}")


def network_from_dict(document: Mapping) -> BayesNet:
    try:
        parsed = NetworkDocument.model_validate(document)
    except ValidationError as e:
        raise NetworkError("schema", validation_message(e)) from None
    nodes = []
    for item in parsed.nodes:
        cpt = tuple(tuple(float(v) for v in row) for row in item.cpt) if item.cpt is not None else None
        nodes.append(Node(
            name=item.id,
            kind=NodeKind(item.kind),
            parents=tuple(item.parents),
            states=item.states,
            cpt=cpt,
        ))
    return BayesNet(tuple(nodes))


def network_to_dict(net: BayesNet) -> dict:
    nodes = []
    for node in net.nodes:
        item = {"id": node.name, "kind": node.kind.value, "parents": list(node.parents)}
        if node.states is not None:
            item["states"] = node.states
        if node.cpt is not None:
            item["cpt"] = [list(row) for row in node.cpt]
        nodes.append(item)
    return {"nodes": nodes}


def parse_network(text: str) -> BayesNet:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    return network_from_dict(document)


def render_network(net: BayesNet) -> str:
    return json.dumps(network_to_dict(net), indent=2)


def ancestors(net: BayesNet, v: str) -> frozenset[str]:
    """All u with a directed path u -> ... -> v, v excluded."""
    net.node(v)
    return frozenset(nx.ancestors(net.graph, v))


@dataclass(frozen=True)
class Evidence:
    """Observed state index per data node, kept in canonical node order."""

    observed: tuple[tuple[str, int], ...] = ()

    @classmethod
    def from_mapping(cls, net: BayesNet, mapping: Mapping[str, int]) -> "Evidence":
        for name, state in mapping.items():
            node = net.node(name)
            if not node.is_data:
                raise NetworkError("evidence-data-only", f"{name!r} is a parameter node and cannot be observed")
            if node.states is not None and not 0 <= state < node.states:
                raise NetworkError("evidence-state-range", f"{name!r} has {node.states} states, got {state}")
            if state < 0:
                raise NetworkError("evidence-state-range", f"{name!r} observed at negative state {state}")
        ordered = tuple((name, int(mapping[name])) for name in net.sort(mapping))
        return cls(ordered)

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.observed)

    def as_dict(self) -> dict[str, int]:
        return dict(self.observed)

    def __contains__(self, name: str) -> bool:
        return any(name == n for n, _ in self.observed)

    def __getitem__(self, name: str) -> int:
        for n, state in self.observed:
            if n == name:
                return state
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.observed)

    def without(self, names: Iterable[str]) -> "Evidence":
        drop = set(names)
        return Evidence(tuple(item for item in self.observed if item[0] not in drop))

    def merged(self, other: "Evidence", net: BayesNet) -> "Evidence":
        mapping = self.as_dict()
        mapping.update(other.as_dict())
        return Evidence.from_mapping(net, mapping)


def evidence_from_dict(document, net: BayesNet) -> Evidence:
    try:
        parsed = EvidenceDocument.model_validate(document)
    except ValidationError as e:
        raise NetworkError("schema", validation_message(e)) from None
    return Evidence.from_mapping(net, parsed.observe)


def parse_evidence(text: str, net: BayesNet) -> Evidence:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    return evidence_from_dict(document, net)
