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

"""Undirected module graphs, their acyclic orientations, and topological orderings."""

from __future__ import annotations

import itertools
import json
import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import networkx as nx
from pydantic import ValidationError

from cutspace.errors import CapExceededError, ModuleGraphError, ParseError
from cutspace.model.modules import ModuleSet
from cutspace.schemas import OrientationDocument, validation_message

__all__ = [
    "UndirectedModuleGraph",
    "DirectedModuleGraph",
    "build_undirected",
    "enumerate_orientations",
    "count_orientations",
    "topological_order",
    "enumerate_orderings",
    "orient",
    "is_acyclic",
    "shared_params_complete",
    "parse_orientation",
    "orientation_from_dict",
    "orientation_to_dict",
]

DEFAULT_MAX_EDGES = 20


@dataclass(frozen=True)
class UndirectedModuleGraph:
    size: int
    edges: tuple[tuple[int, int], ...]

    def adjacent(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._edge_set

    def neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(sorted({b for a, b in self.edges if a == i} | {a for a, b in self.edges if b == i}))

    @cached_property
    def _edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)


@dataclass(frozen=True)
class DirectedModuleGraph:
    undirected: UndirectedModuleGraph
    arcs: tuple[tuple[int, int], ...]
    ordering: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.undirected.size

    @cached_property
    def _rank(self) -> dict[int, int]:
        return {module: position for position, module in enumerate(self.ordering)}

    def rank(self, i: int) -> int:
        return self._rank[i]

    def predecessors(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(u for u, v in self.arcs if v == i))

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(v for u, v in self.arcs if u == i))

    def with_ordering(self, ordering: Sequence[int]) -> "DirectedModuleGraph":
        ordering = tuple(ordering)
        _check_ordering(self.size, self.arcs, ordering)
        return DirectedModuleGraph(self.undirected, self.arcs, ordering)


def build_undirected(ms: ModuleSet) -> UndirectedModuleGraph:
    edges = tuple(
        (i, j)
        for i, j in itertools.combinations(range(len(ms)), 2)
        if ms.modules[i].members & ms.modules[j].members
    )
    return UndirectedModuleGraph(size=len(ms), edges=edges)


def _digraph(size: int, arcs: Iterable[tuple[int, int]]) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(size))
    graph.add_edges_from(arcs)
    return graph


def is_acyclic(size: int, arcs: Iterable[tuple[int, int]]) -> bool:
    return nx.is_directed_acyclic_graph(_digraph(size, arcs))


def topological_order(size: int, arcs: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Lowest-index-first topological ordering of modules 0..size-1."""
    try:
        return tuple(nx.lexicographical_topological_sort(_digraph(size, arcs)))
    except nx.NetworkXUnfeasible:
        raise ModuleGraphError("acyclic", "the directed module graph has a cycle") from None


def enumerate_orderings(g: DirectedModuleGraph) -> list[tuple[int, ...]]:
    """Every topological ordering of `g`, sorted."""
    return sorted(tuple(order) for order in nx.all_topological_sorts(_digraph(g.size, g.arcs)))


def _check_ordering(size: int, arcs: Sequence[tuple[int, int]], ordering: tuple[int, ...]):
    if sorted(ordering) != list(range(size)):
        raise ModuleGraphError("ordering-permutation", f"{list(ordering)} is not a permutation of the modules")
    position = {module: i for i, module in enumerate(ordering)}
    for u, v in arcs:
        if position[u] > position[v]:
            raise ModuleGraphError("ordering-consistent", f"ordering places {v} before {u} against arc {u}->{v}")


def _reaches(successors: dict[int, set[int]], start: int, goal: int) -> bool:
    stack, seen = [start], {start}
    while stack:
        v = stack.pop()
        if v == goal:
            return True
        for w in successors[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def enumerate_orientations(h: UndirectedModuleGraph, max_edges: int = DEFAULT_MAX_EDGES) -> Iterator[DirectedModuleGraph]:
    """Yield every acyclic orientation of `h` once, with its canonical ordering.

    Edges are oriented one at a time in edge order, lower index first; a branch
    is cut as soon as the new arc closes a cycle.
    """
    if len(h.edges) > max_edges:
        raise CapExceededError("max-orient-edges", len(h.edges), max_edges)

    successors = {i: set() for i in range(h.size)}
    arcs = []

    def extend(k: int) -> Iterator[tuple[tuple[int, int], ...]]:
        if k == len(h.edges):
            yield tuple(arcs)
            return
        i, j = h.edges[k]
        for u, v in ((i, j), (j, i)):
            if _reaches(successors, v, u):
                continue
            successors[u].add(v)
            arcs.append((u, v))
            yield from extend(k + 1)
            arcs.pop()
            successors[u].discard(v)

    for oriented in extend(0):
        yield DirectedModuleGraph(h, oriented, topological_order(h.size, oriented))


def count_orientations(h: UndirectedModuleGraph, max_edges: int = DEFAULT_MAX_EDGES) -> int:
    return sum(1 for _ in enumerate_orientations(h, max_edges))


def orient(
        h: UndirectedModuleGraph,
        directions: Iterable[tuple[int, int]],
        ordering: Optional[Sequence[int]] = None,
) -> DirectedModuleGraph:
    """Build the directed module graph that gives each edge of `h` the listed direction."""
    chosen = {}
    for u, v in directions:
        if not h.adjacent(u, v):
            raise ModuleGraphError("orientation-edge", f"modules {u} and {v} do not intersect")
        key = (min(u, v), max(u, v))
        if key in chosen and chosen[key] != (u, v):
            raise ModuleGraphError("orientation-unique", f"edge {key} is given both directions")
        chosen[key] = (u, v)
    missing = [edge for edge in h.edges if edge not in chosen]
    if missing:
        raise ModuleGraphError("orientation-complete", f"edges without a direction: {missing}")
    arcs = tuple(chosen[edge] for edge in h.edges)
    if not is_acyclic(h.size, arcs):
        raise ModuleGraphError("acyclic", "the given directions form a cycle")
    g = DirectedModuleGraph(h, arcs, topological_order(h.size, arcs))
    if ordering is not None:
        g = g.with_ordering(ordering)
    return g


def shared_params_complete(ms: ModuleSet, h: UndirectedModuleGraph) -> list[tuple[str, int, int]]:
    """Pairs of modules sharing a parameter but not adjacent in `h` (always empty)."""
    violations = []
    for theta in sorted(ms.shared_params):
        for i, j in itertools.combinations(ms.modules_of(theta), 2):
            if not h.adjacent(i, j):
                violations.append((theta, i, j))
    return violations


def _resolve(ref: Union[int, str], ms: ModuleSet) -> int:
    labels = ms.partition.labels or ()
    if isinstance(ref, str) and ref in labels:
        return labels.index(ref)
    try:
        index = int(ref)
    except ValueError:
        raise ModuleGraphError("module-label", f"unknown module label {ref!r}") from None
    if not 0 <= index < len(ms):
        raise ModuleGraphError("module-label", f"module index {index} out of range")
    return index


def orientation_from_dict(raw, ms: ModuleSet, h: UndirectedModuleGraph) -> DirectedModuleGraph:
    try:
        document = OrientationDocument.model_validate(raw)
    except ValidationError as e:
        raise ModuleGraphError("schema", validation_message(e)) from None

    if document.edges is not None:
        listed = {tuple(sorted((_resolve(a, ms), _resolve(b, ms)))) for a, b in document.edges}
        if listed != set(h.edges):
            raise ModuleGraphError("orientation-edges", "listed edges differ from the module intersection graph")
    directions = [(_resolve(a, ms), _resolve(b, ms)) for a, b in document.directions]
    ordering = [_resolve(m, ms) for m in document.ordering] if document.ordering is not None else None
    g = orient(h, directions, ordering)
    logging.debug(f"Orientation {g.arcs} with ordering {g.ordering}")
    return g


def parse_orientation(text: str, ms: ModuleSet, h: UndirectedModuleGraph) -> DirectedModuleGraph:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    return orientation_from_dict(raw, ms, h)


def orientation_to_dict(g: DirectedModuleGraph, ms: ModuleSet) -> dict:
    return {
        "edges": [[ms.label(i), ms.label(j)] for i, j in g.undirected.edges],
        "directions": [[ms.label(u), ms.label(v)] for u, v in g.arcs],
        "ordering": [ms.label(i) for i in g.ordering],
    }
