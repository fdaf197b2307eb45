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

"""Decisions (D_θ, x_θ) for shared parameters and decision sets.

Vertex positions are 1-based and follow the topological ordering S restricted
to the modules that contain θ.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Optional

from pydantic import ValidationError

from cutspace.errors import CapExceededError, DecisionError, ParseError
from cutspace.model.modgraph import DirectedModuleGraph
from cutspace.model.modules import ModuleSet
from cutspace.schemas import DecisionDocument, validation_message

__all__ = [
    "UPDATE",
    "CONDITION",
    "Decision",
    "DecisionSet",
    "validate_decision",
    "check_decision",
    "enumerate_decisions",
    "count_decisions",
    "count_breakdown",
    "decision_modules",
    "enumerate_decision_sets",
    "count_decision_sets",
    "check_decision_set",
    "parse_decision_set",
    "decision_set_from_dict",
    "decision_to_dict",
]

UPDATE = "T"
CONDITION = "C"
DEFAULT_MAX_DECISION_SETS = 10 ** 6


@dataclass(frozen=True)
class Decision:
    theta: str
    tags: tuple[str, ...]
    x: int
    # (C position, its T neighbour position), sorted by C position
    cond: tuple[tuple[int, int], ...] = ()

    @classmethod
    def build(cls, theta: str, tags: Iterable[str], x: int, cond: Mapping[int, int] = None) -> "Decision":
        cond = cond or {}
        return cls(theta, tuple(tags), int(x), tuple(sorted((int(c), int(t)) for c, t in cond.items())))

    @property
    def size(self) -> int:
        return len(self.tags)

    def tag(self, position: int) -> str:
        return self.tags[position - 1]

    def neighbor(self, position: int) -> Optional[int]:
        return dict(self.cond).get(position)

    @property
    def update_positions(self) -> tuple[int, ...]:
        return tuple(i for i, tag in enumerate(self.tags, start=1) if tag == UPDATE)

    @property
    def condition_positions(self) -> tuple[int, ...]:
        return tuple(i for i, tag in enumerate(self.tags, start=1) if tag == CONDITION)

    def degree(self, position: int) -> int:
        return sum(1 for c, t in self.cond if position in (c, t))


def validate_decision(d: Decision, m_theta_count: int) -> Optional[str]:
    """Name of the first violated condition, or None when `d` is a valid decision."""
    if len(d.tags) != m_theta_count:
        return "vertex-count"
    if any(tag not in (UPDATE, CONDITION) for tag in d.tags):
        return "tag-values"
    if not 1 <= d.x <= m_theta_count:
        return "x-range"
    if d.tags[0] != UPDATE:
        return "first-vertex-update"
    if d.tag(d.x) != UPDATE:
        return "kept-vertex-update"

    neighbours = {}
    for c, t in d.cond:
        if not 1 <= c <= m_theta_count or not 1 <= t <= m_theta_count:
            return "cond-position-range"
        if c in neighbours:
            return "condition-single-neighbour"
        neighbours[c] = t
    for c, t in d.cond:
        if d.tag(c) != CONDITION:
            return "bipartite"
    for c in d.condition_positions:
        if c not in neighbours:
            return "condition-single-neighbour"
        t = neighbours[c]
        if t >= c:
            return "condition-neighbour-earlier"
        if d.tag(t) != UPDATE:
            return "bipartite"
    return None


def check_decision(d: Decision, m_theta_count: int):
    violation = validate_decision(d, m_theta_count)
    if violation:
        raise DecisionError(f"decision:{violation}", f"decision for {d.theta!r} is invalid")


def _taggings(m: int) -> Iterator[tuple[str, ...]]:
    # binary counter; vertex 2 is the low bit, a set bit means C
    for mask in range(2 ** (m - 1)):
        yield (UPDATE,) + tuple(CONDITION if mask >> p & 1 else UPDATE for p in range(m - 1))


def enumerate_decisions(m_theta_count: int, theta: str = "") -> Iterator[Decision]:
    if m_theta_count < 1:
        raise DecisionError("decision:vertex-count", "a decision needs at least one module")
    for tags in _taggings(m_theta_count):
        t_pos = [i for i, tag in enumerate(tags, start=1) if tag == UPDATE]
        c_pos = [i for i, tag in enumerate(tags, start=1) if tag == CONDITION]
        choices = [[t for t in t_pos if t < c] for c in c_pos]
        for x in t_pos:
            for wiring in itertools.product(*choices):
                yield Decision(theta, tags, x, tuple(zip(c_pos, wiring)))


def count_breakdown(m_theta_count: int) -> list[int]:
    """Decision counts per (T, C) tagging, in enumeration order."""
    counts = []
    for tags in _taggings(m_theta_count):
        t_pos = [i for i, tag in enumerate(tags, start=1) if tag == UPDATE]
        wirings = math.prod(sum(1 for t in t_pos if t < c) for c, tag in enumerate(tags, start=1) if tag == CONDITION)
        counts.append(len(t_pos) * wirings)
    return counts


def count_decisions(m_theta_count: int) -> int:
    if m_theta_count < 1:
        raise DecisionError("decision:vertex-count", "a decision needs at least one module")
    return sum(count_breakdown(m_theta_count))


@dataclass(frozen=True)
class DecisionSet:
    decisions: tuple[Decision, ...] = ()

    @classmethod
    def of(cls, decisions: Iterable[Decision]) -> "DecisionSet":
        decisions = tuple(sorted(decisions, key=lambda d: d.theta))
        thetas = [d.theta for d in decisions]
        if len(set(thetas)) != len(thetas):
            raise DecisionError("decision-set-unique", "a parameter has several decisions")
        return cls(decisions)

    @property
    def thetas(self) -> tuple[str, ...]:
        return tuple(d.theta for d in self.decisions)

    def get(self, theta: str) -> Optional[Decision]:
        for d in self.decisions:
            if d.theta == theta:
                return d
        return None

    def __getitem__(self, theta: str) -> Decision:
        d = self.get(theta)
        if d is None:
            raise KeyError(theta)
        return d

    def __iter__(self) -> Iterator[Decision]:
        return iter(self.decisions)

    def __len__(self) -> int:
        return len(self.decisions)


def decision_modules(ms: ModuleSet, g: DirectedModuleGraph, theta: str) -> tuple[int, ...]:
    """Modules containing θ, ranked by the ordering of `g` (vertex i+1 is entry i)."""
    return tuple(sorted(ms.modules_of(theta), key=g.rank))


def count_decision_sets(ms: ModuleSet) -> int:
    return math.prod(count_decisions(len(ms.modules_of(theta))) for theta in ms.shared_params)


def enumerate_decision_sets(
        ms: ModuleSet,
        g: DirectedModuleGraph,
        max_sets: int = DEFAULT_MAX_DECISION_SETS,
) -> Iterator[DecisionSet]:
    """Cartesian product of the per-parameter decisions, parameters sorted by name."""
    total = count_decision_sets(ms)
    if total > max_sets:
        raise CapExceededError("max-decision-sets", total, max_sets)
    thetas = sorted(ms.shared_params)
    logging.debug(f"Enumerating {total} decision sets over {len(thetas)} shared parameters")
    per_theta = [list(enumerate_decisions(len(ms.modules_of(theta)), theta)) for theta in thetas]
    for combination in itertools.product(*per_theta):
        yield DecisionSet(tuple(combination))


def check_decision_set(ms: ModuleSet, ds: DecisionSet):
    missing = ms.shared_params - set(ds.thetas)
    if missing:
        raise DecisionError("decision-set-cover", f"no decision for shared {', '.join(sorted(missing))}")
    extra = set(ds.thetas) - ms.shared_params
    if extra:
        raise DecisionError("decision-set-shared-only", f"decisions for unshared {', '.join(sorted(extra))}")
    for d in ds:
        check_decision(d, len(ms.modules_of(d.theta)))


def _decision_from_document(document: DecisionDocument) -> Decision:
    return Decision.build(document.theta, document.tags, document.x, document.cond)


def decision_set_from_dict(raw) -> DecisionSet:
    """Read an array of decision documents (a single object is accepted too)."""
    items = raw if isinstance(raw, list) else [raw]
    try:
        documents = [DecisionDocument.model_validate(item) for item in items]
    except ValidationError as e:
        raise DecisionError("schema", validation_message(e)) from None
    return DecisionSet.of(_decision_from_document(doc) for doc in documents)


def parse_decision_set(text: str) -> DecisionSet:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    return decision_set_from_dict(raw)


def decision_to_dict(d: Decision) -> dict:
    return {
        "theta": d.theta,
        "tags": list(d.tags),
        "x": d.x,
        "cond": {str(c): t for c, t in d.cond},
    }
