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

"""Move tree of the walk over (module set, directed module graph, decision set).

    q0     perturb the decision of a random shared parameter
      q1     perturb its graph
        q2     pick a C-vertex edge; q3 delete it (C -> T), else rewire it
        1-q2   turn an isolated T vertex (not v1, not v_x) into C
      1-q1   move x to another T vertex
    1-q0   perturb the module graph
      q4     merge two modules, contracting their decision vertices
      1-q4   split a module along a bipartition of its core, q5 for decision splitting

Structural moves work on decisions keyed by module index (a `Wiring`) and turn
them back into positional decisions under the new ordering S'.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Optional

from cutspace.config import MoveProbs
from cutspace.errors import MoveRejected
from cutspace.inference.choosers import Chooser
from cutspace.model.decisions import (
    CONDITION,
    UPDATE,
    Decision,
    DecisionSet,
    decision_modules,
    decision_to_dict,
    validate_decision,
)
from cutspace.model.modgraph import DirectedModuleGraph, build_undirected, is_acyclic
from cutspace.model.modules import ModuleSet, merge_modules, partition_to_dict, split_module
from cutspace.model.network import BayesNet

__all__ = [
    "MOVE_KINDS",
    "ProposalRecord",
    "Proposal",
    "Wiring",
    "propose_move",
    "perturb_decision",
    "merge_candidates",
    "merge_move",
    "split_move",
]

MOVE_KINDS = (
    "decision-edge-delete",
    "decision-rewire",
    "decision-T-to-C",
    "decision-change-x",
    "merge",
    "split",
)


@dataclass(frozen=True)
class ProposalRecord:
    kind: str
    theta: Optional[str] = None
    modules: tuple[str, ...] = ()
    before: Optional[dict] = None
    after: Optional[dict] = None
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        detail = {"theta": self.theta, "modules": list(self.modules), "before": self.before,
                  "after": self.after, "reason": self.reason}
        return {key: value for key, value in detail.items() if value not in (None, [])}


@dataclass(frozen=True)
class Proposal:
    modules: ModuleSet
    graph: DirectedModuleGraph
    decisions: DecisionSet
    record: ProposalRecord


@dataclass
class Wiring:
    """A decision with vertices named by module index instead of position in S."""

    theta: str
    tags: dict[int, str]
    cond: dict[int, int] = field(default_factory=dict)
    kept: int = 0

    @classmethod
    def of(cls, ms: ModuleSet, g: DirectedModuleGraph, d: Decision) -> "Wiring":
        owners = decision_modules(ms, g, d.theta)
        return cls(
            theta=d.theta,
            tags={m: d.tag(k) for k, m in enumerate(owners, start=1)},
            cond={owners[c - 1]: owners[t - 1] for c, t in d.cond},
            kept=owners[d.x - 1],
        )

    def renamed(self, mapping: dict[int, int]) -> "Wiring":
        def rename(m: int) -> int:
            return mapping.get(m, m)

        return Wiring(
            theta=self.theta,
            tags={rename(m): tag for m, tag in self.tags.items()},
            cond={rename(c): rename(t) for c, t in self.cond.items()},
            kept=rename(self.kept),
        )


def _decisions_from(kind: str, ms: ModuleSet, g: DirectedModuleGraph, wirings: Iterable[Wiring]) -> DecisionSet:
    decisions = []
    for w in wirings:
        owners = decision_modules(ms, g, w.theta)
        if set(owners) != set(w.tags):
            raise MoveRejected(kind, f"decision vertices of {w.theta!r} do not match its modules")
        position = {m: k for k, m in enumerate(owners, start=1)}
        d = Decision.build(
            w.theta,
            [w.tags[m] for m in owners],
            position[w.kept],
            {position[c]: position[t] for c, t in w.cond.items()},
        )
        violation = validate_decision(d, len(owners))
        if violation:
            raise MoveRejected(kind, f"decision for {w.theta!r} breaks {violation}")
        decisions.append(d)
    ds = DecisionSet.of(decisions)
    if set(ds.thetas) != ms.shared_params:
        raise MoveRejected(kind, "decisions do not cover the shared parameters")
    return ds


def _consistent(ordering: Sequence[int], arcs: Iterable[tuple[int, int]]) -> bool:
    position = {m: k for k, m in enumerate(ordering)}
    return all(position[u] < position[v] for u, v in arcs)


def _orient_like(h, arcs: set[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    return tuple((u, v) if (u, v) in arcs else (v, u) for u, v in h.edges)


def _summary(net: BayesNet, ms: ModuleSet, g: DirectedModuleGraph) -> dict:
    document = partition_to_dict(ms.partition, net)
    document["ordering"] = [ms.label(m) for m in g.ordering]
    return document


# decision moves


def perturb_decision(
        net: BayesNet,
        ms: ModuleSet,
        g: DirectedModuleGraph,
        ds: DecisionSet,
        probs: MoveProbs,
        chooser: Chooser,
) -> Proposal:
    shared = sorted(ms.shared_params)
    if not shared:
        raise MoveRejected("decision", "no shared parameters to perturb")
    theta = chooser.choice(shared)
    d = ds[theta]
    tags, cond, x = list(d.tags), dict(d.cond), d.x

    if chooser.bernoulli(probs.q1):
        if chooser.bernoulli(probs.q2):
            if not d.cond:
                raise MoveRejected("decision-edge", f"decision for {theta!r} has no edges")
            c, t = chooser.choice(d.cond)
            if chooser.bernoulli(probs.q3):
                kind = "decision-edge-delete"
                tags[c - 1] = UPDATE
                del cond[c]
            else:
                kind = "decision-rewire"
                options = [k for k in d.update_positions if k < c and k != t]
                if not options:
                    raise MoveRejected(kind, f"vertex {c} of {theta!r} has no other earlier T vertex")
                cond[c] = chooser.choice(options)
        else:
            kind = "decision-T-to-C"
            options = [v for v in d.update_positions if v not in (1, d.x) and d.degree(v) == 0]
            if not options:
                raise MoveRejected(kind, f"decision for {theta!r} has no isolated movable T vertex")
            v = chooser.choice(options)
            tags[v - 1] = CONDITION
            cond[v] = chooser.choice([t for t in d.update_positions if t < v])
    else:
        kind = "decision-change-x"
        options = [v for v in d.update_positions if v != d.x]
        if not options:
            raise MoveRejected(kind, f"decision for {theta!r} has a single T vertex")
        x = chooser.choice(options)

    new = Decision.build(theta, tags, x, cond)
    violation = validate_decision(new, d.size)
    if violation:
        raise MoveRejected(kind, f"decision for {theta!r} breaks {violation}")
    decisions = DecisionSet.of(new if other.theta == theta else other for other in ds)
    record = ProposalRecord(kind, theta=theta, before=decision_to_dict(d), after=decision_to_dict(new))
    return Proposal(ms, g, decisions, record)


# merge


def _contracted_arcs(g: DirectedModuleGraph, i: int, j: int) -> set[tuple[int, int]]:
    lo = min(i, j)

    def image(v: int) -> int:
        return lo if v in (i, j) else v

    return {(image(u), image(v)) for u, v in g.arcs if image(u) != image(v)}


def _merge_orderings(g: DirectedModuleGraph, i: int, j: int, arcs: set[tuple[int, int]]) -> list[tuple[int, ...]]:
    lo = min(i, j)
    others = [v for v in g.ordering if v not in (i, j)]
    orderings = []
    for p in range(len(others) + 1):
        ordering = tuple(others[:p] + [lo] + others[p:])
        if _consistent(ordering, arcs):
            orderings.append(ordering)
    return orderings


def merge_candidates(g: DirectedModuleGraph) -> list[tuple[int, int]]:
    """Pairs of modules, adjacent or not, whose contraction stays acyclic and admits an ordering."""
    candidates = []
    for i, j in itertools.combinations(range(g.size), 2):
        arcs = _contracted_arcs(g, i, j)
        if is_acyclic(g.size, arcs) and _merge_orderings(g, i, j, arcs):
            candidates.append((i, j))
    return candidates


def _contract_wiring(w: Wiring, i: int, j: int, chooser: Chooser) -> Wiring:
    lo = min(i, j)
    ti, tj = w.tags[i], w.tags[j]
    tags = {m: tag for m, tag in w.tags.items() if m not in (i, j)}
    cond = {c: t for c, t in w.cond.items() if c not in (i, j)}
    kept = w.kept
    if ti == UPDATE and tj == UPDATE:
        tags[lo] = UPDATE
        cond = {c: lo if t in (i, j) else t for c, t in cond.items()}
        if kept in (i, j):
            kept = lo
    elif ti == CONDITION and tj == CONDITION:
        tags[lo] = CONDITION
        neighbours = sorted({w.cond[i], w.cond[j]})
        cond[lo] = chooser.choice(neighbours) if len(neighbours) > 1 else neighbours[0]
    else:
        survivor = i if ti == UPDATE else j
        tags[lo] = UPDATE
        cond = {c: lo if t == survivor else t for c, t in cond.items()}
        if kept == survivor:
            kept = lo
    return Wiring(w.theta, tags, cond, kept)


def merge_move(
        net: BayesNet,
        ms: ModuleSet,
        g: DirectedModuleGraph,
        ds: DecisionSet,
        chooser: Chooser,
) -> Proposal:
    if len(ms) < 2:
        raise MoveRejected("merge", "a single module cannot be merged")
    candidates = merge_candidates(g)
    if not candidates:
        raise MoveRejected("merge", "every merge would create a cycle")
    i, j = chooser.choice(candidates)
    lo, hi = sorted((i, j))
    arcs = _contracted_arcs(g, i, j)
    ordering = chooser.choice(_merge_orderings(g, i, j, arcs))

    def reindex(v: int) -> int:
        return v - 1 if v > hi else v

    merged = merge_modules(net, ms, i, j)
    h = build_undirected(merged)
    new_arcs = {(reindex(u), reindex(v)) for u, v in arcs}
    if {tuple(sorted(arc)) for arc in new_arcs} != set(h.edges):
        raise MoveRejected("merge", "contracted arcs disagree with the module intersections")
    graph = DirectedModuleGraph(h, _orient_like(h, new_arcs), tuple(reindex(v) for v in ordering))

    wirings = []
    for d in ds:
        w = Wiring.of(ms, g, d)
        if i in w.tags and j in w.tags:
            w = _contract_wiring(w, i, j, chooser)
        else:
            w = w.renamed({hi: lo})
        w = w.renamed({v: reindex(v) for v in w.tags})
        if len(w.tags) > 1:
            wirings.append(w)
    decisions = _decisions_from("merge", merged, graph, wirings)

    record = ProposalRecord(
        "merge",
        modules=(ms.label(i), ms.label(j)),
        before=_summary(net, ms, g),
        after=_summary(net, merged, graph),
    )
    logging.debug(f"Merge {ms.label(i)} and {ms.label(j)} into {merged.label(lo)}")
    return Proposal(merged, graph, decisions, record)


# split


def _bipartitions(net: BayesNet, core: frozenset[str]) -> list[frozenset[str]]:
    """Proper parts containing the first core node; each bipartition appears once."""
    first, *rest = net.sort(core)
    return [
        frozenset((first,) + combo)
        for r in range(len(rest))
        for combo in itertools.combinations(rest, r)
    ]


def _split_wiring(
        w: Wiring,
        k: int,
        a: int,
        b: int,
        rank: dict[int, int],
        probs: MoveProbs,
        chooser: Chooser,
) -> Wiring:
    tags = {m: tag for m, tag in w.tags.items() if m != k}
    cond = {c: t for c, t in w.cond.items() if c != k}
    kept = w.kept

    def earlier_updates(m: int) -> list[int]:
        return sorted((t for t, tag in tags.items() if tag == UPDATE and rank[t] < rank[m]), key=rank.get)

    if w.tags[k] == UPDATE:
        if chooser.bernoulli(probs.q5):
            tags[a] = tags[b] = UPDATE
            for c in sorted(c for c, t in cond.items() if t == k):
                cond[c] = chooser.choice((a, b))
            if kept == k:
                kept = chooser.choice((a, b))
        else:
            t_half = chooser.choice((a, b))
            c_half = b if t_half == a else a
            tags[t_half] = UPDATE
            tags[c_half] = CONDITION
            cond = {c: t_half if t == k else t for c, t in cond.items()}
            if kept == k:
                kept = t_half
            options = earlier_updates(c_half)
            if not options:
                raise MoveRejected("split", f"no earlier T vertex for the conditioned half of {w.theta!r}")
            cond[c_half] = chooser.choice(options)
    else:
        tags[a] = tags[b] = CONDITION
        same = chooser.choice((a, b))
        other = b if same == a else a
        cond[same] = w.cond[k]
        options = earlier_updates(other)
        if not options:
            raise MoveRejected("split", f"no earlier T vertex for a conditioned half of {w.theta!r}")
        cond[other] = chooser.choice(options)
    return Wiring(w.theta, tags, cond, kept)


def split_move(
        net: BayesNet,
        ms: ModuleSet,
        g: DirectedModuleGraph,
        ds: DecisionSet,
        probs: MoveProbs,
        chooser: Chooser,
) -> Proposal:
    candidates = [k for k, module in enumerate(ms.modules) if len(module.core) >= 2]
    if not candidates:
        raise MoveRejected("split", "no module has two core data nodes")
    k = chooser.choice(candidates)
    part = chooser.choice(_bipartitions(net, ms.modules[k].core))
    split = split_module(net, ms, k, part)
    a, b = k, len(ms)
    h = build_undirected(split)

    def original(v: int) -> int:
        return k if v in (a, b) else v

    inherited = {}
    for u, v in h.edges:
        if {u, v} == {a, b}:
            continue
        if (original(u), original(v)) in g.arcs:
            inherited[(u, v)] = (u, v)
        elif (original(v), original(u)) in g.arcs:
            inherited[(u, v)] = (v, u)
        else:
            raise MoveRejected("split", f"modules {u} and {v} intersect but were not adjacent")

    others = [v for v in g.ordering if v != k]
    orderings = []
    for pa in range(len(others) + 1):
        with_a = others[:pa] + [a] + others[pa:]
        for pb in range(len(with_a) + 1):
            ordering = tuple(with_a[:pb] + [b] + with_a[pb:])
            if _consistent(ordering, inherited.values()):
                orderings.append(ordering)
    if not orderings:
        raise MoveRejected("split", "no placement of the halves is a topological ordering")
    ordering = chooser.choice(orderings)
    rank = {m: r for r, m in enumerate(ordering)}
    arcs = tuple(
        inherited.get((u, v)) or ((u, v) if rank[u] < rank[v] else (v, u))
        for u, v in h.edges
    )
    graph = DirectedModuleGraph(h, arcs, ordering)

    wirings = []
    for theta in sorted(split.shared_params):
        if theta in ms.shared_params:
            w = Wiring.of(ms, g, ds[theta])
        else:
            w = Wiring(theta, {k: UPDATE}, {}, k)
        owners = split.modules_of(theta)
        if k in w.tags:
            if a in owners and b in owners:
                w = _split_wiring(w, k, a, b, rank, probs, chooser)
            else:
                w = w.renamed({k: a if a in owners else b})
        wirings.append(w)
    decisions = _decisions_from("split", split, graph, wirings)

    record = ProposalRecord(
        "split",
        modules=(ms.label(k),),
        before=_summary(net, ms, g),
        after=_summary(net, split, graph),
    )
    logging.debug(f"Split {ms.label(k)} into {split.label(a)} and {split.label(b)}")
    return Proposal(split, graph, decisions, record)


def propose_move(
        net: BayesNet,
        ms: ModuleSet,
        g: DirectedModuleGraph,
        ds: DecisionSet,
        probs: MoveProbs,
        chooser: Chooser,
) -> Proposal:
    """Draw one move down the tree. Raises MoveRejected when the drawn move is impossible."""
    if chooser.bernoulli(probs.q0):
        return perturb_decision(net, ms, g, ds, probs, chooser)
    if chooser.bernoulli(probs.q4):
        return merge_move(net, ms, g, ds, chooser)
    return split_move(net, ms, g, ds, probs, chooser)
