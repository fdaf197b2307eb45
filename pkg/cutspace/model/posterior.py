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

"""Symbolic cut-posteriors.

A cut-posterior is a product of one update term per module, taken in the
topological ordering S of the directed module graph. Within module M_i every
data node is conditioned on, intrinsic parameters are updated, and each shared
parameter is updated (kept), updated as a fresh tilde copy, or conditioned on a
version created earlier, as its decision says. Tilde copies are integrated out.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import NamedTuple, Optional, Union

from cutspace.errors import PosteriorError
from cutspace.model.decisions import (
    CONDITION,
    DEFAULT_MAX_DECISION_SETS,
    UPDATE,
    Decision,
    DecisionSet,
    decision_modules,
    enumerate_decision_sets,
    validate_decision,
)
from cutspace.model.modgraph import DEFAULT_MAX_EDGES, DirectedModuleGraph, build_undirected, enumerate_orientations
from cutspace.model.modules import ModuleSet, Partition, form_module_set
from cutspace.model.network import BayesNet

__all__ = [
    "TildeMode",
    "ParamVersion",
    "ModuleTags",
    "UpdateTerm",
    "CutPosterior",
    "SpaceEntry",
    "classify_module",
    "build_posterior",
    "posterior_signature",
    "posterior_equal",
    "enumerate_space",
    "enumerate_posteriors",
    "posterior_to_dict",
]

KEPT = "kept"


class TildeMode(str, Enum):
    PRIOR_WEIGHTED = "prior-weighted"
    PLAIN_MARGINAL = "plain-marginal"


@dataclass(frozen=True)
class ParamVersion:
    """One version of a parameter.

    The kept version has no rank; its origin is the module at x_θ (or the owning
    module for intrinsic parameters, None for orphans). Tilde copies are ranked
    2, 3, ... in the order their creating modules appear in S.
    """

    theta: str
    origin: Optional[int] = None
    rank: Optional[int] = None

    @property
    def kept(self) -> bool:
        return self.rank is None


class ModuleTags(NamedTuple):
    update: tuple[str, ...]
    condition: tuple[str, ...]
    tilde: tuple[str, ...]


@dataclass(frozen=True)
class UpdateTerm:
    module: int
    members: frozenset[str]
    core: frozenset[str]
    update: tuple[str, ...]
    tilde: tuple[ParamVersion, ...]
    cond_data: tuple[str, ...]
    cond_param: tuple[ParamVersion, ...]

    @property
    def trivial(self) -> bool:
        return not self.update

    def version(self, name: str) -> Union[str, ParamVersion]:
        """The variable standing for node `name` inside this term."""
        if name in self.update:
            return ParamVersion(name, self.module)
        for version in self.tilde + self.cond_param:
            if version.theta == name:
                return version
        if name in self.cond_data:
            return name
        raise PosteriorError("term-member", f"{name!r} is not a member of module {self.module}")

    @property
    def kept_versions(self) -> tuple[ParamVersion, ...]:
        return tuple(ParamVersion(name, self.module) for name in self.update)


@dataclass(frozen=True)
class CutPosterior:
    terms: tuple[UpdateTerm, ...]
    orphan: tuple[str, ...]
    tilde_vars: tuple[ParamVersion, ...]
    mode: TildeMode = TildeMode.PRIOR_WEIGHTED

    @cached_property
    def module_members(self) -> dict[int, frozenset[str]]:
        return {term.module: term.members for term in self.terms}

    def term_of(self, module: int) -> UpdateTerm:
        for term in self.terms:
            if term.module == module:
                return term
        raise KeyError(module)

    @property
    def kept_versions(self) -> tuple[ParamVersion, ...]:
        versions = [version for term in self.terms for version in term.kept_versions]
        return tuple(versions) + tuple(ParamVersion(name) for name in self.orphan)


def _shared_role(ms: ModuleSet, g: DirectedModuleGraph, d: Decision, i: int) -> tuple[str, Optional[int]]:
    """Role of module i in the decision for d.theta, plus the source module when conditioned."""
    owners = decision_modules(ms, g, d.theta)
    y = owners.index(i) + 1
    if y == d.x:
        return KEPT, None
    if d.tag(y) == UPDATE:
        return UPDATE, None
    return CONDITION, owners[d.neighbor(y) - 1]


def _check_inputs(ms: ModuleSet, g: DirectedModuleGraph, ds: DecisionSet):
    if g.size != len(ms):
        raise PosteriorError("graph-size", f"module graph has {g.size} vertices for {len(ms)} modules")
    for theta in sorted(ms.shared_params):
        d = ds.get(theta)
        if d is None:
            raise PosteriorError("decision-cover", f"no decision for shared parameter {theta!r}")
        count = len(ms.modules_of(theta))
        if d.size != count:
            raise PosteriorError("decision-size", f"decision for {theta!r} has {d.size} vertices, {theta!r} is in {count} modules")
        violation = validate_decision(d, count)
        if violation:
            raise PosteriorError(f"decision:{violation}", f"decision for {theta!r} is invalid")


def classify_module(net: BayesNet, ms: ModuleSet, g: DirectedModuleGraph, ds: DecisionSet, i: int) -> ModuleTags:
    if not 0 <= i < len(ms):
        raise PosteriorError("module-index", f"no module {i} among {len(ms)}")
    module = ms.modules[i]
    update, condition, tilde = [], [], []
    for name in net.sort(module.members):
        if net.is_data(name) or name in ms.intrinsic_params[i]:
            (condition if net.is_data(name) else update).append(name)
            continue
        d = ds.get(name)
        if d is None:
            raise PosteriorError("decision-cover", f"no decision for shared parameter {name!r}")
        role, _ = _shared_role(ms, g, d, i)
        {KEPT: update, UPDATE: tilde, CONDITION: condition}[role].append(name)
    return ModuleTags(tuple(update), tuple(condition), tuple(tilde))


def build_posterior(
        net: BayesNet,
        ms: ModuleSet,
        g: DirectedModuleGraph,
        ds: DecisionSet,
        mode: Union[TildeMode, str] = TildeMode.PRIOR_WEIGHTED,
) -> CutPosterior:
    _check_inputs(ms, g, ds)
    mode = TildeMode(mode)

    created: dict[tuple[str, int], ParamVersion] = {}
    ranks: dict[str, int] = {}
    terms = []
    for i in g.ordering:
        module = ms.modules[i]
        update, tilde, cond_param = [], [], []
        for name in net.sort(module.params):
            if name in ms.intrinsic_params[i]:
                update.append(name)
                continue
            role, source = _shared_role(ms, g, ds[name], i)
            if role == KEPT:
                update.append(name)
                created[(name, i)] = ParamVersion(name, i)
            elif role == UPDATE:
                ranks[name] = ranks.get(name, 1) + 1
                version = ParamVersion(name, i, ranks[name])
                tilde.append(version)
                created[(name, i)] = version
            else:
                version = created.get((name, source))
                if version is None:
                    # only possible when the ordering disagrees with the decision positions
                    raise PosteriorError("version-order", f"{name!r} in module {i} conditions on a version not yet created")
                cond_param.append(version)
        cond_data = net.sort(name for name in module.members if net.is_data(name))
        terms.append(UpdateTerm(
            module=i,
            members=module.members,
            core=module.core,
            update=tuple(update),
            tilde=tuple(tilde),
            cond_data=cond_data,
            cond_param=tuple(cond_param),
        ))

    tilde_vars = sorted(
        (version for term in terms for version in term.tilde),
        key=lambda v: (net.order_key(v.theta), v.rank),
    )
    return CutPosterior(
        terms=tuple(terms),
        orphan=net.sort(ms.orphan_params),
        tilde_vars=tuple(tilde_vars),
        mode=mode,
    )


def posterior_signature(p: CutPosterior) -> tuple[frozenset, frozenset[str]]:
    """Label-independent key: each term keyed by the member set of its module."""
    members = p.module_members

    def origin(version: ParamVersion) -> Optional[frozenset[str]]:
        return members.get(version.origin) if version.origin is not None else None

    terms = frozenset(
        (
            term.members,
            (
                frozenset(term.update),
                frozenset(version.theta for version in term.tilde),
                frozenset(term.cond_data),
                frozenset((version.theta, origin(version)) for version in term.cond_param),
                term.trivial,
            ),
        )
        for term in p.terms
    )
    return terms, frozenset(p.orphan)


def posterior_equal(p: CutPosterior, p2: CutPosterior) -> bool:
    return posterior_signature(p) == posterior_signature(p2)


@dataclass(frozen=True)
class SpaceEntry:
    graph: DirectedModuleGraph
    decisions: DecisionSet
    posterior: CutPosterior


def enumerate_space(
        net: BayesNet,
        partition: Partition,
        mode: Union[TildeMode, str] = TildeMode.PRIOR_WEIGHTED,
        max_decision_sets: int = DEFAULT_MAX_DECISION_SETS,
        max_orient_edges: int = DEFAULT_MAX_EDGES,
) -> Iterator[SpaceEntry]:
    """Every (orientation, decision set) pair with its posterior, before deduplication."""
    ms = form_module_set(net, partition)
    h = build_undirected(ms)
    logging.info(f"Module graph has {h.size} modules and {len(h.edges)} edges")
    for g in enumerate_orientations(h, max_orient_edges):
        for ds in enumerate_decision_sets(ms, g, max_decision_sets):
            yield SpaceEntry(g, ds, build_posterior(net, ms, g, ds, mode))


def enumerate_posteriors(
        net: BayesNet,
        partition: Partition,
        mode: Union[TildeMode, str] = TildeMode.PRIOR_WEIGHTED,
        max_decision_sets: int = DEFAULT_MAX_DECISION_SETS,
        max_orient_edges: int = DEFAULT_MAX_EDGES,
) -> list[CutPosterior]:
    seen = set()
    distinct = []
    built = 0
    for entry in enumerate_space(net, partition, mode, max_decision_sets, max_orient_edges):
        built += 1
        key = posterior_signature(entry.posterior)
        if key in seen:
            continue
        seen.add(key)
        distinct.append(entry.posterior)
    logging.info(f"Built {built} cut-posteriors, {len(distinct)} distinct")
    return distinct


def _version_to_dict(version: ParamVersion, ms_labels) -> dict:
    return {
        "theta": version.theta,
        "origin": ms_labels(version.origin) if version.origin is not None else None,
        "rank": version.rank,
    }


def posterior_to_dict(p: CutPosterior, net: BayesNet, ms: ModuleSet = None) -> dict:
    labels = ms.label if ms is not None else str
    return {
        "terms": [
            {
                "module": list(net.sort(term.members)),
                "label": labels(term.module),
                "update": list(term.update),
                "tilde": [_version_to_dict(v, labels) for v in term.tilde],
                "cond_data": list(term.cond_data),
                "cond_param": [_version_to_dict(v, labels) for v in term.cond_param],
                "trivial": term.trivial,
            }
            for term in p.terms
        ],
        "orphan": list(p.orphan),
        "tilde_vars": [_version_to_dict(v, labels) for v in p.tilde_vars],
        "mode": p.mode.value,
    }
