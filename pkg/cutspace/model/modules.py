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

"""Module formation from a partition of the data nodes, and module merging."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from pydantic import ValidationError

from cutspace.errors import ParseError, PartitionError
from cutspace.model.network import BayesNet
from cutspace.schemas import PartitionDocument, validation_message

__all__ = [
    "Partition",
    "Module",
    "ModuleSet",
    "make_partition",
    "parse_partition",
    "partition_from_dict",
    "partition_to_dict",
    "form_module",
    "form_module_set",
    "merge_modules",
    "split_module",
]


def _unused_label(label: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    while label in taken:
        label += "'"
    return label


@dataclass(frozen=True)
class Partition:
    blocks: tuple[frozenset[str], ...]
    labels: Optional[tuple[str, ...]] = None

    def __len__(self) -> int:
        return len(self.blocks)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    def merged(self, i: int, j: int) -> "Partition":
        """Blocks i and j replaced by their union at the lower index."""
        lo, hi = sorted((i, j))
        blocks = list(self.blocks)
        blocks[lo] = blocks[lo] | blocks[hi]
        del blocks[hi]
        labels = None
        if self.labels:
            labels = list(self.labels)
            union = f"{labels[lo]}+{labels[hi]}"
            del labels[hi]
            labels[lo] = _unused_label(union, labels[:lo] + labels[lo + 1:])
            labels = tuple(labels)
        return Partition(tuple(blocks), labels)

    def split(self, k: int, part: Iterable[str]) -> "Partition":
        """Block k keeps `part`; the rest of it becomes a new last block."""
        part = frozenset(part)
        rest = self.blocks[k] - part
        if not part or not rest or not part <= self.blocks[k]:
            raise PartitionError("proper-bipartition", f"cannot split block {k} into {sorted(part)} and the rest")
        blocks = list(self.blocks)
        blocks[k] = part
        blocks.append(rest)
        labels = None
        if self.labels:
            labels = self.labels + (_unused_label(f"{self.labels[k]}'", self.labels),)
        return Partition(tuple(blocks), labels)


def make_partition(net: BayesNet, blocks: Sequence[Iterable[str]], labels: Sequence[str] = None) -> Partition:
    frozen = tuple(frozenset(block) for block in blocks)
    seen = set()
    for i, block in enumerate(frozen):
        if not block:
            raise PartitionError("partition-nonempty-block", f"block {i} is empty")
        for name in block:
            if name not in net:
                raise PartitionError("partition-known-node", f"block {i} names unknown node {name!r}")
            if not net.is_data(name):
                raise PartitionError("partition-data-only", f"block {i} contains parameter node {name!r}")
        overlap = seen & block
        if overlap:
            raise PartitionError("partition-disjoint", f"{', '.join(net.sort(overlap))} appear in several blocks")
        seen |= block
    missing = set(net.data_nodes) - seen
    if missing:
        raise PartitionError("partition-cover", f"data nodes not covered: {', '.join(net.sort(missing))}")
    if labels is not None:
        labels = tuple(labels)
        if len(labels) != len(frozen) or len(set(labels)) != len(labels):
            raise PartitionError("partition-labels", "labels must be unique, one per block")
    return Partition(frozen, labels)


def partition_from_dict(document, net: BayesNet) -> Partition:
    try:
        parsed = PartitionDocument.model_validate(document)
    except ValidationError as e:
        raise PartitionError("schema", validation_message(e)) from None
    return make_partition(net, parsed.blocks, parsed.labels)


def parse_partition(text: str, net: BayesNet) -> Partition:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    return partition_from_dict(document, net)


def partition_to_dict(partition: Partition, net: BayesNet) -> dict:
    document = {"blocks": [list(net.sort(block)) for block in partition.blocks]}
    if partition.labels:
        document["labels"] = list(partition.labels)
    return document


@dataclass(frozen=True)
class Module:
    core: frozenset[str]
    members: frozenset[str]
    params: frozenset[str]

    @property
    def boundary(self) -> frozenset[str]:
        """Data members that are not core."""
        return self.members - self.core - self.params


def form_module(net: BayesNet, core: Iterable[str]) -> Module:
    """Collect every vertex on a directed path into `core`.

    A path crossing an off-core data node contributes only its suffix from the
    last such node, so the reverse sweep stops expanding at off-core data nodes.
    """
    core = frozenset(core)
    if not core:
        raise PartitionError("module-core-nonempty", "a module needs at least one core data node")
    for name in core:
        if not net.is_data(name):
            raise PartitionError("module-core-data-only", f"{name!r} is a parameter node")

    members = set(core)
    frontier = list(net.sort(core))
    while frontier:
        v = frontier.pop()
        for u in net.parents(v):
            if u in members:
                continue
            members.add(u)
            if net.is_data(u):
                continue
            frontier.append(u)
    members = frozenset(members)
    params = frozenset(name for name in members if not net.is_data(name))
    return Module(core=core, members=members, params=params)


@dataclass(frozen=True)
class ModuleSet:
    partition: Partition
    modules: tuple[Module, ...]
    shared_params: frozenset[str]
    intrinsic_params: tuple[frozenset[str], ...]
    orphan_params: frozenset[str]

    def __len__(self) -> int:
        return len(self.modules)

    def label(self, i: int) -> str:
        return self.partition.label(i)

    @cached_property
    def membership(self) -> dict[str, tuple[int, ...]]:
        owners = {}
        for i, module in enumerate(self.modules):
            for theta in module.params:
                owners.setdefault(theta, []).append(i)
        return {theta: tuple(indices) for theta, indices in owners.items()}

    def modules_of(self, theta: str) -> tuple[int, ...]:
        return self.membership.get(theta, ())


def form_module_set(net: BayesNet, partition: Partition) -> ModuleSet:
    partition = make_partition(net, partition.blocks, partition.labels)
    modules = tuple(form_module(net, block) for block in partition.blocks)

    counts = {}
    for module in modules:
        for theta in module.params:
            counts[theta] = counts.get(theta, 0) + 1
    shared = frozenset(theta for theta, n in counts.items() if n >= 2)
    intrinsic = tuple(frozenset(theta for theta in module.params if counts[theta] == 1) for module in modules)
    orphan = frozenset(theta for theta in net.param_nodes if theta not in counts)

    logging.debug(f"Formed {len(modules)} modules: {len(shared)} shared, {len(orphan)} orphan parameters")
    return ModuleSet(
        partition=partition,
        modules=modules,
        shared_params=shared,
        intrinsic_params=intrinsic,
        orphan_params=orphan,
    )


def merge_modules(net: BayesNet, ms: ModuleSet, i: int, j: int) -> ModuleSet:
    n = len(ms)
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise PartitionError("block-index", f"cannot merge blocks {i} and {j} of {n}")
    merged = form_module_set(net, ms.partition.merged(i, j))
    lo, hi = sorted((i, j))
    if merged.modules[lo].members != ms.modules[lo].members | ms.modules[hi].members:
        raise PartitionError("merge-union", f"merged module {lo} is not the union of its parts")
    return merged


def split_module(net: BayesNet, ms: ModuleSet, k: int, part: Iterable[str]) -> ModuleSet:
    if not 0 <= k < len(ms):
        raise PartitionError("block-index", f"no block {k} among {len(ms)}")
    return form_module_set(net, ms.partition.split(k, part))
