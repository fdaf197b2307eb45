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

import json
import os

import yaml

from cutspace.config import RunConfig, run_config
from cutspace.errors import CutSpaceError, ParseError
from cutspace.model.decisions import DecisionSet, decision_set_from_dict
from cutspace.model.modgraph import DirectedModuleGraph, UndirectedModuleGraph, orientation_from_dict
from cutspace.model.modules import ModuleSet, Partition, partition_from_dict
from cutspace.model.network import BayesNet, Evidence, evidence_from_dict, network_from_dict


def load_document(path):
    if not os.path.isfile(path):
        raise CutSpaceError("file", f"no such file: {path}")
    if path.endswith(".json"):
        with open(path, "r") as f:
            try:
                return json.load(f)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}: {e.msg}", e.lineno, e.colno) from None
    elif path.endswith((".yaml", ".yml")):
        with open(path, "r") as f:
            try:
                return yaml.safe_load(f)
            except yaml.YAMLError as e:
                mark = getattr(e, "problem_mark", None)
                if mark is not None:
                    raise ParseError(f"{path}: {e}", mark.line + 1, mark.column + 1) from None
                raise ParseError(f"{path}: {e}") from None
    else:
        raise CutSpaceError("file", f"unsupported document format for {path}. Use .json or .yaml")


def load_network(path) -> BayesNet:
    return network_from_dict(load_document(path))


def load_partition(path, net: BayesNet) -> Partition:
    return partition_from_dict(load_document(path), net)


def load_evidence(path, net: BayesNet) -> Evidence:
    if path is None:
        return Evidence()
    return evidence_from_dict(load_document(path), net)


def load_orientation(path, ms: ModuleSet, h: UndirectedModuleGraph) -> DirectedModuleGraph:
    return orientation_from_dict(load_document(path), ms, h)


def load_decision_set(path) -> DecisionSet:
    return decision_set_from_dict(load_document(path))


def load_config(path, **overrides) -> RunConfig:
    document = load_document(path) if path else {}
    return run_config(document, **overrides)
