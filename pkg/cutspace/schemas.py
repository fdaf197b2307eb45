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

"""Pydantic models for the JSON documents read by cutspace."""

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

__all__ = [
    "NodeDocument",
    "NetworkDocument",
    "EvidenceDocument",
    "PartitionDocument",
    "OrientationDocument",
    "DecisionDocument",
    "validation_message",
]

ModuleRef = Union[int, str]


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NodeDocument(_Document):
    id: str = Field(min_length=1)
    kind: Literal["data", "param"]
    parents: list[str] = Field(default_factory=list)
    states: Optional[int] = Field(default=None, ge=2)
    cpt: Optional[list[list[float]]] = None


class NetworkDocument(_Document):
    nodes: list[NodeDocument]


class EvidenceDocument(_Document):
    observe: dict[str, int] = Field(default_factory=dict)


class PartitionDocument(_Document):
    blocks: list[list[str]]
    labels: Optional[list[str]] = None


class OrientationDocument(_Document):
    edges: Optional[list[tuple[ModuleRef, ModuleRef]]] = None
    directions: list[tuple[ModuleRef, ModuleRef]] = Field(default_factory=list)
    ordering: Optional[list[ModuleRef]] = None


class DecisionDocument(_Document):
    theta: str
    tags: list[Literal["T", "C"]]
    x: int
    cond: dict[int, int] = Field(default_factory=dict)


def validation_message(error: ValidationError) -> str:
    """One line per failing field, `a.b.c: message`."""
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)
