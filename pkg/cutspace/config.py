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

import logging
import os
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError

from cutspace.errors import CutSpaceError
from cutspace.schemas import validation_message

__all__ = ["MoveProbs", "RunConfig", "run_config", "configure_logging", "LOG_LEVELS"]

LOG_ENV = "CUTSPACE_LOG"
LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


class MoveProbs(BaseModel):
    """Branch probabilities of the walk's move tree and the acceptance temperature."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    q0: float = Field(default=0.7, ge=0.0, le=1.0)
    q1: float = Field(default=0.7, ge=0.0, le=1.0)
    q2: float = Field(default=2 / 3, ge=0.0, le=1.0)
    q3: float = Field(default=0.5, ge=0.0, le=1.0)
    q4: float = Field(default=0.5, ge=0.0, le=1.0)
    q5: float = Field(default=0.5, ge=0.0, le=1.0)
    temperature: float = Field(default=1.0, gt=0.0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_decision_sets: PositiveInt = 10 ** 6
    max_orient_edges: PositiveInt = 20
    max_cells: PositiveInt = 10 ** 7
    mode: Literal["prior-weighted", "plain-marginal"] = "prior-weighted"
    probs: MoveProbs = Field(default_factory=MoveProbs)
    seed: int = 0
    iterations: int = Field(default=200, ge=0)
    format: Literal["text", "json", "latex"] = "text"

    @property
    def caps(self) -> dict:
        return {"max_decision_sets": self.max_decision_sets, "max_orient_edges": self.max_orient_edges}


def run_config(document: dict = None, **overrides) -> RunConfig:
    """Build a RunConfig from a document, explicit values (not None) taking precedence."""
    if document is not None and not isinstance(document, dict):
        raise CutSpaceError("config", "a run configuration document must be a mapping")
    values = dict(document or {})
    probs = dict(values.pop("probs", None) or {})
    for key in list(overrides):
        if key in MoveProbs.model_fields:
            value = overrides.pop(key)
            if value is not None:
                probs[key] = value
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return RunConfig(probs=MoveProbs(**probs), **values)
    except ValidationError as e:
        raise CutSpaceError("config", validation_message(e)) from None


def configure_logging(level: str = None):
    level = (level or os.getenv(LOG_ENV, "warn")).lower()
    logging.basicConfig(
        level=LOG_LEVELS.get(level, logging.WARNING),
        handlers=[logging.StreamHandler()],
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
