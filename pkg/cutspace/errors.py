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


class CutSpaceError(ValueError):
    """Base error. `invariant` names the rule that was violated."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant
        self.message = message


class NetworkError(CutSpaceError):
    pass


class ParseError(NetworkError):
    def __init__(self, message: str, line: int = None, column: int = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__("parse", f"{message}{where}")
        self.line = line
        self.column = column


class PartitionError(CutSpaceError):
    pass


class ModuleGraphError(CutSpaceError):
    pass


class DecisionError(CutSpaceError):
    pass


class PosteriorError(CutSpaceError):
    pass


class EvaluationError(CutSpaceError):
    pass


class MissingEvidenceError(EvaluationError):
    def __init__(self, nodes):
        super().__init__("evidence-cover", f"no observed value for {', '.join(nodes)}")
        self.nodes = tuple(nodes)


class ZeroNormalizerError(EvaluationError):
    def __init__(self, message: str):
        super().__init__("zero-normalizer", message)


class CapExceededError(CutSpaceError):
    def __init__(self, cap: str, value: int, limit: int):
        super().__init__(f"cap:{cap}", f"{value} exceeds the configured limit {limit}")
        self.value = value
        self.limit = limit


class MoveRejected(CutSpaceError):
    """Raised inside a proposal when the drawn move cannot be carried out."""

    def __init__(self, kind: str, reason: str):
        super().__init__(f"move:{kind}", reason)
        self.kind = kind
        self.reason = reason
