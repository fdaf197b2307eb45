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

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from typing import Union

import numpy as np

from cutspace.errors import EvaluationError
from cutspace.model.posterior import ParamVersion

__all__ = ["Variable", "FactorTable"]

Variable = Union[str, ParamVersion]


class FactorTable:
    """
    Dense nonnegative table over an ordered scope of discrete variables.

    A variable is a data node id or a ParamVersion, so several versions of the
    same parameter can live in one table. Axis k of `values` belongs to scope[k].
    """

    def __init__(self, scope: Sequence[Variable], values):
        self.scope = tuple(scope)
        self.values = np.asarray(values, dtype=float)
        if len(set(self.scope)) != len(self.scope):
            raise EvaluationError("factor-scope", f"repeated variable in scope {self.scope}")
        if self.values.ndim != len(self.scope):
            raise EvaluationError("factor-shape", f"{self.values.ndim}-d values for a scope of {len(self.scope)}")

    @classmethod
    def scalar(cls, value: float = 1.0) -> "FactorTable":
        return cls((), np.asarray(value, dtype=float))

    @property
    def cardinalities(self) -> dict[Variable, int]:
        return dict(zip(self.scope, self.values.shape))

    def __contains__(self, variable: Variable) -> bool:
        return variable in self.scope

    def __repr__(self) -> str:
        return f"FactorTable(scope={self.scope}, shape={self.values.shape})"

    def _aligned(self, scope: tuple[Variable, ...]) -> np.ndarray:
        """Values transposed and reshaped to broadcast against `scope`."""
        order = [self.scope.index(v) for v in scope if v in self.scope]
        values = np.transpose(self.values, order)
        shape = [self.values.shape[self.scope.index(v)] if v in self.scope else 1 for v in scope]
        return values.reshape(shape)

    def multiply(self, other: "FactorTable") -> "FactorTable":
        for variable in set(self.scope) & set(other.scope):
            if self.cardinalities[variable] != other.cardinalities[variable]:
                raise EvaluationError("factor-cardinality", f"{variable} has mismatched state counts")
        scope = self.scope + tuple(v for v in other.scope if v not in self.scope)
        return FactorTable(scope, self._aligned(scope) * other._aligned(scope))

    def sum_out(self, variables: Iterable[Variable]) -> "FactorTable":
        drop = [v for v in variables if v in self.scope]
        if not drop:
            return self
        axes = tuple(self.scope.index(v) for v in drop)
        return FactorTable([v for v in self.scope if v not in drop], self.values.sum(axis=axes))

    def marginal(self, keep: Iterable[Variable]) -> "FactorTable":
        keep = set(keep)
        return self.sum_out([v for v in self.scope if v not in keep])

    def reduce(self, assignment: Mapping[Variable, int]) -> "FactorTable":
        """Fix variables at observed states and drop their axes."""
        index = tuple(assignment[v] if v in assignment else slice(None) for v in self.scope)
        return FactorTable([v for v in self.scope if v not in assignment], self.values[index])

    def relabel(self, mapping: Mapping[Variable, Variable]) -> "FactorTable":
        return FactorTable([mapping.get(v, v) for v in self.scope], self.values)

    def reorder(self, scope: Sequence[Variable]) -> "FactorTable":
        scope = tuple(scope)
        if set(scope) != set(self.scope):
            raise EvaluationError("factor-scope", f"cannot reorder {self.scope} as {scope}")
        return FactorTable(scope, self._aligned(scope))

    def expand(self, cardinalities: Mapping[Variable, int]) -> "FactorTable":
        """Broadcast to extra variables the table does not depend on."""
        extra = [v for v in cardinalities if v not in self.scope]
        if not extra:
            return self
        ones = FactorTable(extra, np.ones([cardinalities[v] for v in extra]))
        return self.multiply(ones)

    def total(self) -> float:
        return float(self.values.sum())

    def normalize(self, over: Iterable[Variable] = None) -> "FactorTable":
        """Normalize over `over` for each state of the remaining variables (everything by default).

        Slices with zero mass stay zero.
        """
        if over is None:
            axes = tuple(range(len(self.scope)))
        else:
            axes = tuple(self.scope.index(v) for v in over if v in self.scope)
        sums = self.values.sum(axis=axes, keepdims=True)
        values = np.divide(self.values, sums, out=np.zeros_like(self.values), where=sums > 0)
        return FactorTable(self.scope, values)

    def prob(self, assignment: Mapping[Variable, int]) -> float:
        return float(self.values[tuple(assignment[v] for v in self.scope)])

    def allclose(self, other: "FactorTable", atol: float = 1e-10) -> bool:
        if set(self.scope) != set(other.scope):
            return False
        return bool(np.allclose(self.values, other.reorder(self.scope).values, rtol=0.0, atol=atol))
