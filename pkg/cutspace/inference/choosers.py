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

"""Sources of random choices for the walk.

Moves never touch a random generator directly. They ask a Chooser, which is
either backed by numpy (RandomChooser) or replays a fixed script of branch
indices (ScriptedChooser). Replaying every script depth-first lists each outcome
of a move together with its exact probability.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from typing import Optional, TypeVar

import numpy as np

__all__ = ["Chooser", "RandomChooser", "ScriptedChooser", "enumerate_outcomes"]

T = TypeVar("T")


class Chooser(ABC):
    @abstractmethod
    def bernoulli(self, p: float) -> bool:
        """True with probability p."""

    @abstractmethod
    def choice(self, options: Sequence[T]) -> T:
        """One of `options`, uniformly. `options` must be nonempty."""


class RandomChooser(Chooser):
    def __init__(self, rng: Optional[np.random.Generator] = None, seed: Optional[int] = None):
        self.rng = rng if rng is not None else np.random.default_rng(seed)

    def bernoulli(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def choice(self, options: Sequence[T]) -> T:
        if not options:
            raise ValueError("cannot choose from an empty sequence")
        return options[int(self.rng.integers(len(options)))]


class _Unscripted(Exception):
    """A choice was requested past the end of the script."""

    def __init__(self, weights: list[float]):
        super().__init__(f"unscripted choice over {len(weights)} branches")
        self.weights = weights


class ScriptedChooser(Chooser):
    def __init__(self, script: Sequence[int] = ()):
        self.script = tuple(script)
        self.position = 0
        self.probability = 1.0

    def _take(self, weights: list[float]) -> int:
        if self.position >= len(self.script):
            raise _Unscripted(weights)
        k = self.script[self.position]
        self.position += 1
        self.probability *= weights[k]
        return k

    def bernoulli(self, p: float) -> bool:
        return self._take([p, 1.0 - p]) == 0

    def choice(self, options: Sequence[T]) -> T:
        if not options:
            raise ValueError("cannot choose from an empty sequence")
        return options[self._take([1.0 / len(options)] * len(options))]


def enumerate_outcomes(fn: Callable[[Chooser], T]) -> list[tuple[float, T]]:
    """Run `fn` once per positive-probability branch sequence; return (probability, result) pairs.

    Order is depth-first with lower branch indices first.
    """
    outcomes = []
    stack = [()]
    while stack:
        script = stack.pop()
        chooser = ScriptedChooser(script)
        try:
            result = fn(chooser)
        except _Unscripted as branch:
            for k in reversed(range(len(branch.weights))):
                if branch.weights[k] > 0:
                    stack.append(script + (k,))
            continue
        outcomes.append((chooser.probability, result))
    return outcomes
