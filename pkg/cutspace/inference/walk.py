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

"""Random walk over the cut-posterior space with Metropolis-style acceptance."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Union

from tqdm import tqdm

from cutspace.config import MoveProbs
from cutspace.errors import (
    CutSpaceError,
    DecisionError,
    EvaluationError,
    ModuleGraphError,
    MoveRejected,
    PartitionError,
    PosteriorError,
)
from cutspace.inference.choosers import Chooser, RandomChooser, enumerate_outcomes
from cutspace.inference.evaluate import ScoreFn
from cutspace.inference.moves import Proposal, ProposalRecord, merge_move, propose_move
from cutspace.model.decisions import Decision, DecisionSet, check_decision_set
from cutspace.model.modgraph import DirectedModuleGraph, build_undirected, topological_order
from cutspace.model.modules import ModuleSet, Partition, form_module_set
from cutspace.model.network import BayesNet
from cutspace.model.posterior import CutPosterior, TildeMode, build_posterior

__all__ = [
    "WalkState",
    "TraceRecord",
    "WalkResult",
    "initial_state",
    "state_key",
    "propose",
    "enumerate_proposals",
    "advance",
    "step",
    "force_merge",
    "run",
]


@dataclass(frozen=True)
class WalkState:
    net: BayesNet
    modules: ModuleSet
    graph: DirectedModuleGraph
    decisions: DecisionSet
    posterior: CutPosterior
    score: Optional[float] = None

    @classmethod
    def build(
            cls,
            net: BayesNet,
            ms: ModuleSet,
            g: DirectedModuleGraph,
            ds: DecisionSet,
            mode: Union[TildeMode, str] = TildeMode.PRIOR_WEIGHTED,
    ) -> "WalkState":
        """Validate the components against each other and build their posterior."""
        h = build_undirected(ms)
        if g.undirected.edges != h.edges or g.size != h.size:
            raise ModuleGraphError("graph-modules", "directed module graph is not an orientation of the module intersections")
        if {tuple(sorted(arc)) for arc in g.arcs} != set(h.edges) or len(g.arcs) != len(h.edges):
            raise ModuleGraphError("orientation-complete", "every intersection needs exactly one direction")
        g.with_ordering(g.ordering)
        check_decision_set(ms, ds)
        return cls(net, ms, g, ds, build_posterior(net, ms, g, ds, mode))

    @property
    def mode(self) -> TildeMode:
        return self.posterior.mode

    def scored(self, score_fn: ScoreFn) -> "WalkState":
        try:
            score = float(score_fn(self.posterior))
        except EvaluationError as e:
            logging.debug(f"Scoring failed, recorded as -inf: {e}")
            score = -math.inf
        return replace(self, score=score)


def state_key(state: WalkState) -> tuple:
    """Label-independent identity of a state: cores in S-order, arcs by cores, positional decisions."""
    cores = [state.modules.modules[m].core for m in state.graph.ordering]
    arcs = frozenset((state.modules.modules[u].core, state.modules.modules[v].core) for u, v in state.graph.arcs)
    return tuple(cores), arcs, state.decisions


def initial_state(
        net: BayesNet,
        partition: Partition,
        mode: Union[TildeMode, str] = TildeMode.PRIOR_WEIGHTED,
        score_fn: ScoreFn = None,
) -> WalkState:
    """Canonical orientation (lower index first) with every shared parameter updated everywhere, kept at v1."""
    ms = form_module_set(net, partition)
    h = build_undirected(ms)
    g = DirectedModuleGraph(h, h.edges, topological_order(h.size, h.edges))
    ds = DecisionSet.of(
        Decision.build(theta, ["T"] * len(ms.modules_of(theta)), 1)
        for theta in sorted(ms.shared_params)
    )
    state = WalkState.build(net, ms, g, ds, mode)
    return state.scored(score_fn) if score_fn is not None else state


def _apply(state: WalkState, proposal: Proposal) -> WalkState:
    try:
        return WalkState.build(state.net, proposal.modules, proposal.graph, proposal.decisions, state.mode)
    except (DecisionError, ModuleGraphError, PartitionError, PosteriorError) as e:
        raise MoveRejected(proposal.record.kind, f"proposal is not a valid state: {e}") from None


def propose(state: WalkState, probs: MoveProbs, chooser: Chooser) -> tuple[Optional[WalkState], ProposalRecord]:
    """One proposal from `state`. The state is None when the drawn move was rejected."""
    try:
        proposal = propose_move(state.net, state.modules, state.graph, state.decisions, probs, chooser)
        return _apply(state, proposal), proposal.record
    except MoveRejected as e:
        logging.debug(f"Proposal rejected: {e}")
        return None, ProposalRecord(e.kind, reason=e.reason)


def enumerate_proposals(state: WalkState, probs: MoveProbs) -> list[tuple[float, Optional[WalkState], ProposalRecord]]:
    """Every outcome of one proposal with its probability; the probabilities sum to 1."""
    return [
        (probability, proposed, record)
        for probability, (proposed, record) in enumerate_outcomes(lambda chooser: propose(state, probs, chooser))
    ]


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    record: ProposalRecord
    accepted: bool
    score: float
    proposed_score: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "iter": self.iteration,
            "move": self.record.kind,
            "accepted": self.accepted,
            "score": self.score,
            "detail": self.record.to_dict(),
        }


def _accept(current: float, proposed: float, temperature: float, chooser: Chooser) -> bool:
    if proposed >= current:
        return True
    if math.isinf(proposed):
        return False
    return chooser.bernoulli(math.exp((proposed - current) / temperature))


def advance(
        state: WalkState,
        score_fn: ScoreFn,
        probs: MoveProbs,
        chooser: Chooser,
        iteration: int = 0,
) -> tuple[WalkState, TraceRecord]:
    if state.score is None:
        state = state.scored(score_fn)
    proposed, record = propose(state, probs, chooser)
    if proposed is None:
        return state, TraceRecord(iteration, record, False, state.score)
    proposed = proposed.scored(score_fn)
    accepted = _accept(state.score, proposed.score, probs.temperature, chooser)
    logging.debug(f"Iteration {iteration}: {record.kind} {'accepted' if accepted else 'declined'} "
                  f"({state.score:.4f} -> {proposed.score:.4f})")
    current = proposed if accepted else state
    return current, TraceRecord(iteration, record, accepted, current.score, proposed.score)


def step(state: WalkState, score_fn: ScoreFn, probs: MoveProbs, seed: Union[int, Chooser] = None) -> WalkState:
    chooser = seed if isinstance(seed, Chooser) else RandomChooser(seed=seed)
    return advance(state, score_fn, probs, chooser)[0]


def force_merge(state: WalkState, chooser: Chooser) -> WalkState:
    """Merge two modules with certainty."""
    proposal = merge_move(state.net, state.modules, state.graph, state.decisions, chooser)
    return _apply(state, proposal)


@dataclass(frozen=True)
class WalkResult:
    trace: tuple[TraceRecord, ...]
    initial: WalkState
    best: WalkState
    final: WalkState

    @property
    def accepted(self) -> int:
        return sum(record.accepted for record in self.trace)


def run(
        net: BayesNet,
        partition: Partition,
        iterations: int,
        probs: MoveProbs,
        score_fn: ScoreFn,
        seed: int = 0,
        mode: Union[TildeMode, str] = TildeMode.PRIOR_WEIGHTED,
        progress: bool = False,
) -> WalkResult:
    if iterations < 0:
        raise CutSpaceError("iterations", f"iterations must be nonnegative, got {iterations}")
    chooser = RandomChooser(seed=seed)
    state = initial_state(net, partition, mode, score_fn)
    initial = best = state
    trace = []
    for iteration in tqdm(range(iterations), desc="walk", disable=not progress):
        state, record = advance(state, score_fn, probs, chooser, iteration)
        trace.append(record)
        if state.score > best.score:
            best = state
    logging.info(f"Walk of {iterations} steps accepted {sum(r.accepted for r in trace)}, best score {best.score:.4f}")
    return WalkResult(tuple(trace), initial, best, state)
