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

"""Exact evaluation of cut-posteriors on fully discrete networks.

Terms are evaluated in the ordering S. Each non-trivial term contributes the
conditional table p(U, T | Θ', X) and the running joint over every version
created so far is multiplied by it; tilde versions are summed out at the end.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import logsumexp

from cutspace.errors import CapExceededError, EvaluationError, MissingEvidenceError, ZeroNormalizerError
from cutspace.inference.factors import FactorTable, Variable
from cutspace.model.modules import Partition
from cutspace.model.network import BayesNet, Evidence, ancestors
from cutspace.model.posterior import (
    CutPosterior,
    ParamVersion,
    SpaceEntry,
    TildeMode,
    UpdateTerm,
    enumerate_space,
)

__all__ = [
    "DEFAULT_MAX_CELLS",
    "Score",
    "ScoreFn",
    "cpt_factor",
    "marginal_prior",
    "term_conditional",
    "eval_term",
    "eval_posterior",
    "full_bayes",
    "data_likelihood",
    "score_log_pred",
    "heldout_scorer",
    "rank_space",
]

DEFAULT_MAX_CELLS = 10 ** 7

ScoreFn = Callable[[CutPosterior], float]


def _require_discrete(net: BayesNet):
    if not net.is_discrete:
        raise EvaluationError("discrete", "numeric evaluation needs a CPT on every node")


def _check_cells(table: FactorTable, max_cells: int) -> FactorTable:
    if table.values.size > max_cells:
        raise CapExceededError("max-cells", int(table.values.size), max_cells)
    return table


def cpt_factor(net: BayesNet, name: str, variable_of: Callable[[str], Variable] = None) -> FactorTable:
    """CPT of `name` over (parents, name), each node mapped to the variable standing for it."""
    variable_of = variable_of or (lambda n: n)
    scope = [variable_of(parent) for parent in net.parents(name)] + [variable_of(name)]
    return FactorTable(scope, net.table(name))


def marginal_prior(net: BayesNet, theta: str) -> FactorTable:
    """π(θ): the product of the CPTs of θ and its ancestors, summed down to θ."""
    _require_discrete(net)
    table = FactorTable.scalar()
    for name in net.sort(ancestors(net, theta) | {theta}):
        table = table.multiply(cpt_factor(net, name))
    return table.marginal([theta])


def _term_data(term: UpdateTerm, evidence: Evidence, latent: frozenset[str]) -> dict[str, int]:
    missing = [name for name in term.cond_data if name not in evidence and not (name in latent and name in term.core)]
    if missing:
        raise MissingEvidenceError(missing)
    return {name: evidence[name] for name in term.cond_data if name in evidence}


def term_conditional(
        net: BayesNet,
        term: UpdateTerm,
        evidence: Evidence,
        latent: Iterable[str] = (),
) -> FactorTable:
    """p(U, T | Θ', X) for one term, normalized over U ∪ T for every state of Θ'."""
    _require_discrete(net)
    if term.trivial:
        return FactorTable.scalar()
    latent = frozenset(latent)
    observed = _term_data(term, evidence, latent)

    table = FactorTable.scalar()
    updated = list(term.update) + [version.theta for version in term.tilde]
    for name in net.sort(updated) + net.sort(term.core):
        table = table.multiply(cpt_factor(net, name, term.version))
    table = table.reduce(observed).sum_out(latent & term.core)

    own = term.kept_versions + term.tilde
    if table.total() <= 0.0:
        raise ZeroNormalizerError(f"module {term.module} assigns zero probability to its data")
    return table.normalize(over=own)


def eval_term(
        net: BayesNet,
        term: UpdateTerm,
        evidence: Evidence,
        given: Mapping[ParamVersion, FactorTable] = None,
        latent: Iterable[str] = (),
) -> FactorTable:
    """Normalized table over U ∪ T of the term.

    Conditioned versions are averaged out under their `given` tables.
    """
    if term.trivial:
        return FactorTable.scalar()
    given = given or {}
    table = term_conditional(net, term, evidence, latent)
    weights = FactorTable.scalar()
    used = set()
    for version in term.cond_param:
        if version not in given:
            raise EvaluationError("given-cover", f"no table given for conditioned version {version}")
        if id(given[version]) not in used:
            used.add(id(given[version]))
            weights = weights.multiply(given[version].normalize())
    table = table.multiply(weights).sum_out(term.cond_param)
    if table.total() <= 0.0:
        raise ZeroNormalizerError(f"module {term.module} has no mass under the given tables")
    return table.normalize().reorder(term.kept_versions + term.tilde)


def _orphan_factor(net: BayesNet, orphan: Iterable[str], evidence: Evidence) -> FactorTable:
    """p(Θ_S | pa(Θ_S)); data parents of orphans enter through their observed values."""
    table = FactorTable.scalar()
    for name in orphan:
        table = table.multiply(cpt_factor(net, name, lambda n: n if net.is_data(n) else ParamVersion(n)))
    data = [v for v in table.scope if isinstance(v, str)]
    missing = [name for name in data if name not in evidence]
    if missing:
        raise MissingEvidenceError(missing)
    return table.reduce({name: evidence[name] for name in data})


def eval_posterior(
        net: BayesNet,
        p: CutPosterior,
        evidence: Evidence,
        latent: Iterable[str] = (),
        max_cells: int = DEFAULT_MAX_CELLS,
) -> FactorTable:
    """Normalized joint over every parameter, scoped in canonical node order."""
    _require_discrete(net)
    latent = frozenset(latent)
    priors: dict[str, FactorTable] = {}

    def prior(version: ParamVersion) -> FactorTable:
        if version.theta not in priors:
            priors[version.theta] = marginal_prior(net, version.theta)
        return priors[version.theta].relabel({version.theta: version})

    joint = FactorTable.scalar()
    for term in p.terms:
        if term.trivial:
            for version in term.tilde:
                joint = _check_cells(joint.multiply(prior(version)), max_cells)
            continue
        joint = _check_cells(joint.multiply(term_conditional(net, term, evidence, latent)), max_cells)
        if p.mode is TildeMode.PRIOR_WEIGHTED:
            for version in term.tilde:
                joint = joint.multiply(prior(version))

    if p.orphan:
        joint = _check_cells(joint.multiply(_orphan_factor(net, p.orphan, evidence)), max_cells)

    joint = joint.sum_out(p.tilde_vars)
    joint = joint.relabel({version: version.theta for version in joint.scope if isinstance(version, ParamVersion)})
    joint = joint.expand({name: net.states(name) for name in net.param_nodes}).reorder(net.param_nodes)
    if joint.total() <= 0.0:
        raise ZeroNormalizerError("the cut-posterior has zero total mass")
    logging.debug(f"Evaluated posterior over {len(net.param_nodes)} parameters, {joint.values.size} cells")
    return joint.normalize()


def _unobserved_cells(net: BayesNet, evidence: Evidence) -> int:
    return math.prod(net.states(name) for name in net.names if name not in evidence)


def _joint_over_params(net: BayesNet, names: Iterable[str], evidence: Evidence, max_cells: int) -> FactorTable:
    cells = _unobserved_cells(net, evidence)
    if cells > max_cells:
        raise CapExceededError("max-cells", cells, max_cells)
    table = FactorTable.scalar()
    for name in names:
        table = table.multiply(cpt_factor(net, name))
    table = table.reduce({name: state for name, state in evidence.observed if name in table})
    table = table.sum_out([name for name in net.data_nodes if name not in evidence])
    return table.expand({name: net.states(name) for name in net.param_nodes}).reorder(net.param_nodes)


def full_bayes(net: BayesNet, evidence: Evidence, max_cells: int = DEFAULT_MAX_CELLS) -> FactorTable:
    """Exact p(Θ | evidence) by multiplying out every CPT."""
    _require_discrete(net)
    table = _joint_over_params(net, net.names, evidence, max_cells)
    if table.total() <= 0.0:
        raise ZeroNormalizerError("the evidence has zero probability under the network")
    return table.normalize()


def data_likelihood(net: BayesNet, evidence: Evidence, max_cells: int = DEFAULT_MAX_CELLS) -> FactorTable:
    """p(observed data | Θ) as a table over every parameter, unobserved data summed out."""
    _require_discrete(net)
    return _joint_over_params(net, net.data_nodes, evidence, max_cells)


@dataclass(frozen=True)
class Score:
    log_pred: float
    per_node: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"log_pred": self.log_pred, "per_node": dict(self.per_node)}


def _log_predictive(posterior: FactorTable, joint: FactorTable, train: FactorTable) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        log_terms = np.log(posterior.values) + np.log(joint.values) - np.log(train.values)
    # states the training data rule out carry no predictive mass
    log_terms = np.where(train.values > 0, log_terms, -np.inf)
    if np.all(np.isneginf(log_terms)):
        return -math.inf
    return float(logsumexp(log_terms))


def score_log_pred(
        net: BayesNet,
        p: CutPosterior,
        train: Evidence,
        heldout: Evidence,
        max_cells: int = DEFAULT_MAX_CELLS,
        posterior: Optional[FactorTable] = None,
) -> Score:
    """log Σ_Θ post(Θ | train) p(heldout | Θ, train), with one entry per held-out node."""
    overlap = train.nodes & heldout.nodes
    if overlap:
        raise EvaluationError("train-heldout-disjoint", f"{', '.join(net.sort(overlap))} are both train and held-out")
    if not len(heldout):
        return Score(0.0, {})

    latent = frozenset(net.data_nodes) - train.nodes
    if posterior is None:
        posterior = eval_posterior(net, p, train, latent=latent, max_cells=max_cells)
    train_lik = data_likelihood(net, train, max_cells)

    def log_pred(observed: Evidence) -> float:
        joint = data_likelihood(net, train.merged(observed, net), max_cells)
        return _log_predictive(posterior, joint, train_lik)

    per_node = {name: log_pred(Evidence(((name, state),))) for name, state in heldout.observed}
    return Score(log_pred(heldout), per_node)


def heldout_scorer(
        net: BayesNet,
        train: Evidence,
        heldout: Evidence,
        max_cells: int = DEFAULT_MAX_CELLS,
) -> ScoreFn:
    """Score function for the walk: held-out log predictive density of a posterior."""

    def score(p: CutPosterior) -> float:
        return score_log_pred(net, p, train, heldout, max_cells).log_pred

    return score


def rank_space(
        net: BayesNet,
        partition: Partition,
        score_fn: ScoreFn,
        mode: Union[TildeMode, str] = TildeMode.PRIOR_WEIGHTED,
        **caps,
) -> list[tuple[float, SpaceEntry]]:
    """Score every built posterior of a fixed partition, best first (ties keep build order)."""
    scored = [(score_fn(entry.posterior), entry) for entry in enumerate_space(net, partition, mode, **caps)]
    ranked = sorted(scored, key=lambda item: -item[0])
    if ranked:
        logging.info(f"Ranked {len(ranked)} cut-posteriors, best log predictive {ranked[0][0]:.4f}")
    return ranked
