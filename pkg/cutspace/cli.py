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

import argparse
import logging
import sys

from tqdm import tqdm

from cutspace.config import RunConfig, configure_logging
from cutspace.errors import CutSpaceError
from cutspace.inference.evaluate import eval_posterior, full_bayes, heldout_scorer, rank_space, score_log_pred
from cutspace.inference.walk import run
from cutspace.model.decisions import DecisionSet, check_decision_set, enumerate_decision_sets
from cutspace.model.modgraph import (
    DirectedModuleGraph,
    build_undirected,
    enumerate_orientations,
    orient,
)
from cutspace.model.modules import ModuleSet, form_module_set, make_partition
from cutspace.model.posterior import SpaceEntry, build_posterior, enumerate_space, posterior_signature
from cutspace.report import (
    Report,
    decisions_report,
    emit_report,
    enumerate_report,
    modules_report,
    network_report,
    orientations_report,
    rank_report,
    render_report,
    score_report,
    table_report,
    walk_report,
)
from cutspace.utils import (
    load_config,
    load_decision_set,
    load_evidence,
    load_network,
    load_orientation,
    load_partition,
)

def _add_common(parser):
    parser.add_argument("--net", required=True, type=str, help="Path to the network document (.json or .yaml)")
    parser.add_argument("--config", type=str, help="Optional run configuration document")
    parser.add_argument("--format", choices=["text", "json", "latex"], help="Output format (default: text)")
    parser.add_argument("--out", type=str, help="Write the report to this file instead of stdout")


def _add_structure(parser, partition_required=True):
    parser.add_argument("--partition", required=partition_required, type=str, help="Path to the partition document")
    parser.add_argument("--mode", choices=["prior-weighted", "plain-marginal"],
                        help="How tilde parameters enter the posterior (default: prior-weighted)")
    parser.add_argument("--max-decision-sets", type=int, help="Cap on decision sets per orientation")
    parser.add_argument("--max-orient-edges", type=int, help="Cap on module graph edges for orientation enumeration")


def _add_posterior(parser):
    parser.add_argument("--orientation", type=str,
                        help="Orientation document; the canonical orientation is used when omitted")
    parser.add_argument("--decision", type=str,
                        help="Decision set document; every shared parameter updated everywhere when omitted")


def parse_args(argv=None):
    parser = argparse.ArgumentParser(prog="cutspace", description="Cut-posteriors of Bayesian networks")
    subparsers = parser.add_subparsers(dest="command", required=True)

    validate = subparsers.add_parser("validate", help="Check a network document")
    _add_common(validate)

    modules = subparsers.add_parser("modules", help="Form modules from a partition of the data nodes")
    _add_common(modules)
    _add_structure(modules)

    orientations = subparsers.add_parser("orientations", help="List acyclic orientations of the module graph")
    _add_common(orientations)
    _add_structure(orientations)

    decisions = subparsers.add_parser("decisions", help="Count decisions for every shared parameter")
    _add_common(decisions)
    _add_structure(decisions)
    decisions.add_argument("--orientation", type=str, help="Orientation document (default: canonical)")

    enumerate_ = subparsers.add_parser("enumerate", help="Enumerate every cut-posterior of a partition")
    _add_common(enumerate_)
    _add_structure(enumerate_)
    enumerate_.add_argument("--distinct", action="store_true", help="Drop posteriors equal to an earlier one")
    enumerate_.add_argument("--progress", action="store_true", help="Show a progress bar")

    render_ = subparsers.add_parser("render", help="Render one cut-posterior")
    _add_common(render_)
    _add_structure(render_)
    _add_posterior(render_)

    eval_ = subparsers.add_parser("eval", help="Evaluate a cut-posterior (or the full posterior) on evidence")
    _add_common(eval_)
    _add_structure(eval_, partition_required=False)
    _add_posterior(eval_)
    eval_.add_argument("--evidence", type=str, help="Evidence document")
    eval_.add_argument("--max-cells", type=int, help="Cap on joint table cells")

    score = subparsers.add_parser("score", help="Held-out log predictive density")
    _add_common(score)
    _add_structure(score)
    _add_posterior(score)
    score.add_argument("--evidence", type=str, help="Training evidence document")
    score.add_argument("--heldout", required=True, type=str, help="Held-out evidence document")
    score.add_argument("--rank", action="store_true", help="Score every posterior of the partition, best first")
    score.add_argument("--max-cells", type=int, help="Cap on joint table cells")

    walk = subparsers.add_parser("walk", help="Random walk over cut-posteriors")
    _add_common(walk)
    _add_structure(walk, partition_required=False)
    walk.add_argument("--evidence", type=str, help="Training evidence document")
    walk.add_argument("--heldout", required=True, type=str, help="Held-out evidence document")
    walk.add_argument("--seed", type=int, help="Random seed (default: 0)")
    walk.add_argument("--iters", type=int, help="Number of proposals (default: 200)")
    for q in ("q0", "q1", "q2", "q3", "q4", "q5"):
        walk.add_argument(f"--{q}", type=float, help=f"Move tree branch probability {q}")
    walk.add_argument("--temperature", type=float, help="Acceptance temperature")
    walk.add_argument("--max-cells", type=int, help="Cap on joint table cells")
    walk.add_argument("--progress", action="store_true", help="Show a progress bar")

    return parser.parse_args(argv)


def _config(args) -> RunConfig:
    overrides = {
        "format": args.format,
        "mode": getattr(args, "mode", None),
        "max_decision_sets": getattr(args, "max_decision_sets", None),
        "max_orient_edges": getattr(args, "max_orient_edges", None),
        "max_cells": getattr(args, "max_cells", None),
        "seed": getattr(args, "seed", None),
        "iterations": getattr(args, "iters", None),
        "temperature": getattr(args, "temperature", None),
    }
    overrides.update({q: getattr(args, q, None) for q in ("q0", "q1", "q2", "q3", "q4", "q5")})
    return load_config(args.config, **overrides)


def _modules(args, net) -> ModuleSet:
    if args.partition:
        partition = load_partition(args.partition, net)
    else:
        partition = make_partition(net, [net.data_nodes])
    ms = form_module_set(net, partition)
    logging.info(f"Formed {len(ms)} modules, {len(ms.shared_params)} shared parameters")
    return ms


def _graph(args, ms: ModuleSet) -> DirectedModuleGraph:
    h = build_undirected(ms)
    if getattr(args, "orientation", None):
        return load_orientation(args.orientation, ms, h)
    return orient(h, h.edges)


def _decisions(args, ms: ModuleSet, g: DirectedModuleGraph, config: RunConfig) -> DecisionSet:
    if getattr(args, "decision", None):
        ds = load_decision_set(args.decision)
        check_decision_set(ms, ds)
        return ds
    return next(iter(enumerate_decision_sets(ms, g, config.max_decision_sets)))


def _entry(args, net, ms: ModuleSet, config: RunConfig) -> SpaceEntry:
    g = _graph(args, ms)
    ds = _decisions(args, ms, g, config)
    return SpaceEntry(g, ds, build_posterior(net, ms, g, ds, config.mode))


def _enumerate(args, net, config: RunConfig) -> Report:
    ms = _modules(args, net)
    entries, seen = [], set()
    space = enumerate_space(net, ms.partition, config.mode, **config.caps)
    for entry in tqdm(space, desc="enumerate", disable=not args.progress):
        key = posterior_signature(entry.posterior)
        if args.distinct and key in seen:
            continue
        seen.add(key)
        entries.append(entry)
    return enumerate_report(net, ms, entries, distinct=len(seen))


def _rank(net, ms: ModuleSet, train, heldout, config: RunConfig) -> Report:
    score_fn = heldout_scorer(net, train, heldout, config.max_cells)
    return rank_report(net, rank_space(net, ms.partition, score_fn, config.mode, **config.caps))


def dispatch(args, config: RunConfig) -> Report:
    net = load_network(args.net)
    if args.command == "validate":
        return network_report(net)
    if args.command == "enumerate":
        return _enumerate(args, net, config)
    if args.command == "eval" and not args.partition:
        return table_report(full_bayes(net, load_evidence(args.evidence, net), config.max_cells))
    if args.command == "walk":
        train, heldout = load_evidence(args.evidence, net), load_evidence(args.heldout, net)
        ms = _modules(args, net)
        result = run(
            net,
            ms.partition,
            config.iterations,
            config.probs,
            heldout_scorer(net, train, heldout, config.max_cells),
            seed=config.seed,
            mode=config.mode,
            progress=args.progress,
        )
        return walk_report(net, result)

    ms = _modules(args, net)
    if args.command == "modules":
        return modules_report(net, ms)
    if args.command == "orientations":
        graphs = list(enumerate_orientations(build_undirected(ms), config.max_orient_edges))
        return orientations_report(ms, graphs)
    if args.command == "decisions":
        return decisions_report(net, ms, _graph(args, ms))
    if args.command == "score":
        train, heldout = load_evidence(args.evidence, net), load_evidence(args.heldout, net)
        if args.rank:
            return _rank(net, ms, train, heldout, config)
        entry = _entry(args, net, ms, config)
        return score_report(score_log_pred(net, entry.posterior, train, heldout, config.max_cells))

    entry = _entry(args, net, ms, config)
    if args.command == "render":
        return render_report(net, entry, ms)
    evidence = load_evidence(args.evidence, net)
    return table_report(eval_posterior(net, entry.posterior, evidence, max_cells=config.max_cells))


def main(argv=None) -> int:
    configure_logging()
    args = parse_args(argv)
    try:
        config = _config(args)
        output = emit_report(dispatch(args, config), config.format)
    except CutSpaceError as e:
        print(f"error: {e.invariant}: {e.message}", file=sys.stderr)
        return 1

    if args.out:
        with open(args.out, "w") as f:
            f.write(output)
        logging.info(f"Report saved to {args.out}")
    else:
        sys.stdout.write(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
