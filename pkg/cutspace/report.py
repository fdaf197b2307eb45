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

"""Reports printed by the command line: JSON documents, tabulated text, LaTeX."""

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import pandas as pd
from tabulate import tabulate

from cutspace.inference.evaluate import Score
from cutspace.inference.factors import FactorTable
from cutspace.inference.walk import WalkResult
from cutspace.model.decisions import count_breakdown, count_decision_sets, decision_modules, decision_to_dict
from cutspace.model.modgraph import DirectedModuleGraph, orientation_to_dict
from cutspace.model.modules import ModuleSet
from cutspace.model.network import BayesNet
from cutspace.model.posterior import SpaceEntry, posterior_to_dict
from cutspace.model.render import render

__all__ = [
    "Report",
    "emit_report",
    "network_report",
    "modules_report",
    "orientations_report",
    "decisions_report",
    "enumerate_report",
    "render_report",
    "table_report",
    "score_report",
    "rank_report",
    "walk_report",
]


@dataclass
class Report:
    document: Any
    lines: list[str] = field(default_factory=list)
    table: Optional[pd.DataFrame] = None
    latex: Optional[list[str]] = None
    ndjson: bool = False


def _json_value(value):
    if isinstance(value, float) and math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return value


def emit_report(report: Report, fmt: str = "text") -> str:
    if report.ndjson:
        return "".join(json.dumps(record, ensure_ascii=False) + "\n" for record in report.document)
    if fmt == "json":
        return json.dumps(report.document, indent=2, ensure_ascii=False) + "\n"
    if fmt == "latex":
        if report.latex is not None:
            return "\n".join(report.latex) + "\n"
        if report.table is not None:
            return tabulate(report.table, headers="keys", tablefmt="latex", showindex=False, floatfmt=".6f") + "\n"
    parts = list(report.lines)
    if report.table is not None:
        parts.append(tabulate(report.table, headers="keys", tablefmt="fancy_grid", showindex=False, floatfmt=".6f"))
    return "\n".join(parts) + "\n"


def network_report(net: BayesNet) -> Report:
    document = {
        "nodes": len(net.nodes),
        "edges": net.edge_count,
        "data": list(net.data_nodes),
        "params": list(net.param_nodes),
        "discrete": net.is_discrete,
    }
    lines = [
        f"valid network: {len(net.nodes)} nodes, {net.edge_count} edges",
        f"data: {', '.join(net.data_nodes) or '-'}",
        f"params: {', '.join(net.param_nodes) or '-'}",
    ]
    return Report(document, lines)


def modules_report(net: BayesNet, ms: ModuleSet) -> Report:
    rows = []
    for i, module in enumerate(ms.modules):
        rows.append({
            "module": ms.label(i),
            "core": list(net.sort(module.core)),
            "boundary": list(net.sort(module.boundary)),
            "params": list(net.sort(module.params)),
            "intrinsic": list(net.sort(ms.intrinsic_params[i])),
        })
    document = {
        "modules": rows,
        "shared": list(net.sort(ms.shared_params)),
        "orphan": list(net.sort(ms.orphan_params)),
    }
    table = pd.DataFrame([{key: ",".join(value) if isinstance(value, list) else value for key, value in row.items()}
                          for row in rows])
    lines = [
        f"shared: {', '.join(document['shared']) or '-'}",
        f"orphan: {', '.join(document['orphan']) or '-'}",
    ]
    return Report(document, lines, table)


def orientations_report(ms: ModuleSet, graphs: list[DirectedModuleGraph]) -> Report:
    document = [orientation_to_dict(g, ms) for g in graphs]
    lines = [f"{len(graphs)} acyclic orientations"]
    lines += [
        f"{k}: {' '.join(f'{u}->{v}' for u, v in doc['directions']) or '(no edges)'}  S=({','.join(doc['ordering'])})"
        for k, doc in enumerate(document)
    ]
    return Report(document, lines)


def decisions_report(net: BayesNet, ms: ModuleSet, g: DirectedModuleGraph) -> Report:
    entries, lines = [], []
    for theta in net.sort(ms.shared_params):
        breakdown = count_breakdown(len(ms.modules_of(theta)))
        entries.append({
            "theta": theta,
            "modules": [ms.label(m) for m in decision_modules(ms, g, theta)],
            "count": sum(breakdown),
            "breakdown": breakdown,
        })
        lines.append(f"{theta}: {sum(breakdown)} decisions ({len(breakdown)} partitions: "
                     f"{'+'.join(str(n) for n in breakdown)})")
    total = count_decision_sets(ms)
    lines.append(f"{total} decision sets")
    return Report({"parameters": entries, "decision_sets": total}, lines)


def enumerate_report(net: BayesNet, ms: ModuleSet, entries: list[SpaceEntry], distinct: int = None) -> Report:
    document, lines, latex = [], [], []
    for k, entry in enumerate(entries):
        text = render(net, entry.posterior, "text")
        document.append({
            "index": k,
            "orientation": orientation_to_dict(entry.graph, ms),
            "decisions": [decision_to_dict(d) for d in entry.decisions],
            "posterior": posterior_to_dict(entry.posterior, net, ms),
            "rendering": text,
        })
        lines.append(f"{k}: {text}")
        latex.append(f"{render(net, entry.posterior, 'latex')} \\\\")
    summary = f"{len(entries)} posteriors"
    if distinct is not None:
        summary += f" ({distinct} distinct)"
    return Report(document, lines + [summary], latex=latex)


def render_report(net: BayesNet, entry: SpaceEntry, ms: ModuleSet) -> Report:
    document = posterior_to_dict(entry.posterior, net, ms)
    document["rendering"] = render(net, entry.posterior, "text")
    return Report(document, [document["rendering"]], latex=[render(net, entry.posterior, "latex")])


def table_report(table: FactorTable) -> Report:
    """A joint table over parameters, one row per state combination."""
    index = pd.MultiIndex.from_product([range(n) for n in table.values.shape], names=[str(v) for v in table.scope])
    frame = index.to_frame(index=False)
    frame["p"] = table.values.reshape(-1)
    document = {
        "scope": [str(v) for v in table.scope],
        "values": [float(v) for v in table.values.reshape(-1)],
    }
    return Report(document, table=frame)


def score_report(score: Score) -> Report:
    document = {"log_pred": _json_value(score.log_pred),
                "per_node": {k: _json_value(v) for k, v in score.per_node.items()}}
    frame = pd.DataFrame([{"node": k, "log_pred": v} for k, v in score.per_node.items()], columns=["node", "log_pred"])
    return Report(document, [f"log predictive density: {score.log_pred:.6f}"], frame)


def rank_report(net: BayesNet, ranked: list[tuple[float, SpaceEntry]]) -> Report:
    rows = [
        {"rank": k, "log_pred": log_pred, "rendering": render(net, entry.posterior, "text")}
        for k, (log_pred, entry) in enumerate(ranked)
    ]
    document = [dict(row, log_pred=_json_value(row["log_pred"])) for row in rows]
    return Report(document, table=pd.DataFrame(rows, columns=["rank", "log_pred", "rendering"]))


def walk_report(net: BayesNet, result: WalkResult) -> Report:
    records = []
    for record in result.trace:
        item = record.to_dict()
        item["score"] = _json_value(item["score"])
        records.append(item)
    best = result.best
    records.append({
        "best": {
            "score": _json_value(best.score),
            "rendering": render(net, best.posterior, "text"),
            "blocks": [list(net.sort(block)) for block in best.modules.partition.blocks],
        },
    })
    return Report(records, ndjson=True)
