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

"""Text and LaTeX rendering of cut-posteriors."""

from __future__ import annotations

from typing import Union

from cutspace.model.network import BayesNet
from cutspace.model.posterior import CutPosterior, ParamVersion, TildeMode, UpdateTerm

__all__ = ["FORMATS", "symbol", "render_version", "render_term", "render"]

FORMATS = ("text", "latex")

GREEK = {
    "alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ", "epsilon": "ε", "zeta": "ζ",
    "eta": "η", "theta": "θ", "iota": "ι", "kappa": "κ", "lambda": "λ", "mu": "μ",
    "nu": "ν", "xi": "ξ", "omicron": "ο", "pi": "π", "rho": "ρ", "sigma": "σ",
    "tau": "τ", "upsilon": "υ", "phi": "φ", "chi": "χ", "psi": "ψ", "omega": "ω",
}


def symbol(name: str, fmt: str = "text") -> str:
    if name in GREEK:
        if fmt == "latex":
            return "o" if name == "omicron" else f"\\{name}"
        return GREEK[name]
    if fmt == "latex":
        return name.replace("_", "\\_")
    return name


def render_version(version: Union[str, ParamVersion], fmt: str = "text") -> str:
    if isinstance(version, str):
        return symbol(version, fmt)
    base = symbol(version.theta, fmt)
    if version.kept:
        return base
    if fmt == "latex":
        tilde = f"\\tilde{{{base}}}"
        return tilde if version.rank == 2 else f"{tilde}^{{({version.rank})}}"
    return f"{base}~" if version.rank == 2 else f"{base}~({version.rank})"


def _density(left: list[str], right: list[str]) -> str:
    if right:
        return f"p({','.join(left)}|{','.join(right)})"
    return f"p({','.join(left)})"


def render_term(net: BayesNet, term: UpdateTerm, fmt: str = "text") -> str:
    if term.trivial:
        return "1"
    left = sorted([ParamVersion(name, term.module) for name in term.update] + list(term.tilde),
                  key=lambda v: net.order_key(v.theta))
    right = sorted(term.cond_param, key=lambda v: net.order_key(v.theta))
    return _density(
        [render_version(v, fmt) for v in left],
        [render_version(v, fmt) for v in right] + [symbol(name, fmt) for name in term.cond_data],
    )


def _orphan_term(net: BayesNet, orphan: tuple[str, ...], fmt: str) -> str:
    outside = net.sort({parent for name in orphan for parent in net.parents(name)} - set(orphan))
    return _density([symbol(name, fmt) for name in orphan], [symbol(name, fmt) for name in outside])


def render(net: BayesNet, p: CutPosterior, fmt: str = "text") -> str:
    """Canonical one-line form, e.g. `∫ p(θ|W,X) p(ψ|W) p(θ~,φ|W,Y,Z) π(θ~) dθ~`."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")
    product = " ".join(render_term(net, term, fmt) for term in p.terms)
    if p.tilde_vars:
        tildes = [render_version(v, fmt) for v in p.tilde_vars]
        integral, prior, d = ("\\int", "\\pi", "\\,d") if fmt == "latex" else ("∫", "π", "d")
        parts = [integral, product]
        if p.mode is TildeMode.PRIOR_WEIGHTED:
            parts.extend(f"{prior}({t})" for t in tildes)
        parts.extend(f"{d}{t}" for t in tildes)
        product = " ".join(parts)
    if p.orphan:
        product = f"{_orphan_term(net, p.orphan, fmt)} {product}"
    return product
