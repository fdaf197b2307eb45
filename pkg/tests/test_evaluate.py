import math

import numpy as np
import pytest

from cutspace.errors import CapExceededError, EvaluationError, MissingEvidenceError, ZeroNormalizerError
from cutspace.inference.evaluate import (
    eval_posterior,
    eval_term,
    full_bayes,
    heldout_scorer,
    marginal_prior,
    rank_space,
    score_log_pred,
    term_conditional,
)
from cutspace.inference.factors import FactorTable
from cutspace.model.decisions import Decision, DecisionSet
from cutspace.model.modgraph import build_undirected, orient
from cutspace.model.modules import form_module_set, make_partition
from cutspace.model.network import Evidence, network_from_dict
from cutspace.model.posterior import ParamVersion, TildeMode, build_posterior

from .conftest import binary_child, binary_param
from .netgen import random_evidence, random_network

FULL_BAYES_PRED = 7 / 23
GOOD_CUT_PRED = 0.68


def _canonical(ms):
    h = build_undirected(ms)
    return orient(h, h.edges)


def _single_block(net):
    ms = form_module_set(net, make_partition(net, [net.data_nodes]))
    return build_posterior(net, ms, _canonical(ms), DecisionSet())


def _theta_marginal(table):
    return table.marginal(["theta"]).values


def test_single_parameter_example():
    net = network_from_dict({"nodes": [binary_child("X", ["theta"], [0.2, 0.8]), binary_param("theta")]})
    table = eval_posterior(net, _single_block(net), Evidence.from_mapping(net, {"X": 1}))
    assert table.scope == ("theta",)
    np.testing.assert_allclose(table.values, [0.2, 0.8])


def test_factor_normalize_keeps_zero_slices():
    table = FactorTable(["a", "b"], [[0.0, 0.0], [1.0, 3.0]]).normalize(over=["b"])
    np.testing.assert_allclose(table.values, [[0.0, 0.0], [0.25, 0.75]])
    assert table.reorder(["b", "a"]).prob({"a": 1, "b": 1}) == pytest.approx(0.75)


def test_marginal_prior(triad):
    np.testing.assert_allclose(marginal_prior(triad, "theta").values, [0.5, 0.5])
    net = network_from_dict({"nodes": [
        {"id": "X", "kind": "data", "parents": ["b"], "states": 2, "cpt": [[0.5, 0.5], [0.5, 0.5]]},
        {"id": "a", "kind": "param", "parents": [], "states": 2, "cpt": [[0.25, 0.75]]},
        {"id": "b", "kind": "param", "parents": ["a"], "states": 2, "cpt": [[1.0, 0.0], [0.2, 0.8]]},
    ]})
    np.testing.assert_allclose(marginal_prior(net, "b").values, [0.25 + 0.75 * 0.2, 0.75 * 0.8])


def test_full_bayes_triad(triad, triad_evidence):
    table = full_bayes(triad, triad_evidence)
    assert table.scope == triad.param_nodes
    assert table.total() == pytest.approx(1.0)
    np.testing.assert_allclose(_theta_marginal(table), [19 / 23, 4 / 23])


def test_single_block_matches_full_bayes_on_random_nets():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n_data = int(rng.integers(1, 5))
        net = random_network(rng, n_data=n_data, n_params=int(rng.integers(1, 9 - n_data)), max_states=3)
        evidence = Evidence.from_mapping(net, random_evidence(rng, net))
        latent = set(net.data_nodes) - evidence.nodes
        cut = eval_posterior(net, _single_block(net), evidence, latent=latent)
        assert cut.scope == net.param_nodes
        assert cut.total() == pytest.approx(1.0, abs=1e-9)
        assert cut.allclose(full_bayes(net, evidence), atol=1e-10)


def test_cut_tc_keeps_theta_from_red(triad, triad_modules, triad_rbg, triad_evidence, cut_tc):
    table = eval_posterior(triad, build_posterior(triad, triad_modules, triad_rbg, cut_tc), triad_evidence)
    np.testing.assert_allclose(_theta_marginal(table), [0.2, 0.8])
    assert table.total() == pytest.approx(1.0)


def test_cut_ignores_downstream_evidence(two_module_net, two_module_partition):
    ms = form_module_set(two_module_net, two_module_partition)
    p = build_posterior(two_module_net, ms, _canonical(ms), DecisionSet.of([Decision.build("theta", ["T", "C"], 1, {2: 1})]))
    tables = [eval_posterior(two_module_net, p, Evidence.from_mapping(two_module_net, {"X": 1, "Y": y})) for y in (0, 1)]
    np.testing.assert_allclose(tables[0].values, tables[1].values)
    np.testing.assert_allclose(tables[0].values, [0.2, 0.8])
    full = full_bayes(two_module_net, Evidence.from_mapping(two_module_net, {"X": 1, "Y": 0}))
    assert not np.allclose(full.values, tables[0].values)


def test_modes_agree_when_tilde_is_independent(triad, triad_modules, triad_rbg, triad_evidence, cut_tt):
    weighted = eval_posterior(triad, build_posterior(triad, triad_modules, triad_rbg, cut_tt), triad_evidence)
    plain = eval_posterior(
        triad, build_posterior(triad, triad_modules, triad_rbg, cut_tt, TildeMode.PLAIN_MARGINAL), triad_evidence
    )
    assert weighted.allclose(plain)


def test_modes_agree_for_trivial_tildes(two_module_net, two_module_partition):
    ms = form_module_set(two_module_net, two_module_partition)
    g = _canonical(ms)
    ds = DecisionSet.of([Decision.build("theta", ["T", "T"], 1)])
    evidence = Evidence.from_mapping(two_module_net, {"X": 1, "Y": 0})
    tables = [eval_posterior(two_module_net, build_posterior(two_module_net, ms, g, ds, mode), evidence)
              for mode in TildeMode]
    assert tables[0].allclose(tables[1])
    np.testing.assert_allclose(tables[0].values, [0.2, 0.8])


def test_modes_differ_when_tilde_interacts():
    net = network_from_dict({"nodes": [
        binary_child("X", ["theta"], [0.2, 0.8]),
        binary_child("Y", ["theta", "phi"], [0.1, 0.9, 0.9, 0.1]),
        {"id": "theta", "kind": "param", "parents": [], "states": 2, "cpt": [[0.2, 0.8]]},
        binary_param("phi"),
    ]})
    ms = form_module_set(net, make_partition(net, [["X"], ["Y"]]))
    g = _canonical(ms)
    ds = DecisionSet.of([Decision.build("theta", ["T", "T"], 1)])
    evidence = Evidence.from_mapping(net, {"X": 1, "Y": 1})
    weighted = eval_posterior(net, build_posterior(net, ms, g, ds), evidence)
    plain = eval_posterior(net, build_posterior(net, ms, g, ds, TildeMode.PLAIN_MARGINAL), evidence)
    np.testing.assert_allclose(weighted.marginal(["theta"]).values, plain.marginal(["theta"]).values)
    np.testing.assert_allclose(plain.marginal(["phi"]).values, [0.74, 0.26])
    np.testing.assert_allclose(weighted.marginal(["phi"]).values, [0.58 / 0.68, 0.10 / 0.68])


def test_term_tables_are_normalized(triad, triad_modules, triad_rbg, triad_evidence, cut_tc):
    p = build_posterior(triad, triad_modules, triad_rbg, cut_tc)
    red, green = p.term_of(0), p.term_of(1)
    red_table = eval_term(triad, red, triad_evidence)
    assert red_table.scope == (ParamVersion("theta", 0),)
    np.testing.assert_allclose(red_table.values, [0.2, 0.8])

    conditional = term_conditional(triad, green, triad_evidence)
    np.testing.assert_allclose(conditional.marginal([ParamVersion("theta", 0)]).values, [1.0, 1.0])
    mixed = eval_term(triad, green, triad_evidence, given={ParamVersion("theta", 0): red_table})
    assert mixed.scope == (ParamVersion("phi", 1),)
    assert mixed.total() == pytest.approx(1.0)
    with pytest.raises(EvaluationError) as e:
        eval_term(triad, green, triad_evidence)
    assert e.value.invariant == "given-cover"


def test_boundary_data_must_be_observed(triad, triad_modules, triad_rbg, triad_evidence, cut_tc):
    p = build_posterior(triad, triad_modules, triad_rbg, cut_tc)
    with pytest.raises(MissingEvidenceError) as e:
        eval_posterior(triad, p, triad_evidence.without(["W"]), latent={"W"})
    assert e.value.invariant == "evidence-cover"
    assert "W" in e.value.nodes


def test_contradicting_evidence():
    net = network_from_dict({"nodes": [
        {"id": "X", "kind": "data", "parents": ["theta"], "states": 2, "cpt": [[1.0, 0.0], [1.0, 0.0]]},
        binary_param("theta"),
    ]})
    evidence = Evidence.from_mapping(net, {"X": 1})
    with pytest.raises(ZeroNormalizerError) as e:
        eval_posterior(net, _single_block(net), evidence)
    assert e.value.invariant == "zero-normalizer"
    with pytest.raises(ZeroNormalizerError):
        full_bayes(net, evidence)


def test_cell_cap(triad, triad_evidence):
    with pytest.raises(CapExceededError) as e:
        full_bayes(triad, triad_evidence, max_cells=4)
    assert e.value.invariant == "cap:max-cells"


def test_structure_only_network_cannot_be_evaluated():
    net = network_from_dict({"nodes": [
        {"id": "X", "kind": "data", "parents": ["theta"]},
        {"id": "theta", "kind": "param"},
    ]})
    with pytest.raises(EvaluationError) as e:
        full_bayes(net, Evidence())
    assert e.value.invariant == "discrete"


def test_full_bayes_score(misspecified, misspecified_train, misspecified_heldout):
    score = score_log_pred(misspecified, _single_block(misspecified), misspecified_train, misspecified_heldout)
    assert score.log_pred == pytest.approx(math.log(FULL_BAYES_PRED))
    assert score.per_node == {"X2": pytest.approx(math.log(FULL_BAYES_PRED))}
    assert score.to_dict()["log_pred"] == pytest.approx(-1.1896, abs=1e-4)


def test_good_cut_score(misspecified, misspecified_partition, misspecified_train, misspecified_heldout):
    ms = form_module_set(misspecified, misspecified_partition)
    ds = DecisionSet.of([Decision.build("theta", ["T", "C"], 1, {2: 1})])
    p = build_posterior(misspecified, ms, _canonical(ms), ds)
    score = score_log_pred(misspecified, p, misspecified_train, misspecified_heldout)
    assert score.log_pred == pytest.approx(math.log(GOOD_CUT_PRED))
    assert score.log_pred == pytest.approx(-0.3857, abs=1e-4)


def test_score_edge_cases(misspecified, misspecified_train, misspecified_heldout):
    p = _single_block(misspecified)
    assert score_log_pred(misspecified, p, misspecified_train, Evidence()).log_pred == 0.0
    with pytest.raises(EvaluationError) as e:
        score_log_pred(misspecified, p, misspecified_train, misspecified_train)
    assert e.value.invariant == "train-heldout-disjoint"


def test_rank_space(misspecified, misspecified_partition, misspecified_train, misspecified_heldout):
    score_fn = heldout_scorer(misspecified, misspecified_train, misspecified_heldout)
    ranked = rank_space(misspecified, misspecified_partition, score_fn)
    assert len(ranked) == 18
    scores = [score for score, _ in ranked]
    assert scores == sorted(scores, reverse=True)
    assert scores[0] == pytest.approx(math.log(GOOD_CUT_PRED))
    assert scores[0] > math.log(FULL_BAYES_PRED)
