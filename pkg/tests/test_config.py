import logging

import pytest

from cutspace.config import MoveProbs, configure_logging, run_config
from cutspace.errors import CutSpaceError, ParseError
from cutspace.utils import load_config, load_document, load_evidence

from .conftest import fixture_path


def test_defaults():
    config = run_config()
    assert config.mode == "prior-weighted"
    assert config.probs == MoveProbs()
    assert config.caps == {"max_decision_sets": 10 ** 6, "max_orient_edges": 20}


def test_overrides_take_precedence():
    config = run_config({"seed": 4, "probs": {"q0": 0.1, "q4": 0.9}}, seed=9, q0=0.3, q5=None, mode=None)
    assert config.seed == 9
    assert config.mode == "prior-weighted"
    assert (config.probs.q0, config.probs.q4, config.probs.q5) == (0.3, 0.9, 0.5)


@pytest.mark.parametrize("document", [
    {"probs": {"q0": 1.5}},
    {"probs": {"temperature": 0.0}},
    {"mode": "bayes"},
    {"iterations": -1},
    {"unknown": 1},
])
def test_invalid_config(document):
    with pytest.raises(CutSpaceError) as e:
        run_config(document)
    assert e.value.invariant == "config"


def test_config_must_be_a_mapping():
    with pytest.raises(CutSpaceError) as e:
        run_config(["mode", "plain-marginal"])
    assert e.value.invariant == "config"


def test_yaml_config():
    config = load_config(fixture_path("run.yaml"), max_cells=100)
    assert config.mode == "plain-marginal"
    assert config.max_decision_sets == 1000
    assert config.max_cells == 100
    assert config.probs.q0 == 0.5
    assert config.probs.temperature == 2.0
    assert load_config(None).max_decision_sets == 10 ** 6


def test_documents(tmp_path, triad):
    broken = tmp_path / "broken.json"
    broken.write_text('{"nodes": [\n  {"id": }\n]}')
    with pytest.raises(ParseError) as e:
        load_document(str(broken))
    assert e.value.invariant == "parse"
    assert e.value.line == 2

    with pytest.raises(CutSpaceError) as e:
        load_document(str(tmp_path / "net.txt"))
    assert e.value.invariant == "file"
    other = tmp_path / "net.txt"
    other.write_text("{}")
    with pytest.raises(CutSpaceError) as e:
        load_document(str(other))
    assert e.value.invariant == "file"

    assert len(load_evidence(None, triad)) == 0
    assert load_evidence(fixture_path("triad_evidence.json"), triad).as_dict() == {"W": 1, "X": 1, "Y": 1, "Z": 1}


def test_log_level_from_environment(monkeypatch):
    monkeypatch.setenv("CUTSPACE_LOG", "debug")
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    root.handlers = []
    try:
        configure_logging()
        assert root.level == logging.DEBUG
    finally:
        root.handlers = handlers
        root.setLevel(level)
