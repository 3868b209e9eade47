import json
from fractions import Fraction as F

import pytest

from bdssd.core import ContinuousGenerator, DiscreteKernel
from bdssd.errors import ParseError, ValidationError
from bdssd.specfile import MODE_ENV, dump_chain_spec, env_mode, load_fixture, parse_chain_spec, parse_chain_text


def test_fixture_roundtrip(tmp_path):
    e2 = load_fixture("e2")
    assert isinstance(e2, DiscreteKernel) and e2.p[:2] == (F(1, 2), F(1, 4))
    path = tmp_path / "e2.json"
    path.write_text(dump_chain_spec(e2))
    assert parse_chain_spec(path) == e2
    assert parse_chain_spec("e2") == e2


def test_all_fixtures_load():
    kinds = {name: type(load_fixture(name)) for name in ("e2", "e2c", "e2c-absorbing", "cex", "d1")}
    assert kinds["e2c"] is ContinuousGenerator and kinds["cex"] is DiscreteKernel
    cex = load_fixture("cex")
    assert cex.report.strictly_monotone and cex.report.absorbing_top


def test_length_mismatch_reports_field_and_line():
    text = '{\n  "type": "discrete",\n  "d": 2,\n  "birth": [0.5],\n  "death": [0.25, 0.5]\n}'
    with pytest.raises(ParseError) as info:
        parse_chain_text(text)
    assert info.value.field == "birth"
    assert info.value.line == 4


def test_malformed_and_unknown_keys():
    with pytest.raises(ParseError):
        parse_chain_text("{not json")
    with pytest.raises(ParseError) as info:
        parse_chain_text('{"type": "discrete", "d": 1, "birth": [0.5], "death": [0.5], "colour": 1}')
    assert info.value.field == "colour"
    with pytest.raises(ParseError):
        parse_chain_text('{"type": "quantum", "d": 1, "birth": [1], "death": [1]}')
    with pytest.raises(ParseError):
        parse_chain_spec("/nonexistent/chain.json")


def test_validation_error_embeds_report():
    text = json.dumps({"type": "discrete", "d": 1, "birth": [0.7], "death": [0.6], "hold": [0.1, 0.2]})
    with pytest.raises(ValidationError) as info:
        parse_chain_text(text)
    assert info.value.report.violations


def test_mode_precedence(monkeypatch):
    monkeypatch.delenv(MODE_ENV, raising=False)
    assert load_fixture("e2").mode == "rational"
    monkeypatch.setenv(MODE_ENV, "float")
    assert env_mode() == "float"
    assert load_fixture("e2").mode == "float"
    assert load_fixture("e2", mode="rational").mode == "rational"
    monkeypatch.setenv(MODE_ENV, "complex")
    with pytest.raises(ParseError):
        env_mode()
