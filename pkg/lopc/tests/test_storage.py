"""
Tests for distribution and protocol files.
"""

import json
from fractions import Fraction

import pytest

from lopc.core.dist import SecrecySpectrum, Verdict, classify_pure, pure_state
from lopc.core.engine import execute, verify_secrecy
from lopc.core.errors import NormalizationError, ParseError
from lopc.core.synthesis import synthesize_probabilistic
from lopc.storage.files import parse_distribution, read_protocol, write_distribution, write_protocol


def test_fixtures_parse(data_dir, trit_state):
    assert parse_distribution(data_dir / "states" / "trit.json") == trit_state
    cghz = parse_distribution(data_dir / "states" / "cghz.json")
    assert cghz.honest_labels == ("A", "B", "C")
    block = parse_distribution(data_dir / "states" / "block_pure.json")
    assert classify_pure(block).kind == Verdict.BLOCK_PURE


def test_unnormalized_file_reports_deficit(data_dir):
    with pytest.raises(NormalizationError) as err:
        parse_distribution(data_dir / "states" / "unnormalized.json")
    assert err.value.deficit == Fraction(1, 100)


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        parse_distribution(tmp_path / "nope.json")


@pytest.mark.parametrize("document", [
    "{not json",
    json.dumps({"parties": [{"label": "A", "role": "spy"}], "entries": [{"outcome": [0], "prob": "1"}]}),
    json.dumps({"parties": [{"label": "A"}], "entries": [{"outcome": [0], "prob": "3/2"}]}),
    json.dumps({"parties": [], "entries": []}),
])
def test_malformed_distribution_files(tmp_path, document):
    path = tmp_path / "bad.json"
    path.write_text(document)
    with pytest.raises(ParseError):
        parse_distribution(path)


def test_decimal_probabilities_are_read_exactly(tmp_path):
    path = tmp_path / "decimal.json"
    path.write_text(json.dumps({
        "parties": [{"label": "A"}, {"label": "B"}, {"label": "E", "role": "eavesdropper", "alphabet": 1}],
        "entries": [{"outcome": [0, 0, 0], "prob": "0.4"}, {"outcome": [1, 1, 0], "prob": 0.6}],
    }))
    d = parse_distribution(path)
    assert d.probability((0, 0, 0)) == Fraction(2, 5)
    assert classify_pure(d).spectrum == SecrecySpectrum.parse("3/5,2/5")


def test_distribution_round_trip(tmp_path, trit_state):
    path = tmp_path / "state.json"
    write_distribution(trit_state, path)
    assert parse_distribution(path) == trit_state
    assert json.loads(path.read_text())["entries"][0]["prob"] == "1/3"


def test_protocol_round_trip_keeps_behaviour(tmp_path, bit):
    p = SecrecySpectrum.parse("3/5,2/5")
    protocol = synthesize_probabilistic(p, bit).protocol
    path = tmp_path / "protocol.json"
    write_protocol(protocol, path)
    loaded = read_protocol(path)
    assert loaded == protocol
    report = verify_secrecy(execute(loaded, pure_state(p)), bit, conditioned_on_success=True)
    assert report.is_secret


def test_protocol_rows_must_normalize(tmp_path):
    path = tmp_path / "protocol.json"
    path.write_text(json.dumps({
        "rounds": [{"speaker": "A", "reads": ["A"],
                    "table": [{"input": [0], "messages": [{"message": 0, "prob": "1/2"}]}]}],
    }))
    with pytest.raises(NormalizationError):
        read_protocol(path)


def test_protocol_key_pairs_are_validated(tmp_path):
    path = tmp_path / "protocol.json"
    path.write_text(json.dumps({"keys": [["KA"]]}))
    with pytest.raises(ParseError):
        read_protocol(path)
