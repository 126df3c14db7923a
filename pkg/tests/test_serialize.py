import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothflip import serialize as ser
from smoothflip.arcs import MoveSequence, default_configuration
from smoothflip.csp import XOR, Binary, Unary, bfop
from smoothflip.errors import ValidationError
from smoothflip.extraction import check_certificate, extract
from smoothflip.flip import run_flip
from smoothflip.instance import (
    Configuration,
    WeightedInstance,
    complete_edges,
    graph,
    sample_weights,
    uniform_dists,
)


@settings(max_examples=100, deadline=None)
@given(st.one_of(st.fractions(), st.integers(-10 ** 9, 10 ** 9),
                 st.floats(allow_nan=False, allow_infinity=False)))
def test_number_round_trip(x):
    enc = ser.encode_number(x)
    assert ser.decode_number(json.loads(json.dumps(enc))) == x


def test_number_rejects():
    for bad in ["abc", "1/0", True, None, [1]]:
        with pytest.raises(ValidationError):
            ser.decode_number(bad)


def test_graph_round_trip_exact_and_float():
    base = WeightedInstance(4, tuple(complete_edges(4)), dists=uniform_dists(6))
    for exact in (False, True):
        inst = sample_weights(base, 3, exact=exact)
        text = ser.dump_json(ser.graph_to_dict(inst))
        assert ser.graph_from_dict(json.loads(text)) == inst


def test_graph_errors_name_the_field():
    with pytest.raises(ValidationError) as info:
        ser.graph_from_dict({"edges": []})
    assert info.value.field == "n"
    with pytest.raises(ValidationError) as info:
        ser.graph_from_dict({"n": 2, "edges": [[1, 2]], "weights": ["x"]})
    assert info.value.field == "weights[0]"
    with pytest.raises(ValidationError):
        ser.graph_from_dict({"n": 2, "edges": [[1, 2]], "dists": [{"lo": 0}]})


def test_load_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ValidationError) as info:
        ser.load_json(bad)
    assert info.value.path == str(bad)
    with pytest.raises(ValidationError):
        ser.load_json(tmp_path / "missing.json")


def test_trace_round_trip():
    inst = sample_weights(WeightedInstance(6, tuple(complete_edges(6)), dists=uniform_dists(15)), 1,
                          exact=True)
    t = run_flip(inst, Configuration.from_list([1, -1, 1, -1, 1, -1]), "best")
    back = ser.trace_from_dict(json.loads(ser.dump_json(ser.trace_to_dict(t, 6))))
    assert back == t


def test_trace_rejects_bad_moves():
    with pytest.raises(ValidationError) as info:
        ser.trace_from_dict({"initial": [1, 1], "moves": [1, 3]})
    assert info.value.field == "moves[1]"
    with pytest.raises(ValidationError):
        ser.trace_from_dict({"initial": [1, 1], "moves": [1], "gains": [0.1, 0.2]})


def test_sequence_default_start():
    seq, gamma = ser.sequence_from_dict({"moves": [1, 2, 1]}, 3)
    assert seq.moves == (1, 2, 1) and gamma.as_list(3) == [-1, -1, -1]
    _, gamma = ser.sequence_from_dict({"moves": [1], "initial": [1, -1]})
    assert gamma.as_list(2) == [1, -1]
    with pytest.raises(ValidationError):
        ser.sequence_from_dict({"moves": [1, "a"]})


def test_certificate_round_trip():
    g = graph(16, complete_edges(16))
    s = MoveSequence(tuple(1 + i % 3 for i in range(80)))
    gamma = default_configuration(s)
    cert = extract(s, gamma, g)
    back = ser.certificate_from_dict(json.loads(ser.dump_json(ser.certificate_to_dict(cert))))
    assert back == cert and check_certificate(s, gamma, back, g)
    with pytest.raises(ValidationError):
        ser.certificate_from_dict({"case": "1"})


def test_bfop_round_trip():
    inst = bfop(3, [Binary((1, 2), XOR, Fraction(2, 3)), Binary((2, 3), ((0, 1), (0, 0)), 0.25)],
                [Unary(1, (0, 1), Fraction(-1, 2))])
    data = json.loads(ser.dump_json(ser.bfop_to_json(inst)))
    assert data["binary"][0]["weight"] == "2/3"
    assert ser.bfop_from_json(data) == inst
    with pytest.raises(ValidationError):
        ser.bfop_from_json([])
    with pytest.raises(ValidationError):
        ser.bfop_from_json({"n": 2, "binary": [{"vars": [1, 2], "table": [[0, 1], [1, 0]], "weight": "w"}]})
