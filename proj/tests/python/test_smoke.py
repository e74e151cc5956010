from fractions import Fraction

import pytest

octerm = pytest.importorskip("octerm")


def test_builtin_models():
    assert set(octerm.builtin_names()) == {"fig2", "fig2-no-st", "biased-walk", "idle-loop"}
    fig2 = octerm.builtin("fig2")
    assert fig2.num_states == 5
    assert fig2.num_rules == 8
    assert fig2.state_names == ["s", "r", "t", "g", "b"]
    assert octerm.Model.parse(fig2.to_text()) == fig2


def test_check_reports_diagnostics():
    assert octerm.check(octerm.builtin("fig2").to_text())["ok"] is True
    bad = "state q rand\nrule q +1 q 2/3\nrule q -1 q 1/2\n"
    doc = octerm.check(bad)
    assert doc["ok"] is False
    assert len(doc["diagnostics"]) == 1


def test_parse_errors_raise():
    with pytest.raises(octerm.OctermError):
        octerm.Model.parse("state q nobody\n")


def test_qualitative_fig2():
    doc = octerm.qualitative(octerm.builtin("fig2"))
    assert doc["schema"] == "octerm/qualitative/1"
    assert doc["nu"] == {"s": "1/2", "r": "1/2", "t": "1/2", "g": "1/1", "b": "0/1"}
    assert doc["T"] == ["g"]


def test_approx_fig2_value():
    doc = octerm.approx(octerm.builtin("fig2"), "s", 1, Fraction(1, 100))
    assert abs(octerm.fraction(doc["value"]) - Fraction(3, 4)) <= Fraction(1, 100)
    assert doc["sigma_bar"]["owner"] == "max"


def test_bound_biased_walk():
    doc = octerm.bound(octerm.builtin("biased-walk"), "1/100")
    assert 188 <= doc["N"] <= 190
    assert doc["certificate"]["x_bar"] == "1/3"


def test_oracle_brackets():
    doc = octerm.oracle(octerm.builtin("fig2"), "s", 1, horizon=2)
    assert doc["lower"] == "1/3"
    assert Fraction(doc["lower"]) <= Fraction(doc["upper"])


def test_simulation_is_deterministic():
    fig2 = octerm.builtin("fig2")
    a = octerm.simulate(fig2, "s", 1, "1/100", horizon=500, runs=500, seed=3)
    b = octerm.simulate(fig2, "s", 1, "1/100", horizon=500, runs=500, seed=3)
    assert a == b
    assert a["runs"] == 500


def test_invalid_arguments():
    fig2 = octerm.builtin("fig2")
    with pytest.raises(octerm.InvalidArgument):
        octerm.approx(fig2, "nowhere", 1, "1/10")
    with pytest.raises(octerm.InvalidArgument):
        octerm.approx(fig2, "s", 1, "3/2")


def test_documents_match_schemas():
    jsonschema = pytest.importorskip("jsonschema")
    import json
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[2] / "docs" / "schemas"
    fig2 = octerm.builtin("fig2")
    docs = [
        octerm.check(fig2.to_text()),
        octerm.check("state q rand\nrule q +1 q 2/3\n"),
        octerm.qualitative(fig2),
        octerm.bound(fig2, "1/100"),
        octerm.approx(fig2, "s", 1, "1/100"),
        octerm.oracle(fig2, "s", 1, horizon=10),
        octerm.simulate(fig2, "s", 1, "1/100", horizon=100, runs=50, seed=1),
    ]
    for doc in docs:
        kind = doc["schema"].split("/")[1]
        schema = json.loads((root / f"{kind}.schema.json").read_text())
        jsonschema.validate(doc, schema)
