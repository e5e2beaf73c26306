import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from kreinpair import cli
from kreinpair.errors import DimensionMismatch, ParseError, ValidationError
from kreinpair.io import (
    dump_spec,
    encode_matrix,
    load_spec,
    parse_matrix,
    parse_spec,
    render_json,
    to_jsonable,
)
from kreinpair.signtype import SignType

SWAP = {"J": {"signature": [1, -1]}, "T": [[0, 2], [1, 0]]}
NEUTRAL = {"J": {"flip_blocks": 1}, "T": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}
FACTORS = {"factors": {"A": [[1, 0]], "B": [[1], [0]]}}
EXAMPLE_ONE = {"family": {"kind": "ExampleOne", "params": {"mixing": 0.3}, "seed": 1, "N": 6}}
PRODUCT_FAMILY = {"family": {"kind": "ProductOfBlocks", "params": {"x0": 1.2}, "seed": 2, "N": 3}}


@pytest.fixture
def write(tmp_path):
    def _write(doc, name="spec.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)

    return _write


def run_ok(*argv):
    code, text, _ = cli.run(list(argv))
    return code, json.loads(text)


# ------------------------------------------------------------------ parsing


def test_parse_complex_pairs():
    spec = parse_spec(NEUTRAL)
    assert np.array_equal(spec.T, np.array([[0, 1], [0, 0]], dtype=complex))
    assert np.array_equal(spec.J.matrix, [[0, 1], [1, 0]])


def test_parse_signature_spec():
    spec = parse_spec(SWAP)
    assert np.array_equal(spec.J.matrix, np.diag([1.0, -1.0]))
    assert np.array_equal(spec.operator().T, [[0, 2], [1, 0]])


def test_missing_J_names_the_key():
    with pytest.raises(ValidationError) as exc:
        parse_spec({"T": [[1, 0], [0, 1]]})
    assert exc.value.key == "J"


@pytest.mark.parametrize(
    "doc",
    [
        {"J": {"signature": [1]}, "T": [[1]], "extra": 1},
        {"J": {"signature": [1]}},
        {"J": {"signature": [1]}, "T": [[1]], "factors": FACTORS["factors"]},
        {"J": {"signature": [1, 2]}, "T": [[1, 0], [0, 1]]},
        {"J": {"signature": [1]}, "T": [[1, 2]]},
        {"factors": {"A": [[1, 0]]}},
        {"family": {"kind": "Unknown"}},
        {"family": {"kind": "ExampleOne", "N": 0}},
        {"family": {"kind": "ExampleOne", "params": {"scale": {"type": "constant", "value": 1}}}},
        {"J": {"signature": [1]}, "T": [["a"]]},
        [1, 2],
    ],
)
def test_invalid_specs_rejected(doc):
    with pytest.raises((ValidationError, DimensionMismatch, ValueError)):
        parse_spec(doc)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        parse_spec({"J": {"signature": [1, -1]}, "T": [[1]]})


def test_matrix_codec_round_trip():
    M = np.array([[1 + 2j, -0.0], [3.5, -1j]])
    enc = encode_matrix(M)
    assert enc[0][1] == [0.0, 0.0] and math.copysign(1, enc[0][1][0]) == 1
    assert np.array_equal(parse_matrix(enc, "M"), M)


@pytest.mark.parametrize("doc", [SWAP, NEUTRAL, FACTORS, EXAMPLE_ONE, PRODUCT_FAMILY])
def test_normalized_round_trip(doc):
    spec = parse_spec(doc)
    again = parse_spec(json.loads(dump_spec(spec)))
    assert again.digest == spec.digest
    assert dump_spec(again) == dump_spec(spec)


def test_load_errors(tmp_path):
    with pytest.raises(ParseError):
        load_spec(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_spec(bad)


def test_to_jsonable():
    out = to_jsonable({"z": 1 + 2j, "inf": float("inf"), "neg": -0.0, "t": SignType.Critical,
                       "a": np.array([1.0, 2.0]), "i": np.int64(3)})
    assert out == {"z": [1.0, 2.0], "inf": "inf", "neg": 0.0, "t": "Critical", "a": [1.0, 2.0], "i": 3}
    assert render_json(out) == render_json(json.loads(render_json(out)))


# ------------------------------------------------------------------ commands


def test_adjoint_command(write):
    code, rep = run_ok("adjoint", write(NEUTRAL))
    assert code == 0 and rep["status"] == "clean"
    assert np.array_equal(parse_matrix(rep["results"]["adjoint"], "a"), [[0, 1], [0, 0]])
    assert set(rep) == {"command", "input_digest", "seed", "tolerances", "results", "violations", "warnings", "status"}


def test_products_command(write):
    code, rep = run_ok("products", write(SWAP))
    assert code == 0
    assert np.allclose(parse_matrix(rep["results"]["product1"], "p"), np.diag([-1, -4]))
    assert np.allclose(parse_matrix(rep["results"]["product2"], "p"), np.diag([-4, -1]))


def test_compare_spectra_command(write):
    code, rep = run_ok("compare-spectra", write(FACTORS))
    assert code == 0 and rep["results"]["matched"] is True
    for key in ("cluster", "rank", "resolvent_guard", "region_guard"):
        assert key in rep["tolerances"]


def test_factor_commands(write):
    path = write(FACTORS)
    assert run_ok("transport", path, "--lambda", "1")[0] == 0
    code, rep = run_ok("resolvent-identities", path, "--lambda", "2", "--mu", "3")
    assert code == 0
    code, rep = run_ok("resolvent-identities", path, "--samples", "4")
    assert code == 0
    code, rep = run_ok("resolvent-bound", path, "--lambda", "2", "--mu", "-1")
    assert code == 0
    code, rep = run_ok("pole-order", path)
    assert code == 0


def test_classify_swap_report(write):
    code, rep = run_ok("classify", write(SWAP))
    assert code == 0
    text = json.dumps(rep["results"])
    for word in ("PositiveType", "NegativeType"):
        assert word in text
    assert "-4.0" in text and "-1.0" in text


def test_critical_projection_definitize(write):
    fam = write(EXAMPLE_ONE, "fam.json")
    code, rep = run_ok("critical", fam)
    assert code == 0
    code, rep = run_ok("projection", write(SWAP), "--target", "product1", "--interval", "-2", "0")
    assert code == 0
    code, rep = run_ok("definitize", write({"J": {"signature": [1, -1]}, "T": [[2, 0], [0, 3]]}), "--target", "T")
    assert code == 0 and rep["results"]["degree"] <= 1


def test_family_analyze(write):
    code, rep = run_ok("family-analyze", write(EXAMPLE_ONE), "--interval", "0.05", "1.1", "--N-values", "4", "8")
    assert code == 0


def test_growth_fit_csv(write, tmp_path):
    grid = tmp_path / "g.csv"
    code, rep = run_ok("growth-fit", write(PRODUCT_FAMILY), "--x0", "1.2", "--partner",
                       "--y-count", "12", "--grid-out", str(grid))
    assert code == 0
    rows = list(csv.reader(grid.open()))
    assert rows[0] == ["y", "resolvent_norm"] and len(rows) == 13


def test_pseudospectrum_csv(write, tmp_path):
    grid = tmp_path / "p.csv"
    code, _ = run_ok("pseudospectrum", write(SWAP), "--target", "T", "--rect", "-3", "3", "-1", "1",
                     "--resolution", "7", "5", "--grid-out", str(grid))
    assert code == 0
    rows = list(csv.reader(grid.open()))
    assert rows[0] == ["re", "im", "sigma_min"] and len(rows) == 1 + 7 * 5
    # row-major: imaginary part constant along the first 7 rows
    assert len({r[1] for r in rows[1:8]}) == 1


def test_expect_oracle_violation(write, capsys):
    bad = dict(NEUTRAL, expect={"adjoint": [[0, 1], [0, 0.5]]})
    assert cli.main(["adjoint", write(bad)]) == 2
    rep = json.loads(capsys.readouterr().out)
    assert rep["status"] == "violations" and rep["violations"]
    good = dict(NEUTRAL, expect={"adjoint": [[0, 1], [0, 0]]})
    assert cli.main(["adjoint", write(good)]) == 0


def test_usage_errors(write, capsys):
    assert cli.main(["no-such-command", write(SWAP)]) == 1
    assert "error" in json.loads(capsys.readouterr().err)
    assert cli.main(["adjoint", "/nonexistent/spec.json"]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "ParseError"
    assert cli.main(["adjoint", write({"T": [[1]]})]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValidationError" and err["key"] == "J"


def test_out_file_and_seed_env(write, tmp_path, monkeypatch):
    out = tmp_path / "r.json"
    assert cli.main(["resolvent-bound", write(FACTORS), "--out", str(out)]) == 0
    first = out.read_text()
    monkeypatch.setenv("KREINPAIR_SEED", "0")
    assert cli.main(["resolvent-bound", write(FACTORS), "--out", str(out)]) == 0
    assert out.read_text() == first
    monkeypatch.setenv("KREINPAIR_SEED", "5")
    assert cli.main(["resolvent-bound", write(FACTORS), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["seed"] == 5


def test_tolerances_are_echoed(write):
    _, rep = run_ok("compare-spectra", write(FACTORS), "--tol-cluster", "1e-7", "--tol-rank", "1e-8")
    assert rep["tolerances"]["cluster"] == 1e-7
    assert rep["tolerances"]["rank"] == 1e-8


def test_console_entry_point(write):
    proc = subprocess.run([sys.executable, "-m", "kreinpair.cli", "compare-spectra", write(FACTORS)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["matched"] is True
