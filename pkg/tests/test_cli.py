import json

import pytest
import yaml
from typer.testing import CliRunner

from src.cli.app import create_app

runner = CliRunner()


@pytest.fixture
def invoke(tmp_path):
    app = create_app()
    out = tmp_path / "out"

    def run(*args):
        return runner.invoke(app, ["--output-dir", str(out), *map(str, args)])

    run.out = out
    return run


def _write(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def _report(invoke, name):
    return json.loads((invoke.out / f"{name}_report.json").read_text(encoding="utf-8"))


def test_exact_conjugate_of_generators(invoke, tmp_path):
    doc = _write(tmp_path / "f.json", {"kind": "generators",
                                       "generators": [{"point": [0], "value": 0}, {"point": [1], "value": 1}]})
    result = invoke("conjugate", doc, "--method", "exact")
    assert result.exit_code == 0
    report = _report(invoke, "conjugate")
    assert report["exit_code"] == 0
    assert report["results"]["form"] == "max_affine"
    assert report["results"]["size"] == 2
    assert (invoke.out / "conjugate.json").exists()


def test_grid_conjugate_writes_values_and_mask(invoke, tmp_path):
    doc = _write(tmp_path / "f.json", {"kind": "max_affine", "pieces": [{"slope": [1], "offset": 0},
                                                                        {"slope": [-1], "offset": 0}]})
    result = invoke("conjugate", doc, "--grid", "-1:1:5")
    assert result.exit_code == 0
    assert (invoke.out / "conjugate.csv").exists()
    assert (invoke.out / "conjugate_mask.csv").exists()
    assert _report(invoke, "conjugate")["results"]["shape"] == [5]


def test_malformed_json_is_an_input_error(invoke, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    result = invoke("conjugate", bad)
    assert result.exit_code == 2
    assert "bad.json" in _report(invoke, "conjugate")["results"]["error"]


def test_unknown_method(invoke, tmp_path):
    doc = _write(tmp_path / "f.json", {"kind": "generators", "generators": [{"point": [0], "value": 0}]})
    assert invoke("conjugate", doc, "--method", "fft").exit_code == 2


def test_fitzpatrick_of_a_finite_operator(invoke, tmp_path):
    doc = _write(tmp_path / "T.json", {"kind": "finite", "pairs": [[0, 0], [1, 1]]})
    result = invoke("fitzpatrick", doc, "--which", "both", "--grid", "-1:1:5")
    assert result.exit_code == 0
    results = _report(invoke, "fitzpatrick")["results"]
    assert results["phi_le_sigma"]["holds"]
    assert (invoke.out / "phi.json").exists() and (invoke.out / "sigma.csv").exists()


def test_fitzpatrick_rejects_empty_operator(invoke, tmp_path):
    doc = _write(tmp_path / "T.json", {"kind": "finite", "pairs": []})
    assert invoke("fitzpatrick", doc).exit_code == 2


def test_unexpected_failure_is_an_internal_error(invoke, tmp_path, monkeypatch):
    def broken(path):
        raise RuntimeError("lost a pivot")

    monkeypatch.setattr("src.cli.transforms.load_function", broken)
    doc = _write(tmp_path / "f.json", {"kind": "generators", "generators": [{"point": [0], "value": 0}]})
    result = invoke("conjugate", doc)
    assert result.exit_code == 3
    results = _report(invoke, "conjugate")["results"]
    assert results["internal"]
    assert results["error"] == "Unexpected RuntimeError"
    assert results["details"] == "lost a pivot"


def test_gate_on_a_failing_grid(invoke, tmp_path):
    values = [0.0] * 25
    doc = _write(tmp_path / "h.json", {"kind": "grid", "grid": {"axes": [{"lo": -2, "hi": 2, "m": 5}] * 2},
                                       "values": values})
    result = invoke("gate", doc)
    assert result.exit_code == 1
    report = _report(invoke, "gate")
    assert report["results"]["witness"] is not None
    assert (invoke.out / "jh.csv").exists()


def test_cw_example_needs_resolution(invoke):
    assert invoke("cw-example", "--resolution", 5).exit_code == 2


def test_verify_lemmas_rejects_unknown_suite(invoke):
    assert invoke("verify-lemmas", "--suite", "bogus").exit_code == 2


def test_verify_lemmas_reports_a_non_monotone_catalog_entry(invoke, tmp_path):
    catalog = tmp_path / "catalog.yaml"
    catalog.write_text(yaml.safe_dump({"operators": [{"name": "swap", "kind": "finite",
                                                      "pairs": [[0, 1], [1, 0]]}]}), encoding="utf-8")
    result = invoke("verify-lemmas", "--suite", "lemmas", "--catalog", catalog)
    assert result.exit_code == 1
    assert (invoke.out / "lemmas.json").exists()
    failures = _report(invoke, "verify-lemmas")["results"]["failures"]
    assert any(f["subject"] == "swap" for f in failures)


def test_bad_config_file(tmp_path):
    config = tmp_path / "settings.yaml"
    config.write_text("resolution: 1\n", encoding="utf-8")
    result = runner.invoke(create_app(), ["--config", str(config), "cw-example"])
    assert result.exit_code == 2
