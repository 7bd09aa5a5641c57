import csv
import json
from pathlib import Path

import jsonschema
import pytest

from ramcf.errors import ScenarioError
from ramcf.report import Scenario, compare, run

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def load_schema(name):
    with open(SCHEMA_DIR / name) as fh:
        return json.load(fh)


def test_scenario_roundtrip():
    data = {"mode": "constant", "a": "1", "max_n": 500, "precision_bits": 128}
    scenario = Scenario.from_dict(data)
    assert scenario.to_dict() == data
    assert scenario.precision_bits == 128
    assert scenario.max_n == 500
    assert scenario.threshold == "1e-6"  # default not injected into the echo
    assert scenario.to_dict() == data


def test_scenario_validation_errors():
    with pytest.raises(ScenarioError):
        Scenario.from_dict({"mode": "nope"})
    with pytest.raises(ScenarioError):
        Scenario.from_dict({"mode": "constant"})
    with pytest.raises(ScenarioError):
        Scenario.from_dict({"mode": "gill", "a": "1"})
    with pytest.raises(ScenarioError):
        Scenario.from_dict({"mode": "explicit"})
    with pytest.raises(ScenarioError):
        Scenario.from_dict({"mode": "rational", "p": 1})
    with pytest.raises(ScenarioError):
        Scenario.from_dict([1, 2])


def test_scenarios_validate_against_schema():
    schema = load_schema("scenario.schema.json")
    jsonschema.validate({"mode": "constant", "a": "1"}, schema)
    jsonschema.validate(
        {"mode": "rational", "p": 1, "q": 3, "R": "auto", "t_rule": "harmonic"},
        schema,
    )
    jsonschema.validate(
        {
            "mode": "irrational",
            "rho": {"form": "quadratic", "p": 3, "q": 2, "d": 5, "sign": -1},
            "stages": 3,
        },
        schema,
    )
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"mode": "rational"}, schema)


def test_run_constant_artifact(tmp_path):
    scenario = Scenario.from_dict({"mode": "constant", "a": "1", "max_n": 600, "windows": 3})
    artifact = run(scenario, tmp_path)
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "trace.csv").exists()
    assert (tmp_path / "meta.json").exists()
    assert artifact["report"]["verdict"] == "diverged-periodic"
    assert artifact["report"]["period"] == 3
    assert len(artifact["coefficients_prefix"]) == 100
    jsonschema.validate(artifact, load_schema("report.schema.json"))
    with open(tmp_path / "trace.csv") as fh:
        header = fh.readline().strip()
    assert header == "n,tau_real,cayley_angle"
    # timestamps live only in meta.json
    assert "timestamp" not in json.dumps(artifact)
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert "timestamp_utc" in meta and "wall_clock_seconds" in meta


def test_run_is_byte_deterministic(tmp_path):
    data = {"mode": "constant", "a": "0.2", "max_n": 600, "windows": 3, "seed": 5}
    run(Scenario.from_dict(data), tmp_path / "one")
    run(Scenario.from_dict(data), tmp_path / "two")
    blob1 = (tmp_path / "one" / "report.json").read_bytes()
    blob2 = (tmp_path / "two" / "report.json").read_bytes()
    assert blob1 == blob2
    csv1 = (tmp_path / "one" / "trace.csv").read_bytes()
    csv2 = (tmp_path / "two" / "trace.csv").read_bytes()
    assert csv1 == csv2


def test_run_rational_certificate_validates(tmp_path):
    scenario = Scenario.from_dict(
        {"mode": "rational", "p": 1, "q": 3, "max_n": 600, "windows": 3}
    )
    artifact = run(scenario, tmp_path)
    cert = artifact["certificate"]
    assert cert["kind"] == "rational"
    jsonschema.validate(cert, load_schema("certificate.schema.json"))
    jsonschema.validate(artifact, load_schema("report.schema.json"))


def test_run_irrational_certificate_validates(tmp_path):
    scenario = Scenario.from_dict(
        {
            "mode": "irrational",
            "rho": {"form": "quadratic", "p": 3, "q": 2, "d": 5, "sign": -1},
            "stages": 1,
            "max_n": 4000,
        }
    )
    artifact = run(scenario, tmp_path)
    cert = artifact["certificate"]
    assert cert["kind"] == "irrational"
    assert cert["cauchy"]["passed"]
    jsonschema.validate(cert, load_schema("certificate.schema.json"))
    jsonschema.validate(artifact, load_schema("report.schema.json"))


def test_run_explicit_from_file(tmp_path):
    values = tmp_path / "values.txt"
    values.write_text("\n".join(["0.2"] * 700))
    scenario = Scenario.from_dict(
        {"mode": "explicit", "values_file": str(values), "max_n": 600, "windows": 3}
    )
    artifact = run(scenario, tmp_path / "out")
    assert artifact["report"]["verdict"] == "converged"


def test_compare_rows(tmp_path):
    a1 = run(
        Scenario.from_dict({"mode": "constant", "a": "1", "max_n": 600, "windows": 3}),
        tmp_path / "one",
    )
    rows = compare([a1, a1], tmp_path / "cmp")
    assert len(rows) == 2
    # identical artifacts give identical rows apart from the name
    r1, r2 = [dict(r) for r in rows]
    r1.pop("name"), r2.pop("name")
    assert r1 == r2
    assert (tmp_path / "cmp" / "comparison.csv").exists()
    with open(tmp_path / "cmp" / "comparison.csv") as fh:
        rows_csv = list(csv.DictReader(fh))
    assert len(rows_csv) == 2
    assert rows_csv[0]["verdict"] == "diverged-periodic"


def test_compare_requires_two():
    with pytest.raises(ScenarioError):
        compare([{"scenario": {"mode": "constant"}}])
