"""Scenario orchestration and machine-readable artifacts.

A scenario is a JSON object selecting a coefficient source (constant,
gill, explicit, rational or irrational construction) plus evaluation
settings.  Running one produces three files in the output directory:

    trace.csv    columns n, tau_real ('inf' sentinel), cayley_angle
    report.json  scenario echo, coefficient prefix, convergence report,
                 certificates, partial-sum profile, environment
    meta.json    timestamp, wall clock, host (segregated so report.json
                 is byte-identical across reruns of the same scenario)

All floats are serialized as full-precision decimal strings.
"""

from __future__ import annotations

import datetime
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .engine import (
    ConstantSource,
    ExplicitSource,
    GillPerturbedSource,
    evaluate_trace,
    gill_check,
    trace_by_composition,
    write_trace_csv,
)
from .errors import ScenarioError
from .irrational import IrrationalParams, build_nested, verify_cauchy
from .precision import DEFAULT_PRECISION_BITS, scalar_str, working_precision
from .rational import build_params, build_sequence, certify

SCHEMA_TAG = "ramcf-report-v1"
MODES = ("constant", "gill", "explicit", "rational", "irrational")


@dataclass(frozen=True)
class Scenario:
    """Thin validated wrapper around the scenario dict; the raw dict is
    echoed into artifacts so round-trips are lossless."""

    data: dict

    @property
    def mode(self) -> str:
        return self.data["mode"]

    @property
    def precision_bits(self) -> int:
        return int(self.data.get("precision_bits", DEFAULT_PRECISION_BITS))

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def max_n(self) -> int:
        return int(self.data.get("max_n", 30000))

    @property
    def threshold(self) -> str:
        return str(self.data.get("threshold", "1e-6"))

    @property
    def windows(self) -> int:
        return int(self.data.get("windows", 5))

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        mode = data.get("mode")
        if mode not in MODES:
            raise ScenarioError(f"mode must be one of {MODES}, got {mode!r}")
        required = {
            "constant": ("a",),
            "gill": ("a", "rule"),
            "explicit": (),
            "rational": ("p", "q"),
            "irrational": ("rho",),
        }[mode]
        for key in required:
            if key not in data:
                raise ScenarioError(f"{mode} scenario requires field {key!r}")
        if mode == "explicit" and "values" not in data and "values_file" not in data:
            raise ScenarioError("explicit scenario requires 'values' or 'values_file'")
        return cls(data)

    @classmethod
    def from_file(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dict(self.data)


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _explicit_values(scenario: Scenario):
    if "values" in scenario.data:
        return scenario.data["values"]
    lines = Path(scenario.data["values_file"]).read_text().split()
    return [line for line in lines if line]


def _build_source(scenario: Scenario):
    """Returns (source, construction_object_or_None)."""
    mode = scenario.mode
    data = scenario.data
    if mode == "constant":
        return ConstantSource(str(data["a"])), None
    if mode == "gill":
        return GillPerturbedSource(str(data["a"]), str(data["rule"])), None
    if mode == "explicit":
        return ExplicitSource(_explicit_values(scenario)), None
    if mode == "rational":
        params = build_params(
            int(data["p"]),
            int(data["q"]),
            t_rule="harmonic" if data.get("t_rule", "harmonic") == "harmonic" else "custom",
            r_values=data.get("r_values") if data.get("t_rule") == "custom" else None,
            repeller=data.get("R", "auto"),
            margin=str(data.get("margin", "0.05")),
            seed=scenario.seed,
            strength_target=str(data.get("strength_target", "12")),
        )
        return build_sequence(params), params
    if mode == "irrational":
        params = IrrationalParams(
            rho=data["rho"],
            stages=int(data.get("stages", 3)),
            r_max=data.get("r_max", "auto"),
            n_cap=int(data.get("N_cap", 10**6)),
            seed=scenario.seed,
            margin=str(data.get("margin", "0.02")),
            t_init=str(data.get("t_init", "1e-2")),
        )
        return None, params  # source exists only after build_nested
    raise ScenarioError(f"unhandled mode {mode!r}")


def _gill_section(src, limit, max_n: int) -> dict:
    sums, summable = gill_check(src, limit, max_n)
    marks = sorted({1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, len(sums)})
    profile = [
        {"n": m, "sum": scalar_str(sums[m - 1])} for m in marks if m <= len(sums)
    ]
    return {
        "partial_sums": profile,
        "final_sum": scalar_str(sums[-1]),
        "summable_heuristic": bool(summable),
    }


def run(scenario: Scenario, out_dir) -> dict:
    """Build, evaluate and certify one scenario; write trace.csv,
    report.json and meta.json under out_dir; return the report dict."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()

    with working_precision(scenario.precision_bits):
        src, construction = _build_source(scenario)
        certificate = None
        report = None
        gill = None
        trace = None
        eval_n = scenario.max_n

        if scenario.mode == "rational":
            trace = trace_by_composition(src, eval_n)
            report = evaluate_trace(trace, scenario.threshold, scenario.windows)
            num_stages = int(
                scenario.data.get("num_stages", max(10, eval_n // construction.q))
            )
            cert = certify(construction, num_stages)
            certificate = {
                "kind": "rational",
                "params": construction.describe(),
                **cert.to_dict(),
            }
            gill = _gill_section(src, construction.a, min(eval_n, 10000))
        elif scenario.mode == "irrational":
            nested = build_nested(construction)
            src = nested.source()
            cauchy = verify_cauchy(nested, strict=False)
            certificate = {
                "kind": "irrational",
                "params": construction.describe(),
                "construction": nested.describe(),
                "cauchy": cauchy.to_dict(),
            }
            eval_n = min(eval_n, nested.boundaries[-1])
            trace = trace_by_composition(src, eval_n)
            windows = max(3, min(scenario.windows, eval_n // 100))
            if eval_n >= 100 * windows:
                report = evaluate_trace(trace, scenario.threshold, windows)
        else:
            trace = trace_by_composition(src, eval_n)
            report = evaluate_trace(trace, scenario.threshold, scenario.windows)
            if scenario.mode in ("constant", "gill"):
                gill = _gill_section(src, src.limit(), min(eval_n, 10000))

        prefix_n = min(100, eval_n)
        coefficients = [scalar_str(src.coefficient(i)) for i in range(1, prefix_n + 1)]
        write_trace_csv(trace, out_dir / "trace.csv")

        artifact = {
            "schema": SCHEMA_TAG,
            "scenario": scenario.to_dict(),
            "coefficients_prefix": coefficients,
            "report": None if report is None else report.to_dict(),
            "certificate": certificate,
            "gill": gill,
            "environment": {
                "precision_bits": scenario.precision_bits,
                "seed": scenario.seed,
                "package_version": __version__,
            },
        }

    dump_json(artifact, out_dir / "report.json")
    dump_json(
        {
            "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "wall_clock_seconds": round(time.time() - started, 3),
            "platform": sys.platform,
            "python": sys.version.split()[0],
        },
        out_dir / "meta.json",
    )
    return artifact


def _row_from_artifact(name: str, artifact: dict) -> dict:
    report = artifact.get("report") or {}
    cert = artifact.get("certificate") or {}
    gill = artifact.get("gill") or {}
    passed = None
    mu_sum = None
    if cert.get("kind") == "rational":
        passed = cert.get("passed")
        mu_sum = cert.get("neg_log_mu_sum")
    elif cert.get("kind") == "irrational":
        passed = cert.get("cauchy", {}).get("passed")
    return {
        "name": name,
        "mode": artifact["scenario"]["mode"],
        "verdict": report.get("verdict"),
        "period": report.get("period"),
        "limit_estimate": report.get("limit_estimate"),
        "gill_final_sum": gill.get("final_sum"),
        "gill_summable": gill.get("summable_heuristic"),
        "neg_log_mu_sum": mu_sum,
        "certificate_passed": passed,
    }


COMPARE_COLUMNS = (
    "name",
    "mode",
    "verdict",
    "period",
    "limit_estimate",
    "gill_final_sum",
    "gill_summable",
    "neg_log_mu_sum",
    "certificate_passed",
)


def compare(artifacts, out_dir=None):
    """Side-by-side table of >= 2 run artifacts (dicts or paths to
    report.json files); optionally writes comparison.csv/.json."""
    if len(artifacts) < 2:
        raise ScenarioError("compare needs at least two artifacts")
    rows = []
    for item in artifacts:
        if isinstance(item, (str, Path)):
            with open(item) as fh:
                artifact = json.load(fh)
            name = str(item)
        else:
            artifact = item
            name = f"artifact-{len(rows) + 1}"
        rows.append(_row_from_artifact(name, artifact))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        dump_json({"schema": "ramcf-comparison-v1", "rows": rows},
                  out_dir / "comparison.json")
        import csv as _csv

        with open(out_dir / "comparison.csv", "w", newline="") as fh:
            writer = _csv.DictWriter(fh, fieldnames=COMPARE_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    return rows
