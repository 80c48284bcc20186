"""Declarative scenario files (YAML) and their execution.

Schema, version 1. Every key except ``version`` and ``kind`` is optional::

    version: 1
    name: klm-cnot-noisy
    kind: gate            # gate | fixture | hom-scan | sweep
    gate: klm-cnot-ppbs   # any name in klmcnot.gates.BUILDERS
    preset: exact         # exact | rounded
    params: {r_h: 0.23}   # builder keyword overrides
    detector: {kind: number_resolving, efficiency: 1.0}
    noise:
      overlap: 0.95       # signal-ancilla overlap (shorthand), or
      overlaps: {photons: [C, T, A1, A2], overlaps: [[C, A1, 0.95]], delays: []}
      perturbation: {offsets: {ppbs2.r_h: 0.005, loop_c.phi: 0.1}, jitter: 0, seed: null}
      double_pair: 0.0    # double-pair rate relative to signal events
    settings: [[ZZ, ZZ], [XX, XX], [XZ, YY]]
    trials: 0             # >0 samples counts; needs a seed
    seed: 1
    resamples: 1000       # bootstrap resamples for uncertainties
    method: permanent     # permanent | sequential
    fixture: {ZZ->ZZ: [[...4 counts...], ...], ...}          # kind: fixture
    hom: {reflectivity: 0.23, tau_c: 1.0, from: -3, to: 3, steps: 61, overlap: 1.0}
    sweep: {param: ppbs2.r_h, from: 0.18, to: 0.28, steps: 11, fidelities: false}

A written ``manifest.yaml`` is the fully resolved scenario and runs again to
the same outputs.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from . import __version__
from .analysis import (
    REPORT_FIELDS,
    STANDARD_SETTINGS,
    TruthTable,
    csv_text,
    fidelity_report,
    hom_scan,
    hom_visibility,
    ideal_truth_table,
    report_json,
    table_csv,
    truth_table,
    write_text,
)
from .gates import BUILDERS, CNOT, PRESETS, GateBundle, build
from .measure import DetectorModel, conditional_map, proportionality_check
from .noise import OverlapSpec, PerturbationSpec, perturb_circuit, set_params

SCHEMA_VERSION = 1
KINDS = ("gate", "fixture", "hom-scan", "sweep")
METHODS = ("permanent", "sequential")
TOP_KEYS = {
    "version", "name", "kind", "gate", "preset", "params", "detector", "noise",
    "settings", "trials", "seed", "resamples", "method", "fixture", "hom", "sweep",
    "manifest",
}


class ScenarioError(ValueError):
    """Schema violation; the message names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _require(cond: bool, field_name: str, message: str):
    if not cond:
        raise ScenarioError(field_name, message)


def _number(d: Mapping, key: str, where: str, default=None, lo=None, hi=None) -> float | None:
    v = d.get(key, default)
    if v is None:
        return None
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"{where}{key}", f"expected a number, got {v!r}")
    v = float(v)
    if lo is not None:
        _require(v >= lo, f"{where}{key}", f"must be >= {lo}, got {v}")
    if hi is not None:
        _require(v <= hi, f"{where}{key}", f"must be <= {hi}, got {v}")
    return v


def _int(d: Mapping, key: str, where: str, default=None, lo=None) -> int | None:
    v = d.get(key, default)
    if v is None:
        return None
    _require(isinstance(v, int) and not isinstance(v, bool), f"{where}{key}", f"expected an integer, got {v!r}")
    if lo is not None:
        _require(v >= lo, f"{where}{key}", f"must be >= {lo}, got {v}")
    return v


def _section(d: Mapping, key: str) -> dict:
    v = d.get(key) or {}
    _require(isinstance(v, Mapping), key, f"expected a mapping, got {type(v).__name__}")
    return dict(v)


def parse_setting(text: str) -> tuple[str, str]:
    """``"ZZ"`` -> (ZZ, ZZ); ``"XZ->YY"`` / ``"XZ:YY"`` -> (XZ, YY)."""
    a = b = text
    for sep in ("->", ":", ","):
        if sep in text:
            a, b = text.split(sep, 1)
            break
    a, b = a.strip().upper(), b.strip().upper()
    for part in (a, b):
        if len(part) != 2 or any(c not in "XYZ" for c in part):
            raise ScenarioError("setting", f"cannot parse {text!r}; expected e.g. ZZ or XZ->YY")
    return a, b


@dataclass(frozen=True)
class Scenario:
    kind: str
    name: str = "scenario"
    gate: str = "klm-cnot-ppbs"
    preset: str = "exact"
    params: dict = field(default_factory=dict)
    detector: dict = field(default_factory=lambda: {"kind": "number_resolving", "efficiency": 1.0})
    noise: dict = field(default_factory=dict)
    settings: tuple = STANDARD_SETTINGS
    trials: int = 0
    seed: int | None = None
    resamples: int = 1000
    method: str = "permanent"
    fixture: dict = field(default_factory=dict)
    hom: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)

    # -- loading -----------------------------------------------------------

    @classmethod
    def from_dict(cls, d: Any) -> "Scenario":
        _require(isinstance(d, Mapping), "<root>", "scenario must be a mapping")
        unknown = sorted(set(d) - TOP_KEYS)
        _require(not unknown, unknown[0] if unknown else "", f"unknown key; allowed keys are {sorted(TOP_KEYS)}")
        _require("version" in d, "version", "missing (current schema version is 1)")
        _require(d["version"] == SCHEMA_VERSION, "version", f"unsupported version {d['version']!r}; expected {SCHEMA_VERSION}")
        kind = d.get("kind")
        _require(kind in KINDS, "kind", f"expected one of {list(KINDS)}, got {kind!r}")
        name = str(d.get("name", "scenario"))

        gate = d.get("gate", "klm-cnot-ppbs")
        _require(gate in BUILDERS, "gate", f"unknown gate {gate!r}; expected one of {sorted(BUILDERS)}")
        preset = d.get("preset", "exact")
        _require(preset in PRESETS, "preset", f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
        params = _section(d, "params")
        for k, v in params.items():
            _require(isinstance(v, (int, float, str)) and not isinstance(v, bool), f"params.{k}", f"expected a scalar, got {v!r}")

        det = _section(d, "detector")
        det_kind = det.get("kind", "number_resolving")
        _require(det_kind in ("number_resolving", "threshold"), "detector.kind", f"expected number_resolving or threshold, got {det_kind!r}")
        det = {"kind": det_kind, "efficiency": _number(det, "efficiency", "detector.", 1.0, 0.0, 1.0)}

        noise = _parse_noise(_section(d, "noise"))

        settings = d.get("settings", [list(s) for s in STANDARD_SETTINGS])
        _require(isinstance(settings, list) and settings, "settings", "expected a non-empty list of [input, output] basis pairs")
        parsed = []
        for i, s in enumerate(settings):
            pair = parse_setting(s) if isinstance(s, str) else tuple(s) if isinstance(s, list) else None
            ok = pair is not None and len(pair) == 2 and all(
                isinstance(b, str) and len(b) == 2 and set(b) <= set("ZXY") for b in pair
            )
            _require(ok, f"settings[{i}]", f"expected a pair like [XZ, YY], got {s!r}")
            parsed.append(tuple(pair))

        trials = _int(d, "trials", "", 0, 0)
        seed = _int(d, "seed", "", None, 0)
        _require(trials == 0 or seed is not None, "seed", "required when trials > 0")
        resamples = _int(d, "resamples", "", 1000, 0)
        method = d.get("method", "permanent")
        _require(method in METHODS, "method", f"expected one of {list(METHODS)}, got {method!r}")

        fixture = _section(d, "fixture")
        if kind == "fixture":
            _require(fixture, "fixture", "kind 'fixture' needs count tables")
            for key, rows in fixture.items():
                arr = np.asarray(rows, dtype=float) if isinstance(rows, list) else None
                _require(arr is not None and arr.shape == (4, 4), f"fixture.{key}", "expected a 4x4 list of counts")
                _require(bool(np.all(arr >= 0)) and bool(np.all(arr.sum(axis=1) > 0)), f"fixture.{key}", "counts must be non-negative with non-empty rows")
                a, b = parse_setting(key)
                _require(len(a) == 2 and len(b) == 2 and set(a + b) <= set("ZXY"), f"fixture.{key}", "key must look like 'ZZ->ZZ'")
            fixture = {f"{a}->{b}": [[int(x) if float(x).is_integer() else float(x) for x in r] for r in rows]
                       for key, rows in fixture.items() for a, b in [parse_setting(key)]}

        hom = _section(d, "hom")
        if kind == "hom-scan":
            hom = {
                "reflectivity": _number(hom, "reflectivity", "hom.", 0.23, 0.0, 1.0),
                "tau_c": _number(hom, "tau_c", "hom.", 1.0),
                "from": _number(hom, "from", "hom.", -3.0),
                "to": _number(hom, "to", "hom.", 3.0),
                "steps": _int(hom, "steps", "hom.", 61, 2),
                "overlap": _number(hom, "overlap", "hom.", 1.0, 0.0, 1.0),
            }
            _require(0.0 < hom["reflectivity"] < 1.0, "hom.reflectivity", "must lie strictly between 0 and 1")
            _require(hom["tau_c"] > 0, "hom.tau_c", "must be positive")

        sweep = _section(d, "sweep")
        if kind == "sweep":
            _require(isinstance(sweep.get("param"), str), "sweep.param", "expected a parameter name like 'ppbs2.r_h' or 'overlap'")
            sweep = {
                "param": sweep["param"],
                "from": _number(sweep, "from", "sweep.", 0.0),
                "to": _number(sweep, "to", "sweep.", 1.0),
                "steps": _int(sweep, "steps", "sweep.", 11, 1),
                "fidelities": bool(sweep.get("fidelities", False)),
            }

        return cls(kind, name, gate, preset, params, det, noise, tuple(parsed), trials, seed,
                   resamples, method, fixture, hom, sweep)

    def to_dict(self) -> dict:
        d = {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "kind": self.kind,
            "gate": self.gate,
            "preset": self.preset,
            "params": dict(self.params),
            "detector": dict(self.detector),
            "noise": dict(self.noise),
            "settings": [list(s) for s in self.settings],
            "trials": self.trials,
            "seed": self.seed,
            "resamples": self.resamples,
            "method": self.method,
        }
        for key in ("fixture", "hom", "sweep"):
            if getattr(self, key):
                d[key] = dict(getattr(self, key))
        return d

    # -- building ----------------------------------------------------------

    def bundle(self) -> GateBundle:
        kwargs = dict(self.params)
        if self.gate != "ns-original":
            kwargs.setdefault("preset", self.preset)
        if self.gate == "klm-cnot-ppbs":
            kwargs["detector"] = DetectorModel(**self.detector)
        try:
            b = build(self.gate, **kwargs)
        except TypeError as exc:
            raise ScenarioError("params", f"not accepted by gate {self.gate!r}: {exc}") from None
        pert = self.noise.get("perturbation")
        if pert:
            b = dataclasses.replace(b, circuit=perturb_circuit(b.circuit, PerturbationSpec.from_dict(pert)))
        return b

    def overlaps(self) -> OverlapSpec | None:
        o = self.noise.get("overlaps")
        return OverlapSpec.from_dict(o) if o else None


def _parse_noise(noise: dict) -> dict:
    out: dict = {}
    unknown = sorted(set(noise) - {"overlap", "overlaps", "perturbation", "double_pair"})
    _require(not unknown, f"noise.{unknown[0]}" if unknown else "", "unknown key")
    if "overlap" in noise and "overlaps" in noise:
        raise ScenarioError("noise.overlap", "give either 'overlap' or 'overlaps', not both")
    if "overlap" in noise:
        o = _number(noise, "overlap", "noise.", None, 0.0, 1.0)
        out["overlaps"] = OverlapSpec.two_source(o).to_dict()
    elif noise.get("overlaps"):
        try:
            spec = OverlapSpec.from_dict(noise["overlaps"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError("noise.overlaps", str(exc)) from None
        out["overlaps"] = spec.to_dict()
    if noise.get("perturbation"):
        p = noise["perturbation"]
        _require(isinstance(p, Mapping), "noise.perturbation", "expected a mapping")
        try:
            spec = PerturbationSpec.from_dict(p)
        except (TypeError, ValueError) as exc:
            raise ScenarioError("noise.perturbation", str(exc)) from None
        out["perturbation"] = spec.to_dict()
    dp = _number(noise, "double_pair", "noise.", 0.0, 0.0)
    if dp:
        out["double_pair"] = dp
    return out


# --------------------------------------------------------------------------
# loading


def bundled_names() -> list[str]:
    root = resources.files("klmcnot") / "scenarios"
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_scenario(ref: str | Path) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    elif str(ref) in bundled_names():
        text = (resources.files("klmcnot") / "scenarios" / f"{ref}.yaml").read_text(encoding="utf-8")
    else:
        raise ScenarioError("scenario", f"no file {str(ref)!r} and no bundled scenario of that name; bundled: {bundled_names()}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("<file>", f"not valid YAML: {exc}") from None
    return Scenario.from_dict(data)


# --------------------------------------------------------------------------
# execution


def _setting_file(a: str, b: str) -> str:
    return f"truth_{a}-{b}.csv"


def run_scenario(sc: Scenario, out_dir: Path | str, jobs: int = 1) -> list[str]:
    """Execute ``sc`` and write its artifacts; returns the file names written."""
    files: dict[str, str] = {}
    if sc.kind in ("gate", "fixture"):
        files.update(_run_tables(sc))
    elif sc.kind == "hom-scan":
        files["hom_scan.csv"] = _run_hom(sc)
    elif sc.kind == "sweep":
        files["sweep.csv"] = _run_sweep(sc, jobs)
    manifest = sc.to_dict()
    manifest["manifest"] = {"package_version": __version__, "outputs": sorted(files)}
    files["manifest.yaml"] = yaml.safe_dump(manifest, sort_keys=False, default_flow_style=None)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        write_text(out / name, text)
    return sorted(files)


def _run_tables(sc: Scenario) -> dict[str, str]:
    files = {}
    tables: dict[tuple[str, str], TruthTable] = {}
    if sc.kind == "fixture":
        encoding = sc.bundle().encoding
        if encoding is None:
            raise ScenarioError("gate", f"gate {sc.gate!r} is not a two-qubit gate")
        for key, rows in sc.fixture.items():
            a, b = parse_setting(key)
            tables[(a, b)] = TruthTable.from_counts(a, b, rows)
    else:
        bundle = sc.bundle()
        encoding = bundle.encoding
        if encoding is None:
            raise ScenarioError("gate", f"gate {sc.gate!r} is not a two-qubit gate; use ns-check")
        detector = DetectorModel(**sc.detector)
        for k, (a, b) in enumerate(sc.settings):
            tables[(a, b)] = truth_table(
                bundle, a, b,
                overlaps=sc.overlaps(),
                double_pair=sc.noise.get("double_pair", 0.0),
                detector=detector,
                trials=sc.trials,
                seed=None if sc.seed is None else [sc.seed, k],
                method=sc.method,
            )
    for (a, b), t in tables.items():
        files[_setting_file(a, b)] = table_csv(t)
    if all(s in tables for s in STANDARD_SETTINGS):
        ts = [tables[s] for s in STANDARD_SETTINGS]
        ideals = [ideal_truth_table(a, b, encoding) for a, b in STANDARD_SETTINGS]
        seed = 0 if sc.seed is None else sc.seed
        files["report.json"] = report_json(fidelity_report(ts, ideals, sc.resamples, seed))
    return files


def _run_hom(sc: Scenario) -> str:
    h = sc.hom
    taus = np.linspace(h["from"], h["to"], h["steps"])
    R = h["reflectivity"]
    v_th = hom_visibility(R)
    rows = []
    for tau, o, sim, ana in hom_scan(R, taus, h["tau_c"], sc.method, h["overlap"]):
        rows.append((R, tau, o, sim, ana, v_th))
    header = ["reflectivity", "tau", "overlap", "coincidence_simulated", "coincidence_analytic", "visibility_analytic"]
    return csv_text(header, rows)


def sweep_values(sc: Scenario) -> np.ndarray:
    s = sc.sweep
    return np.linspace(s["from"], s["to"], s["steps"])


def sweep_point(sc: Scenario, value: float) -> list[tuple[str, float]]:
    """Metrics at one sweep value (runs in a worker process)."""
    param = sc.sweep["param"]
    if param == "overlap":
        noise = dict(sc.noise, overlaps=OverlapSpec.two_source(value).to_dict())
        sc = dataclasses.replace(sc, noise=noise)
        bundle = sc.bundle()
    else:
        bundle = sc.bundle()
        bundle = dataclasses.replace(bundle, circuit=set_params(bundle.circuit, {param: value}))
    metrics: list[tuple[str, float]] = []
    if bundle.encoding is None:
        from .gates import ns_heralded_amplitudes

        amps = ns_heralded_amplitudes(bundle).real
        metrics += [(f"amplitude_{k}", a) for k, a in enumerate(amps)]
        metrics.append(("balance_residual", float(np.max(np.abs(np.abs(amps) - abs(amps[0]))))))
        return metrics
    if param != "overlap":
        cmap = conditional_map(bundle.circuit, bundle.herald, bundle.encoding, sc.method)
        alpha, dev = proportionality_check(cmap, CNOT)
        metrics += [
            ("deviation", dev),
            ("relative_deviation", dev / abs(alpha) if abs(alpha) > 0 else float("inf")),
            ("success_mean", float(np.mean(cmap.success))),
            ("leakage_max", float(np.max(cmap.leakage))),
        ]
    if sc.sweep.get("fidelities") or param == "overlap":
        tables = [
            truth_table(bundle, a, b, overlaps=sc.overlaps(), method=sc.method)
            for a, b in STANDARD_SETTINGS
        ]
        ideals = [ideal_truth_table(a, b, bundle.encoding) for a, b in STANDARD_SETTINGS]
        rep = fidelity_report(tables, ideals, resamples=0)
        metrics += [(k, getattr(rep, k)) for k in REPORT_FIELDS[:5]]
    return metrics


def _sweep_job(args):
    sc_dict, value = args
    return sweep_point(Scenario.from_dict(sc_dict), value)


def _run_sweep(sc: Scenario, jobs: int) -> str:
    values = sweep_values(sc)
    tasks = [(sc.to_dict(), float(v)) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_job, tasks))  # map keeps input order
    else:
        results = [_sweep_job(t) for t in tasks]
    rows = []
    for v, metrics in zip(values, results):
        for name, m in metrics:
            rows.append((sc.sweep["param"], float(v), name, m))
    return csv_text(["parameter", "parameter_value", "metric", "value"], rows)
