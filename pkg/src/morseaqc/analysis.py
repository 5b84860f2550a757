"""Pipeline orchestration and bit-stable report emission.

run_analysis drives model -> window -> census -> flow complex ->
homology -> curvature -> spectrum for one configuration and writes a
deterministic JSON report plus CSV side files (census table, trajectory
polylines, spectrum curves, critical network).  Reports are
human-diffable: keys sorted, floats in shortest round-trip form, files
written atomically via temp + rename.

Exit-code convention used by the CLI: 0 fully certified, 2 partial or
non-certifiable, 1 error.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field, asdict
from typing import Any

import numpy as np

from . import __version__ as _version
from .errors import (AnalysisStageError, DivergentDelayError, InvalidArgumentError,
                     NoIntersectionError)
from .geometry import (CurvatureReport, curvature_report, delay_factor,
                       gauss_bonnet_integral, spectrum_trace)
from .landscape import (CensusConfig, CharPolyField, CriticalCensus, LandscapeField,
                        Window, find_critical_points, polynomial_field,
                        window_from_path)
from .morse import FlowControl, InstantonTally, build_complex, count_instantons, critical_network, homology
from .operators import HamiltonianPath, build_grover_reduced, build_pspin

OUTPUT_SECTIONS = ("census", "homology", "curvature", "spectrum", "network",
                   "trajectories", "gauss_bonnet")

_ENV_PREFIX = "MORSEAQC_"

# Tolerance knobs overridable from the environment (documented in --help).
ENV_KNOBS = {
    "NEWTON_TOL": ("newton_tol", float),
    "MERGE_RADIUS": ("merge_radius", float),
    "CAPTURE_RADIUS": ("capture_radius", float),
    "FLOW_RTOL": ("flow_rtol", float),
    "SEED_DENSITY": ("seed_density", int),
    "QUAD_DENSITY": ("quadrature_density", int),
    "LAM_MARGIN": ("lam_margin", float),
    "S_MARGIN": ("s_margin", float),
}


@dataclass
class Tolerances:
    """All numeric knobs of the pipeline, strictly positive.

    newton_tol is relative to the field's gradient scale; merge_radius
    and capture_radius are relative to the window diagonal.
    """

    newton_tol: float = 1e-10
    merge_radius: float = 1e-5
    capture_radius: float = 1e-3
    flow_rtol: float = 1e-9
    quadrature_density: int = 128
    lam_margin: float = 0.5
    s_margin: float = 0.1
    seed_density: int = 64

    def validate(self):
        for name, value in asdict(self).items():
            if not value > 0 and name != "s_margin":
                raise InvalidArgumentError(f"tolerance {name} must be positive, got {value}")
        if self.s_margin < 0:
            raise InvalidArgumentError("s_margin must be nonnegative")


_MODEL_KEYS = {
    "grover": {"N"},
    "pspin": {"n", "p", "b", "k"},
    "field": {"coeffs", "window"},
}

_TOP_KEYS = {"model", "window", "tolerances", "outputs", "out_dir"}


def _require_keys(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise InvalidArgumentError(f"unknown key(s) {sorted(unknown)} in {where}; "
                                   f"allowed: {sorted(allowed)}")


@dataclass
class AnalysisConfig:
    """Validated analysis request (strict schema: unknown keys rejected)."""

    model_name: str
    model_params: dict
    window: Window | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    outputs: tuple[str, ...] = OUTPUT_SECTIONS
    out_dir: str | None = None

    @staticmethod
    def from_dict(raw: dict) -> "AnalysisConfig":
        if not isinstance(raw, dict):
            raise InvalidArgumentError("config must be a JSON object")
        _require_keys(raw, _TOP_KEYS, "config")
        model = raw.get("model")
        if not isinstance(model, dict) or "name" not in model:
            raise InvalidArgumentError("config.model must be an object with a 'name'")
        name = model["name"]
        if name not in _MODEL_KEYS:
            raise InvalidArgumentError(
                f"unknown model {name!r}; expected one of {sorted(_MODEL_KEYS)}")
        params = {k: v for k, v in model.items() if k != "name"}
        _require_keys(params, _MODEL_KEYS[name], f"config.model({name})")
        window = None
        if "window" in raw and raw["window"] is not None:
            wd = raw["window"]
            _require_keys(wd, {"s", "lambda"}, "config.window")
            (s_lo, s_hi), (l_lo, l_hi) = wd["s"], wd["lambda"]
            window = Window(float(s_lo), float(s_hi), float(l_lo), float(l_hi))
        tol = Tolerances()
        if "tolerances" in raw and raw["tolerances"] is not None:
            td = dict(raw["tolerances"])
            _require_keys(td, set(asdict(tol)), "config.tolerances")
            tol = Tolerances(**{**asdict(tol), **td})
        tol.validate()
        outputs = tuple(raw.get("outputs") or OUTPUT_SECTIONS)
        for section in outputs:
            if section not in OUTPUT_SECTIONS:
                raise InvalidArgumentError(f"unknown output section {section!r}")
        return AnalysisConfig(model_name=name, model_params=params, window=window,
                              tolerances=tol, outputs=outputs,
                              out_dir=raw.get("out_dir"))

    def apply_env(self, env=os.environ) -> "AnalysisConfig":
        """Apply MORSEAQC_* tolerance overrides from the environment."""
        tol = asdict(self.tolerances)
        for env_name, (attr, cast) in ENV_KNOBS.items():
            value = env.get(_ENV_PREFIX + env_name)
            if value is not None:
                tol[attr] = cast(value)
        t = Tolerances(**tol)
        t.validate()
        self.tolerances = t
        return self

    def echo(self) -> dict:
        return {
            "model": {"name": self.model_name, **self.model_params},
            "window": None if self.window is None else list(self.window.as_tuple()),
            "tolerances": asdict(self.tolerances),
            "outputs": list(self.outputs),
        }


def _build_field(cfg: AnalysisConfig) -> tuple[LandscapeField, HamiltonianPath | None]:
    t = cfg.tolerances
    if cfg.model_name == "grover":
        path = build_grover_reduced(int(cfg.model_params["N"]))
    elif cfg.model_name == "pspin":
        p = cfg.model_params
        path = build_pspin(int(p["n"]), int(p["p"]), float(p.get("b", 1.0)),
                           int(p.get("k", 2)))
    else:
        params = cfg.model_params
        coeffs = {}
        for key, c in params["coeffs"].items():
            i, j = (int(x) for x in str(key).split(","))
            coeffs[(i, j)] = float(c)
        if cfg.window is not None:
            window = cfg.window
        elif "window" in params:
            (s_lo, s_hi), (l_lo, l_hi) = params["window"]
            window = Window(float(s_lo), float(s_hi), float(l_lo), float(l_hi))
        else:
            raise InvalidArgumentError("explicit field model needs a window")
        return polynomial_field(coeffs, window), None
    window = cfg.window or window_from_path(path, s_margin=t.s_margin,
                                            lam_margin=t.lam_margin)
    return CharPolyField(path, window=window), path


@dataclass
class AnalysisReport:
    """In-memory result of one pipeline run."""

    data: dict
    census: CriticalCensus
    tally: InstantonTally | None
    curvature: list[CurvatureReport]

    @property
    def status(self) -> str:
        return self.data["status"]

    @property
    def flags(self) -> list[str]:
        return self.data["flags"]

    def to_json(self) -> str:
        return json.dumps(_pyify(self.data), sort_keys=True, indent=2) + "\n"


def _pyify(obj: Any):
    """Convert numpy scalars/arrays to plain Python for stable JSON."""
    if isinstance(obj, dict):
        return {str(k): _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_pyify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def run_analysis(config: AnalysisConfig) -> AnalysisReport:
    """Execute the full pipeline for one configuration.

    Deterministic given the configuration: seeding is grid-based, all
    quadratures are fixed-node, and report assembly sorts every
    collection.  Raises AnalysisStageError with stage attribution when a
    stage fails outright; recoverable conditions (non-certifiable flows,
    unconverged quadrature) are reported as flags with status "partial".
    """
    t = config.tolerances
    flags: list[str] = []

    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except AnalysisStageError:
            raise
        except Exception as exc:
            raise AnalysisStageError(name, str(exc)) from exc

    field_obj, path = stage("model", _build_field, config)
    census_cfg = CensusConfig(grid_density=t.seed_density, newton_tol=t.newton_tol,
                              merge_radius_rel=t.merge_radius)
    census = stage("census", find_critical_points, field_obj, config=census_cfg)
    if not census.converged:
        flags.append("census: density doubling did not converge")
    if not census.is_morse:
        flags.append("census: degenerate critical points present")

    tally = None
    cx_data: dict | None = None
    if census.is_morse and "homology" in config.outputs:
        ctrl = FlowControl(rtol=t.flow_rtol, capture_radius_rel=t.capture_radius)
        tally = stage("flow", count_instantons, field_obj, census, ctrl)
        if not tally.certifiable:
            flags.extend(f"flow: {note}" for note in tally.notes)
        else:
            cx = stage("complex", build_complex, census, tally.edges, tally.certifiable)
            summary = stage("homology", homology, cx)
            cx_data = {
                "generators": {str(k): v for k, v in cx.generators.items()},
                "d1": cx.d1.tolist(), "d2": cx.d2.tolist(),
                "betti": list(summary.betti),
                "euler": summary.euler,
                "euler_from_counts": summary.euler_from_counts,
                "handle_census": list(summary.handle_census),
            }

    reports: list[CurvatureReport] = []
    delay_notes: dict[str, str] = {}
    if "curvature" in config.outputs:
        delay_range = path.domain if path is not None else (
            field_obj.window.s_lo, field_obj.window.s_hi)
        for p in census.points:
            if p.degenerate:
                continue
            r = stage("curvature", curvature_report, field_obj, p)
            if r.K < 0 and r.dupin is not None:
                try:
                    r.delay = delay_factor(r, delay_range)
                except (DivergentDelayError, NoIntersectionError) as exc:
                    # a level crossing at the saddle is a definite answer
                    # (infinite delay), not a certification failure
                    delay_notes[p.id] = str(exc)
            reports.append(r)

    spectrum = None
    if path is not None and "spectrum" in config.outputs:
        s_samples = np.linspace(path.domain[0], path.domain[1], 101)
        branches = stage("spectrum", spectrum_trace, path, s_samples, field_obj)
        if any(b.flagged for b in branches):
            flags.append("spectrum: branch matching ambiguous below resolution")
        spectrum = branches

    gb = None
    if "gauss_bonnet" in config.outputs:
        gb = stage("gauss_bonnet", gauss_bonnet_integral, field_obj, None,
                   t.quadrature_density)
        if not gb.converged:
            flags.append(f"gauss_bonnet: densities disagree by {gb.rel_change:.2%}")

    status = "certified" if not flags else "partial"
    data = {
        "tool": {"name": "morseaqc", "version": _version},
        "config": config.echo(),
        "status": status,
        "flags": sorted(flags),
        "window": list(field_obj.window.as_tuple()),
        "census": {
            "points": [{
                "id": p.id, "s": p.s, "lambda": p.lam, "f": p.value,
                "k1": p.k1, "k2": p.k2, "index": p.index, "degenerate": p.degenerate,
            } for p in census.points],
            "boundary_points": [{
                "id": p.id, "s": p.s, "lambda": p.lam, "f": p.value,
            } for p in census.boundary_points],
            "counts": {"min": census.n_min, "saddle": census.n_saddle,
                       "max": census.n_max, "degenerate": census.n_degenerate},
            "euler_from_counts": census.euler_from_counts,
            "is_morse": census.is_morse,
            "converged": census.converged,
            "grid_density": census.grid_density,
        },
        "homology": cx_data,
        "curvature": [{
            "point_id": r.point_id, "K": r.K, "k1": r.k1, "k2": r.k2,
            "dupin": None if r.dupin is None else {
                "level": r.dupin.level, "k_slice": r.dupin.k_slice,
                "k_transverse": r.dupin.k_transverse, "s_center": r.dupin.s_center,
            },
            "delay": r.delay,
            "delay_note": delay_notes.get(r.point_id),
        } for r in reports],
        "spectrum": None if spectrum is None else {
            "num_branches": len(spectrum),
            "min_gaps": [b.min_gap_to_next for b in spectrum[:-1]],
            "min_gap_locations": [b.min_gap_location for b in spectrum[:-1]],
            "flagged": [b.flagged for b in spectrum],
        },
        "gauss_bonnet": None if gb is None else {
            "value": gb.value, "coarse_value": gb.coarse_value,
            "converged": gb.converged, "rel_change": gb.rel_change,
        },
        "network": critical_network(census, tally.edges if tally else [], reports),
    }
    report = AnalysisReport(data=data, census=census, tally=tally, curvature=reports)
    if config.out_dir:
        write_report_files(report, config.out_dir, spectrum=spectrum)
    return report


# ---------------------------------------------------------------------------
# File emission
# ---------------------------------------------------------------------------

def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str, header: list[str], rows: list[list]):
    lines = [",".join(header)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_report_files(report: AnalysisReport, out_dir: str, spectrum=None):
    """Write report.json and the CSV side files into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "report.json"), report.to_json())
    write_csv(os.path.join(out_dir, "census.csv"),
              ["id", "s", "lambda", "f", "k1", "k2", "index", "degenerate"],
              [[p.id, p.s, p.lam, p.value, p.k1, p.k2,
                -1 if p.index is None else p.index, p.degenerate]
               for p in report.census.points])
    network = report.data.get("network")
    if network is not None:
        _atomic_write(os.path.join(out_dir, "network.json"),
                      json.dumps(_pyify(network), sort_keys=True, indent=2) + "\n")
    if report.tally is not None:
        rows = []
        for i, traj in enumerate(report.tally.trajectories):
            for tau, (s, lam), f in zip(traj.tau, traj.points, traj.f_values):
                rows.append([f"t{i}", tau, s, lam, f])
        write_csv(os.path.join(out_dir, "trajectories.csv"),
                  ["id", "tau", "s", "lambda", "f"], rows)
    if spectrum:
        header = ["s"] + [f"lambda_{b.index}" for b in spectrum]
        svals = spectrum[0].s
        rows = [[s] + [float(b.values[i]) for b in spectrum] for i, s in enumerate(svals)]
        write_csv(os.path.join(out_dir, "spectrum.csv"), header, rows)


def write_sweep_csv(path: str, records):
    write_csv(path, ["b", "n_min", "n_saddle", "n_max", "chi", "flagged"],
              [[r.b, r.counts[0], r.counts[1], r.counts[2],
                "" if r.chi is None else r.chi, r.flagged] for r in records])


# ---------------------------------------------------------------------------
# Report comparison
# ---------------------------------------------------------------------------

def compare_reports(a: AnalysisReport | dict, b: AnalysisReport | dict) -> dict:
    """Structured diff of two reports from the same model family.

    Census points are aligned by nearest-location matching; the diff
    carries the Euler/count deltas and per-matched-point curvature
    deltas.  Raises InvalidArgumentError for different model families.
    """
    da = a.data if isinstance(a, AnalysisReport) else a
    db = b.data if isinstance(b, AnalysisReport) else b
    ma, mb = da["config"]["model"]["name"], db["config"]["model"]["name"]
    if ma != mb:
        raise InvalidArgumentError(f"cannot compare models {ma!r} and {mb!r}")
    pa = da["census"]["points"]
    pb = list(db["census"]["points"])
    matches, unmatched_a = [], []
    for p in pa:
        if not pb:
            unmatched_a.append(p["id"])
            continue
        dists = [np.hypot(p["s"] - q["s"], p["lambda"] - q["lambda"]) for q in pb]
        j = int(np.argmin(dists))
        q = pb.pop(j)
        matches.append({
            "a": p["id"], "b": q["id"], "distance": float(dists[j]),
            "delta_k1": q["k1"] - p["k1"], "delta_k2": q["k2"] - p["k2"],
            "delta_K": q["k1"] * q["k2"] - p["k1"] * p["k2"],
            "delta_f": q["f"] - p["f"],
        })
    counts_a, counts_b = da["census"]["counts"], db["census"]["counts"]
    total_a = sum(counts_a[k] for k in ("min", "saddle", "max"))
    total_b = sum(counts_b[k] for k in ("min", "saddle", "max"))
    return {
        "model": ma,
        "identical": da == db,
        "chi_a": da["census"]["euler_from_counts"],
        "chi_b": db["census"]["euler_from_counts"],
        "chi_delta": db["census"]["euler_from_counts"] - da["census"]["euler_from_counts"],
        "count_delta": {k: counts_b[k] - counts_a[k] for k in ("min", "saddle", "max")},
        "total_count_delta": total_b - total_a,
        "matched_points": matches,
        "unmatched_a": unmatched_a,
        "unmatched_b": [q["id"] for q in pb],
    }
