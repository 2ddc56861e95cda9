"""End-to-end run: parse a config, find critical orbits, certify, exhibit.

The report never overstates: a certified bifurcation whose numerical
refinement failed is reported exactly as that, and orbits failing the
hypotheses carry the failing hypothesis in their verdict string.  Verdicts
are a stable enum (plus the failure text after "hypotheses fail:"):

    "theorem applies; orbit exhibited"
    "certified; numerical refinement failed"
    "hypotheses fail: <which>"
    "classical Liapunov case (full-rank Hessian)"
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10 and older
    import tomli as tomllib

from lyapcenter.conley import (
    HypothesisError,
    NonResonanceError,
    certify_bifurcation,
)
from lyapcenter.critical_orbits import (
    CriticalOrbitRecord,
    SearchConfig,
    find_critical_orbits,
)
from lyapcenter.potentials import DomainError, ParseError, parse_potential, print_potential
from lyapcenter.shooting import amplitude_sweep, export_csv
from lyapcenter.symmetry import BlockRotation

__all__ = [
    "ConfigError",
    "NumericFailure",
    "ConleySettings",
    "FinderSettings",
    "OutputSettings",
    "RunConfig",
    "RunReport",
    "run",
]

VERDICT_EXHIBITED = "theorem applies; orbit exhibited"
VERDICT_REFINEMENT_FAILED = "certified; numerical refinement failed"
VERDICT_CLASSICAL = "classical Liapunov case (full-rank Hessian)"


class ConfigError(ValueError):
    """Anything wrong with the configuration or its referenced inputs."""


class NumericFailure(RuntimeError):
    """An internal numeric step failed in a way the report cannot absorb."""


@dataclass(frozen=True)
class ConleySettings:
    epsilon: float = 1e-3
    tol_res: float = 1e-6
    j0: int = 1


@dataclass(frozen=True)
class FinderSettings:
    amplitudes: tuple = (0.1, 0.03, 0.01)
    steps: int = 2048
    tol_orbit: float = 1e-10
    method: str = "verlet"
    max_iter: int = 40


@dataclass(frozen=True)
class OutputSettings:
    report_path: Optional[str] = None
    orbit_csv_dir: Optional[str] = None


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; see from_toml for the file layout."""

    potential_source: str
    action: BlockRotation
    search: SearchConfig
    conley: ConleySettings
    finder: FinderSettings
    outputs: OutputSettings

    @staticmethod
    def from_dict(raw: dict, base_dir: Optional[Path] = None) -> "RunConfig":
        base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
        known = {"potential", "action", "search", "conley", "finder", "outputs"}
        for key in raw:
            _require(key in known, f"unknown config section [{key}]")

        pot = raw.get("potential")
        _require(isinstance(pot, dict) and "source" in pot,
                 "missing [potential] section with a 'source' entry")
        source = pot["source"]
        _require(isinstance(source, str) and source.strip(),
                 "[potential] source must be a non-empty string")

        act = raw.get("action")
        _require(isinstance(act, dict), "missing [action] section")
        _require("n" in act and "blocks" in act,
                 "[action] needs 'n' and 'blocks' (1-based coordinate pairs)")
        n = act["n"]
        _require(isinstance(n, int) and n >= 1, "[action] n must be a positive integer")
        blocks = []
        for pair in act["blocks"]:
            _require(isinstance(pair, (list, tuple)) and len(pair) == 2,
                     f"[action] block {pair!r} is not a pair")
            i, j = pair
            _require(all(isinstance(k, int) and 1 <= k <= n for k in (i, j)),
                     f"[action] block {pair!r} out of range 1..{n}")
            blocks.append((i - 1, j - 1))
        try:
            action = BlockRotation(n=n, blocks=tuple(blocks))
        except ValueError as exc:
            raise ConfigError(f"[action] invalid blocks: {exc}") from exc

        sea = raw.get("search", {})
        seeds = []
        for seed in sea.get("seeds", []):
            _require(isinstance(seed, (list, tuple)) and len(seed) == n,
                     f"[search] seed {seed!r} must have {n} coordinates")
            seeds.append(tuple(float(c) for c in seed))
        newton_max_iter = sea.get("newton_max_iter", 50)
        tol_grad = sea.get("tol_grad", 1e-10)
        bounds = sea.get("bounds")
        _require(isinstance(newton_max_iter, int) and newton_max_iter >= 1,
                 "[search] newton_max_iter must be a positive integer")
        _require(tol_grad > 0, "[search] tol_grad must be positive")
        if bounds is not None:
            _require(bounds > 0, "[search] bounds must be positive")
            bounds = float(bounds)
        search = SearchConfig(seeds=tuple(seeds), newton_max_iter=newton_max_iter,
                              tol_grad=float(tol_grad), bounds=bounds)

        con = raw.get("conley", {})
        conley = ConleySettings(
            epsilon=float(con.get("epsilon", 1e-3)),
            tol_res=float(con.get("tol_res", 1e-6)),
            j0=con.get("j0", 1),
        )
        _require(conley.epsilon > 0, "[conley] epsilon must be positive")
        _require(conley.tol_res > 0, "[conley] tol_res must be positive")
        _require(isinstance(conley.j0, int) and conley.j0 >= 1,
                 "[conley] j0 must be a positive integer")

        fin = raw.get("finder", {})
        amplitudes = tuple(float(a) for a in fin.get("amplitudes", (0.1, 0.03, 0.01)))
        _require(amplitudes and all(a > 0 for a in amplitudes),
                 "[finder] amplitudes must be non-empty and positive")
        finder = FinderSettings(
            amplitudes=amplitudes,
            steps=fin.get("steps", 2048),
            tol_orbit=float(fin.get("tol_orbit", 1e-10)),
            method=fin.get("method", "verlet"),
            max_iter=fin.get("max_iter", 40),
        )
        _require(isinstance(finder.steps, int) and finder.steps >= 1,
                 "[finder] steps must be a positive integer")
        _require(finder.tol_orbit > 0, "[finder] tol_orbit must be positive")
        _require(finder.method in ("verlet", "rk4"),
                 "[finder] method must be 'verlet' or 'rk4'")
        _require(isinstance(finder.max_iter, int) and finder.max_iter >= 1,
                 "[finder] max_iter must be a positive integer")

        out = raw.get("outputs", {})
        report_path = out.get("report_path")
        csv_dir = out.get("orbit_csv_dir")
        if report_path is not None:
            report_path = str(base_dir / report_path)
        if csv_dir is not None:
            csv_dir = str(base_dir / csv_dir)
        outputs = OutputSettings(report_path=report_path, orbit_csv_dir=csv_dir)

        return RunConfig(potential_source=source, action=action, search=search,
                         conley=conley, finder=finder, outputs=outputs)

    @staticmethod
    def from_toml(path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
        return RunConfig.from_dict(raw, base_dir=path.parent)


def _checklist_dict(record: CriticalOrbitRecord) -> dict:
    c = record.checklist
    return {
        "isotropy_trivial": c.isotropy_trivial,
        "nondegenerate": c.nondegenerate,
        "has_positive_eigenvalue": c.has_positive_eigenvalue,
        "passed": c.passed,
        "failures": list(c.failures),
        "kernel_dim": c.kernel_dim,
        "orbit_dim": c.orbit_dim,
    }


def _solution_dict(sol, csv_name) -> dict:
    flo = sorted(((float(m.real), float(m.imag)) for m in sol.floquet))
    return {
        "amplitude": float(sol.amplitude),
        "period": float(sol.period),
        "minimal_period": float(sol.minimal_period),
        "period_multiplier": int(sol.period_multiplier),
        "residual": float(sol.residual_norm),
        "iterations": int(sol.iterations),
        "energy": float(sol.energy),
        "energy_drift": float(sol.energy_drift),
        "max_orbit_distance": float(sol.max_orbit_distance),
        "floquet": [list(m) for m in flo],
        "initial_position": [float(c) for c in sol.x0],
        "initial_velocity": [float(c) for c in sol.v0],
        "csv": csv_name,
    }


@dataclass(frozen=True)
class RunReport:
    """Deterministic JSON-able record of one full pipeline run."""

    config: RunConfig
    records: tuple
    orbit_reports: tuple
    generated_at: str

    @property
    def verdicts(self) -> tuple:
        return tuple(o["verdict"] for o in self.orbit_reports)

    def to_dict(self) -> dict:
        spec = parse_potential(self.config.potential_source)
        return {
            "version": "1",
            "generated_at": self.generated_at,
            "potential": print_potential(spec),
            "action": {
                "n": self.config.action.n,
                "blocks": [[i + 1, j + 1] for i, j in self.config.action.blocks],
            },
            "settings": {
                "epsilon": self.config.conley.epsilon,
                "tol_res": self.config.conley.tol_res,
                "j0": self.config.conley.j0,
                "amplitudes": list(self.config.finder.amplitudes),
                "steps": self.config.finder.steps,
                "method": self.config.finder.method,
            },
            "orbits": list(self.orbit_reports),
        }

    def json_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _certify_or_explain(record, conley):
    """Returns (conley_dict or None, verdict or None)."""
    try:
        report = certify_bifurcation(record, j0=conley.j0,
                                     epsilon=conley.epsilon,
                                     tol_res=conley.tol_res)
    except HypothesisError as exc:
        return None, str(exc)
    except NonResonanceError as exc:
        return None, f"hypotheses fail: resonant frequencies ({exc})"
    except (ArithmeticError, AssertionError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(f"certification failed numerically: {exc}") from exc
    return report, None


def run(config: RunConfig, json_out=None, csv_dir=None) -> RunReport:
    """Execute the full pipeline and write any requested artifacts.

    Hypothesis failures are data and land in the report; only configuration
    problems (ConfigError) and unexpected numeric breakdowns (NumericFailure)
    raise.
    """
    try:
        spec = parse_potential(config.potential_source)
    except (ParseError, DomainError) as exc:
        raise ConfigError(f"potential does not parse: {exc}") from exc

    try:
        records = find_critical_orbits(spec, config.action, config.search)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(f"critical-orbit search failed: {exc}") from exc

    csv_dir = csv_dir or config.outputs.orbit_csv_dir
    if csv_dir is not None:
        Path(csv_dir).mkdir(parents=True, exist_ok=True)

    orbit_reports = []
    for idx, record in enumerate(records):
        entry = {
            "index": idx,
            "point": [float(c) for c in record.point],
            "orbit_key": [float(v) for v in record.orbit_key],
            "orbit_dim": record.geometry.orbit_dim,
            "isotropy": record.geometry.isotropy_label,
            "hessian": [[float(v) for v in row] for row in record.hessian],
            "eigenvalues": [[v, m] for v, m in record.spectral.eigenvalues],
            "betas": list(record.spectral.betas),
            "beta_multiplicities": list(record.spectral.beta_mults),
            "kernel_dim": record.spectral.kernel_dim,
            "checklist": _checklist_dict(record),
            "classical_candidate": record.is_classical_candidate,
            "morse_blocks": None,
            "conley": None,
            "solutions": [],
            "refinement_failures": [],
        }
        if record.blocks is not None:
            entry["morse_blocks"] = {
                "b_eigenvalues": [float(v) for v in record.blocks.b_eigenvalues],
                "c_eigenvalues": [float(v) for v in record.blocks.c_eigenvalues],
                "morse_b": record.blocks.morse_b,
                "morse_c": record.blocks.morse_c,
            }

        if record.is_classical_candidate:
            entry["verdict"] = VERDICT_CLASSICAL
            orbit_reports.append(entry)
            continue

        conley_report, verdict = _certify_or_explain(record, config.conley)
        if conley_report is None:
            entry["verdict"] = verdict
            orbit_reports.append(entry)
            continue
        entry["conley"] = conley_report.to_dict()

        fin = config.finder
        try:
            sweep = amplitude_sweep(spec, record, config.action,
                                    amplitudes=fin.amplitudes, j0=config.conley.j0,
                                    steps=fin.steps, method=fin.method,
                                    max_iter=fin.max_iter, tol=fin.tol_orbit,
                                    bound_radius=config.search.bounds)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            raise NumericFailure(f"orbit refinement failed: {exc}") from exc

        for j, sol in enumerate(sweep.solutions):
            csv_name = None
            if csv_dir is not None:
                csv_name = f"orbit{idx}_sol{j}.csv"
                export_csv(sol, Path(csv_dir) / csv_name)
            entry["solutions"].append(_solution_dict(sol, csv_name))
        entry["refinement_failures"] = [
            {"amplitude": float(a), "error": msg} for a, msg in sweep.failures
        ]
        entry["verdict"] = (VERDICT_EXHIBITED if sweep.solutions
                            else VERDICT_REFINEMENT_FAILED)
        orbit_reports.append(entry)

    report = RunReport(
        config=config,
        records=tuple(records),
        orbit_reports=tuple(orbit_reports),
        generated_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )

    json_out = json_out or config.outputs.report_path
    if json_out is not None:
        path = Path(json_out)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        try:
            path.write_text(report.json_text(), encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot write report to {path}: {exc}") from exc
    return report
