"""Scenario files, run artifacts, and their serialization.

A scenario is a YAML document (schema_version 1) describing particles,
interaction parameters, integrator settings, and optionally a wire and an
audit grid. Units are declared once per file ("gaussian" or "si") and
converted to internal Gaussian CGS during parsing; all defaults are
resolved at the same time, so a parsed Scenario is fully explicit.

Random ensembles draw from a single numpy Generator (PCG64) seeded with
the scenario's `seed`, consumed in document order: for each ensemble
block, first the positions (count x 3, uniform over the box), then the
velocities (count x 3, isotropic normal). Serializing a parsed scenario
writes the expanded particle list, so replaying a serialized scenario
needs no randomness at all.

Example:

    schema_version: 1
    units: gaussian
    seed: 7
    interaction: {softening: 2.0e-9, velocity_cap: 0.5}
    integrator: {scheme: implicit-midpoint, dt: 5.0e-20, n_steps: 1000,
                 output_stride: 10}
    particles:
      - ensemble: {count: 4, charge: -4.80320471e-10,
                   mass: 9.1093837015e-28,
                   position_box: 2.0e-8, velocity_sigma: 1.2e9}
      - ensemble: {count: 4, charge: 4.80320471e-10,
                   mass: 9.1093837015e-28,
                   position_box: 2.0e-8, velocity_sigma: 1.2e9}
    wire: {length: 10.0, radius: 0.01, direction: [0.0, 0.0, 1.0]}
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .constants import CODATA2018, to_gaussian
from .errors import ScenarioSyntaxError, ScenarioValidationError
from .fields import deposit_charges, electric_field_from_potential, gauss_law_residual, \
    mean_square_field_split, solve_poisson
from .integrators import ConservationReport, IntegratorConfig, Trajectory, \
    conservation_report, integrate
from .particles import InteractionParams, Particle, SystemState, validate_state
from .wire import WireEnergyReport, WireSpec, magnetic_enhancement, mean_drift_speed, \
    report_from_state, wire_current

SCHEMA_VERSION = 1
ENERGY_JUMP_WARN = 1e-4   # per-step relative energy change worth warning about


def _fail(field: str, message: str) -> None:
    raise ScenarioValidationError(f"{field}: {message}")


def _require_mapping(node, field: str) -> dict:
    if not isinstance(node, dict):
        _fail(field, f"must be a mapping, got {type(node).__name__}")
    return node


def _check_keys(node: dict, allowed: set[str], field: str) -> None:
    unknown = set(node) - allowed
    if unknown:
        _fail(field, f"unknown keys {sorted(unknown)}; allowed: {sorted(allowed)}")


def _get_float(node: dict, key: str, field: str, default=None) -> float:
    if key not in node:
        if default is None:
            _fail(field, f"missing required key {key!r}")
        return default
    value = node[key]
    # YAML 1.1 parses exponent forms like "5e-20" as strings; coerce.
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            _fail(f"{field}.{key}", f"must be a number, got {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{field}.{key}", f"must be a number, got {type(value).__name__}")
    return float(value)


def _get_int(node: dict, key: str, field: str, default=None) -> int:
    if key not in node:
        if default is None:
            _fail(field, f"missing required key {key!r}")
        return default
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"{field}.{key}", f"must be an integer, got {value!r}")
    return value


def _get_vec3(node: dict, key: str, field: str) -> list[float]:
    if key not in node:
        _fail(field, f"missing required key {key!r}")
    value = node[key]
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        _fail(f"{field}.{key}", f"must be a 3-element list, got {value!r}")
    out = []
    for i, comp in enumerate(value):
        if isinstance(comp, str):
            try:
                comp = float(comp)
            except ValueError:
                _fail(f"{field}.{key}[{i}]", f"must be a number, got {comp!r}")
        if isinstance(comp, bool) or not isinstance(comp, (int, float)):
            _fail(f"{field}.{key}[{i}]", f"must be a number, got {comp!r}")
        out.append(float(comp))
    return out


@dataclass(frozen=True)
class GridSpec:
    """Audit grid for depositing charges and checking Gauss's law."""

    dims: tuple[int, int, int]
    spacing: float               # [cm]
    smear_width: float | None    # [cm]; default 2 * spacing at deposit time


@dataclass(frozen=True)
class Scenario:
    """A fully-resolved scenario in internal Gaussian units.

    `resolved` is the canonical mapping this scenario serializes to; two
    scenarios are physically identical iff their resolved mappings are
    equal, and the provenance hash is derived from it.
    """

    state: SystemState
    params: InteractionParams
    config: IntegratorConfig
    wire: WireSpec | None
    grid: GridSpec | None
    seed: int | None
    resolved: dict

    def config_hash(self) -> str:
        return hashlib.sha256(serialize_scenario(self).encode("utf-8")).hexdigest()


def _convert(value: float, kind: str, gaussian: bool) -> float:
    """Convert a scenario value to Gaussian, honoring the declared units."""
    if gaussian:
        return value
    if kind == "velocity":
        return to_gaussian(value, "length")   # m/s -> cm/s, same factor
    return to_gaussian(value, kind)


def _parse_particles(nodes, gaussian: bool, seed, params: InteractionParams):
    if not isinstance(nodes, list) or not nodes:
        _fail("particles", "must be a non-empty list")
    uses_ensemble = any(isinstance(n, dict) and "ensemble" in n for n in nodes)
    rng = None
    if uses_ensemble:
        if seed is None:
            _fail("seed", "required when any particle block uses an ensemble generator")
        rng = np.random.default_rng(seed)

    particles: list[Particle] = []
    next_id = 0
    for idx, node in enumerate(nodes):
        field = f"particles[{idx}]"
        node = _require_mapping(node, field)
        if "ensemble" in node:
            _check_keys(node, {"ensemble"}, field)
            ens = _require_mapping(node["ensemble"], f"{field}.ensemble")
            _check_keys(ens, {"count", "charge", "mass", "position_box", "velocity_sigma"},
                        f"{field}.ensemble")
            count = _get_int(ens, "count", f"{field}.ensemble")
            if count < 1:
                _fail(f"{field}.ensemble.count", f"must be >= 1, got {count}")
            charge = _convert(_get_float(ens, "charge", f"{field}.ensemble"), "charge", gaussian)
            mass = _convert(_get_float(ens, "mass", f"{field}.ensemble"), "mass", gaussian)
            box = _convert(_get_float(ens, "position_box", f"{field}.ensemble"), "length", gaussian)
            sigma = _convert(_get_float(ens, "velocity_sigma", f"{field}.ensemble"),
                             "velocity", gaussian)
            if not box > 0.0:
                _fail(f"{field}.ensemble.position_box", f"must be positive, got {box}")
            if sigma < 0.0:
                _fail(f"{field}.ensemble.velocity_sigma", f"must be >= 0, got {sigma}")
            positions = rng.uniform(-0.5 * box, 0.5 * box, (count, 3))
            velocities = rng.normal(0.0, sigma, (count, 3)) if sigma > 0.0 \
                else np.zeros((count, 3))
            for i in range(count):
                particles.append(Particle(next_id, charge, mass, positions[i], velocities[i]))
                next_id += 1
        else:
            _check_keys(node, {"charge", "mass", "position", "velocity"}, field)
            charge = _convert(_get_float(node, "charge", field), "charge", gaussian)
            mass = _convert(_get_float(node, "mass", field), "mass", gaussian)
            if not mass > 0.0:
                _fail(f"{field}.mass", f"must be positive, got {mass}")
            pos = [_convert(x, "length", gaussian) for x in _get_vec3(node, "position", field)]
            vel = [_convert(x, "velocity", gaussian) for x in _get_vec3(node, "velocity", field)]
            particles.append(Particle(next_id, charge, mass, np.array(pos), np.array(vel)))
            next_id += 1

    cap = params.velocity_cap * params.c
    for p in particles:
        if p.speed >= cap:
            _fail(f"particles (id {p.id})",
                  f"|v| = {p.speed:.6g} cm/s exceeds the velocity cap "
                  f"{params.velocity_cap:g} c = {cap:.6g} cm/s")
    return particles


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; resolve defaults and units."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ScenarioSyntaxError(str(getattr(exc, "problem", exc)),
                                      line=mark.line + 1, column=mark.column + 1) from exc
        raise ScenarioSyntaxError(str(exc)) from exc

    doc = _require_mapping(doc, "scenario")
    _check_keys(doc, {"schema_version", "units", "seed", "interaction",
                      "integrator", "particles", "wire", "grid"}, "scenario")

    version = _get_int(doc, "schema_version", "scenario")
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported version {version}; this build reads {SCHEMA_VERSION}")

    units = doc.get("units")
    if units not in ("gaussian", "si"):
        _fail("units", f"must be 'gaussian' or 'si', got {units!r}")
    gaussian = units == "gaussian"

    seed = None
    if "seed" in doc:
        seed = _get_int(doc, "seed", "scenario")
        if seed < 0:
            _fail("seed", f"must be >= 0, got {seed}")

    inter = _require_mapping(doc.get("interaction", {}), "interaction")
    _check_keys(inter, {"softening", "c", "c_scale", "velocity_cap"}, "interaction")
    softening = _convert(_get_float(inter, "softening", "interaction", default=0.0),
                         "length", gaussian)
    c_scale = _get_float(inter, "c_scale", "interaction", default=1.0)
    if not c_scale > 0.0:
        _fail("interaction.c_scale", f"must be positive, got {c_scale}")
    if "c" in inter:
        c_value = _convert(_get_float(inter, "c", "interaction"), "velocity", gaussian)
    else:
        c_value = CODATA2018.c
    velocity_cap = _get_float(inter, "velocity_cap", "interaction", default=0.5)
    try:
        params = InteractionParams(softening=softening, c=c_value * c_scale,
                                   velocity_cap=velocity_cap)
    except ValueError as exc:
        _fail("interaction", str(exc))

    integ = _require_mapping(doc.get("integrator"), "integrator") \
        if "integrator" in doc else _fail("integrator", "missing required section")
    _check_keys(integ, {"scheme", "dt", "n_steps", "output_stride", "fixed_point_tol",
                        "fixed_point_max_iter", "solver_tol", "solver"}, "integrator")
    scheme = integ.get("scheme", "implicit-midpoint")
    solver = integ.get("solver", "cholesky")
    try:
        config = IntegratorConfig(
            dt=_get_float(integ, "dt", "integrator"),
            n_steps=_get_int(integ, "n_steps", "integrator"),
            scheme=scheme,
            output_stride=_get_int(integ, "output_stride", "integrator", default=1),
            fixed_point_tol=_get_float(integ, "fixed_point_tol", "integrator", default=1e-12),
            fixed_point_max_iter=_get_int(integ, "fixed_point_max_iter", "integrator", default=50),
            solver_tol=_get_float(integ, "solver_tol", "integrator", default=1e-12),
            solver=solver,
        )
    except ValueError as exc:
        _fail("integrator", str(exc))

    if "particles" not in doc:
        _fail("particles", "missing required section")
    particles = _parse_particles(doc["particles"], gaussian, seed, params)
    state = SystemState(tuple(particles), time=0.0)
    try:
        validate_state(state, params)
    except Exception as exc:
        _fail("particles", str(exc))

    wire = None
    if "wire" in doc:
        wnode = _require_mapping(doc["wire"], "wire")
        _check_keys(wnode, {"length", "radius", "eta", "direction"}, "wire")
        length = _convert(_get_float(wnode, "length", "wire"), "length", gaussian)
        direction = _get_vec3(wnode, "direction", "wire")
        radius = None
        eta = None
        if "eta" in wnode:
            eta = _convert(_get_float(wnode, "eta", "wire"), "eta", gaussian)
        if "radius" in wnode:
            if eta is not None:
                _fail("wire", "give either eta or radius, not both")
            radius = _convert(_get_float(wnode, "radius", "wire"), "length", gaussian)
        try:
            wire = WireSpec(length=length, direction=np.array(direction),
                            radius=radius, eta=eta)
        except Exception as exc:
            _fail("wire", str(exc))

    grid = None
    if "grid" in doc:
        gnode = _require_mapping(doc["grid"], "grid")
        _check_keys(gnode, {"dims", "spacing", "smear_width"}, "grid")
        dims = _get_vec3(gnode, "dims", "grid")
        idims = tuple(int(d) for d in dims)
        if any(d != int(d) for d in dims):
            _fail("grid.dims", f"must be integers, got {dims}")
        for d in idims:
            if d < 4 or d % 2 != 0:
                _fail("grid.dims", f"dimensions must be even and >= 4, got {idims}")
        spacing = _convert(_get_float(gnode, "spacing", "grid"), "length", gaussian)
        if not spacing > 0.0:
            _fail("grid.spacing", f"must be positive, got {spacing}")
        smear = None
        if "smear_width" in gnode:
            smear = _convert(_get_float(gnode, "smear_width", "grid"), "length", gaussian)
            if not smear > 0.0:
                _fail("grid.smear_width", f"must be positive, got {smear}")
        q = state.charges()
        if abs(float(np.sum(q))) > 1e-12 * float(np.sum(np.abs(q))):
            _fail("grid", "charge deposition needs a neutral particle set "
                          "(periodic Poisson requires zero net charge)")
        grid = GridSpec(dims=idims, spacing=spacing, smear_width=smear)

    resolved = _resolved_mapping(state, params, config, wire, grid, seed)
    return Scenario(state=state, params=params, config=config, wire=wire,
                    grid=grid, seed=seed, resolved=resolved)


def _resolved_mapping(state, params, config, wire, grid, seed) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "units": "gaussian",
        "interaction": {
            "softening": params.softening,
            "c": params.c,
            "c_scale": 1.0,
            "velocity_cap": params.velocity_cap,
        },
        "integrator": {
            "scheme": config.scheme,
            "dt": config.dt,
            "n_steps": config.n_steps,
            "output_stride": config.output_stride,
            "fixed_point_tol": config.fixed_point_tol,
            "fixed_point_max_iter": config.fixed_point_max_iter,
            "solver_tol": config.solver_tol,
            "solver": config.solver,
        },
        "particles": [
            {
                "charge": p.charge,
                "mass": p.mass,
                "position": [float(x) for x in p.position],
                "velocity": [float(x) for x in p.velocity],
            }
            for p in state.particles
        ],
    }
    if seed is not None:
        doc["seed"] = seed
    if wire is not None:
        doc["wire"] = {
            "length": wire.length,
            "direction": [float(x) for x in wire.direction],
            "eta": wire.eta,
        }
        if wire.radius is not None:
            doc["wire"]["radius"] = wire.radius
    if grid is not None:
        doc["grid"] = {
            "dims": list(grid.dims),
            "spacing": grid.spacing,
        }
        if grid.smear_width is not None:
            doc["grid"]["smear_width"] = grid.smear_width
    return doc


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical YAML of the resolved scenario (Gaussian units, expanded
    particles, sorted keys). Floats round-trip exactly."""
    return yaml.safe_dump(scenario.resolved, sort_keys=True, default_flow_style=False)


def parse_scenario_file(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class RunArtifacts:
    """What a scenario run leaves on disk, plus in-memory summaries."""

    out_dir: Path
    trajectory_csv: Path
    conservation: ConservationReport
    wire_report: WireEnergyReport | None
    field_audit: dict | None
    provenance: dict
    trajectory: Trajectory


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_trajectory_csv(path: Path, traj: Trajectory, scenario: Scenario) -> None:
    n = scenario.state.n
    cols = ["time"]
    for i in range(n):
        cols += [f"p{i}_{c}" for c in ("x", "y", "z", "vx", "vy", "vz")]
    cols += ["e_coulomb", "e_kinetic_mech", "e_kinetic_ampere", "e_total"]
    if scenario.wire is not None:
        cols += ["wire_current_statamp", "w_magnetic_erg"]
    lines = [",".join(cols)]
    for sample in traj.samples:
        row = [_fmt(sample.time)]
        pos = sample.state.positions()
        vel = sample.state.velocities()
        for i in range(n):
            row += [_fmt(v) for v in pos[i]] + [_fmt(v) for v in vel[i]]
        e = sample.energy
        row += [_fmt(e.coulomb), _fmt(e.mechanical_kinetic),
                _fmt(e.ampere_kinetic), _fmt(e.total)]
        if scenario.wire is not None:
            current = wire_current(sample.state, scenario.wire)
            speed = mean_drift_speed(sample.state, scenario.wire)
            w = magnetic_enhancement(scenario.wire.eta, current, speed)
            row += [_fmt(current), _fmt(w)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _field_audit(scenario: Scenario, final: SystemState) -> dict:
    """Deposit the final state's charges and audit Gauss's law."""
    grid = scenario.grid
    charges = [(p.charge, p.position) for p in final.particles]
    rho = deposit_charges(charges, grid.dims, grid.spacing, grid.smear_width)
    phi = solve_poisson(rho)
    efield = electric_field_from_potential(phi)
    residual = gauss_law_residual(efield, rho)
    ms_long, ms_trans, ms_total = mean_square_field_split(efield)
    return {
        "gauss_residual": residual,
        "mean_square_longitudinal": ms_long,
        "mean_square_transverse": ms_trans,
        "mean_square_total": ms_total,
        "dims": list(grid.dims),
        "spacing": grid.spacing,
    }


def run(scenario: Scenario, out_dir: str | Path, quiet: bool = False) -> RunArtifacts:
    """Integrate a scenario and write its artifacts under out_dir.

    Writes trajectory.csv (17-significant-digit columns; byte-identical
    across reruns), conservation.json, run.json (provenance: version,
    config hash, seed), and, when configured, wire.json for the final
    sample and field_audit.json. Numerical failures propagate as
    IntegrationAbortedError with the failing step index attached.
    """
    import json

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    traj = integrate(scenario.state, scenario.params, scenario.config)
    if traj.max_step_energy_jump > ENERGY_JUMP_WARN and not quiet:
        print(
            f"warning: per-step relative energy change reached "
            f"{traj.max_step_energy_jump:.3e} (> {ENERGY_JUMP_WARN:.0e}); "
            "consider a smaller dt",
            file=sys.stderr,
        )

    csv_path = out / "trajectory.csv"
    _write_trajectory_csv(csv_path, traj, scenario)

    report = conservation_report(traj, scenario.params)
    (out / "conservation.json").write_text(json.dumps({
        "energy_drift": report.energy_drift,
        "momentum_drift": report.momentum_drift,
        "angular_momentum_drift": report.angular_momentum_drift,
        "max_step_energy_jump": traj.max_step_energy_jump,
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    wire_report = None
    if scenario.wire is not None:
        wire_report = report_from_state(traj.final_state, scenario.wire)
        (out / "wire.json").write_text(json.dumps({
            "current_statamp": wire_report.current_statamp,
            "current_ampere": wire_report.current_ampere,
            "alfven_ratio": wire_report.alfven_ratio,
            "eta": wire_report.eta,
            "eta_source": wire_report.eta_source,
            "w_magnetic_erg": wire_report.w_magnetic_erg,
            "w_magnetic_mev": wire_report.w_magnetic_mev,
            "threshold_verdict": wire_report.threshold_verdict,
            "threshold_margin_mev": wire_report.threshold_margin_mev,
            "carrier_speed": wire_report.carrier_speed,
            "inductive_energy_erg": wire_report.inductive_energy_erg,
            "removal_energies_erg": list(wire_report.removal_energies_erg),
        }, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    audit = None
    if scenario.grid is not None:
        audit = _field_audit(scenario, traj.final_state)
        (out / "field_audit.json").write_text(
            json.dumps(audit, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    provenance = {
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "config_hash": scenario.config_hash(),
        "seed": scenario.seed,
        "n_steps": scenario.config.n_steps,
        "samples": len(traj),
    }
    (out / "run.json").write_text(
        json.dumps(provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    return RunArtifacts(
        out_dir=out,
        trajectory_csv=csv_path,
        conservation=report,
        wire_report=wire_report,
        field_audit=audit,
        provenance=provenance,
        trajectory=traj,
    )
