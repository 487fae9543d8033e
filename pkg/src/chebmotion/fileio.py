"""File formats: property and measurement CSV, motor and run TOML, the
profile JSON document, setpoint tables and plot data.

CSV files are UTF-8 with LF line endings and a fixed header line. Floats
are written with ``repr`` so that reading a file back gives the same
values bit for bit.
"""
import csv
from dataclasses import asdict, dataclass, fields
import hashlib
import json
import math
import sys

import numpy as np

from .chebyshev import ChebyshevSeries, derivative_series
from .errors import ConfigError, ParseError
from .identification import MeasurementLog
from .plant import FrictionModel, MotorParams, PropertyModel, PropertySamples, motor_torque_rescaled
from .profile import MotionTask, eliminate_constraints, kinematics, sample_times, scale_factors

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "PROPERTY_HEADER",
    "MEASUREMENT_HEADER",
    "SETPOINT_HEADER",
    "PLOT_HEADER",
    "PROFILE_FORMAT",
    "read_properties_csv",
    "write_properties_csv",
    "read_measurement_csv",
    "write_measurement_csv",
    "load_motor",
    "motor_from_mapping",
    "RunConfig",
    "load_run_config",
    "sha256_file",
    "profile_document",
    "write_profile_document",
    "read_profile_document",
    "setpoint_table",
    "write_setpoints_csv",
    "write_plot_data",
]

PROPERTY_HEADER = ("theta_rad", "inertia_kgm2", "load_torque_Nm")
MEASUREMENT_HEADER = ("time_s", "position_rad", "torque_Nm")
SETPOINT_HEADER = ("time_s", "position_rad", "velocity_radps", "acceleration_radps2", "ff_torque_Nm")
PLOT_HEADER = ("x", "theta_rad", "theta_dot_radps", "theta_ddot_radps2", "tau_m_Nm")
PROFILE_FORMAT = "chebmotion-profile"
PROFILE_VERSION = 1

MOTOR_KEYS = {
    "R_ohm": "R",
    "kt_NmA": "k_t",
    "kv_VsRad": "k_v",
    "pole_pairs": "p",
    "Jm_kgm2": "J_m",
    "L_H": "L",
}
_MOTOR_REQUIRED = ("R_ohm", "kt_NmA", "kv_VsRad")


# --------------------------------------------------------------------- CSV

def _read_table(path, header, min_rows):
    """Parse a numeric CSV with an exact header; returns (line_numbers, array)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError("empty file", path, 1) from None
        except (csv.Error, UnicodeDecodeError) as exc:
            raise ParseError(str(exc), path, 1) from exc
        if tuple(c.strip() for c in first) != header:
            raise ParseError(f"bad header {','.join(first)!r}; expected {','.join(header)!r}",
                             path, 1)
        lines, rows = [], []
        try:
            for row in reader:
                if not row or all(not c.strip() for c in row):
                    continue
                line = reader.line_num
                if len(row) != len(header):
                    raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, line)
                try:
                    values = [float(c) for c in row]
                except ValueError:
                    raise ParseError(f"non-numeric value in {row!r}", path, line) from None
                for name, v in zip(header, values):
                    if not math.isfinite(v):
                        raise ParseError(f"{name} is not finite", path, line)
                lines.append(line)
                rows.append(values)
        except (csv.Error, UnicodeDecodeError) as exc:
            raise ParseError(str(exc), path, reader.line_num) from exc
    if len(rows) < min_rows:
        raise ParseError(f"need at least {min_rows} data rows, got {len(rows)}", path)
    return lines, np.array(rows, dtype=np.float64)


def _check_increasing(path, lines, values, name):
    bad = np.flatnonzero(np.diff(values) <= 0)
    if bad.size:
        raise ParseError(f"{name} must be strictly increasing", path, lines[bad[0] + 1])


def _write_table(path, header, columns):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])


def read_properties_csv(path):
    """Read a property CSV into :class:`PropertySamples`.

    Raises
    ------
    ParseError
        Bad header, non-numeric or non-finite values, a grid that is not
        strictly increasing, non-positive inertia or fewer than 4 rows.
    """
    lines, data = _read_table(path, PROPERTY_HEADER, 4)
    _check_increasing(path, lines, data[:, 0], "theta_rad")
    bad = np.flatnonzero(data[:, 1] <= 0)
    if bad.size:
        raise ParseError("inertia_kgm2 must be positive", path, lines[bad[0]])
    return PropertySamples(data[:, 0], data[:, 1], data[:, 2])


def write_properties_csv(samples, path):
    _write_table(path, PROPERTY_HEADER, (samples.theta, samples.J, samples.tau_l))


def read_measurement_csv(path):
    """Read a measurement CSV into a :class:`MeasurementLog`."""
    lines, data = _read_table(path, MEASUREMENT_HEADER, 4)
    _check_increasing(path, lines, data[:, 0], "time_s")
    try:
        return MeasurementLog(data[:, 0], data[:, 1], data[:, 2])
    except ValueError as exc:
        raise ParseError(str(exc), path) from exc


def write_measurement_csv(log, path):
    _write_table(path, MEASUREMENT_HEADER, (log.time, log.position, log.torque))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


# -------------------------------------------------------------------- TOML

def _load_toml(path):
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def motor_from_mapping(table, where="motor"):
    """Build :class:`MotorParams` from a mapping with the file key names."""
    unknown = sorted(set(table) - set(MOTOR_KEYS))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    missing = [k for k in _MOTOR_REQUIRED if k not in table]
    if missing:
        raise ConfigError(f"{where}: missing key(s) {', '.join(missing)}")
    kwargs = {}
    for key, value in table.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: {key} must be a number")
        kwargs[MOTOR_KEYS[key]] = value
    try:
        return MotorParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_motor(path):
    """Read motor parameters from a TOML file (top level or a ``[motor]`` table)."""
    doc = _load_toml(path)
    if set(doc) == {"motor"} and isinstance(doc["motor"], dict):
        doc = doc["motor"]
    return motor_from_mapping(doc, str(path))


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs besides input files.

    Angles are radians unless ``angles_in_degrees`` is set; ``theta_a``,
    ``theta_b`` are then converted by :meth:`task`.
    """

    theta_a: float = 0.0
    theta_b: float = None
    t_a: float = 0.0
    dt: float = None
    angles_in_degrees: bool = False
    degree: int = 9
    jerk_zero: bool = False
    solver: str = "bfgs"
    seed: int = 0
    quad_nodes: int = 201
    fit_degree: int = 20
    mu_v: float = 0.0
    motor: MotorParams = None

    _SECTIONS = {
        "task": ("theta_a", "theta_b", "t_a", "dt", "angles_in_degrees", "degree", "jerk_zero"),
        "solver": ("solver", "seed", "quad_nodes", "fit_degree"),
        "friction": ("mu_v",),
    }

    def __post_init__(self):
        checks = {
            "theta_a": (float,), "theta_b": (float, type(None)), "t_a": (float,),
            "dt": (float, type(None)), "mu_v": (float,),
            "degree": (int,), "seed": (int,), "quad_nodes": (int,), "fit_degree": (int,),
            "angles_in_degrees": (bool,), "jerk_zero": (bool,), "solver": (str,),
        }
        for name, types in checks.items():
            value = getattr(self, name)
            if float in types and isinstance(value, int) and not isinstance(value, bool):
                object.__setattr__(self, name, float(value))
                continue
            if isinstance(value, bool) and bool not in types:
                raise ConfigError(f"{name} must be {types[0].__name__}, got a boolean")
            if not isinstance(value, types):
                raise ConfigError(f"{name} must be {types[0].__name__}, got {type(value).__name__}")
        if self.solver not in ("bfgs", "ga", "both"):
            raise ConfigError(f"solver must be bfgs, ga or both, got {self.solver!r}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.quad_nodes < 33 or self.quad_nodes % 2 == 0:
            raise ConfigError("quad_nodes must be odd and at least 33")
        if self.fit_degree < 0:
            raise ConfigError("fit_degree must be non-negative")
        if not (math.isfinite(self.mu_v) and self.mu_v >= 0):
            raise ConfigError("mu_v must be finite and non-negative")
        if self.motor is not None and not isinstance(self.motor, MotorParams):
            raise ConfigError("motor must be MotorParams")

    @classmethod
    def from_mapping(cls, doc, where="config"):
        """Flatten a parsed TOML document; unknown sections or keys are errors."""
        values = {}
        for section, table in doc.items():
            if section == "motor":
                if not isinstance(table, dict):
                    raise ConfigError(f"{where}: [motor] must be a table")
                values["motor"] = motor_from_mapping(table, f"{where}: [motor]")
                continue
            if section not in cls._SECTIONS or not isinstance(table, dict):
                raise ConfigError(f"{where}: unknown section {section!r}")
            for key, value in table.items():
                if key not in cls._SECTIONS[section]:
                    raise ConfigError(f"{where}: unknown key {section}.{key}")
                values[key] = value
        return cls(**values)

    def merged(self, **overrides):
        """Copy with the non-``None`` overrides applied (CLI flags win)."""
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**current)

    def task(self):
        if self.theta_b is None:
            raise ConfigError("theta_b is required (--theta-b or [task] theta_b)")
        if self.dt is None:
            raise ConfigError("dt is required (--dt or [task] dt)")
        conv = math.radians if self.angles_in_degrees else float
        return MotionTask(conv(self.theta_a), conv(self.theta_b), self.t_a, self.t_a + self.dt,
                          self.jerk_zero, self.degree)

    def to_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "motor"}
        out["motor"] = None if self.motor is None else asdict(self.motor)
        return out


def load_run_config(path):
    return RunConfig.from_mapping(_load_toml(path), str(path))


# ---------------------------------------------------------- profile document

def _model_dict(model):
    return {
        "fit_degree": model.fit_degree,
        "J_m": model.J_m,
        "J_fit": [float(v) for v in model.J_fit.coeffs],
        "tau_l_fit": [float(v) for v in model.tau_l_fit.coeffs],
        "J_residual": model.J_residual,
        "tau_l_residual": model.tau_l_residual,
        "phi_margin": model.phi_margin,
    }


def _model_from_dict(d, task):
    J_fit = ChebyshevSeries(d["J_fit"])
    return PropertyModel(
        J_fit=J_fit,
        tau_l_fit=ChebyshevSeries(d["tau_l_fit"]),
        dJ_dphi=derivative_series(J_fit),
        scale=scale_factors(task),
        J_m=float(d["J_m"]),
        fit_degree=int(d["fit_degree"]),
        J_residual=float(d["J_residual"]),
        tau_l_residual=float(d["tau_l_residual"]),
        phi_margin=float(d["phi_margin"]),
    )


def _solver_dict(result):
    return {
        "solver": result.solver,
        "tau_rms_Nm": result.tau_rms,
        "iterations": result.iterations,
        "objective_evals": result.objective_evals,
        "converged": bool(result.converged),
        "message": result.message,
        "free_coefficients": [float(v) for v in result.free_coeffs],
    }


def profile_document(result, ctx, reference=None, alternatives=(), provenance=None):
    """JSON-ready description of an optimised profile.

    Wall time is left out on purpose so that identical runs give identical
    files. ``reference`` is ``(kind, tau_rms)``.
    """
    task = ctx.task
    lo, hi = result.profile.phi_range()
    doc = {
        "format": PROFILE_FORMAT,
        "version": PROFILE_VERSION,
        "task": {
            "theta_A": task.theta_A, "theta_B": task.theta_B,
            "t_A": task.t_A, "t_B": task.t_B,
            "jerk_zero": task.jerk_zero, "degree": task.degree,
        },
        "coefficients": [float(v) for v in result.profile.coeffs],
        "free_coefficients": [float(v) for v in result.free_coeffs],
        "tau_rms_Nm": result.tau_rms,
        "solver": _solver_dict(result),
        "alternatives": [_solver_dict(r) for r in alternatives],
        "phi_range": [lo, hi],
        "quadrature_nodes": ctx.quadrature_nodes,
        "friction": {"mu_v": ctx.friction.mu_v},
        "motor": None if ctx.motor is None else asdict(ctx.motor),
        "model": _model_dict(ctx.model),
    }
    if reference is not None:
        kind, ref = reference
        doc["reference"] = {"kind": kind, "tau_rms_Nm": ref,
                            "saving_pct": 100.0 * (ref - result.tau_rms) / ref}
    doc["provenance"] = provenance or {}
    return doc


def write_profile_document(doc, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


@dataclass(frozen=True, eq=False)
class LoadedProfile:
    """Profile, property model, friction and motor rebuilt from a document."""

    profile: object
    model: PropertyModel
    friction: FrictionModel
    motor: MotorParams
    document: dict


def read_profile_document(path):
    """Rebuild the profile and its plant model from a profile document.

    Raises
    ------
    ParseError
        If the file is not a valid profile document.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, path, exc.lineno) from exc
    if not isinstance(doc, dict) or doc.get("format") != PROFILE_FORMAT:
        raise ParseError("not a profile document", path)
    if doc.get("version") != PROFILE_VERSION:
        raise ParseError(f"unsupported document version {doc.get('version')!r}", path)
    try:
        t = doc["task"]
        task = MotionTask(t["theta_A"], t["theta_B"], t["t_A"], t["t_B"],
                          t["jerk_zero"], t["degree"])
        profile = eliminate_constraints(doc["free_coefficients"], task)
        model = _model_from_dict(doc["model"], task)
        friction = FrictionModel(doc["friction"]["mu_v"])
        motor = None if doc.get("motor") is None else MotorParams(**doc["motor"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid profile document: {exc}", path) from exc
    return LoadedProfile(profile, model, friction, motor, doc)


# ----------------------------------------------------------------- exports

def setpoint_table(profile, model, friction, sample_period):
    """Columns of the feedforward table: t, theta, theta', theta'', tau_ff."""
    t = sample_times(profile.task, sample_period)
    x = np.clip(profile.scale.x_from_t(t), -1.0, 1.0)
    theta, vel, acc, _ = kinematics(profile, x)
    tau = motor_torque_rescaled(profile, model, friction, x)
    return t, theta, vel, acc, tau


def write_setpoints_csv(profile, model, friction, sample_period, path):
    cols = setpoint_table(profile, model, friction, sample_period)
    _write_table(path, SETPOINT_HEADER, cols)
    return cols[0].size


def write_plot_data(profile, model, friction, path, points=501):
    """Uniform-x samples of the profile and its motor torque."""
    x = np.linspace(-1.0, 1.0, int(points))
    theta, vel, acc, _ = kinematics(profile, x)
    tau = motor_torque_rescaled(profile, model, friction, x)
    _write_table(path, PLOT_HEADER, (x, theta, vel, acc, tau))
