"""Simulation configuration and its file format.

Config files are TOML written as flat dotted keys, one per line::

    gains.alpha = 3.8
    skew.xi = 0.4

Every key is checked against ``SCHEMA``; unknown keys, wrong types and
out-of-range values raise :class:`ConfigError`.
"""

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import tomli

from .controller import GainConfig
from .errors import ConfigError
from .plant import TRAJECTORY_MODES, RobotParams

MODES = ("developed", "baseline", "oracle_feedforward")
SKEW_FORMS = ("literal", "simplified")
SEED_ENV = "SSLBPINN_SEED"
N_DOF = 2


@dataclass
class SimConfig:
    duration: float = 50.0
    dt: float = 0.001
    seed: int = 0
    snr_db: float = 60.0
    noise: bool = True
    mode: str = "developed"
    trajectory: str = "literal"
    skew_form: str = "simplified"
    q0: tuple = (0.4, -0.3)
    q_dot0: tuple = (0.0, 0.0)
    start_on_trajectory: bool = False
    input_radius: float = 10.0
    abort_threshold: float = 1e6
    hidden_layers: int = 4
    width: int = 7
    activation: str = "tanh"
    plant: RobotParams = field(default_factory=RobotParams)
    gains: GainConfig = field(default_factory=GainConfig)

    def validate(self):
        if not self.dt > 0:
            raise ConfigError("sim.dt must be positive")
        if self.duration < self.dt:
            raise ConfigError("sim.duration must be at least one step")
        if self.noise and not self.snr_db > 0:
            raise ConfigError("sim.snr_db must be positive when noise is on")
        if self.mode not in MODES:
            raise ConfigError(f"sim.mode must be one of {MODES}")
        if self.trajectory not in TRAJECTORY_MODES:
            raise ConfigError(f"sim.trajectory must be one of {tuple(TRAJECTORY_MODES)}")
        if self.skew_form not in SKEW_FORMS:
            raise ConfigError(f"skew.form must be one of {SKEW_FORMS}")
        if len(self.q0) != N_DOF or len(self.q_dot0) != N_DOF:
            raise ConfigError("initial conditions must have one entry per joint")
        if self.hidden_layers < 0 or self.width < 1:
            raise ConfigError("network must have width >= 1 and hidden_layers >= 0")
        if len(self.gains.xi) != N_DOF:
            raise ConfigError("skew.xi must have one entry per joint")
        p = self.plant
        if min(p.m1, p.m2, p.l1, p.l2) <= 0 or min(p.fd1, p.fd2, p.fs1, p.fs2) < 0:
            raise ConfigError("plant masses/lengths must be positive and friction non-negative")
        try:
            self.gains.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def steps(self):
        return int(round(self.duration / self.dt))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def _sim(name):
    return lambda cfg, v: setattr(cfg, name, v)


def _plant(name):
    return lambda cfg, v: setattr(cfg, "plant", cfg.plant._replace(**{name: v}))


def _gain(name):
    return lambda cfg, v: setattr(cfg, "gains", cfg.gains._replace(**{name: v}))


def _skew_enabled(cfg, v):
    if not v:
        if cfg.mode == "oracle_feedforward":
            return
        cfg.mode = "baseline"
    elif cfg.mode == "baseline":
        raise ConfigError("skew.enabled = true contradicts sim.mode = 'baseline'")


# key -> (type, setter); "vec2" accepts a scalar or a 2-list of reals
SCHEMA = {
    "sim.duration": (float, _sim("duration")),
    "sim.dt": (float, _sim("dt")),
    "sim.seed": (int, _sim("seed")),
    "sim.snr_db": (float, _sim("snr_db")),
    "sim.noise": (bool, _sim("noise")),
    "sim.mode": (str, _sim("mode")),
    "sim.trajectory": (str, _sim("trajectory")),
    "sim.q0": ("vec2", _sim("q0")),
    "sim.q_dot0": ("vec2", _sim("q_dot0")),
    "sim.start_on_trajectory": (bool, _sim("start_on_trajectory")),
    "sim.input_radius": (float, _sim("input_radius")),
    "sim.abort_threshold": (float, _sim("abort_threshold")),
    "network.hidden_layers": (int, _sim("hidden_layers")),
    "network.width": (int, _sim("width")),
    "network.activation": (str, _sim("activation")),
    "controller.sgn_smoothing": (float, _gain("sgn_smoothing")),
    "skew.form": (str, _sim("skew_form")),
    "skew.xi": ("vec2", _gain("xi")),
}
for _name in ("alpha", "k1", "k2", "k3", "k4"):
    SCHEMA[f"gains.{_name}"] = (float, _gain(_name))
for _m in "MCFG":
    SCHEMA[f"adaptation.gamma_{_m}"] = (float, _gain(f"gamma_{_m}"))
    SCHEMA[f"adaptation.theta_bound_{_m}"] = (float, _gain(f"theta_bound_{_m}"))
SCHEMA["adaptation.proj_delta"] = (float, _gain("proj_delta"))
for _i in range(1, 5):
    SCHEMA[f"skew.gamma{_i}"] = (float, _gain(f"gamma{_i}"))
for _name, _default in RobotParams._field_defaults.items():
    SCHEMA[f"plant.{_name}"] = (bool if isinstance(_default, bool) else float, _plant(_name))
# applied last so it sees the final sim.mode
SCHEMA["skew.enabled"] = (bool, _skew_enabled)


def _coerce(key, kind, value):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    # vec2
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),) * N_DOF
    if isinstance(value, list) and len(value) == N_DOF and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return tuple(float(v) for v in value)
    raise ConfigError(f"{key}: expected a number or a list of {N_DOF} numbers, got {value!r}")


def _flatten(tree, prefix=""):
    flat = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def config_from_mapping(values, base=None):
    """Build a validated :class:`SimConfig` from flat dotted keys."""
    cfg = dataclasses.replace(base) if base is not None else SimConfig()
    unknown = sorted(set(values) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in SCHEMA:
        if key in values:
            kind, setter = SCHEMA[key]
            setter(cfg, _coerce(key, kind, values[key]))
    return cfg.validate()


def parse_config(text):
    try:
        tree = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return config_from_mapping(_flatten(tree))


def load_config(path=None, env=None):
    """Read a config file (the shipped defaults if ``path`` is None).

    ``SSLBPINN_SEED`` in ``env`` (default ``os.environ``) overrides the seed.
    """
    if path is None:
        text = default_config_text()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config(text)
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            cfg.seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    return cfg


def default_config_text():
    return resources.files("sslbpinn").joinpath("default.toml").read_text(encoding="utf-8")


def to_flat(cfg):
    """Flat dotted-key view of a config (inverse of :func:`config_from_mapping`)."""
    flat = {
        "sim.duration": cfg.duration, "sim.dt": cfg.dt, "sim.seed": cfg.seed,
        "sim.snr_db": cfg.snr_db, "sim.noise": cfg.noise, "sim.mode": cfg.mode,
        "sim.trajectory": cfg.trajectory, "sim.q0": list(cfg.q0), "sim.q_dot0": list(cfg.q_dot0),
        "sim.start_on_trajectory": cfg.start_on_trajectory,
        "sim.input_radius": cfg.input_radius, "sim.abort_threshold": cfg.abort_threshold,
        "network.hidden_layers": cfg.hidden_layers, "network.width": cfg.width,
        "network.activation": cfg.activation, "skew.form": cfg.skew_form,
        "controller.sgn_smoothing": cfg.gains.sgn_smoothing,
        "skew.xi": list(cfg.gains.xi),
    }
    for key, (_, _) in SCHEMA.items():
        section, name = key.split(".")
        if section == "plant":
            flat[key] = getattr(cfg.plant, name)
        elif section in ("gains", "adaptation") or (section == "skew" and name.startswith("gamma")):
            flat[key] = getattr(cfg.gains, name)
    return flat


def config_hash(cfg):
    blob = json.dumps(to_flat(cfg), sort_keys=True, default=float)
    return hashlib.sha256(blob.encode()).hexdigest()


def dump_config(cfg):
    lines = []
    for key, value in sorted(to_flat(cfg).items()):
        lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v) if np.isfinite(v) else ("inf" if v > 0 else "-inf")
    return str(v)
