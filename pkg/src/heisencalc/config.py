"""Run configuration: flat INI sections, validation, resolved echo."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .grids import Grid1D
from .phase_space import HermiteBasis
from .quantize import Calibration, QuantConfig
from .representations import LambdaGrid


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a batch command needs, with validated desk-scale defaults."""

    n: int = 1
    u_half_width: float = 8.0
    u_points: int = 256
    n_h: int = 32
    lam_min: float = 1.0 / 16.0
    lam_max: float = 16.0
    lam_per_sign: int = 64
    group_box: float = 6.0
    group_points: int = 64
    t_box: float = 12.0
    t_points: int = 256
    output_strides: tuple[int, int, int] = (4, 4, 16)
    output_fractions: tuple[float, float, float] = (0.7, 0.7, 0.5)
    experiment: str = "default"
    seed: int = 23
    out_dir: str = "out"
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n != 1:
            raise ConfigError("the batch front-end currently drives n = 1")
        if self.u_points < 8 or self.u_points & (self.u_points - 1):
            raise ConfigError(f"u_points must be a power of two, got {self.u_points}")
        if not (1 <= self.n_h <= self.u_points // 2):
            raise ConfigError(f"need 1 <= n_h <= u_points/2, got {self.n_h}")
        if not (0 < self.lam_min < self.lam_max):
            raise ConfigError("need 0 < lambda min < lambda max")
        if self.lam_per_sign < 8:
            raise ConfigError("need at least 8 lambda nodes per sign")
        for name in ("group_points", "t_points"):
            v = getattr(self, name)
            if v < 8 or v % 2:
                raise ConfigError(f"{name} must be even and >= 8, got {v}")

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def as_flat_dict(self) -> dict:
        d = asdict(self)
        tol = d.pop("tolerances")
        flat = {f"config.{k}": v for k, v in d.items()}
        for k, v in sorted(tol.items()):
            flat[f"tolerance.{k}"] = v
        return flat

    def build_quant_config(self, calibration: Calibration | None = None) -> QuantConfig:
        basis = HermiteBasis((Grid1D(self.u_half_width, self.u_points),), self.n_h)
        lgrid = LambdaGrid.build(self.lam_min, self.lam_max, self.lam_per_sign, self.n)
        grids = (Grid1D(self.group_box, self.group_points),
                 Grid1D(self.group_box, self.group_points),
                 Grid1D(self.t_box, self.t_points))
        return QuantConfig(lgrid, basis, grids, calibration,
                           tuple(self.output_strides), tuple(self.output_fractions))


_SCHEMA = {
    ("grid", "n"): ("n", int),
    ("grid", "u_half_width"): ("u_half_width", float),
    ("grid", "u_points"): ("u_points", int),
    ("grid", "n_h"): ("n_h", int),
    ("lambda", "min"): ("lam_min", float),
    ("lambda", "max"): ("lam_max", float),
    ("lambda", "per_sign"): ("lam_per_sign", int),
    ("group", "box"): ("group_box", float),
    ("group", "points"): ("group_points", int),
    ("group", "t_box"): ("t_box", float),
    ("group", "t_points"): ("t_points", int),
    ("experiment", "name"): ("experiment", str),
    ("experiment", "seed"): ("seed", int),
    ("output", "directory"): ("out_dir", str),
}


def load_config(path) -> RunConfig:
    """Parse the INI file; unknown keys are errors (no silent typos)."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path} not found or unreadable")
    kwargs = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if section == "tolerances":
                kwargs.setdefault("tolerances", {})[key] = float(raw)
                continue
            if (section, key) == ("output", "strides"):
                kwargs["output_strides"] = tuple(int(v) for v in raw.split(","))
                continue
            if (section, key) == ("output", "fractions"):
                kwargs["output_fractions"] = tuple(float(v) for v in raw.split(","))
                continue
            try:
                name, conv = _SCHEMA[(section, key)]
            except KeyError:
                raise ConfigError(f"unknown config key [{section}] {key}") from None
            try:
                kwargs[name] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def write_config(path, cfg: RunConfig) -> None:
    parser = configparser.ConfigParser()
    parser["grid"] = {"n": cfg.n, "u_half_width": cfg.u_half_width,
                      "u_points": cfg.u_points, "n_h": cfg.n_h}
    parser["lambda"] = {"min": cfg.lam_min, "max": cfg.lam_max,
                        "per_sign": cfg.lam_per_sign}
    parser["group"] = {"box": cfg.group_box, "points": cfg.group_points,
                       "t_box": cfg.t_box, "t_points": cfg.t_points}
    parser["output"] = {"directory": cfg.out_dir,
                        "strides": ",".join(map(str, cfg.output_strides)),
                        "fractions": ",".join(map(str, cfg.output_fractions))}
    parser["experiment"] = {"name": cfg.experiment, "seed": cfg.seed}
    if cfg.tolerances:
        parser["tolerances"] = {k: repr(v) for k, v in cfg.tolerances.items()}
    with open(path, "w") as fh:
        parser.write(fh)


def load_calibration(path) -> Calibration | None:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        return None
    sec = parser["calibration"]
    return Calibration(sec.getfloat("c_n"), sec.getfloat("c_n_prime"),
                       sec.getfloat("spread", 0.0),
                       sec.getfloat("tail_fraction", 0.0),
                       sec.getfloat("prime_spread", 0.0))


def save_calibration(path, cal: Calibration, version: str) -> None:
    parser = configparser.ConfigParser()
    parser["calibration"] = {
        "c_n": format(cal.c_n, ".17g"),
        "c_n_prime": format(cal.c_n_prime, ".17g"),
        "spread": format(cal.spread, ".17g"),
        "tail_fraction": format(cal.tail_fraction, ".17g"),
        "prime_spread": format(cal.prime_spread, ".17g"),
        "version": version,
    }
    with open(path, "w") as fh:
        parser.write(fh)
