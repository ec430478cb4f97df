"""Experiment configuration: one TOML file of flat key/value pairs.

Recognised keys (all optional except one of ``complex`` / ``complex_file``)::

    complex       = "torus2_Z2"        # built-in name
    complex_file  = "my.cx"            # or a complex in the text format
    ladder        = [4, 8, 16]         # box sides L (ball radii for FreeGroup2)
    conditions    = ["relative", "absolute"]
    degrees       = [0, 1, 2]          # default: every degree
    t_grid        = [0.5, 1.0, 2.0]
    lambda_grid   = [0.5, 1.0, 2.0]
    s_samples     = [1.5, 2.0, 3.0]
    zeta_lambda   = 1.0
    fit_window    = [0.01, 0.1]
    seed          = 0
    probes        = 64                 # stochastic trace probes
    dense_cap     = 4000
    grid          = 256                # quadrature points per axis
    output_dir    = "out"

Relative paths are resolved against the config file's directory.  The
only environment override is ``L2LAB_OUT`` for the output directory.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .complex_io import ComplexParseError, load_complex
from .complexes import ComplexValidationError, EquivariantChainComplex, builtin_complex
from .oracle import QuadratureGrid, default_grid
from .sections import BoundaryCondition
from .spectral import DEFAULT_DENSE_CAP

OUT_ENV = "L2LAB_OUT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    complex: str | None = None
    complex_file: str | None = None
    ladder: tuple[int, ...] = (2, 4, 8)
    conditions: tuple[str, ...] = ("relative", "absolute")
    degrees: tuple[int, ...] | None = None
    t_grid: tuple[float, ...] = (0.1, 1.0, 10.0)
    lambda_grid: tuple[float, ...] = (0.5, 1.0, 2.0)
    s_samples: tuple[float, ...] = (1.5, 2.0, 3.0)
    zeta_lambda: float = 1.0
    fit_window: tuple[float, float] = (0.01, 0.1)
    seed: int = 0
    probes: int = 64
    dense_cap: int = DEFAULT_DENSE_CAP
    grid: int | None = None
    output_dir: str = "out"
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        if (self.complex is None) == (self.complex_file is None):
            raise ConfigError("give exactly one of 'complex' or 'complex_file'")
        if not self.ladder:
            raise ConfigError("ladder must be nonempty")
        if any(L < 1 for L in self.ladder):
            raise ConfigError("ladder entries must be positive")
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ConfigError("ladder must be strictly increasing")
        for name in ("conditions", "t_grid", "lambda_grid", "s_samples"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be nonempty")
        for c in self.conditions:
            try:
                BoundaryCondition.parse(c)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if any(t <= 0 for t in self.t_grid):
            raise ConfigError("t_grid entries must be positive")
        if any(v < 0 for v in self.lambda_grid):
            raise ConfigError("lambda_grid entries must be nonnegative")
        if self.zeta_lambda <= 0:
            raise ConfigError("zeta_lambda must be positive")
        lo, hi = self.fit_window
        if not 0 < lo < hi:
            raise ConfigError("fit_window must satisfy 0 < lo < hi")
        if self.grid is not None and self.grid < 8:
            raise ConfigError("grid must be at least 8")
        if self.probes < 2 or self.dense_cap < 1:
            raise ConfigError("probes must be >= 2 and dense_cap >= 1")

    @property
    def boundary_conditions(self) -> list[BoundaryCondition]:
        return [BoundaryCondition.parse(c) for c in self.conditions]

    def load_complex(self) -> EquivariantChainComplex:
        try:
            if self.complex is not None:
                return builtin_complex(self.complex)
            return load_complex(Path(self.base_dir) / self.complex_file)
        except (ComplexParseError, ComplexValidationError, ValueError, OSError) as exc:
            raise ConfigError(f"cannot load complex: {exc}") from exc

    def quadrature(self, d: int) -> QuadratureGrid:
        return QuadratureGrid(self.grid) if self.grid else default_grid(d)

    def degrees_for(self, X: EquivariantChainComplex) -> list[int]:
        if self.degrees is None:
            return list(range(X.dim + 1))
        bad = [j for j in self.degrees if not 0 <= j <= X.dim]
        if bad:
            raise ConfigError(f"degrees {bad} outside 0..{X.dim}")
        return list(self.degrees)

    def canonical(self) -> dict:
        data = dataclasses.asdict(self)
        data.pop("output_dir")
        data.pop("base_dir")
        return data

    @property
    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def resolve_output(self, override: str | None = None) -> Path:
        out = override or os.environ.get(OUT_ENV) or self.output_dir
        path = Path(out)
        return path if path.is_absolute() else Path(self.base_dir) / path


_TUPLE_KEYS = {"ladder", "conditions", "degrees", "t_grid", "lambda_grid",
               "s_samples", "fit_window"}
_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)} - {"base_dir"}


def config_from_mapping(data: dict, base_dir: str = ".") -> ExperimentConfig:
    unknown = set(data) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, value in data.items():
        if key in _TUPLE_KEYS:
            if not isinstance(value, list):
                raise ConfigError(f"{key} must be a list")
            value = tuple(value)
        kwargs[key] = value
    try:
        return ExperimentConfig(base_dir=base_dir, **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_mapping(data, str(path.parent))
