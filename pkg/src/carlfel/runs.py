"""Run configuration and the single entry point that runs any of the models.

Every model is reduced to the same :class:`~carlfel.output.TimeSeries`
(laboratory-frame field, mean scaled momentum, norm) so runs can be written
and compared uniformly.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import bloch, classical, quantum, wigner
from .analysis import Comparison, compare_series
from .errors import NumericalAbort, ValidationError
from .integrate import IntegratorConfig
from .output import TimeSeries
from .params import ScaledParams

CONFIG_SCHEMA = "carlfel.run-config"
CONFIG_VERSION = 1
OUTPUT_ENV = "CARLFEL_OUTPUT_DIR"
DEFAULT_OUTPUT = "carlfel-output"

MODELS = ("classical", "quantum-c", "quantum-rho", "wigner", "vlasov", "two-level")


def parse_complex(value) -> complex:
    """Accept a number, a ``[re, im]`` pair or a string such as ``"1e-4+2e-5j"``."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValidationError(f"complex value needs [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(str(value).replace(" ", "")) if isinstance(value, str) else complex(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"cannot parse complex value {value!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run.

    ``ladder`` is the momentum ladder ``(n_min, n_max)`` for the quantum and
    phase-space models (default: sized from ``rho_bar``).  ``grid_m`` is the
    number of angle points of a phase-space grid.  ``phi0`` tilts the
    initial Bloch vector of the two-level model.
    """

    model: str = "quantum-c"
    rho_bar: float = 1.0
    delta: float = 1.0
    a0: complex = 1e-4
    n0: int = 0
    ladder: tuple[int, int] | None = None
    grid_m: int | None = None
    n_particles: int = 10_000
    placement: str = "equispaced"
    seed: int | None = None
    derivative: str = "fd4"
    variant: str = bloch.CONSISTENT
    phi0: float = 0.0
    tau_end: float = 20.0
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    out: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "a0", parse_complex(self.a0))
        if self.ladder is not None:
            object.__setattr__(self, "ladder", tuple(int(v) for v in self.ladder))
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if not self.tau_end > 0:
            raise ValidationError("tau_end must be positive")
        if self.model == "two-level":
            object.__setattr__(self, "variant", bloch.canonical_variant(self.variant))
            if self.rho_bar <= 0:
                raise ValidationError("the two-level model needs rho_bar > 0")
        if self.model == "classical":
            if self.n_particles < 1:
                raise ValidationError("n_particles must be >= 1")
            if self.placement not in classical.PLACEMENTS:
                raise ValidationError(f"unknown placement {self.placement!r}")
        self.params  # validates rho_bar and delta

    @property
    def params(self) -> ScaledParams:
        return ScaledParams(self.rho_bar, self.delta)

    def quantum_ladder(self) -> tuple[int, int]:
        return self.ladder if self.ladder is not None else quantum.default_ladder(self.n0, self.rho_bar)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["a0"] = [self.a0.real, self.a0.imag]
        d["ladder"] = list(self.ladder) if self.ladder is not None else None
        return {"schema": CONFIG_SCHEMA, "version": CONFIG_VERSION, **d}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        schema = data.pop("schema", CONFIG_SCHEMA)
        version = data.pop("version", CONFIG_VERSION)
        if schema != CONFIG_SCHEMA or version != CONFIG_VERSION:
            raise ValidationError(f"unsupported config schema {schema!r} version {version!r}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config fields: {', '.join(unknown)}")
        if isinstance(data.get("integrator"), dict):
            integ = dict(data["integrator"])
            bad = sorted(set(integ) - {f.name for f in fields(IntegratorConfig)})
            if bad:
                raise ValidationError(f"unknown integrator fields: {', '.join(bad)}")
            data["integrator"] = IntegratorConfig(**integ)
        return cls(**data)

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must hold a JSON object")
    return RunConfig.from_dict(data)


def resolve_output_dir(flag: str | None = None, config_out: str | None = None) -> Path:
    """``--out`` beats the environment variable, which beats the config file."""
    for candidate in (flag, os.environ.get(OUTPUT_ENV), config_out):
        if candidate:
            return Path(candidate)
    return Path(DEFAULT_OUTPUT)


@dataclass
class RunResult:
    config: RunConfig
    series: TimeSeries
    trajectory: Any


def _series(tau, field_a, rho_bar, mean_pbar, norm) -> TimeSeries:
    s = TimeSeries(np.asarray(tau, float), np.asarray(field_a, complex), rho_bar, np.asarray(mean_pbar, float), np.asarray(norm, float))
    with np.errstate(over="ignore", invalid="ignore"):
        bad = ~(np.isfinite(s.intensity) & np.isfinite(s.invariant) & np.isfinite(s.norm))
    if np.any(bad):
        i = int(np.argmax(bad))
        last = (float(s.tau[i - 1]), None) if i > 0 else None
        raise NumericalAbort(f"observables overflowed at tau={s.tau[i]:.6g}", last)
    return s


def initial_wigner(cfg: RunConfig) -> wigner.WignerGrid:
    ladder = cfg.quantum_ladder()
    s0 = quantum.init_momentum_state(cfg.n0, ladder, cfg.a0)
    m = cfg.grid_m if cfg.grid_m is not None else wigner.default_grid_size(*ladder)
    return wigner.wigner_from_state(s0, m, cfg.params)


def _run_two_level(cfg: RunConfig) -> RunResult:
    p = cfg.params
    root = math.sqrt(p.rho_bar)
    b0 = bloch.BlochState.ground(cfg.n0, p, root * cfg.a0, cfg.phi0)
    integ = cfg.integrator.with_(dt=cfg.integrator.dt * root, output_stride=cfg.integrator.output_stride * root)
    traj = bloch.evolve_bloch(b0, integ, root * cfg.tau_end, cfg.variant)
    tau = traj.tau_prime / root
    field_a = traj.field_aprime / root * np.exp(1j * p.detuning_rate * tau)
    mean_pbar = (2 * cfg.n0 - 1 + traj.D) / p.rho_bar
    return RunResult(cfg, _series(tau, field_a, p.rho_bar, mean_pbar, np.ones_like(tau)), traj)


def run_model(cfg: RunConfig, keep_grids: bool = False) -> RunResult:
    """Run ``cfg.model`` from its default initial state to ``cfg.tau_end``."""
    p = cfg.params
    integ = cfg.integrator
    if cfg.model == "classical":
        s0 = classical.init_cold_beam(cfg.n_particles, cfg.a0, cfg.placement, cfg.seed)
        traj = classical.evolve_classical(s0, p, integ, cfg.tau_end)
        series = _series(traj.tau, traj.field, p.rho_bar, traj.mean_pbar, np.ones_like(traj.tau))
        return RunResult(cfg, series, traj)
    if cfg.model in ("quantum-c", "quantum-rho"):
        s0 = quantum.init_momentum_state(cfg.n0, cfg.quantum_ladder(), cfg.a0)
        if cfg.model == "quantum-rho":
            s0 = quantum.to_density(s0)
        traj = quantum.evolve(s0, p, integ, cfg.tau_end)
        return RunResult(cfg, _series(traj.tau, traj.field, p.rho_bar, traj.mean_pbar, traj.norm), traj)
    if cfg.model in ("wigner", "vlasov"):
        traj = wigner.evolve_wigner(initial_wigner(cfg), p, integ, cfg.tau_end, cfg.model, cfg.derivative, keep_values=keep_grids)
        return RunResult(cfg, _series(traj.tau, traj.field, p.rho_bar, traj.mean_pbar, traj.norm), traj)
    return _run_two_level(cfg)


def compare_models(a: RunResult, b: RunResult, threshold: float | None = None, window_end: float | None = None) -> Comparison:
    """Distances of ``a`` from the reference run ``b`` up to ``b``'s first peak."""
    for name in ("rho_bar", "delta", "a0"):
        if getattr(a.config, name) != getattr(b.config, name):
            raise ValidationError(f"runs differ in {name}: {getattr(a.config, name)} vs {getattr(b.config, name)}")
    return compare_series(
        a.series.tau,
        a.series.as_series(),
        b.series.tau,
        b.series.as_series(),
        a.config.model,
        b.config.model,
        threshold,
        window_end=window_end,
    )


def drift(values) -> float:
    """Largest departure from the first sample."""
    values = np.asarray(values)
    return float(np.max(np.abs(values - values[0])))
