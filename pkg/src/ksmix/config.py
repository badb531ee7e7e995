"""Run configuration: a small line-based key = value format with sections.

Unknown keys are hard errors that name the offending line, so a typo in
an experiment file can never silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

__all__ = [
    "GridSpec",
    "InitialSpec",
    "FlowConfig",
    "StepperSpec",
    "DetectorSpec",
    "ScenarioSpec",
    "RunConfig",
    "ConfigError",
    "parse_config",
    "serialize_config",
]

SCENARIOS = (
    "RUN",
    "BLOWUP_BASELINE",
    "SUPPRESSION_SWEEP",
    "RELAXATION_RATE",
    "APPROXIMATION_CHECK",
    "MIXING_BENCH",
    "INEQ_SUITE",
)

INITIAL_KINDS = ("constant", "bump", "sine", "random", "bump_plus_noise")
FLOW_KINDS = ("zero", "shear", "cellular", "mixer")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    dim: int = 2
    n: int = 128


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "constant"
    mass: float = 1.0
    radius: float = 0.05  # bump width
    amplitude: float = 0.1  # sine / noise deviation size
    decay: float = 3.0  # spectral decay of the random field


@dataclass(frozen=True)
class FlowConfig:
    kind: str = "zero"
    m: int = 1  # shear / cellular frequency
    t_switch: float = 0.1  # shear alternation interval
    levels: int = 4  # mixer stages
    per_level_time: float = 13.4
    cycles: int = 4  # rotate/shift sub-cycles per stage
    repeats: int = 1
    mollify_delta: float = 0.0  # 0 disables mollification


@dataclass(frozen=True)
class StepperSpec:
    dt_max: float = 1e-3
    cfl: float = 0.5
    dealias_fraction: float = 2.0 / 3.0
    negative_tolerance: float = 1e-8
    hyperdiffusion_for_transport: float = 0.0
    enable_chemotaxis: bool = True
    enable_advection: bool = True


@dataclass(frozen=True)
class DetectorSpec:
    criterion_cap: float = 1e4
    h1_cap: float = 1e6
    tail_cap: float = 0.1
    neg_cap: float = 1e-3


@dataclass(frozen=True)
class ScenarioSpec:
    name: str = "RUN"
    seed: int = 0
    horizon: float = 1.0
    amplitudes: tuple[float, ...] = (0.0,)
    b: float = 1.0  # deviation level B for the threshold machinery
    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 10.0
    fit_delay: float = 0.1  # transient skipped before the rate fit
    tau_phys: float = 1.0  # fixed flow-time budget: window = tau_phys / A
    eps_targets: tuple[float, ...] = (0.25, 0.125, 0.0625)
    ensemble_size: int = 1000
    diag_stride: int = 10
    projection_n: int = 1


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec = GridSpec()
    initial: InitialSpec = InitialSpec()
    flow: FlowConfig = FlowConfig()
    stepper: StepperSpec = StepperSpec()
    detector: DetectorSpec = DetectorSpec()
    scenario: ScenarioSpec = ScenarioSpec()

    def __post_init__(self) -> None:
        if self.scenario.name not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario.name!r}")
        if self.initial.kind not in INITIAL_KINDS:
            raise ConfigError(f"unknown initial kind {self.initial.kind!r}")
        if self.flow.kind not in FLOW_KINDS:
            raise ConfigError(f"unknown flow kind {self.flow.kind!r}")
        amps = self.scenario.amplitudes
        if len(amps) == 0:
            raise ConfigError("amplitudes must be nonempty")
        if any(b < a for a, b in zip(amps, amps[1:])):
            raise ConfigError("amplitudes must be sorted ascending")


_SECTIONS: dict[str, type] = {
    "grid": GridSpec,
    "initial": InitialSpec,
    "flow": FlowConfig,
    "stepper": StepperSpec,
    "detector": DetectorSpec,
    "scenario": ScenarioSpec,
}

# [scenario] uses "scenario = NAME" rather than "name = NAME" in files
_FIELD_ALIASES = {("scenario", "scenario"): "name"}


def _parse_value(raw: str, ftype, section: str, key: str, lineno: int):
    raw = raw.strip()
    try:
        if ftype is int:
            return int(raw)
        if ftype is float:
            return float(raw)
        if ftype is bool:
            if raw in ("true", "false"):
                return raw == "true"
            raise ValueError("expected true or false")
        if ftype is str:
            return raw
        # remaining fields are comma-separated float tuples
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(
            f"line {lineno}: bad value for [{section}] {key}: {exc}"
        ) from None


def parse_config(text: str) -> RunConfig:
    """Parse the key = value format into a validated RunConfig."""
    values: dict[str, dict] = {name: {} for name in _SECTIONS}
    section: str | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        fname = _FIELD_ALIASES.get((section, key), key)
        cls = _SECTIONS[section]
        ftypes = {f.name: f.type for f in fields(cls)}
        if fname not in ftypes:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if fname in values[section]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{section}]")
        ftype = {"int": int, "float": float, "bool": bool, "str": str}.get(
            ftypes[fname], tuple
        )
        values[section][fname] = _parse_value(raw, ftype, section, key, lineno)
    try:
        parts = {name: cls(**values[name]) for name, cls in _SECTIONS.items()}
        return RunConfig(**parts)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    """Render a config back to text; parse_config of the result is equal."""
    lines: list[str] = []
    for name, cls in _SECTIONS.items():
        lines.append(f"[{name}]")
        part = getattr(cfg, name)
        for f in fields(cls):
            key = f.name
            for (sec, alias), fname in _FIELD_ALIASES.items():
                if sec == name and fname == f.name:
                    key = alias
            lines.append(f"{key} = {_format_value(getattr(part, f.name))}")
        lines.append("")
    return "\n".join(lines)


def override(cfg: RunConfig, *, resolution: int | None = None, seed: int | None = None) -> RunConfig:
    """Apply CLI-level overrides without touching the rest of the config."""
    if resolution is not None:
        cfg = dataclasses.replace(cfg, grid=dataclasses.replace(cfg.grid, n=resolution))
    if seed is not None:
        cfg = dataclasses.replace(
            cfg, scenario=dataclasses.replace(cfg.scenario, seed=seed)
        )
    return cfg
