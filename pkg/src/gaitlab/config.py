"""Scenario configuration: TOML file schema shared with the service API.

Sections mirror the run-time objects one to one; unknown keys are
rejected. Units are part of the key names (kg, m, N, N·m, steps/s).
"""

import sys
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .models import BodyParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Section):
    kind: str = "3lp"
    mass_kg: float = 70.0
    height_m: float = 1.7
    leg_length_m: float | None = None
    pelvis_width_m: float | None = None

    def body_params(self) -> BodyParams:
        return BodyParams(
            mass=self.mass_kg, height=self.height_m,
            leg_length=self.leg_length_m, pelvis_width=self.pelvis_width_m,
        )


class GaitSection(_Section):
    frequency_hz: float = 2.0
    speed_mps: float = 1.0


class ControllerSection(_Section):
    kind: str = "projection"
    q_scale: float = 1.0
    r_scale: float = 1.0


class SimSection(_Section):
    substeps: int = 50
    n_steps: int = 10


class PushSection(_Section):
    phase: int = 0
    start_pct: float = 0.0
    end_pct: float = 0.5
    fx_n: float = 0.0
    fy_n: float = 0.0


class SpeedSection(_Section):
    step: int
    v_mps: float


class ViableSection(_Section):
    n_steps: int = 6
    subphases: int = 5
    torque_nm: float = 80.0
    diamond_m: float = 1.7
    rays: int = 100
    plane: str = "e2/e3"
    f2_hz: float | None = None      # optional second frequency for the trend table


class SweepSection(_Section):
    start_pcts: list[float] = Field(default_factory=lambda: [0.0, 0.2, 0.4, 0.6, 0.8])
    end_pcts: list[float] = Field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8, 1.0])
    fx_n: float = 40.0
    fy_n: float = 0.0
    n_events: int = 3


class EigenSection(_Section):
    f_min_hz: float = 0.8
    f_max_hz: float = 3.0
    f_step_hz: float = 0.2


class AppendixCSection(_Section):
    period_s: float = 1.0
    q_cost: float = 1.0
    r_cost: float = 1.0
    disturb_start_s: float = 1.2
    disturb_end_s: float = 1.4
    disturb_n: float = 1.0
    t_end_s: float = 6.0


class FullConfig(_Section):
    model: ModelSection = Field(default_factory=ModelSection)
    gait: GaitSection = Field(default_factory=GaitSection)
    controller: ControllerSection = Field(default_factory=ControllerSection)
    sim: SimSection = Field(default_factory=SimSection)
    push: list[PushSection] = Field(default_factory=list)
    speed: list[SpeedSection] = Field(default_factory=list)
    viable: ViableSection = Field(default_factory=ViableSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    eigen: EigenSection = Field(default_factory=EigenSection)
    appendix_c: AppendixCSection = Field(default_factory=AppendixCSection)


def load_config(path: str | Path) -> FullConfig:
    """Parse and validate one TOML scenario file."""
    try:
        raw = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return FullConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
