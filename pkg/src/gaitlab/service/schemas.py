"""Request/response models of the HTTP service.

Requests are composed of the same validated sections the TOML scenario
files use, so a config file maps onto a request without translation.
"""

from pydantic import BaseModel, ConfigDict, Field

from ..config import (
    AppendixCSection,
    ControllerSection,
    EigenSection,
    FullConfig,
    GaitSection,
    ModelSection,
    PushSection,
    SimSection,
    SpeedSection,
    SweepSection,
    ViableSection,
)


class _Req(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())


class GaitRequest(_Req):
    model: ModelSection = Field(default_factory=ModelSection)
    gait: GaitSection = Field(default_factory=GaitSection)

    @classmethod
    def from_config(cls, cfg: FullConfig) -> "GaitRequest":
        return cls(model=cfg.model, gait=cfg.gait)


class GaitResponse(BaseModel):
    period_s: float
    frequency_hz: float
    speed_mps: float
    dbar: float
    residual: float
    qbar: list[float]
    ubar: list[float]
    csv: str


class SimulateRequest(_Req):
    model: ModelSection = Field(default_factory=ModelSection)
    gait: GaitSection = Field(default_factory=GaitSection)
    controller: ControllerSection = Field(default_factory=ControllerSection)
    sim: SimSection = Field(default_factory=SimSection)
    push: list[PushSection] = Field(default_factory=list)
    speed: list[SpeedSection] = Field(default_factory=list)

    @classmethod
    def from_config(cls, cfg: FullConfig) -> "SimulateRequest":
        return cls(model=cfg.model, gait=cfg.gait, controller=cfg.controller,
                   sim=cfg.sim, push=cfg.push, speed=cfg.speed)


class SimulateResponse(BaseModel):
    controller: str
    n_steps_completed: int
    fall: bool
    fall_step: int
    max_err_norm: float
    final_err_norm: float
    step_speeds_mps: list[float]
    step_du_rms: list[float]
    csv: str


class EigenRequest(_Req):
    model: ModelSection = Field(default_factory=ModelSection)
    controller: ControllerSection = Field(default_factory=ControllerSection)
    eigen: EigenSection = Field(default_factory=EigenSection)

    @classmethod
    def from_config(cls, cfg: FullConfig) -> "EigenRequest":
        return cls(model=cfg.model, controller=cfg.controller, eigen=cfg.eigen)


class EigenResponse(BaseModel):
    frequencies_hz: list[float]
    rows: dict[str, list[list[float]]]     # controller -> per-f magnitudes
    csv: str


class PushSweepRequest(_Req):
    model: ModelSection = Field(default_factory=ModelSection)
    gait: GaitSection = Field(default_factory=GaitSection)
    controller: ControllerSection = Field(default_factory=ControllerSection)
    sim: SimSection = Field(default_factory=SimSection)
    sweep: SweepSection = Field(default_factory=SweepSection)

    @classmethod
    def from_config(cls, cfg: FullConfig) -> "PushSweepRequest":
        return cls(model=cfg.model, gait=cfg.gait, controller=cfg.controller,
                   sim=cfg.sim, sweep=cfg.sweep)


class PushSweepResponse(BaseModel):
    controllers: list[str]
    start_pcts: list[float]
    end_pcts: list[float]
    csv: str


class ViableRequest(_Req):
    model: ModelSection = Field(default_factory=ModelSection)
    gait: GaitSection = Field(default_factory=GaitSection)
    controller: ControllerSection = Field(default_factory=ControllerSection)
    viable: ViableSection = Field(default_factory=ViableSection)

    @classmethod
    def from_config(cls, cfg: FullConfig) -> "ViableRequest":
        return cls(model=cfg.model, gait=cfg.gait, controller=cfg.controller,
                   viable=cfg.viable)


class ViableResponse(BaseModel):
    rays: int
    plane: str
    nesting_ok: bool
    mean_alpha: dict[str, float]
    mean_alpha_f2: dict[str, float] | None
    csv: str


class AppendixCRequest(_Req):
    appendix_c: AppendixCSection = Field(default_factory=AppendixCSection)

    @classmethod
    def from_config(cls, cfg: FullConfig) -> "AppendixCRequest":
        return cls(appendix_c=cfg.appendix_c)


class AppendixCResponse(BaseModel):
    gamma_discrete: float
    gamma_continuous: float
    bound_lo: float
    bound_hi_event: float
    bound_hi_projection: float
    csv: str
