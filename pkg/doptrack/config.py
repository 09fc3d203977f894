import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from doptrack.detection import CafConfig, CancellerConfig
from doptrack.errors import ConfigError
from doptrack.scenario import ScenarioGeometry
from doptrack.signal import ChannelSpec
from doptrack.solver import SolverConfig
from doptrack.tracking import KalmanConfig
from doptrack.utils import units

Point = Tuple[float, float]
Mode = Literal["doppler-only", "full-signal"]


class Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TruthSection(Section):
    """Exactly one of ``shape``, ``waypoints`` or ``file``."""

    shape: Optional[Literal["V", "L", "U"]] = None
    waypoints: Optional[List[Point]] = None
    file: Optional[Path] = None
    speed: float = Field(default=2.0, gt=0)
    num_instants: int = Field(default=400, ge=2)
    step: float = Field(default=units.DEFAULT_STEP, gt=0)
    center: Point = (0.0, 0.0)
    heading: float = 0.0

    @model_validator(mode="after")
    def _one_source(self):
        given = [name for name in ("shape", "waypoints", "file") if getattr(self, name)]
        if len(given) != 1:
            raise ValueError(
                f"exactly one of shape, waypoints or file is required, got {given or 'none'}"
            )
        return self


class WaveformSection(Section):
    bandwidth: float = Field(default=units.DEFAULT_BANDWIDTH, gt=0)
    sample_rate: float = Field(default=units.DEFAULT_SAMPLE_RATE, gt=0)


class CancellerSection(Section):
    max_delay_taps: int = Field(default=8, ge=1)
    regularization: float = Field(default=1e-9, ge=0)
    block_length: Optional[int] = Field(default=None, ge=2)

    def to_config(self, window_samples: int) -> CancellerConfig:
        return CancellerConfig(
            max_delay_taps=self.max_delay_taps,
            block_length=self.block_length or window_samples,
            regularization=self.regularization,
        )


class CafSection(Section):
    window: float = Field(default=units.DEFAULT_WINDOW, gt=0)
    doppler_min: float = -250.0
    doppler_max: float = 250.0
    delay_grid: List[int] = Field(default_factory=lambda: [0])
    gamma: float = Field(default=1.5, gt=1)
    train_half_len: int = Field(default=8, ge=1)
    include_test_cell: bool = True

    def to_config(self, sample_rate: float, step: float) -> CafConfig:
        return CafConfig.from_durations(
            sample_rate,
            window=self.window,
            step=step,
            doppler_min=self.doppler_min,
            doppler_max=self.doppler_max,
            delay_grid=list(self.delay_grid),
            gamma=self.gamma,
            train_half_len=self.train_half_len,
            include_test_cell=self.include_test_cell,
        )


class MeasurementSection(Section):
    """Doppler-only mode: forward model plus noise, rounded to ``resolution``."""

    resolution: float = Field(default=2.0, ge=0)
    noise_std: float = Field(default=0.5, ge=0)
    smooth: bool = False


class OutputSection(Section):
    caf_maps: bool = False
    plots: bool = True


class RunConfig(Section):
    seed: int
    mode: Mode = "doppler-only"
    output_dir: Path = Path("out")
    signals_dir: Optional[Path] = None
    scenario: ScenarioGeometry
    truth: TruthSection
    waveform: WaveformSection = WaveformSection()
    channels: List[ChannelSpec] = Field(default_factory=list)
    canceller: CancellerSection = CancellerSection()
    caf: CafSection = CafSection()
    measurements: MeasurementSection = MeasurementSection()
    kalman: KalmanConfig = KalmanConfig()
    solver: SolverConfig = SolverConfig()
    outputs: OutputSection = OutputSection()

    @model_validator(mode="after")
    def _check_channels(self):
        if self.channels and len(self.channels) != self.scenario.num_receivers:
            raise ValueError(
                f"{len(self.channels)} channels given for {self.scenario.num_receivers} receivers"
            )
        return self

    def receiver_channels(self) -> List[ChannelSpec]:
        return list(self.channels) or [ChannelSpec() for _ in range(self.scenario.num_receivers)]

    def resolve_paths(self, base: Path) -> "RunConfig":
        def resolve(path: Optional[Path]) -> Optional[Path]:
            if path is None or path.is_absolute():
                return path
            return base / path

        truth = self.truth.model_copy(update={"file": resolve(self.truth.file)})
        return self.model_copy(
            update={
                "output_dir": resolve(self.output_dir),
                "signals_dir": resolve(self.signals_dir),
                "truth": truth,
            }
        )


def format_validation_error(path: Union[str, Path], error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {location}: {item['msg']}")
    return "\n".join(lines)


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Read and validate a JSON run configuration.

    Relative paths inside the file resolve against the file's directory.

    Raises
    ------
    ConfigError
        With ``path:line:col`` for JSON syntax errors and a dotted field
        location for schema errors.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as error:
        raise ConfigError(f"{path}: {error.strerror or error}") from error

    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError(f"{path}:{error.lineno}:{error.colno}: {error.msg}") from error

    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as error:
        raise ConfigError(format_validation_error(path, error)) from error

    cfg = cfg.resolve_paths(path.parent)
    if cfg.truth.file is not None and not cfg.truth.file.exists():
        raise ConfigError(f"{path}: truth.file: {cfg.truth.file} does not exist")
    if cfg.signals_dir is not None and not cfg.signals_dir.is_dir():
        raise ConfigError(f"{path}: signals_dir: {cfg.signals_dir} is not a directory")
    return cfg
