import logging
from pathlib import Path
from typing import Any, Literal, TypeVar

import msgspec
from pydantic import BaseModel, ConfigDict, DirectoryPath, Field, FilePath, ValidationError, model_validator

from dbs_placement.energy import EnergyParams
from dbs_placement.errors import ConfigError, GridIndexError
from dbs_placement.radio import PathLossModel, RadioParams
from dbs_placement.scenario import (
    DemandField, Grid, HotspotSpec, Scenario, generate_synthetic, load_demand_csv, load_demand_dir, location_index,
)

logger = logging.getLogger(__name__)

Method = Literal['leap', 'smbs', 'ssc']
LocationRef = int | tuple[int, int]


class RadioConfig(BaseModel):
    """
    Radio parameters with one bandwidth total; the MBS keeps what the DBS does not use.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    mbs_tx_power: float = 46.0
    dbs_tx_power: float = 24.0
    total_bandwidth: float = Field(default=20e6, gt=0)
    dbs_bandwidth: float = Field(default=5e6, gt=0)
    mbs_pathloss: PathLossModel = PathLossModel(alpha=103.4, gamma=2.42)
    dbs_pathloss: PathLossModel = PathLossModel(alpha=103.8, gamma=2.09)
    noise_psd: float = -174.0
    mbs_interference: float = Field(default=0.0, ge=0)
    dbs_interference: float = Field(default=0.0, ge=0)
    dbs_height: float = Field(default=10.0, ge=0)

    @model_validator(mode='after')
    def check_bandwidth_split(self) -> 'RadioConfig':
        if self.dbs_bandwidth >= self.total_bandwidth:
            raise ValueError('dbs_bandwidth must be smaller than total_bandwidth')

        return self

    def _params(self, mbs_bandwidth: float) -> RadioParams:
        return RadioParams(
            mbs_tx_power=self.mbs_tx_power,
            dbs_tx_power=self.dbs_tx_power,
            mbs_bandwidth=mbs_bandwidth,
            dbs_bandwidth=self.dbs_bandwidth,
            mbs_pathloss=self.mbs_pathloss,
            dbs_pathloss=self.dbs_pathloss,
            noise_psd=self.noise_psd,
            mbs_interference=self.mbs_interference,
            dbs_interference=self.dbs_interference,
            dbs_height=self.dbs_height,
        )

    def split_params(self) -> RadioParams:
        return self._params(self.total_bandwidth - self.dbs_bandwidth)

    def full_band_params(self) -> RadioParams:
        return self._params(self.total_bandwidth)


class DemandConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    csv: list[FilePath] = Field(default_factory=list)
    csv_dir: DirectoryPath | None = None
    hotspots: HotspotSpec | None = None

    @model_validator(mode='after')
    def check_single_source(self) -> 'DemandConfig':
        sources = sum((bool(self.csv), self.csv_dir is not None, self.hotspots is not None))

        if sources != 1:
            raise ValueError('exactly one of csv, csv_dir or hotspots must be given')

        return self


class ValidationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    oracle_grid: int = Field(default=4, ge=1, le=4)
    queue_jobs: int = Field(default=100_000, ge=10)
    queue_rhos: list[float] = Field(default_factory=lambda: [0.3, 0.5, 0.7])
    kkt_pairs: int = Field(default=1000, ge=1)
    kkt_step: float = Field(default=1e-4, gt=0)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    grid: Grid
    mbs_location: LocationRef | None = None
    radio: RadioConfig = RadioConfig()
    energy: EnergyParams = EnergyParams()
    demand: DemandConfig
    methods: list[Method] = Field(default_factory=lambda: ['leap', 'smbs'], min_length=1)
    ssc_fixed_location: LocationRef | None = None
    output_dir: Path = Path('output')
    seed: int = 0
    validation: ValidationConfig = ValidationConfig()

    @model_validator(mode='after')
    def normalize_locations(self) -> 'ExperimentConfig':
        self.methods = list(dict.fromkeys(self.methods))

        if 'ssc' in self.methods and self.ssc_fixed_location is None:
            raise ValueError('ssc_fixed_location is required when the ssc method is requested')

        self.mbs_location = self._resolve(self.mbs_location, 'mbs_location')
        self.ssc_fixed_location = self._resolve(self.ssc_fixed_location, 'ssc_fixed_location')

        return self

    def _resolve(self, ref: LocationRef | None, name: str) -> int | None:
        if ref is None:
            return None

        try:
            if isinstance(ref, tuple):
                return location_index(ref[0], ref[1], self.grid)
            elif 0 <= ref < self.grid.location_count:
                return ref
        except GridIndexError:
            pass

        raise ValueError(f'{name}={ref} lies outside the {self.grid.width_cells}x{self.grid.height_cells} grid')


class _HotspotDemand(BaseModel):
    model_config = ConfigDict(extra='ignore')

    hotspots: HotspotSpec


class GeneratorConfig(BaseModel):
    """
    The part of a scenario file `generate` needs; other sections are ignored.
    """
    model_config = ConfigDict(extra='ignore')

    grid: Grid
    demand: _HotspotDemand


def _decode(path: Path) -> dict[str, Any]:
    if not path.is_file():
        raise ConfigError(f'Config file not found: {path}', 'path')

    try:
        return msgspec.toml.decode(path.read_bytes())
    except msgspec.DecodeError as e:
        raise ConfigError(f'Malformed TOML in {path}: {e}') from e


T = TypeVar('T', bound=BaseModel)


def _validate(model: type[T], raw: dict[str, Any]) -> T:
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        error = e.errors()[0]
        field = '.'.join(str(part) for part in error['loc']) or None

        raise ConfigError(error['msg'], field) from e


def _resolve_paths(raw: dict[str, Any], base: Path):
    def absolute(value: Any) -> Any:
        return str((base / value).resolve()) if isinstance(value, str) else value

    if isinstance(demand := raw.get('demand'), dict):
        if isinstance(demand.get('csv'), list):
            demand['csv'] = [absolute(item) for item in demand['csv']]

        if 'csv_dir' in demand:
            demand['csv_dir'] = absolute(demand['csv_dir'])

    if 'output_dir' in raw:
        raw['output_dir'] = absolute(raw['output_dir'])
    else:
        raw['output_dir'] = str((base / 'output').resolve())


def load_config(path: Path | str) -> ExperimentConfig:
    path = Path(path)
    raw = _decode(path)
    _resolve_paths(raw, path.parent)
    config = _validate(ExperimentConfig, raw)
    logger.debug(f'Loaded config {path}: grid {config.grid.width_cells}x{config.grid.height_cells}, '
                 f'methods {config.methods}')

    return config


def load_generator_config(path: Path | str) -> GeneratorConfig:
    return _validate(GeneratorConfig, _decode(Path(path)))


def dump_config(config: ExperimentConfig) -> bytes:
    return msgspec.toml.encode(config.model_dump(mode='json', exclude_none=True))


def defaults_document() -> bytes:
    document = {
        'radio': RadioConfig().model_dump(mode='json'),
        'energy': EnergyParams().model_dump(mode='json'),
        'methods': ['leap', 'smbs'],
        'seed': 0,
        'validation': ValidationConfig().model_dump(mode='json'),
    }

    return msgspec.toml.encode(document)


def build_scenario(config: ExperimentConfig) -> Scenario:
    grid = config.grid
    demand = config.demand

    if demand.hotspots is not None:
        fields = generate_synthetic(demand.hotspots, grid)
    elif demand.csv_dir is not None:
        fields = load_demand_dir(demand.csv_dir, grid)
    else:
        fields = [load_demand_csv(path, grid) for path in demand.csv]

    if not fields:
        raise ConfigError('demand source yields no slots', 'demand')

    if config.mbs_location is None:
        return Scenario.centered(grid, fields)

    return Scenario(grid, config.mbs_location, tuple(fields))


def demand_fields(config: GeneratorConfig) -> list[DemandField]:
    return generate_synthetic(config.demand.hotspots, config.grid)
