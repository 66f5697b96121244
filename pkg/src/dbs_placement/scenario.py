import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dbs_placement.errors import DemandParseError, GridIndexError, InvalidParameterError
from dbs_placement.fs import iter_files

logger = logging.getLogger(__name__)

DEMAND_CSV_HEADER = ('col', 'row', 'arrival_rate', 'mean_size_bits')
DEFAULT_MEAN_SIZE = 1.0


class Grid(BaseModel):
    """
    Rectangular grid of equally sized locations, indexed row-major from zero.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    width_cells: int = Field(ge=1)
    height_cells: int = Field(ge=1)
    cell_size: float = Field(default=10.0, gt=0)
    origin: tuple[float, float] = (0.0, 0.0)

    @property
    def location_count(self) -> int:
        return self.width_cells * self.height_cells

    def centers(self) -> np.ndarray:
        """
        Cell centers of all locations as an (N, 2) array of meters.
        """
        index = np.arange(self.location_count)
        cols = index % self.width_cells
        rows = index // self.width_cells

        return np.column_stack((
            self.origin[0] + (cols + 0.5) * self.cell_size,
            self.origin[1] + (rows + 0.5) * self.cell_size,
        ))


def check_index(i: int, grid: Grid) -> int:
    if not 0 <= i < grid.location_count:
        raise GridIndexError(f'Location index {i} outside grid of {grid.location_count} locations')

    return int(i)


def location_index(col: int, row: int, grid: Grid) -> int:
    if not 0 <= col < grid.width_cells or not 0 <= row < grid.height_cells:
        raise GridIndexError(f'Cell ({col}, {row}) outside {grid.width_cells}x{grid.height_cells} grid')

    return row * grid.width_cells + col


def index_to_cell(i: int, grid: Grid) -> tuple[int, int]:
    check_index(i, grid)
    row, col = divmod(int(i), grid.width_cells)

    return col, row


def cell_center(i: int, grid: Grid) -> tuple[float, float]:
    col, row = index_to_cell(i, grid)

    return (
        grid.origin[0] + (col + 0.5) * grid.cell_size,
        grid.origin[1] + (row + 0.5) * grid.cell_size,
    )


def neighbors4(i: int, grid: Grid) -> frozenset[int]:
    col, row = index_to_cell(i, grid)
    result = set()

    for d_col, d_row in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        n_col, n_row = col + d_col, row + d_row

        if 0 <= n_col < grid.width_cells and 0 <= n_row < grid.height_cells:
            result.add(n_row * grid.width_cells + n_col)

    return frozenset(result)


@dataclass(frozen=True)
class DemandField:
    arrival_rate: np.ndarray
    mean_size: np.ndarray

    def __post_init__(self):
        arrival_rate = np.array(self.arrival_rate, dtype=float)
        mean_size = np.array(self.mean_size, dtype=float)

        if arrival_rate.ndim != 1 or arrival_rate.shape != mean_size.shape:
            raise InvalidParameterError('arrival_rate and mean_size must be 1-D arrays of equal length')

        if not np.all(np.isfinite(arrival_rate)) or np.any(arrival_rate < 0):
            raise InvalidParameterError('arrival_rate must be finite and non-negative')

        if not np.all(np.isfinite(mean_size)) or np.any(mean_size <= 0):
            raise InvalidParameterError('mean_size must be finite and positive')

        arrival_rate.flags.writeable = False
        mean_size.flags.writeable = False
        object.__setattr__(self, 'arrival_rate', arrival_rate)
        object.__setattr__(self, 'mean_size', mean_size)

    def __len__(self) -> int:
        return len(self.arrival_rate)

    @property
    def offered_load(self) -> np.ndarray:
        """
        Offered traffic per location, λᵢνᵢ in bits per second.
        """
        return self.arrival_rate * self.mean_size

    @classmethod
    def zeros(cls, size: int) -> 'DemandField':
        return cls(np.zeros(size), np.full(size, DEFAULT_MEAN_SIZE))

    def scaled(self, factor: float) -> 'DemandField':
        return DemandField(self.arrival_rate * factor, self.mean_size)


@dataclass(frozen=True)
class Scenario:
    grid: Grid
    mbs_location: int
    demand_per_slot: tuple[DemandField, ...]

    def __post_init__(self):
        object.__setattr__(self, 'demand_per_slot', tuple(self.demand_per_slot))
        check_index(self.mbs_location, self.grid)

        if not self.demand_per_slot:
            raise InvalidParameterError('Scenario needs at least one demand slot')

        for slot, field in enumerate(self.demand_per_slot):
            if len(field) != self.grid.location_count:
                raise InvalidParameterError(
                    f'Slot {slot} demand has {len(field)} locations, grid has {self.grid.location_count}'
                )

    @property
    def slot_count(self) -> int:
        return len(self.demand_per_slot)

    def demand(self, slot: int = 0) -> DemandField:
        try:
            return self.demand_per_slot[slot]
        except IndexError:
            raise GridIndexError(f'Slot {slot} outside scenario of {self.slot_count} slots') from None

    def with_demand(self, *fields: DemandField) -> 'Scenario':
        return Scenario(self.grid, self.mbs_location, fields)

    @classmethod
    def centered(cls, grid: Grid, demand_per_slot: Sequence[DemandField]) -> 'Scenario':
        """
        Scenario with the MBS in the central cell of the grid.
        """
        mbs_location = location_index(grid.width_cells // 2, grid.height_cells // 2, grid)

        return cls(grid, mbs_location, tuple(demand_per_slot))


class Hotspot(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    center: tuple[float, float]
    spread: float = Field(gt=0)
    peak_rate: float = Field(ge=0)


class HotspotTrack(BaseModel):
    """
    Hotspot drifting linearly from `start` to `end` across the slots.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    start: tuple[float, float]
    end: tuple[float, float] | None = None
    spread: float = Field(gt=0)
    start_peak: float = Field(ge=0)
    end_peak: float | None = Field(default=None, ge=0)

    def at(self, fraction: float) -> Hotspot:
        end = self.end if self.end is not None else self.start
        end_peak = self.end_peak if self.end_peak is not None else self.start_peak

        return Hotspot(
            center=(
                self.start[0] + fraction * (end[0] - self.start[0]),
                self.start[1] + fraction * (end[1] - self.start[1]),
            ),
            spread=self.spread,
            peak_rate=self.start_peak + fraction * (end_peak - self.start_peak),
        )


class HotspotSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    slots: list[list[Hotspot]] = Field(default_factory=list)
    tracks: list[HotspotTrack] = Field(default_factory=list)
    slot_count: int | None = Field(default=None, ge=1)
    background_rate: float = Field(default=0.0, ge=0)
    mean_size: float = Field(default=1e5, gt=0)
    seed: int = 0
    user_sampling: bool = False
    per_user_rate: float = Field(default=0.15, gt=0)

    @model_validator(mode='after')
    def check_slot_count(self) -> 'HotspotSpec':
        if self.slots and self.slot_count is not None and self.slot_count != len(self.slots):
            raise ValueError(f'slot_count={self.slot_count} but {len(self.slots)} slot lists given')

        if not self.slots and self.slot_count is None:
            raise ValueError('slot_count is required when no explicit slots are given')

        return self

    @property
    def resolved_slot_count(self) -> int:
        return len(self.slots) if self.slots else self.slot_count

    def per_slot(self) -> list[list[Hotspot]]:
        count = self.resolved_slot_count
        result = []

        for slot in range(count):
            fraction = slot / (count - 1) if count > 1 else 0.0
            hotspots = list(self.slots[slot]) if self.slots else []
            hotspots.extend(track.at(fraction) for track in self.tracks)
            result.append(hotspots)

        return result


def generate_synthetic(spec: HotspotSpec, grid: Grid) -> list[DemandField]:
    centers = grid.centers()
    rng = np.random.default_rng(spec.seed)
    mean_size = np.full(grid.location_count, spec.mean_size)
    fields = []

    for slot, hotspots in enumerate(spec.per_slot()):
        rate = np.full(grid.location_count, spec.background_rate)

        for hotspot in hotspots:
            squared = np.sum((centers - np.asarray(hotspot.center)) ** 2, axis=1)
            rate += hotspot.peak_rate * np.exp(-squared / (2 * hotspot.spread ** 2))

        if spec.user_sampling:
            users = rng.poisson(rate / spec.per_user_rate)
            rate = users * spec.per_user_rate

        logger.debug(f'Generated slot {slot}: {len(hotspots)} hotspots, total rate {rate.sum():.3f} req/s')
        fields.append(DemandField(rate, mean_size))

    return fields


def load_demand_csv(path: Path | str, grid: Grid) -> DemandField:
    path = Path(path)
    arrival_rate = np.zeros(grid.location_count)
    mean_size = np.full(grid.location_count, DEFAULT_MEAN_SIZE)
    seen = {}

    with path.open(newline='', encoding='utf-8') as f:
        reader = csv.reader(f)

        for row in reader:
            line = reader.line_num

            if not row or all(not cell.strip() for cell in row):
                continue

            if line == 1 and tuple(cell.strip() for cell in row) == DEMAND_CSV_HEADER:
                continue

            if len(row) != len(DEMAND_CSV_HEADER):
                raise DemandParseError(path, line, f'expected {len(DEMAND_CSV_HEADER)} columns, got {len(row)}')

            try:
                col, cell_row = int(row[0]), int(row[1])
                rate, size = float(row[2]), float(row[3])
            except ValueError as e:
                raise DemandParseError(path, line, str(e)) from e

            try:
                i = location_index(col, cell_row, grid)
            except GridIndexError as e:
                raise InvalidParameterError(f'{path}:{line}: {e}') from e

            if i in seen:
                raise InvalidParameterError(f'{path}:{line}: duplicate cell ({col}, {cell_row}), first on line {seen[i]}')

            if not np.isfinite(rate) or rate < 0 or not np.isfinite(size) or size <= 0:
                raise InvalidParameterError(f'{path}:{line}: arrival_rate must be >= 0 and mean_size_bits > 0')

            seen[i] = line
            arrival_rate[i] = rate
            mean_size[i] = size

    logger.debug(f'Loaded {len(seen)} demand cells from {path}')

    return DemandField(arrival_rate, mean_size)


def load_demand_dir(root: Path | str, grid: Grid) -> list[DemandField]:
    return [load_demand_csv(path, grid) for path in iter_files(Path(root), recursive=False, suffix='.csv')]


def dump_demand_csv(field: DemandField, grid: Grid, path: Path | str):
    with Path(path).open('w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(DEMAND_CSV_HEADER)

        for i in np.flatnonzero(field.arrival_rate > 0):
            col, row = index_to_cell(int(i), grid)
            writer.writerow((col, row, repr(float(field.arrival_rate[i])), repr(float(field.mean_size[i]))))
