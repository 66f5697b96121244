import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence

import msgspec
import numpy as np

from dbs_placement.errors import InvalidParameterError
from dbs_placement.scenario import Grid, index_to_cell
from dbs_placement.serializers.msgspec import deserialize_msgpack, serialize_msgpack

logger = logging.getLogger(__name__)

REPORT_COLUMNS = (
    'slot', 'method', 'objective', 'rho_m', 'rho_d', 'tau_m', 'tau_d',
    'dbs_location_col', 'dbs_location_row', 'coverage_size', 'feasible',
)


class MethodOutcome(msgspec.Struct, frozen=True):
    method: str
    objective: float
    rho_m: float
    rho_d: float
    tau_m: float
    tau_d: float
    feasible: bool
    dbs_location: int | None = None
    coverage: list[int] = msgspec.field(default_factory=list)
    reason: str | None = None
    user_latency_ratio: float = 0.0


class SlotReport(msgspec.Struct, frozen=True):
    slot: int
    outcomes: list[MethodOutcome]

    @property
    def feasible(self) -> bool:
        return all(outcome.feasible for outcome in self.outcomes)


def _number(value: float) -> str:
    return repr(float(value))


def emit_heatmap(field: Sequence[float] | np.ndarray, grid: Grid, path: Path | str) -> tuple[Path, Path]:
    """
    Write `field` as ``<path>.csv`` (raw values) and ``<path>.pgm`` (8-bit min-max scaled, north up).
    """
    values = np.asarray(field, dtype=float)

    if values.shape != (grid.location_count,):
        raise InvalidParameterError(f'Heatmap field has {values.size} values, grid has {grid.location_count}')

    path = Path(path)
    csv_path = path.with_suffix('.csv')
    pgm_path = path.with_suffix('.pgm')

    with csv_path.open('w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(('col', 'row', 'value'))

        for i, value in enumerate(values):
            col, row = index_to_cell(i, grid)
            writer.writerow((col, row, _number(value)))

    finite = np.isfinite(values)
    pixels = np.full(values.shape, 255, dtype=np.uint8)

    if finite.any():
        low, high = values[finite].min(), values[finite].max()

        if high > low:
            pixels[finite] = np.rint((values[finite] - low) / (high - low) * 255).astype(np.uint8)
        else:
            pixels[finite] = 0

    image = pixels.reshape(grid.height_cells, grid.width_cells)[::-1]
    header = f'P5\n{grid.width_cells} {grid.height_cells}\n255\n'.encode('ascii')
    pgm_path.write_bytes(header + image.tobytes())
    logger.debug(f'Wrote heatmap {csv_path} and {pgm_path}')

    return csv_path, pgm_path


def read_heatmap_csv(path: Path | str, grid: Grid) -> np.ndarray:
    values = np.zeros(grid.location_count)

    with Path(path).open(newline='', encoding='utf-8') as f:
        for record in csv.DictReader(f):
            values[int(record['row']) * grid.width_cells + int(record['col'])] = float(record['value'])

    return values


def report_rows(reports: Iterable[SlotReport], grid: Grid) -> Iterable[tuple]:
    for report in reports:
        for outcome in report.outcomes:
            if outcome.dbs_location is None:
                col = row = ''
            else:
                col, row = index_to_cell(outcome.dbs_location, grid)

            yield (
                report.slot, outcome.method, _number(outcome.objective), _number(outcome.rho_m),
                _number(outcome.rho_d), _number(outcome.tau_m), _number(outcome.tau_d), col, row,
                len(outcome.coverage), 'true' if outcome.feasible else 'false',
            )


def write_report_csv(reports: Sequence[SlotReport], grid: Grid, path: Path | str) -> Path:
    path = Path(path)

    with path.open('w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(report_rows(sorted(reports, key=lambda report: report.slot), grid))

    return path


def write_snapshot(reports: Sequence[SlotReport], path: Path | str) -> Path:
    path = Path(path)
    path.write_bytes(serialize_msgpack(list(reports)))

    return path


def read_snapshot(path: Path | str) -> list[SlotReport]:
    return deserialize_msgpack(Path(path).read_bytes(), data_type=list[SlotReport])
