import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from dbs_placement.errors import InvalidParameterError
from dbs_placement.scenario import Grid, Scenario, cell_center, check_index, index_to_cell

MIN_DISTANCE = 1.0


class PathLossModel(BaseModel):
    """
    Log-distance path loss ``alpha + gamma * log10(d)`` in dB, d in meters.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    alpha: float = Field(gt=0)
    gamma: float


class RadioParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    mbs_tx_power: float = 46.0
    dbs_tx_power: float = 24.0
    mbs_bandwidth: float = Field(default=15e6, gt=0)
    dbs_bandwidth: float = Field(default=5e6, gt=0)
    mbs_pathloss: PathLossModel = PathLossModel(alpha=103.4, gamma=2.42)
    dbs_pathloss: PathLossModel = PathLossModel(alpha=103.8, gamma=2.09)
    noise_psd: float = -174.0
    mbs_interference: float = Field(default=0.0, ge=0)
    dbs_interference: float = Field(default=0.0, ge=0)
    dbs_height: float = Field(default=10.0, ge=0)


def dbm_to_watts(p):
    return 10 ** ((p - 30) / 10)


def noise_power(psd: float, bandwidth: float) -> float:
    if bandwidth <= 0:
        raise InvalidParameterError(f'Bandwidth must be positive, got {bandwidth}')

    return dbm_to_watts(psd + 10 * math.log10(bandwidth))


def path_loss_db(model: PathLossModel, d):
    return model.alpha + model.gamma * np.log10(np.maximum(d, MIN_DISTANCE))


def channel_gain(pl):
    return 10 ** (-pl / 10)


def sinr(tx_power: float, pl, noise_w: float, interference_w: float = 0.0):
    return dbm_to_watts(tx_power) * channel_gain(pl) / (noise_w + interference_w)


def shannon_rate(bandwidth: float, snr):
    # log1p keeps very weak links strictly positive
    return bandwidth * np.log1p(snr) / math.log(2)


def distance_3d(i: int, j: int, grid: Grid, h: float) -> float:
    x_i, y_i = cell_center(i, grid)
    x_j, y_j = cell_center(j, grid)

    return math.sqrt((x_i - x_j) ** 2 + (y_i - y_j) ** 2 + h ** 2)


def rate_mbs(i: int, scenario: Scenario, params: RadioParams) -> float:
    d = distance_3d(i, scenario.mbs_location, scenario.grid, 0.0)
    pl = path_loss_db(params.mbs_pathloss, d)
    noise = noise_power(params.noise_psd, params.mbs_bandwidth)

    return float(shannon_rate(params.mbs_bandwidth, sinr(params.mbs_tx_power, pl, noise, params.mbs_interference)))


def rate_dbs(i: int, j: int, scenario: Scenario, params: RadioParams) -> float:
    d = distance_3d(i, j, scenario.grid, params.dbs_height)
    pl = path_loss_db(params.dbs_pathloss, d)
    noise = noise_power(params.noise_psd, params.dbs_bandwidth)

    return float(shannon_rate(params.dbs_bandwidth, sinr(params.dbs_tx_power, pl, noise, params.dbs_interference)))


def mbs_rates(scenario: Scenario, params: RadioParams) -> np.ndarray:
    """
    rᵐᵢ for every location, MBS antenna at ground level.
    """
    grid = scenario.grid
    d = np.linalg.norm(grid.centers() - np.asarray(cell_center(scenario.mbs_location, grid)), axis=1)
    pl = path_loss_db(params.mbs_pathloss, d)
    noise = noise_power(params.noise_psd, params.mbs_bandwidth)

    return shannon_rate(params.mbs_bandwidth, sinr(params.mbs_tx_power, pl, noise, params.mbs_interference))


def dbs_rate_offsets(grid: Grid, params: RadioParams) -> np.ndarray:
    """
    DBS rate as a function of the (row, col) offset between MU and DBS.

    Entry ``[d_row + H - 1, d_col + W - 1]`` is the rate of an MU ``d_col`` columns and
    ``d_row`` rows away from the DBS.
    """
    d_cols = np.arange(-(grid.width_cells - 1), grid.width_cells) * grid.cell_size
    d_rows = np.arange(-(grid.height_cells - 1), grid.height_cells) * grid.cell_size
    d = np.sqrt(d_rows[:, None] ** 2 + d_cols[None, :] ** 2 + params.dbs_height ** 2)
    pl = path_loss_db(params.dbs_pathloss, d)
    noise = noise_power(params.noise_psd, params.dbs_bandwidth)

    return shannon_rate(params.dbs_bandwidth, sinr(params.dbs_tx_power, pl, noise, params.dbs_interference))


def dbs_rates_from(j: int, scenario: Scenario, params: RadioParams, offsets: np.ndarray | None = None) -> np.ndarray:
    """
    rᵈᵢⱼ for every location i with the DBS hovering over location j.
    """
    grid = scenario.grid
    check_index(j, grid)

    if offsets is None:
        offsets = dbs_rate_offsets(grid, params)

    col_j, row_j = index_to_cell(j, grid)
    index = np.arange(grid.location_count)
    d_cols = index % grid.width_cells - col_j
    d_rows = index // grid.width_cells - row_j

    return offsets[d_rows + grid.height_cells - 1, d_cols + grid.width_cells - 1]
