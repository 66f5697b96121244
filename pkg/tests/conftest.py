from pathlib import Path

import numpy as np
import pytest

from dbs_placement.energy import EnergyParams
from dbs_placement.radio import PathLossModel, RadioParams
from dbs_placement.scenario import DemandField, Grid, Scenario

SCENARIOS_DIR = Path(__file__).resolve().parent.parent / 'scenarios'


@pytest.fixture
def table_params() -> RadioParams:
    return RadioParams()


@pytest.fixture
def urban_params() -> RadioParams:
    return RadioParams(
        mbs_pathloss=PathLossModel(alpha=34.0, gamma=40.0),
        dbs_pathloss=PathLossModel(alpha=40.0, gamma=30.0),
    )


@pytest.fixture
def energy() -> EnergyParams:
    return EnergyParams()


@pytest.fixture
def grid_10x10() -> Grid:
    return Grid(width_cells=10, height_cells=10, cell_size=10.0)


@pytest.fixture
def single_cell_scenario():
    def factory(arrival_rate: float, mean_size: float = 1e5) -> Scenario:
        grid = Grid(width_cells=1, height_cells=1, cell_size=10.0)

        return Scenario(grid, 0, (DemandField([arrival_rate], [mean_size]),))

    return factory


@pytest.fixture
def random_scenario():
    """
    Random demand on a small grid of large cells, where the DBS beats the MBS far from the centre.
    """
    def factory(rng: np.random.Generator, width: int, height: int, cell_size: float = 150.0,
                max_rate: float = 20.0) -> Scenario:
        grid = Grid(width_cells=width, height_cells=height, cell_size=cell_size)
        arrival_rate = rng.uniform(0, max_rate, grid.location_count) * (rng.random(grid.location_count) < 0.8)
        mean_size = rng.uniform(5e4, 1.5e5, grid.location_count)

        return Scenario.centered(grid, [DemandField(arrival_rate, mean_size)])

    return factory


@pytest.fixture
def demand_csv(tmp_path):
    def factory(rows: list[str], name: str = 'demand.csv', header: bool = True) -> Path:
        path = tmp_path / name
        lines = (['col,row,arrival_rate,mean_size_bits'] if header else []) + rows
        path.write_text('\n'.join(lines) + ('\n' if lines else ''), encoding='utf-8')

        return path

    return factory


@pytest.fixture
def quickstart_config_path() -> Path:
    return SCENARIOS_DIR / 'quickstart.toml'


@pytest.fixture
def default_config_path() -> Path:
    return SCENARIOS_DIR / 'default.toml'
