import numpy as np
import pytest
from pydantic import ValidationError

from dbs_placement.errors import DemandParseError, GridIndexError, InvalidParameterError
from dbs_placement.scenario import (
    DemandField, Grid, Hotspot, HotspotSpec, HotspotTrack, Scenario, cell_center, dump_demand_csv,
    generate_synthetic, index_to_cell, load_demand_csv, load_demand_dir, location_index, neighbors4,
)


def test_location_index(grid_10x10):
    assert location_index(0, 0, grid_10x10) == 0
    assert location_index(2, 1, grid_10x10) == 12
    assert location_index(9, 9, grid_10x10) == 99


@pytest.mark.parametrize('col, row', [(10, 0), (0, 10), (-1, 3)])
def test_location_index_out_of_range(grid_10x10, col, row):
    with pytest.raises(GridIndexError):
        location_index(col, row, grid_10x10)

    with pytest.raises(IndexError):
        location_index(col, row, grid_10x10)


def test_index_to_cell_inverts_location_index():
    grid = Grid(width_cells=7, height_cells=5)

    for row in range(5):
        for col in range(7):
            assert index_to_cell(location_index(col, row, grid), grid) == (col, row)


def test_cell_center(grid_10x10):
    assert cell_center(0, grid_10x10) == (5.0, 5.0)
    assert cell_center(12, grid_10x10) == (25.0, 15.0)
    assert cell_center(99, grid_10x10) == (95.0, 95.0)


def test_cell_center_with_origin():
    grid = Grid(width_cells=2, height_cells=2, cell_size=4.0, origin=(100.0, -8.0))

    assert cell_center(3, grid) == (106.0, -2.0)


def test_cell_center_invalid_index(grid_10x10):
    with pytest.raises(GridIndexError):
        cell_center(100, grid_10x10)


def test_grid_centers_match_cell_center():
    grid = Grid(width_cells=4, height_cells=3, cell_size=2.5, origin=(1.0, 2.0))
    centers = grid.centers()

    for i in range(grid.location_count):
        assert tuple(centers[i]) == cell_center(i, grid)


def test_neighbors4():
    grid = Grid(width_cells=3, height_cells=3)

    assert neighbors4(4, grid) == {1, 3, 5, 7}
    assert neighbors4(0, grid) == {1, 3}
    assert neighbors4(0, Grid(width_cells=1, height_cells=1)) == frozenset()


def test_neighbors4_symmetric_and_sized():
    grid = Grid(width_cells=6, height_cells=4)

    for i in range(grid.location_count):
        neighbors = neighbors4(i, grid)

        assert len(neighbors) in {2, 3, 4}

        for j in neighbors:
            assert i in neighbors4(j, grid)


def test_grid_rejects_invalid_geometry():
    with pytest.raises(ValidationError):
        Grid(width_cells=0, height_cells=3)

    with pytest.raises(ValidationError):
        Grid(width_cells=3, height_cells=3, cell_size=0)


def test_load_demand_csv(grid_10x10, demand_csv):
    field = load_demand_csv(demand_csv(['0,0,0.15,100000']), grid_10x10)

    assert field.arrival_rate[0] == 0.15
    assert field.mean_size[0] == 100000
    assert np.all(field.arrival_rate[1:] == 0)
    assert np.all(field.mean_size[1:] == 1.0)


def test_load_demand_csv_empty_file(grid_10x10, demand_csv):
    field = load_demand_csv(demand_csv([], header=False), grid_10x10)

    assert len(field) == 100
    assert not field.arrival_rate.any()


def test_load_demand_csv_duplicate_row(grid_10x10, demand_csv):
    with pytest.raises(InvalidParameterError, match='duplicate'):
        load_demand_csv(demand_csv(['1,1,0.1,1000', '1,1,0.2,1000']), grid_10x10)


def test_load_demand_csv_malformed_row_reports_line(grid_10x10, demand_csv):
    with pytest.raises(DemandParseError) as exc_info:
        load_demand_csv(demand_csv(['1,1,0.1,1000', '2,2,abc,1000']), grid_10x10)

    assert exc_info.value.line == 3


def test_load_demand_csv_outside_grid(grid_10x10, demand_csv):
    with pytest.raises(InvalidParameterError):
        load_demand_csv(demand_csv(['10,0,0.1,1000']), grid_10x10)


def test_demand_csv_round_trip(tmp_path, grid_10x10):
    spec = HotspotSpec(slots=[[Hotspot(center=(30.0, 40.0), spread=15.0, peak_rate=1.3)]], mean_size=98765.4321)
    field = generate_synthetic(spec, grid_10x10)[0]
    path = tmp_path / 'field.csv'
    dump_demand_csv(field, grid_10x10, path)
    loaded = load_demand_csv(path, grid_10x10)
    nonzero = field.arrival_rate > 0

    assert np.array_equal(loaded.arrival_rate, field.arrival_rate)
    assert np.array_equal(loaded.mean_size[nonzero], field.mean_size[nonzero])


def test_load_demand_dir_orders_slots_by_name(tmp_path, grid_10x10):
    (tmp_path / 'b.csv').write_text('col,row,arrival_rate,mean_size_bits\n0,0,2.0,10\n', encoding='utf-8')
    (tmp_path / 'a.csv').write_text('col,row,arrival_rate,mean_size_bits\n0,0,1.0,10\n', encoding='utf-8')
    (tmp_path / 'notes.txt').write_text('ignored', encoding='utf-8')
    fields = load_demand_dir(tmp_path, grid_10x10)

    assert [field.arrival_rate[0] for field in fields] == [1.0, 2.0]


def test_generate_synthetic_background_only(grid_10x10):
    fields = generate_synthetic(HotspotSpec(slot_count=2, background_rate=0.1), grid_10x10)

    assert len(fields) == 2
    assert np.all(fields[0].arrival_rate == 0.1)


def test_generate_synthetic_peak_at_hotspot_center(grid_10x10):
    k = 37
    spec = HotspotSpec(slots=[[Hotspot(center=cell_center(k, grid_10x10), spread=12.0, peak_rate=1.0)]])
    field = generate_synthetic(spec, grid_10x10)[0]

    assert int(np.argmax(field.arrival_rate)) == k
    assert field.arrival_rate[k] == pytest.approx(1.0)


def test_generate_synthetic_deterministic(grid_10x10):
    spec = HotspotSpec(
        slot_count=3,
        tracks=[HotspotTrack(start=(10.0, 10.0), end=(90.0, 90.0), spread=20.0, start_peak=5.0)],
        background_rate=0.2,
        user_sampling=True,
        seed=42,
    )
    first = generate_synthetic(spec, grid_10x10)
    second = generate_synthetic(spec, grid_10x10)

    for a, b in zip(first, second):
        assert np.array_equal(a.arrival_rate, b.arrival_rate)


def test_user_sampling_yields_whole_users(grid_10x10):
    spec = HotspotSpec(slot_count=1, background_rate=0.6, user_sampling=True, per_user_rate=0.15, seed=1)
    field = generate_synthetic(spec, grid_10x10)[0]
    users = field.arrival_rate / 0.15

    assert np.allclose(users, np.round(users))


def test_hotspot_track_interpolates():
    spec = HotspotSpec(
        slot_count=3,
        tracks=[HotspotTrack(start=(0.0, 0.0), end=(20.0, 40.0), spread=5.0, start_peak=1.0, end_peak=3.0)],
    )
    middle = spec.per_slot()[1][0]

    assert middle.center == (10.0, 20.0)
    assert middle.peak_rate == 2.0


def test_hotspot_spec_requires_slot_count():
    with pytest.raises(ValidationError):
        HotspotSpec(background_rate=0.1)


def test_demand_field_validation():
    with pytest.raises(InvalidParameterError):
        DemandField([-0.1], [1.0])

    with pytest.raises(InvalidParameterError):
        DemandField([0.1], [0.0])


def test_scenario_validation(grid_10x10):
    with pytest.raises(InvalidParameterError):
        Scenario(grid_10x10, 0, (DemandField.zeros(99),))

    with pytest.raises(GridIndexError):
        Scenario(grid_10x10, 100, (DemandField.zeros(100),))


def test_scenario_centered(grid_10x10):
    scenario = Scenario.centered(grid_10x10, [DemandField.zeros(100)])

    assert scenario.mbs_location == location_index(5, 5, grid_10x10)
    assert scenario.slot_count == 1
