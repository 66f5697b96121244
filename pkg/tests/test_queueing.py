import math

import numpy as np
import pytest

from dbs_placement.energy import EnergyParams
from dbs_placement.errors import InfeasibleLoadError, InvalidParameterError
from dbs_placement.queueing import (
    Association, evaluate, feasibility, latency_ratio, location_sojourn_times, mean_sojourn, objective,
    utilization_dbs, utilization_mbs,
)
from dbs_placement.radio import dbs_rates_from, mbs_rates
from dbs_placement.scenario import DemandField, Grid, Scenario


@pytest.fixture
def two_cell_scenario() -> Scenario:
    grid = Grid(width_cells=2, height_cells=1)

    return Scenario(grid, 0, (DemandField([2.0, 3.0], [1e5, 1e5]),))


def test_utilization_mbs(single_cell_scenario, two_cell_scenario):
    rates = np.array([1e6])

    assert utilization_mbs(single_cell_scenario(0.0), Association([1], 0), rates) == 0.0
    assert utilization_mbs(single_cell_scenario(5.0), Association([0], 0), rates) == pytest.approx(0.5)
    assert utilization_mbs(two_cell_scenario, Association([0, 0], 0), np.array([1e6, 1e6])) == pytest.approx(0.5)


def test_utilization_dbs(single_cell_scenario):
    scenario = single_cell_scenario(2.5)

    assert utilization_dbs(scenario, Association([1], 0), np.array([1e6])) == pytest.approx(0.25)
    assert utilization_dbs(scenario, Association([0], 0), np.array([1e6])) == 0.0


def test_utilization_rejects_zero_rate(two_cell_scenario):
    with pytest.raises(InvalidParameterError):
        utilization_mbs(two_cell_scenario, Association([0, 0], 0), np.array([1e6, 0.0]))


def test_utilization_rejects_wrong_length(two_cell_scenario):
    with pytest.raises(InvalidParameterError):
        utilization_mbs(two_cell_scenario, Association([0], 0), np.array([1e6]))


def test_association_validation():
    with pytest.raises(InvalidParameterError):
        Association([0, 2], 0)

    with pytest.raises(InvalidParameterError):
        Association([0, 1], 2)


def test_association_is_read_only():
    assoc = Association.from_coverage([1, 3], 1, 4)

    assert assoc.coverage == [1, 3]

    with pytest.raises(ValueError):
        assoc.theta[0] = 1


@pytest.mark.parametrize('rho, expected', [(0.0, 0.0), (0.5, 1.0), (0.9, 9.0)])
def test_latency_ratio(rho, expected):
    assert latency_ratio(rho) == pytest.approx(expected)


def test_latency_ratio_errors():
    with pytest.raises(InfeasibleLoadError):
        latency_ratio(1.0)

    with pytest.raises(InvalidParameterError):
        latency_ratio(-0.1)


def test_mean_sojourn():
    assert mean_sojourn(0.1, 0.5) == pytest.approx(0.2)

    with pytest.raises(InvalidParameterError):
        mean_sojourn(0.0, 0.5)

    with pytest.raises(InfeasibleLoadError):
        mean_sojourn(0.1, 1.0)


@pytest.mark.parametrize('rho', [0.05, 0.3, 0.77])
def test_sojourn_consistent_with_latency_ratio(rho):
    s = 0.02

    assert (mean_sojourn(s, rho) - s) / s == pytest.approx(latency_ratio(rho))


def test_objective():
    assert objective(0.5, 0.5) == pytest.approx(2.0)
    assert objective(0.9, 0.0) == pytest.approx(9.0)
    assert objective(0.2, 0.6) == objective(0.6, 0.2)


def test_feasibility_vectorized():
    rho_m = np.array([0.5, 1.0, 0.2, 0.2])
    rho_d = np.array([0.1, 0.1, 0.4, 0.2])

    assert feasibility(rho_m, rho_d, 0.3).tolist() == [True, False, False, True]


def test_feasibility_never_accepts_violations():
    rng = np.random.default_rng(3)
    rho_m = rng.uniform(0, 1.5, 10_000)
    rho_d = rng.uniform(0, 1.5, 10_000)
    cap = 0.4
    feasible = feasibility(rho_m, rho_d, cap)

    assert not np.any(feasible & ((rho_m >= 1) | (rho_d >= 1) | (rho_d > cap)))


def test_evaluate_all_mbs(single_cell_scenario):
    evaluation = evaluate(
        single_cell_scenario(5.0), Association([0], 0), None, EnergyParams(),
        rates_m=np.array([1e6]), rates_d=np.array([1e6]),
    )

    assert evaluation.feasible
    assert evaluation.rho_m == pytest.approx(0.5)
    assert evaluation.rho_d == 0.0
    assert evaluation.objective == pytest.approx(1.0)
    assert evaluation.user_latency_ratio == pytest.approx(1.0)


def test_evaluate_energy_cap_violation(single_cell_scenario):
    energy = EnergyParams(energy_threshold=600 * 197.0)
    evaluation = evaluate(
        single_cell_scenario(2.0), Association([1], 0), None, energy,
        rates_m=np.array([1e6]), rates_d=np.array([1e6]),
    )

    assert not evaluation.feasible
    assert evaluation.objective == math.inf
    assert evaluation.rho_d == pytest.approx(0.2)
    assert 'energy' in evaluation.reason


def test_evaluate_overloaded_mbs(single_cell_scenario):
    evaluation = evaluate(
        single_cell_scenario(20.0), Association([0], 0), None, EnergyParams(),
        rates_m=np.array([1e6]), rates_d=np.array([1e6]),
    )

    assert not evaluation.feasible
    assert evaluation.tau_m == math.inf
    assert 'MBS' in evaluation.reason


def test_split_beats_single_station(two_cell_scenario):
    rates_m = np.array([1e6, 1e6])
    rates_d = np.array([2e6, 2e6])
    energy = EnergyParams()
    all_mbs = evaluate(two_cell_scenario, Association([0, 0], 0), None, energy, rates_m=rates_m, rates_d=rates_d)
    split = evaluate(two_cell_scenario, Association([0, 1], 0), None, energy, rates_m=rates_m, rates_d=rates_d)

    assert split.objective < all_mbs.objective


def test_moving_location_changes_total_utilization(urban_params):
    rng = np.random.default_rng(5)
    grid = Grid(width_cells=4, height_cells=4, cell_size=150.0)
    scenario = Scenario.centered(grid, [DemandField(rng.uniform(0, 5, 16), rng.uniform(5e4, 2e5, 16))])
    j = 3
    rates_m = mbs_rates(scenario, urban_params)
    rates_d = dbs_rates_from(j, scenario, urban_params)
    before = Association.from_coverage([j], j, 16)
    after = Association.from_coverage([j, 7], j, 16)

    def total(assoc):
        return utilization_mbs(scenario, assoc, rates_m) + utilization_dbs(scenario, assoc, rates_d)

    load = scenario.demand().offered_load[7]
    expected = load * (1 / rates_d[7] - 1 / rates_m[7])

    assert total(after) - total(before) == pytest.approx(expected, rel=1e-9, abs=1e-15)


def test_location_sojourn_times(single_cell_scenario, table_params):
    scenario = single_cell_scenario(3.0)
    assoc = Association([0], 0)
    evaluation = evaluate(scenario, assoc, table_params, EnergyParams())
    times = location_sojourn_times(scenario, assoc, table_params, evaluation)
    service = 1e5 / mbs_rates(scenario, table_params)[0]

    assert times[0] == pytest.approx(service / (1 - evaluation.rho_m))


def test_evaluate_slot_selection(table_params):
    grid = Grid(width_cells=1, height_cells=1)
    scenario = Scenario(grid, 0, (DemandField.zeros(1), DemandField([3.0], [1e5])))

    assert evaluate(scenario, Association([0], 0), table_params, EnergyParams(), 0).objective == 0.0
    assert evaluate(scenario, Association([0], 0), table_params, EnergyParams(), 1).objective > 0.0
