import heapq
import logging
from dataclasses import dataclass

import msgspec
import numpy as np

from dbs_placement.energy import EnergyParams, dbs_utilization_cap
from dbs_placement.errors import InvalidParameterError
from dbs_placement.queueing import Association, Evaluation, evaluate
from dbs_placement.radio import RadioParams, dbs_rate_offsets, dbs_rates_from, mbs_rates
from dbs_placement.scenario import Scenario, check_index, neighbors4

__all__ = [
    'EnergyParams', 'LoadSplit', 'TraceEntry', 'PlacementResult', 'CoverageGrowth',
    'dbs_utilization_cap', 'kkt_split', 'candidate_gain', 'candidate_gains', 'optimal_location',
    'grow_coverage', 'expand_coverage', 'run_leap', 'baseline_smbs', 'baseline_ssc',
]

logger = logging.getLogger(__name__)


class LoadSplit(msgspec.Struct, frozen=True):
    rho_m: float
    rho_d: float
    feasible: bool


class TraceEntry(msgspec.Struct, frozen=True, array_like=True):
    location: int
    delta: float


@dataclass(frozen=True)
class CoverageGrowth:
    assoc: Association
    trace: tuple[TraceEntry, ...]
    seed_infeasible: bool


@dataclass(frozen=True)
class PlacementResult:
    assoc: Association
    evaluation: Evaluation
    rho_target_split: LoadSplit
    expansion_trace: tuple[TraceEntry, ...]
    seed_infeasible: bool = False

    @property
    def dbs_location(self) -> int:
        return self.assoc.dbs_location


def kkt_split(rho: float, cap: float) -> LoadSplit:
    """
    Closed-form minimizer of ρᵐ/(1-ρᵐ) + ρᵈ/(1-ρᵈ) subject to ρᵐ + ρᵈ = ρ and ρᵈ <= cap.
    """
    if rho < 0:
        raise InvalidParameterError(f'Total utilization must be non-negative, got {rho}')

    if not 0 <= cap < 1:
        raise InvalidParameterError(f'Utilization cap must lie in [0, 1), got {cap}')

    rho_d = min(rho / 2, cap)
    rho_m = rho - rho_d

    return LoadSplit(rho_m, rho_d, rho_m < 1)


def _offload_terms(load: np.ndarray, rates_m: np.ndarray, rates_d: np.ndarray) -> np.ndarray:
    return load * (1 / rates_d - 1 / rates_m)


def candidate_gain(j: int, scenario: Scenario, params: RadioParams, slot: int = 0) -> tuple[float, frozenset[int]]:
    """
    Change of the total utilization when every location the DBS at `j` serves faster than the MBS
    is moved onto the DBS. Locations without traffic are left out of the member set.
    """
    check_index(j, scenario.grid)
    load = scenario.demand(slot).offered_load
    rates_m = mbs_rates(scenario, params)
    rates_d = dbs_rates_from(j, scenario, params)
    terms = _offload_terms(load, rates_m, rates_d)
    members = (rates_d > rates_m) & (load > 0)

    return float(np.sum(terms[members])), frozenset(np.flatnonzero(members).tolist())


def candidate_gains(scenario: Scenario, params: RadioParams, slot: int = 0, *,
                    rates_m: np.ndarray | None = None, offsets: np.ndarray | None = None) -> np.ndarray:
    """
    Gains of all candidate locations at once.

    The DBS rate only depends on the MU-to-DBS offset, so the sum is accumulated offset by offset
    over shifted views of the grid. Offsets whose DBS rate loses to the MBS everywhere are skipped.
    """
    grid = scenario.grid
    width, height = grid.width_cells, grid.height_cells
    load = scenario.demand(slot).offered_load.reshape(height, width)
    gains = np.zeros((height, width))

    if not np.any(load > 0):
        return gains.ravel()

    if rates_m is None:
        rates_m = mbs_rates(scenario, params)

    if offsets is None:
        offsets = dbs_rate_offsets(grid, params)

    inv_m = (1 / rates_m).reshape(height, width)
    inv_offsets = 1 / offsets
    useful = np.argwhere(inv_offsets < inv_m.max())
    logger.debug(f'Sweeping {len(useful)} of {inv_offsets.size} DBS offsets')

    for off_row, off_col in useful:
        d_row = off_row - (height - 1)
        d_col = off_col - (width - 1)
        # candidate j receives the term of MU i = j + (d_row, d_col)
        j_rows = slice(max(0, -d_row), min(height, height - d_row))
        j_cols = slice(max(0, -d_col), min(width, width - d_col))
        i_rows = slice(j_rows.start + d_row, j_rows.stop + d_row)
        i_cols = slice(j_cols.start + d_col, j_cols.stop + d_col)
        diff = inv_offsets[off_row, off_col] - inv_m[i_rows, i_cols]
        gains[j_rows, j_cols] += load[i_rows, i_cols] * np.minimum(diff, 0.0)

    return gains.ravel()


def optimal_location(scenario: Scenario, params: RadioParams, slot: int = 0, *,
                     rates_m: np.ndarray | None = None, offsets: np.ndarray | None = None) -> int:
    gains = candidate_gains(scenario, params, slot, rates_m=rates_m, offsets=offsets)

    # argmin returns the first minimum, i.e. the lowest location index on ties
    return int(np.argmin(gains))


def grow_coverage(j_star: int, scenario: Scenario, params: RadioParams, cap: float, slot: int = 0, *,
                  rates_m: np.ndarray | None = None, rates_d: np.ndarray | None = None) -> CoverageGrowth:
    grid = scenario.grid
    check_index(j_star, grid)

    if not 0 <= cap < 1:
        raise InvalidParameterError(f'Utilization cap must lie in [0, 1), got {cap}')

    if rates_m is None:
        rates_m = mbs_rates(scenario, params)

    if rates_d is None:
        rates_d = dbs_rates_from(j_star, scenario, params)

    load = scenario.demand(slot).offered_load
    deltas = _offload_terms(load, rates_m, rates_d)
    utilization_d = load / rates_d

    theta = np.zeros(grid.location_count, dtype=np.int8)
    theta[j_star] = 1
    rho_d = float(utilization_d[j_star])
    rho = float(np.sum(load / rates_m)) + float(deltas[j_star])
    trace = [TraceEntry(j_star, float(deltas[j_star]))]

    if rho_d > cap:
        logger.warning(f'Seed location {j_star} alone needs rho_d={rho_d:.6g} above cap {cap:.6g}')

        return CoverageGrowth(Association(theta, j_star), tuple(trace), True)

    frontier = []
    queued = {j_star}

    def enqueue(location: int):
        for n in neighbors4(location, grid):
            if n not in queued:
                queued.add(n)
                heapq.heappush(frontier, (float(deltas[n]), n))

    enqueue(j_star)

    while frontier:
        delta, i = frontier[0]

        if delta >= 0:
            break

        tentative_rho = rho + delta

        if not rho_d + utilization_d[i] < min(tentative_rho / 2, cap):
            break

        heapq.heappop(frontier)
        theta[i] = 1
        rho_d += float(utilization_d[i])
        rho = tentative_rho
        trace.append(TraceEntry(i, delta))
        enqueue(i)

    logger.debug(f'Coverage around {j_star}: {len(trace)} locations, rho_d={rho_d:.6g}, rho={rho:.6g}')

    return CoverageGrowth(Association(theta, j_star), tuple(trace), False)


def expand_coverage(j_star: int, scenario: Scenario, params: RadioParams, cap: float, slot: int = 0) -> Association:
    return grow_coverage(j_star, scenario, params, cap, slot).assoc


def _place_at(j: int, scenario: Scenario, params: RadioParams, energy: EnergyParams, slot: int,
              rates_m: np.ndarray, offsets: np.ndarray) -> PlacementResult:
    cap = dbs_utilization_cap(energy)
    rates_d = dbs_rates_from(j, scenario, params, offsets)
    growth = grow_coverage(j, scenario, params, cap, slot, rates_m=rates_m, rates_d=rates_d)
    evaluation = evaluate(scenario, growth.assoc, params, energy, slot, rates_m=rates_m, rates_d=rates_d)
    split = kkt_split(evaluation.rho_m + evaluation.rho_d, cap)

    return PlacementResult(growth.assoc, evaluation, split, growth.trace, growth.seed_infeasible)


def run_leap(scenario: Scenario, params: RadioParams, energy: EnergyParams, slot: int = 0) -> PlacementResult:
    rates_m = mbs_rates(scenario, params)
    offsets = dbs_rate_offsets(scenario.grid, params)
    j_star = optimal_location(scenario, params, slot, rates_m=rates_m, offsets=offsets)
    result = _place_at(j_star, scenario, params, energy, slot, rates_m, offsets)
    logger.info(f'LEAP slot {slot}: j*={j_star}, coverage={len(result.assoc.coverage)}, '
                f'objective={result.evaluation.objective:.6g}')

    return result


def baseline_smbs(scenario: Scenario, params_full_band: RadioParams, slot: int = 0,
                  energy: EnergyParams | None = None) -> Evaluation:
    assoc = Association.all_mbs(scenario.grid.location_count, scenario.mbs_location)

    return evaluate(scenario, assoc, params_full_band, energy or EnergyParams(), slot)


def baseline_ssc(scenario: Scenario, params: RadioParams, energy: EnergyParams, fixed_location: int,
                 slot: int = 0) -> PlacementResult:
    check_index(fixed_location, scenario.grid)
    rates_m = mbs_rates(scenario, params)
    offsets = dbs_rate_offsets(scenario.grid, params)

    return _place_at(fixed_location, scenario, params, energy, slot, rates_m, offsets)
