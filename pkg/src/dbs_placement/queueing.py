import logging
import math
from dataclasses import dataclass
from typing import Iterable

import msgspec
import numpy as np

from dbs_placement.energy import EnergyParams, dbs_utilization_cap
from dbs_placement.errors import InfeasibleLoadError, InvalidParameterError
from dbs_placement.radio import RadioParams, dbs_rates_from, mbs_rates
from dbs_placement.scenario import Scenario, check_index

logger = logging.getLogger(__name__)

INFEASIBLE_OBJECTIVE = math.inf


@dataclass(frozen=True)
class Association:
    """
    Location association vector θ (1 = served by the DBS) and the DBS location j.
    """
    theta: np.ndarray
    dbs_location: int

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.int8)

        if theta.ndim != 1 or not np.isin(theta, (0, 1)).all():
            raise InvalidParameterError('theta must be a 1-D vector of zeros and ones')

        if self.dbs_location < 0 or self.dbs_location >= len(theta):
            raise InvalidParameterError(f'DBS location {self.dbs_location} outside {len(theta)} locations')

        theta.flags.writeable = False
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'dbs_location', int(self.dbs_location))

    def __len__(self) -> int:
        return len(self.theta)

    @property
    def coverage(self) -> list[int]:
        return np.flatnonzero(self.theta).tolist()

    @classmethod
    def from_coverage(cls, coverage: Iterable[int], dbs_location: int, size: int) -> 'Association':
        theta = np.zeros(size, dtype=np.int8)
        theta[list(coverage)] = 1

        return cls(theta, dbs_location)

    @classmethod
    def all_mbs(cls, size: int, dbs_location: int = 0) -> 'Association':
        return cls(np.zeros(size, dtype=np.int8), dbs_location)


class Evaluation(msgspec.Struct, frozen=True):
    rho_m: float
    rho_d: float
    tau_m: float
    tau_d: float
    objective: float
    feasible: bool
    reason: str | None = None
    user_latency_ratio: float = 0.0


def _check_rates(rates: np.ndarray, size: int):
    if len(rates) != size:
        raise InvalidParameterError(f'Expected {size} rates, got {len(rates)}')

    if np.any(rates <= 0):
        raise InvalidParameterError('Data rates must be strictly positive')


def _check_association(scenario: Scenario, assoc: Association):
    if len(assoc) != scenario.grid.location_count:
        raise InvalidParameterError(
            f'Association covers {len(assoc)} locations, grid has {scenario.grid.location_count}'
        )


def utilization_mbs(scenario: Scenario, assoc: Association, rates: np.ndarray, slot: int = 0) -> float:
    _check_association(scenario, assoc)
    _check_rates(rates, len(assoc))
    load = scenario.demand(slot).offered_load

    return float(np.sum(load * (1 - assoc.theta) / rates))


def utilization_dbs(scenario: Scenario, assoc: Association, rates: np.ndarray, slot: int = 0) -> float:
    _check_association(scenario, assoc)
    _check_rates(rates, len(assoc))
    load = scenario.demand(slot).offered_load

    return float(np.sum(load * assoc.theta / rates))


def latency_ratio(rho: float) -> float:
    if rho < 0 or math.isnan(rho):
        raise InvalidParameterError(f'Utilization must be non-negative, got {rho}')

    if rho >= 1:
        raise InfeasibleLoadError(f'Utilization {rho} >= 1, the queue is unstable')

    return rho / (1 - rho)


def mean_sojourn(s: float, rho: float) -> float:
    if s <= 0:
        raise InvalidParameterError(f'Service time must be positive, got {s}')

    if rho < 0:
        raise InvalidParameterError(f'Utilization must be non-negative, got {rho}')

    if rho >= 1:
        raise InfeasibleLoadError(f'Utilization {rho} >= 1, the queue is unstable')

    return s / (1 - rho)


def objective(rho_m: float, rho_d: float) -> float:
    return latency_ratio(rho_m) + latency_ratio(rho_d)


def feasibility(rho_m, rho_d, cap: float):
    """
    Constraints ct3 and ct5; works on scalars and on numpy arrays of candidates.
    """
    return (rho_m >= 0) & (rho_m < 1) & (rho_d >= 0) & (rho_d < 1) & (rho_d <= cap)


def infeasibility_reason(rho_m: float, rho_d: float, cap: float) -> str | None:
    if rho_m >= 1:
        return f'MBS overloaded: rho_m={rho_m:.6g} >= 1'
    elif rho_d >= 1:
        return f'DBS overloaded: rho_d={rho_d:.6g} >= 1'
    elif rho_d > cap:
        return f'DBS energy budget exceeded: rho_d={rho_d:.6g} > cap={cap:.6g}'
    elif rho_m < 0 or rho_d < 0:
        return 'negative utilization'

    return None


def _station_ratio(rho: float) -> float:
    return rho / (1 - rho) if 0 <= rho < 1 else math.inf


def evaluate(scenario: Scenario, assoc: Association, params: RadioParams, energy: EnergyParams, slot: int = 0,
             *, rates_m: np.ndarray | None = None, rates_d: np.ndarray | None = None) -> Evaluation:
    check_index(assoc.dbs_location, scenario.grid)

    if rates_m is None:
        rates_m = mbs_rates(scenario, params)

    if rates_d is None:
        rates_d = dbs_rates_from(assoc.dbs_location, scenario, params)

    cap = dbs_utilization_cap(energy)
    rho_m = utilization_mbs(scenario, assoc, rates_m, slot)
    rho_d = utilization_dbs(scenario, assoc, rates_d, slot)
    tau_m = _station_ratio(rho_m)
    tau_d = _station_ratio(rho_d)

    if not feasibility(rho_m, rho_d, cap):
        reason = infeasibility_reason(rho_m, rho_d, cap)
        logger.debug(f'Infeasible association at j={assoc.dbs_location}: {reason}')

        return Evaluation(rho_m, rho_d, tau_m, tau_d, INFEASIBLE_OBJECTIVE, False, reason, math.inf)

    arrival_rate = scenario.demand(slot).arrival_rate
    total_rate = float(arrival_rate.sum())

    if total_rate > 0:
        user_ratio = float(np.sum(arrival_rate * np.where(assoc.theta == 1, tau_d, tau_m)) / total_rate)
    else:
        user_ratio = 0.0

    return Evaluation(rho_m, rho_d, tau_m, tau_d, tau_m + tau_d, True, None, user_ratio)


def location_sojourn_times(scenario: Scenario, assoc: Association, params: RadioParams, evaluation: Evaluation,
                           slot: int = 0) -> np.ndarray:
    """
    Mean delivery time Tᵢ = sᵢ / (1 - ρ) of a request at every location, served by its station.
    """
    mean_size = scenario.demand(slot).mean_size
    rates = np.where(
        assoc.theta == 1,
        dbs_rates_from(assoc.dbs_location, scenario, params),
        mbs_rates(scenario, params),
    )
    service = mean_size / rates
    remaining = np.where(assoc.theta == 1, 1 - evaluation.rho_d, 1 - evaluation.rho_m)

    with np.errstate(divide='ignore'):
        return np.where(remaining > 0, service / np.where(remaining > 0, remaining, 1.0), math.inf)
