import heapq
import logging
import math
from typing import Literal

import msgspec
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from dbs_placement.conf import settings
from dbs_placement.energy import EnergyParams, dbs_utilization_cap
from dbs_placement.errors import InfeasibleLoadError, InvalidParameterError, OracleLimitError, UnstableQueueError
from dbs_placement.queueing import Association, evaluate, feasibility
from dbs_placement.radio import RadioParams, dbs_rate_offsets, dbs_rates_from, mbs_rates
from dbs_placement.scenario import Scenario

logger = logging.getLogger(__name__)

GENERATOR_NAME = 'PCG64'
WARMUP_FRACTION = 0.1
BATCH_COUNT = 20
NORMAL_QUANTILE_95 = 1.959963984540054


class OracleResult(msgspec.Struct, frozen=True):
    best_objective: float
    best_location: int
    best_theta: list[int]
    evaluations: int


class QueueSimResult(msgspec.Struct, frozen=True):
    empirical_latency_ratio: float
    analytic_latency_ratio: float
    jobs_completed: int
    half_width_95: float
    rho: float
    seed: int
    size_distribution: str
    generator: str = GENERATOR_NAME


class SizeDistribution(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal['exponential', 'deterministic', 'lognormal'] = 'exponential'
    mean: float = Field(gt=0)
    sigma: float = Field(default=1.0, gt=0)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == 'exponential':
            return rng.exponential(self.mean, n)
        elif self.kind == 'deterministic':
            return np.full(n, self.mean)

        return rng.lognormal(math.log(self.mean) - self.sigma ** 2 / 2, self.sigma, n)


def _subset_matrix(n: int) -> np.ndarray:
    # θ₀ is the most significant bit, so integer order equals lexicographic θ order
    masks = np.arange(2 ** n, dtype=np.int64)

    return ((masks[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(float)


def exhaustive_best_placement(scenario: Scenario, params: RadioParams, energy: EnergyParams,
                              max_locations: int | None = None, slot: int = 0) -> OracleResult:
    n = scenario.grid.location_count
    limit = max_locations if max_locations is not None else settings.oracle_max_locations

    if n > limit:
        raise OracleLimitError(f'Exhaustive search refused: {n} locations exceed the limit of {limit}')

    cap = dbs_utilization_cap(energy)
    load = scenario.demand(slot).offered_load
    rates_m = mbs_rates(scenario, params)
    offsets = dbs_rate_offsets(scenario.grid, params)
    bits = _subset_matrix(n)
    rho_m = np.sum((1 - bits) * (load / rates_m), axis=1)
    best_objective, best_location, best_mask = math.inf, 0, 0

    for j in range(n):
        rates_d = dbs_rates_from(j, scenario, params, offsets)
        rho_d = np.sum(bits * (load / rates_d), axis=1)
        feasible = feasibility(rho_m, rho_d, cap)

        with np.errstate(divide='ignore', invalid='ignore'):
            values = np.where(feasible, rho_m / (1 - rho_m) + rho_d / (1 - rho_d), math.inf)

        k = int(np.argmin(values))

        if values[k] < best_objective:
            best_objective, best_location, best_mask = float(values[k]), j, k

    best_theta = bits[best_mask].astype(np.int8)

    if math.isfinite(best_objective):
        evaluation = evaluate(scenario, Association(best_theta, best_location), params, energy, slot,
                              rates_m=rates_m, rates_d=dbs_rates_from(best_location, scenario, params, offsets))
        best_objective = evaluation.objective

    logger.debug(f'Exhaustive search over {n} locations: j={best_location}, objective={best_objective:.6g}')

    return OracleResult(best_objective, best_location, best_theta.tolist(), n * len(bits))


def _run_processor_sharing(arrival_times: list[float], work: list[float]) -> list[float]:
    """
    Event-driven processor-sharing queue.

    Virtual time advances at 1/n while n jobs share the server, so a job leaves once virtual time
    has grown by its full-rate service time since its arrival.
    """
    jobs = len(arrival_times)
    departures = [0.0] * jobs
    in_system = []
    now = virtual = 0.0
    next_arrival = completed = 0

    while completed < jobs:
        n = len(in_system)
        t_arrival = arrival_times[next_arrival] if next_arrival < jobs else math.inf
        t_departure = now + (in_system[0][0] - virtual) * n if n else math.inf

        if t_arrival <= t_departure:
            if n:
                virtual += (t_arrival - now) / n

            now = t_arrival
            heapq.heappush(in_system, (virtual + work[next_arrival], next_arrival))
            next_arrival += 1
        else:
            virtual, k = heapq.heappop(in_system)
            now = t_departure
            departures[k] = now
            completed += 1

    return departures


def simulate_mg1ps(arrival_rate: float, size_distribution: SizeDistribution, service_rate: float, jobs: int,
                   seed: int) -> QueueSimResult:
    if arrival_rate <= 0 or service_rate <= 0:
        raise InvalidParameterError('arrival_rate and service_rate must be positive')

    if jobs < 1:
        raise InvalidParameterError(f'At least one job is required, got {jobs}')

    rho = arrival_rate * size_distribution.mean / service_rate

    if rho >= 1:
        raise UnstableQueueError(f'Offered utilization {rho:.6g} >= 1, the queue has no steady state')

    arrival_stream, size_stream = (np.random.Generator(np.random.PCG64(s))
                                   for s in np.random.SeedSequence(seed).spawn(2))
    arrival_times = np.cumsum(arrival_stream.exponential(1 / arrival_rate, jobs))
    work = size_distribution.sample(size_stream, jobs) / service_rate
    departures = np.asarray(_run_processor_sharing(arrival_times.tolist(), work.tolist()))

    warmup = int(jobs * WARMUP_FRACTION)
    sojourn = (departures - arrival_times)[warmup:]
    service = work[warmup:]
    ratios = (sojourn - service) / service
    batches = min(BATCH_COUNT, len(ratios))

    if batches >= 2:
        means = np.array([batch.mean() for batch in np.array_split(ratios, batches)])
        half_width = float(NORMAL_QUANTILE_95 * means.std(ddof=1) / math.sqrt(batches))
    else:
        half_width = 0.0

    result = QueueSimResult(
        empirical_latency_ratio=float(ratios.mean()),
        analytic_latency_ratio=rho / (1 - rho),
        jobs_completed=len(ratios),
        half_width_95=half_width,
        rho=rho,
        seed=seed,
        size_distribution=size_distribution.kind,
    )
    logger.debug(f'M/G/1-PS rho={rho:.3f}: empirical={result.empirical_latency_ratio:.4f}, '
                 f'analytic={result.analytic_latency_ratio:.4f}')

    return result


def numeric_split_check(rho: float, cap: float, step: float) -> tuple[float, float]:
    if rho < 0 or not 0 <= cap < 1 or step <= 0:
        raise InvalidParameterError(f'Invalid split check input: rho={rho}, cap={cap}, step={step}')

    upper = min(cap, rho)
    x = np.append(np.arange(0.0, upper, step), upper)
    y = rho - x
    feasible = (x < 1) & (y < 1)

    if not feasible.any():
        raise InfeasibleLoadError(f'No split of rho={rho} keeps both stations below 1 with cap={cap}')

    with np.errstate(divide='ignore', invalid='ignore'):
        values = np.where(feasible, x / (1 - x) + y / (1 - y), math.inf)

    k = int(np.argmin(values))

    return float(x[k]), float(values[k])
