import logging
import math
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import msgspec
import numpy as np

from dbs_placement.artifacts import MethodOutcome, SlotReport, emit_heatmap, write_report_csv, write_snapshot
from dbs_placement.conf import settings
from dbs_placement.config import ExperimentConfig, build_scenario, dump_config
from dbs_placement.errors import InfeasibleLoadError
from dbs_placement.fs import ensure_dir
from dbs_placement.logging.formatters import run_context
from dbs_placement.oracle import SizeDistribution, exhaustive_best_placement, numeric_split_check, simulate_mg1ps
from dbs_placement.placement import PlacementResult, baseline_smbs, baseline_ssc, kkt_split, run_leap
from dbs_placement.queueing import Evaluation, location_sojourn_times, objective
from dbs_placement.scenario import DemandField, Grid, Scenario, index_to_cell, location_index

logger = logging.getLogger(__name__)

QUEUE_SERVICE_RATE = 1e6
QUEUE_MEAN_SIZE = 1e5
KKT_RHO_MAX = 1.8
KKT_CAP_MAX = 0.99
KKT_TOLERANCE = 1e-6
ORACLE_TOLERANCE = 1e-12


def _outcome(method: str, evaluation: Evaluation, result: PlacementResult | None = None) -> MethodOutcome:
    return MethodOutcome(
        method=method,
        objective=evaluation.objective,
        rho_m=evaluation.rho_m,
        rho_d=evaluation.rho_d,
        tau_m=evaluation.tau_m,
        tau_d=evaluation.tau_d,
        feasible=evaluation.feasible,
        dbs_location=result.dbs_location if result else None,
        coverage=result.assoc.coverage if result else [],
        reason=evaluation.reason,
        user_latency_ratio=evaluation.user_latency_ratio,
    )


def _run_slot(config: ExperimentConfig, scenario: Scenario, slot: int, output_dir: Path, run_id: str) -> SlotReport:
    token = run_context.set({'run_id': run_id, 'slot': slot})

    try:
        split_params = config.radio.split_params()
        prefix = output_dir / f'slot_{slot:03d}'
        emit_heatmap(scenario.demand(slot).arrival_rate, scenario.grid, f'{prefix}_demand')
        outcomes = []

        for method in config.methods:
            if method == 'smbs':
                evaluation = baseline_smbs(scenario, config.radio.full_band_params(), slot, config.energy)
                outcomes.append(_outcome(method, evaluation))
                continue

            if method == 'leap':
                result = run_leap(scenario, split_params, config.energy, slot)
                sojourn = location_sojourn_times(scenario, result.assoc, split_params, result.evaluation, slot)
                emit_heatmap(sojourn, scenario.grid, f'{prefix}_leap_delay')
            else:
                result = baseline_ssc(scenario, split_params, config.energy, config.ssc_fixed_location, slot)

            association = result.assoc.theta.astype(float)
            association[result.dbs_location] = 2.0
            emit_heatmap(association, scenario.grid, f'{prefix}_{method}_association')
            outcomes.append(_outcome(method, result.evaluation, result))

        for outcome in outcomes:
            if not outcome.feasible:
                logger.warning(f'{outcome.method} infeasible: {outcome.reason}')

        return SlotReport(slot, outcomes)
    finally:
        run_context.reset(token)


def run_experiment(config: ExperimentConfig, output_dir: Path | None = None) -> list[SlotReport]:
    output_dir = ensure_dir(Path(output_dir or config.output_dir))
    scenario = build_scenario(config)
    run_id = uuid.uuid4().hex[:12]
    logger.info(f'Run {run_id}: {scenario.slot_count} slots, methods {config.methods}, output {output_dir}')

    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        reports = list(pool.map(lambda slot: _run_slot(config, scenario, slot, output_dir, run_id),
                                range(scenario.slot_count)))

    write_report_csv(reports, scenario.grid, output_dir / 'report.csv')
    write_snapshot(reports, output_dir / 'associations.msgpack')
    (output_dir / 'config.toml').write_bytes(dump_config(config))
    logger.info(f'Run {run_id} finished, {sum(not report.feasible for report in reports)} infeasible slots')

    return reports


def shrink_scenario(scenario: Scenario, slot: int, max_side: int) -> Scenario:
    """
    Single-slot copy of `scenario` block-summed onto a grid at most `max_side` cells per side.
    """
    grid = scenario.grid
    block = max(math.ceil(grid.width_cells / max_side), math.ceil(grid.height_cells / max_side))
    demand = scenario.demand(slot)

    if block == 1:
        return scenario.with_demand(demand)

    coarse = Grid(
        width_cells=math.ceil(grid.width_cells / block),
        height_cells=math.ceil(grid.height_cells / block),
        cell_size=grid.cell_size * block,
        origin=grid.origin,
    )
    index = np.arange(grid.location_count)
    target = (index // grid.width_cells // block) * coarse.width_cells + (index % grid.width_cells) // block
    rate = np.bincount(target, weights=demand.arrival_rate, minlength=coarse.location_count)
    load = np.bincount(target, weights=demand.offered_load, minlength=coarse.location_count)
    mean_size = np.divide(load, rate, out=np.ones_like(load), where=rate > 0)
    mbs_col, mbs_row = index_to_cell(scenario.mbs_location, grid)
    mbs_location = location_index(mbs_col // block, mbs_row // block, coarse)

    return Scenario(coarse, mbs_location, (DemandField(rate, mean_size),))


class OracleCheck(msgspec.Struct, frozen=True):
    slot: int
    locations: int
    leap_objective: float
    oracle_objective: float
    gap: float
    ordering_ok: bool


class QueueCheck(msgspec.Struct, frozen=True):
    rho: float
    empirical: float
    analytic: float
    half_width_95: float
    relative_error: float
    passed: bool


class KKTCheck(msgspec.Struct, frozen=True):
    pairs: int
    infeasible_pairs: int
    max_excess: float
    violations: int
    passed: bool


class ValidationReport(msgspec.Struct, frozen=True):
    oracle: list[OracleCheck]
    median_gap: float
    queue: list[QueueCheck]
    kkt: KKTCheck

    @property
    def passed(self) -> bool:
        return (all(check.ordering_ok for check in self.oracle)
                and all(check.passed for check in self.queue)
                and self.kkt.passed)


def _gap(leap: float, oracle: float) -> float:
    if not math.isfinite(oracle) or leap == oracle:
        return 0.0
    elif oracle == 0:
        return math.inf

    return (leap - oracle) / oracle


def check_oracle_gap(config: ExperimentConfig, scenario: Scenario) -> list[OracleCheck]:
    params = config.radio.split_params()
    side = math.isqrt(settings.oracle_max_locations)
    max_side = min(config.validation.oracle_grid, side)
    checks = []

    for slot in range(scenario.slot_count):
        if scenario.grid.location_count <= settings.oracle_max_locations:
            instance = scenario.with_demand(scenario.demand(slot))
        else:
            instance = shrink_scenario(scenario, slot, max_side)

        leap = run_leap(instance, params, config.energy).evaluation.objective
        oracle = exhaustive_best_placement(instance, params, config.energy).best_objective
        ordering_ok = leap >= oracle - ORACLE_TOLERANCE * max(1.0, abs(oracle)) or leap == oracle
        checks.append(OracleCheck(slot, instance.grid.location_count, leap, oracle, _gap(leap, oracle), ordering_ok))

    return checks


def check_queue_law(config: ExperimentConfig) -> list[QueueCheck]:
    checks = []
    sizes = SizeDistribution(kind='exponential', mean=QUEUE_MEAN_SIZE)

    for k, rho in enumerate(config.validation.queue_rhos):
        arrival_rate = rho * QUEUE_SERVICE_RATE / QUEUE_MEAN_SIZE
        result = simulate_mg1ps(arrival_rate, sizes, QUEUE_SERVICE_RATE, config.validation.queue_jobs,
                                config.seed + k)
        error = abs(result.empirical_latency_ratio - result.analytic_latency_ratio)
        passed = error <= max(0.05 * result.analytic_latency_ratio, 3 * result.half_width_95)
        checks.append(QueueCheck(
            rho, result.empirical_latency_ratio, result.analytic_latency_ratio, result.half_width_95,
            error / result.analytic_latency_ratio, passed,
        ))

    return checks


def check_kkt_split(config: ExperimentConfig) -> KKTCheck:
    rng = np.random.default_rng(config.seed)
    pairs = config.validation.kkt_pairs
    rhos = rng.uniform(0, KKT_RHO_MAX, pairs)
    caps = rng.uniform(0, KKT_CAP_MAX, pairs)
    infeasible = violations = 0
    max_excess = -math.inf

    for rho, cap in zip(rhos.tolist(), caps.tolist()):
        split = kkt_split(rho, cap)

        if split.rho_d != min(rho / 2, cap):
            violations += 1

        if not split.feasible:
            infeasible += 1

            try:
                numeric_split_check(rho, cap, config.validation.kkt_step)
            except InfeasibleLoadError:
                continue

            violations += 1
            continue

        _, grid_minimum = numeric_split_check(rho, cap, config.validation.kkt_step)
        excess = objective(split.rho_m, split.rho_d) - grid_minimum
        max_excess = max(max_excess, excess)

        if excess > KKT_TOLERANCE:
            violations += 1

    return KKTCheck(pairs, infeasible, max_excess, violations, violations == 0)


def validate(config: ExperimentConfig) -> ValidationReport:
    scenario = build_scenario(config)
    oracle_checks = check_oracle_gap(config, scenario)
    gaps = [check.gap for check in oracle_checks if math.isfinite(check.gap)]
    median_gap = float(np.median(gaps)) if gaps else math.nan
    report = ValidationReport(oracle_checks, median_gap, check_queue_law(config), check_kkt_split(config))
    logger.info(f'Validation {"passed" if report.passed else "failed"}')

    return report


def format_validation_report(report: ValidationReport) -> str:
    lines = ['[oracle] LEAP vs exhaustive optimum, gap = (LEAP - oracle) / oracle']

    for check in report.oracle:
        status = 'PASS' if check.ordering_ok else 'FAIL'
        lines.append(f'  {status} slot={check.slot} locations={check.locations} leap={check.leap_objective:.6g} '
                     f'oracle={check.oracle_objective:.6g} gap={check.gap:.4%}')

    lines.append(f'  median gap={report.median_gap:.4%}')
    lines.append('[queue] simulated latency ratio vs rho / (1 - rho)')

    for check in report.queue:
        status = 'PASS' if check.passed else 'FAIL'
        lines.append(f'  {status} rho={check.rho:.2f} empirical={check.empirical:.4f} analytic={check.analytic:.4f} '
                     f'half_width_95={check.half_width_95:.4f} relative_error={check.relative_error:.2%}')

    kkt = report.kkt
    lines.append('[kkt] closed-form split vs grid search')
    lines.append(f'  {"PASS" if kkt.passed else "FAIL"} pairs={kkt.pairs} infeasible={kkt.infeasible_pairs} '
                 f'max_excess={kkt.max_excess:.3g} violations={kkt.violations}')
    lines.append(f'overall: {"PASS" if report.passed else "FAIL"}')

    return '\n'.join(lines)
