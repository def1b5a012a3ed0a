"""
Evaluation System - Multi-route handover experiments, HO ratios and empirical CDFs
"""
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.global_config import GlobalConfig
from Models.qlearning.qlearning_agent import (
    HyperParams,
    QLearningHandoverAgent,
    dp_optimal,
    policy_return,
)
from simulator.errors import ArgumentError, ExperimentError, UncoveredRouteError
from simulator.services.radio_map import MapSourceConfig, RsrpGrid
from simulator.services.trajectory import (
    Trajectory,
    random_trajectory,
    validate_route_coverage,
)

logger = logging.getLogger(__name__)

WeightPair = Tuple[float, float]


class ExperimentConfig(BaseModel):
    """Design of a multi-route sweep"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_routes: int = Field(GlobalConfig.EXPERIMENT_CONFIG["num_routes"], ge=1)
    weight_pairs: List[Tuple[float, float]] = Field(
        default_factory=lambda: list(GlobalConfig.EXPERIMENT_CONFIG["weight_pairs"]),
        min_length=1,
        description="(w_ho, w_rsrp) combinations",
    )
    hyperparams: HyperParams = Field(default_factory=HyperParams.default)
    map_source: MapSourceConfig = Field(default_factory=MapSourceConfig)
    step_length_m: float = Field(GlobalConfig.EXPERIMENT_CONFIG["step_length_m"], gt=0)
    min_route_length_m: float = Field(GlobalConfig.EXPERIMENT_CONFIG["min_route_length_m"], ge=0)
    route_margin_m: float = Field(GlobalConfig.EXPERIMENT_CONFIG["route_margin_m"], ge=0)
    master_seed: int = Field(GlobalConfig.EXPERIMENT_CONFIG["master_seed"], ge=0)
    parallel: int = Field(GlobalConfig.EXPERIMENT_CONFIG["parallel"], ge=1)

    @field_validator("weight_pairs")
    @classmethod
    def _check_weights(cls, pairs: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        for w_ho, w_rsrp in pairs:
            if w_ho < 0 or w_rsrp < 0 or w_ho + w_rsrp <= 0:
                raise ValueError(f"Weight pair ({w_ho}, {w_rsrp}) must be nonnegative and not both zero")
        return pairs


@dataclass(frozen=True, eq=False)
class CdfSeries:
    """Empirical CDF: a step of 1/N at every sorted value"""

    values: np.ndarray
    probabilities: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def percentile(self, q: float) -> float:
        """Smallest value whose cumulative probability reaches q"""
        if not 0.0 <= q <= 1.0:
            raise ArgumentError(f"Quantile {q} outside [0, 1]")
        index = max(int(math.ceil(q * len(self) - 1e-12)) - 1, 0)
        return float(self.values[index])

    def at(self, x: float) -> float:
        """F(x) = fraction of values <= x"""
        return float(np.searchsorted(self.values, x, side="right") / len(self))


def empirical_cdf(values: Sequence[float]) -> CdfSeries:
    data = np.sort(np.asarray(values, dtype=float).ravel())
    if data.size == 0:
        raise ArgumentError("Cannot build a CDF from no values")
    return CdfSeries(data, np.arange(1, data.size + 1) / data.size)


@dataclass
class FlightResult:
    """Proposed vs baseline outcome of one route under one weight pair"""

    route_id: int
    w_ho: float
    w_rsrp: float
    num_waypoints: int
    ho_count_proposed: int
    ho_count_baseline: int
    ho_ratio: Optional[float]
    rsrp_trace_proposed_dbm: np.ndarray
    rsrp_trace_baseline_dbm: np.ndarray
    proposed_return: float = 0.0
    baseline_return: float = 0.0
    oracle_return: float = 0.0
    seed: Optional[int] = None

    @property
    def ratio_excluded(self) -> bool:
        return self.ho_ratio is None


def compute_ho_ratio(ho_proposed: int, ho_baseline: int) -> Optional[float]:
    """None marks a flight left out of ratio statistics (baseline 0, proposed > 0)"""
    if ho_baseline > 0:
        return ho_proposed / ho_baseline
    if ho_proposed == 0:
        return 1.0
    return None


def run_flight(
    grid: RsrpGrid,
    trajectory: Trajectory,
    hp: HyperParams,
    seed: Optional[int] = None,
    route_id: int = 0,
) -> FlightResult:
    """Train on one route and compare the learned serving cells to the strongest-cell baseline"""
    coverage = validate_route_coverage(trajectory, grid)
    if not coverage.ok:
        raise UncoveredRouteError(coverage.uncovered)

    agent = QLearningHandoverAgent(hp)
    plan = agent.plan(grid, trajectory, seed)
    proposed, baseline = plan.proposed, plan.baseline

    if plan.reward is not None:
        proposed_return = policy_return(plan.reward, proposed.ranks, hp.discount)
        baseline_return = policy_return(plan.reward, baseline.ranks, hp.discount)
        _, oracle_return = dp_optimal(plan.reward, hp.discount)
    else:
        proposed_return = baseline_return = oracle_return = 0.0

    ratio = compute_ho_ratio(proposed.ho_count, baseline.ho_count)
    if ratio is None:
        logger.warning(
            f"Route {route_id} (w_ho={hp.w_ho}, w_rsrp={hp.w_rsrp}): baseline has no HO but "
            f"proposed has {proposed.ho_count}; excluded from ratio statistics"
        )
    return FlightResult(
        route_id=route_id,
        w_ho=hp.w_ho,
        w_rsrp=hp.w_rsrp,
        num_waypoints=len(trajectory),
        ho_count_proposed=proposed.ho_count,
        ho_count_baseline=baseline.ho_count,
        ho_ratio=ratio,
        rsrp_trace_proposed_dbm=np.asarray(proposed.raw_dbm, dtype=float),
        rsrp_trace_baseline_dbm=np.asarray(baseline.raw_dbm, dtype=float),
        proposed_return=proposed_return,
        baseline_return=baseline_return,
        oracle_return=oracle_return,
        seed=seed,
    )


@dataclass
class WeightAggregate:
    """Statistics of all flights flown under one weight pair"""

    w_ho: float
    w_rsrp: float
    flights: List[FlightResult]
    ho_cdf_proposed: CdfSeries
    ho_cdf_baseline: CdfSeries
    ratio_cdf: Optional[CdfSeries]
    rsrp_cdf_proposed: CdfSeries
    rsrp_cdf_baseline: CdfSeries

    @property
    def label(self) -> str:
        return f"w_ho={self.w_ho:g},w_rsrp={self.w_rsrp:g}"

    @property
    def mean_hos_proposed(self) -> float:
        return float(np.mean([f.ho_count_proposed for f in self.flights]))

    @property
    def mean_hos_baseline(self) -> float:
        return float(np.mean([f.ho_count_baseline for f in self.flights]))

    @property
    def mean_ho_ratio(self) -> float:
        return self.ratio_cdf.mean if self.ratio_cdf is not None else float("nan")

    @property
    def excluded_ratio_count(self) -> int:
        return sum(1 for f in self.flights if f.ratio_excluded)

    @property
    def p5_rsrp_dbm(self) -> float:
        return self.rsrp_cdf_proposed.percentile(0.05)

    @property
    def p5_rsrp_gap_db(self) -> float:
        return self.rsrp_cdf_baseline.percentile(0.05) - self.p5_rsrp_dbm

    @property
    def min_rsrp_dbm(self) -> float:
        return float(self.rsrp_cdf_proposed.values[0])

    @property
    def ho_reduction(self) -> float:
        """Relative drop of the mean HO count against the baseline"""
        baseline = self.mean_hos_baseline
        return 1.0 - self.mean_hos_proposed / baseline if baseline > 0 else 0.0

    def reduction_probability(self, at_least: float = 0.5) -> float:
        """Fraction of ratio flights whose HO count drops by at least the given share"""
        if self.ratio_cdf is None:
            return float("nan")
        return self.ratio_cdf.at(1.0 - at_least)


def aggregate_flights(w_ho: float, w_rsrp: float, flights: List[FlightResult]) -> WeightAggregate:
    if not flights:
        raise ExperimentError(f"No flights for weight pair ({w_ho}, {w_rsrp})")
    flights = sorted(flights, key=lambda f: f.route_id)
    ratios = [f.ho_ratio for f in flights if f.ho_ratio is not None]
    return WeightAggregate(
        w_ho=w_ho,
        w_rsrp=w_rsrp,
        flights=flights,
        ho_cdf_proposed=empirical_cdf([f.ho_count_proposed for f in flights]),
        ho_cdf_baseline=empirical_cdf([f.ho_count_baseline for f in flights]),
        ratio_cdf=empirical_cdf(ratios) if ratios else None,
        rsrp_cdf_proposed=empirical_cdf(np.concatenate([f.rsrp_trace_proposed_dbm for f in flights])),
        rsrp_cdf_baseline=empirical_cdf(np.concatenate([f.rsrp_trace_baseline_dbm for f in flights])),
    )


@dataclass
class SweepResult:
    config: ExperimentConfig
    aggregates: List[WeightAggregate]
    skipped: List[Tuple[int, str]] = field(default_factory=list)
    route_seeds: Dict[int, int] = field(default_factory=dict)
    flight_seeds: Dict[Tuple[int, int], int] = field(default_factory=dict)
    seconds: float = 0.0

    def aggregate_for(self, w_ho: float, w_rsrp: float) -> WeightAggregate:
        for aggregate in self.aggregates:
            if aggregate.w_ho == w_ho and aggregate.w_rsrp == w_rsrp:
                return aggregate
        raise ArgumentError(f"Weight pair ({w_ho}, {w_rsrp}) was not swept")


def derive_seed(master_seed: int, *keys: int) -> int:
    """Independent, reproducible stream seed for (master, keys...)"""
    return int(np.random.SeedSequence([master_seed, *keys]).generate_state(1)[0])


def route_seed(master_seed: int, route_id: int) -> int:
    return derive_seed(master_seed, 0, route_id)


def flight_seed(master_seed: int, route_id: int, weight_index: int) -> int:
    return derive_seed(master_seed, 1, route_id, weight_index)


def _fly_route(grid: RsrpGrid, config: ExperimentConfig, route_id: int) -> Tuple[int, List[FlightResult], Optional[str]]:
    rng = np.random.default_rng(route_seed(config.master_seed, route_id))
    trajectory = random_trajectory(
        grid.spec,
        rng,
        step_length_m=config.step_length_m,
        min_route_length_m=config.min_route_length_m,
        margin_m=config.route_margin_m,
    )
    flights = []
    for weight_index, (w_ho, w_rsrp) in enumerate(config.weight_pairs):
        hp = config.hyperparams.with_weights(w_ho, w_rsrp)
        try:
            flights.append(
                run_flight(grid, trajectory, hp, flight_seed(config.master_seed, route_id, weight_index), route_id)
            )
        except UncoveredRouteError as e:
            return route_id, [], str(e)
    return route_id, flights, None


def sweep(config: ExperimentConfig, grid: Optional[RsrpGrid] = None) -> SweepResult:
    """Fly num_routes random routes under every weight pair and aggregate per pair"""
    started = time.perf_counter()
    if grid is None:
        grid = config.map_source.load_grid()

    logger.info(
        f"Sweeping {config.num_routes} routes x {len(config.weight_pairs)} weight pairs "
        f"(n={config.hyperparams.episodes}, k={config.hyperparams.k}, jobs={config.parallel})"
    )
    outcomes = Parallel(n_jobs=config.parallel)(
        delayed(_fly_route)(grid, config, route_id) for route_id in range(config.num_routes)
    )

    per_weight: Dict[int, List[FlightResult]] = {i: [] for i in range(len(config.weight_pairs))}
    skipped: List[Tuple[int, str]] = []
    for route_id, flights, diagnostic in sorted(outcomes, key=lambda o: o[0]):
        if diagnostic is not None:
            logger.warning(f"Route {route_id} skipped: {diagnostic}")
            skipped.append((route_id, diagnostic))
            continue
        for weight_index, flight in enumerate(flights):
            per_weight[weight_index].append(flight)

    if len(skipped) == config.num_routes:
        raise ExperimentError(f"All {config.num_routes} routes cross unpopulated bins")

    aggregates = [
        aggregate_flights(w_ho, w_rsrp, per_weight[i])
        for i, (w_ho, w_rsrp) in enumerate(config.weight_pairs)
    ]
    for aggregate in aggregates:
        logger.info(
            f"{aggregate.label}: mean HOs {aggregate.mean_hos_proposed:.2f} vs "
            f"{aggregate.mean_hos_baseline:.2f} baseline, mean ratio {aggregate.mean_ho_ratio:.3f}"
        )

    flown = [r for r in range(config.num_routes) if r not in {s for s, _ in skipped}]
    return SweepResult(
        config=config,
        aggregates=aggregates,
        skipped=skipped,
        route_seeds={r: route_seed(config.master_seed, r) for r in range(config.num_routes)},
        flight_seeds={
            (r, w): flight_seed(config.master_seed, r, w)
            for r in flown
            for w in range(len(config.weight_pairs))
        },
        seconds=time.perf_counter() - started,
    )


# CSV / YAML outputs

def write_flights_csv(result: SweepResult, path: Union[str, Path]) -> Path:
    """route_id,w_ho,w_rsrp,ho_proposed,ho_baseline,ho_ratio"""
    rows = [
        {
            "route_id": f.route_id,
            "w_ho": f.w_ho,
            "w_rsrp": f.w_rsrp,
            "ho_proposed": f.ho_count_proposed,
            "ho_baseline": f.ho_count_baseline,
            "ho_ratio": f.ho_ratio,
        }
        for aggregate in result.aggregates
        for f in aggregate.flights
    ]
    columns = ["route_id", "w_ho", "w_rsrp", "ho_proposed", "ho_baseline", "ho_ratio"]
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False)
    return Path(path)


def write_cdf_csv(series: Sequence[Tuple[str, CdfSeries]], path: Union[str, Path]) -> Path:
    """value,cum_prob,series_label"""
    frames = [
        pd.DataFrame({"value": cdf.values, "cum_prob": cdf.probabilities, "series_label": label})
        for label, cdf in series
    ]
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(
        columns=["value", "cum_prob", "series_label"]
    )
    frame.to_csv(path, index=False)
    return Path(path)


def write_summary_csv(result: SweepResult, path: Union[str, Path]) -> Path:
    """w_ho,w_rsrp,mean_hos_proposed,mean_hos_baseline,mean_ho_ratio,p5_rsrp_dbm,min_rsrp_dbm"""
    pd.DataFrame([
        {
            "w_ho": a.w_ho,
            "w_rsrp": a.w_rsrp,
            "mean_hos_proposed": a.mean_hos_proposed,
            "mean_hos_baseline": a.mean_hos_baseline,
            "mean_ho_ratio": a.mean_ho_ratio,
            "p5_rsrp_dbm": a.p5_rsrp_dbm,
            "min_rsrp_dbm": a.min_rsrp_dbm,
        }
        for a in result.aggregates
    ]).to_csv(path, index=False)
    return Path(path)


def sweep_report(result: SweepResult) -> Dict[str, Any]:
    """Headline statistics per weight pair"""
    return {
        "routes_requested": result.config.num_routes,
        "routes_skipped": len(result.skipped),
        "weights": [
            {
                "w_ho": a.w_ho,
                "w_rsrp": a.w_rsrp,
                "flights": len(a.flights),
                "mean_hos_proposed": a.mean_hos_proposed,
                "mean_hos_baseline": a.mean_hos_baseline,
                "ho_reduction": a.ho_reduction,
                "mean_ho_ratio": a.mean_ho_ratio,
                "prob_half_reduction": a.reduction_probability(0.5),
                "excluded_ratio_flights": a.excluded_ratio_count,
                "p5_rsrp_dbm": a.p5_rsrp_dbm,
                "p5_rsrp_gap_db": a.p5_rsrp_gap_db,
                "min_rsrp_dbm": a.min_rsrp_dbm,
            }
            for a in result.aggregates
        ],
    }


def write_sweep_outputs(result: SweepResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    first = result.aggregates[0]
    paths = {
        "flights": write_flights_csv(result, out / "flights.csv"),
        "summary": write_summary_csv(result, out / "summary.csv"),
        "cdf_hos": write_cdf_csv(
            [("baseline", first.ho_cdf_baseline)]
            + [(f"proposed {a.label}", a.ho_cdf_proposed) for a in result.aggregates],
            out / "cdf_hos.csv",
        ),
        "cdf_ho_ratio": write_cdf_csv(
            [(f"proposed {a.label}", a.ratio_cdf) for a in result.aggregates if a.ratio_cdf is not None],
            out / "cdf_ho_ratio.csv",
        ),
        "cdf_rsrp": write_cdf_csv(
            [("baseline", first.rsrp_cdf_baseline)]
            + [(f"proposed {a.label}", a.rsrp_cdf_proposed) for a in result.aggregates],
            out / "cdf_rsrp.csv",
        ),
    }

    report_path = out / "report.yaml"
    report_path.write_text(yaml.safe_dump(sweep_report(result), sort_keys=False))
    paths["report"] = report_path

    manifest_path = out / "manifest.yaml"
    manifest = {
        "master_seed": result.config.master_seed,
        "route_seeds": {int(r): int(s) for r, s in result.route_seeds.items()},
        "flight_seeds": [
            {"route_id": int(r), "weight_index": int(w), "seed": int(s)}
            for (r, w), s in sorted(result.flight_seeds.items())
        ],
        "skipped_routes": [{"route_id": int(r), "reason": reason} for r, reason in result.skipped],
        "config": result.config.model_dump(mode="json"),
    }
    manifest_path.write_text(yaml.safe_dump(manifest, sort_keys=False))
    paths["manifest"] = manifest_path

    logger.info(f"Wrote sweep outputs to {out}")
    return paths
