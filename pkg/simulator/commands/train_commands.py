"""
Training command: one route, Q-learning policy, baseline and optional DP oracle
"""
import logging
from pathlib import Path
from typing import Optional, Tuple

import click
import numpy as np
import yaml

from Models.qlearning.qlearning_agent import (
    QLearningHandoverAgent,
    dp_optimal,
    policy_return,
    write_policy_csv,
    write_q_table_csv,
)
from simulator.commands.common import RunContext, handle_errors, resolve_route
from simulator.errors import UncoveredRouteError
from simulator.services.trajectory import validate_route_coverage, write_trajectory_csv

logger = logging.getLogger(__name__)


@click.command("train")
@click.option("--route", "route_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="Trajectory CSV to train on")
@click.option("--start", type=(float, float), default=None, help="Start waypoint x y in meters")
@click.option("--end", type=(float, float), default=None, help="Target location x y in meters")
@click.option("--w-ho", type=float, default=None, help="Override the HO-cost weight")
@click.option("--w-rsrp", type=float, default=None, help="Override the RSRP weight")
@click.option("--episodes", type=int, default=None, help="Override the number of training episodes")
@click.option("--oracle", is_flag=True, help="Also solve the route exactly and compare")
@click.pass_obj
def train(
    run: RunContext,
    route_csv: Optional[Path],
    start: Optional[Tuple[float, float]],
    end: Optional[Tuple[float, float]],
    w_ho: Optional[float],
    w_rsrp: Optional[float],
    episodes: Optional[int],
    oracle: bool,
):
    """Learn serving cells along one route; writes policy and Q-table CSVs"""
    with handle_errors():
        overrides = {
            key: value
            for key, value in (("w_ho", w_ho), ("w_rsrp", w_rsrp), ("episodes", episodes))
            if value is not None
        }
        config = run.config.with_overrides(hyperparams=overrides) if overrides else run.config
        hp = config.hyperparams

        grid = config.map_source.load_grid()
        trajectory = resolve_route(config, grid.spec, route_csv, start, end)
        coverage = validate_route_coverage(trajectory, grid)
        if not coverage.ok:
            raise UncoveredRouteError(coverage.uncovered)

        agent = QLearningHandoverAgent(hp)
        plan = agent.plan(grid, trajectory, seed=config.experiment.master_seed)

        out = run.out_dir
        write_trajectory_csv(trajectory, out / "route.csv")
        write_policy_csv(plan.proposed, trajectory, out / "policy.csv")
        write_policy_csv(plan.baseline, trajectory, out / "baseline_policy.csv")
        q_table = plan.q_table if plan.q_table is not None else np.zeros((0, hp.k, hp.k))
        write_q_table_csv(q_table, out / "q_table.csv")

        click.echo(f"waypoints: {len(trajectory)}")
        click.echo(f"HOs proposed: {plan.proposed.ho_count}, baseline: {plan.baseline.ho_count}")
        if plan.stats is not None:
            click.echo(f"training: {hp.episodes} episodes in {plan.stats.seconds:.3f}s")

        if oracle and plan.reward is not None:
            oracle_policy, oracle_value = dp_optimal(plan.reward, hp.discount, plan.candidates)
            learned_value = policy_return(plan.reward, plan.proposed.ranks, hp.discount)
            write_policy_csv(oracle_policy, trajectory, out / "oracle_policy.csv")
            report = {
                "oracle_return": oracle_value,
                "learned_return": learned_value,
                "gap": oracle_value - learned_value,
                "same_ranks": bool(np.array_equal(oracle_policy.ranks, plan.proposed.ranks)),
                "oracle_hos": oracle_policy.ho_count,
                "learned_hos": plan.proposed.ho_count,
            }
            (out / "oracle_report.yaml").write_text(yaml.safe_dump(report, sort_keys=False))
            click.echo(f"oracle return {oracle_value:.6f}, learned {learned_value:.6f}")
        logger.info(f"Training artifacts written to {out}")
