"""
Sweep command: many random routes under several weight pairs
"""
import logging
from typing import Optional

import click

from simulator.commands.common import RunContext, handle_errors, parse_weight_pairs
from simulator.services.evaluation_system import sweep as run_sweep, write_sweep_outputs

logger = logging.getLogger(__name__)


@click.command("sweep")
@click.option("--weights", default=None, help="Weight pairs as w_ho:w_rsrp,... (e.g. 0:1,1:9,1:1)")
@click.option("--routes", "num_routes", type=int, default=None, help="Override the number of routes")
@click.pass_obj
def sweep(run: RunContext, weights: Optional[str], num_routes: Optional[int]):
    """Compare proposed and baseline HO counts, ratios and RSRP over random routes"""
    pairs = parse_weight_pairs(weights) if weights else None
    with handle_errors():
        experiment = run.config.with_overrides(weight_pairs=pairs, num_routes=num_routes).experiment

        result = run_sweep(experiment)
        paths = write_sweep_outputs(result, run.out_dir)

        click.echo(f"routes: {experiment.num_routes} ({len(result.skipped)} skipped)")
        click.echo("w_ho    w_rsrp  HOs(proposed)  HOs(baseline)  ratio   p5 RSRP")
        for a in result.aggregates:
            click.echo(
                f"{a.w_ho:<7g} {a.w_rsrp:<7g} {a.mean_hos_proposed:<14.2f} {a.mean_hos_baseline:<14.2f} "
                f"{a.mean_ho_ratio:<7.3f} {a.p5_rsrp_dbm:.2f} dBm"
            )
        logger.info(f"Sweep outputs: {', '.join(str(p.name) for p in paths.values())}")
