"""
Map and route commands: synth-map, gen-route
"""
import logging
from pathlib import Path
from typing import Optional, Tuple

import click

from config.global_config import MapSource
from simulator.commands.common import RunContext, handle_errors, resolve_route
from simulator.services.radio_map import (
    grid_summary,
    normalize,
    quantize,
    write_association_csv,
    write_grid_csv,
    write_samples_csv,
)
from simulator.services.trajectory import write_trajectory_csv

logger = logging.getLogger(__name__)


@click.command("synth-map")
@click.option("--samples/--no-samples", default=False, help="Also write the raw sample CSV")
@click.pass_obj
def synth_map(run: RunContext, samples: bool):
    """Build the quantized radio map and write grid + association CSVs"""
    with handle_errors():
        source = run.config.map_source
        if source.source is MapSource.GRID_CSV and not samples:
            raw, grid = None, source.load_grid()
        else:
            raw = source.load_samples()
            normalized, params = normalize(raw)
            grid = quantize(normalized, source.grid, params, source.averaging)

        out = run.out_dir
        write_grid_csv(grid, out / "grid.csv")
        write_association_csv(grid, out / "association.csv")
        if samples:
            write_samples_csv(raw, out / "samples.csv")

        summary = grid_summary(grid)
        click.echo(f"bins: {summary['bins_x']} x {summary['bins_y']}")
        click.echo(f"cells: {summary['num_cells']} ({summary['serving_cells']} strongest somewhere)")
        click.echo(f"coverage: {summary['coverage']:.1%}")
        click.echo(f"normalization: [{summary['norm_min_dbm']:.2f}, {summary['norm_max_dbm']:.2f}] dBm")
        logger.info(f"Radio map written to {out}")


@click.command("gen-route")
@click.option("--start", type=(float, float), default=None, help="Start waypoint x y in meters")
@click.option("--end", type=(float, float), default=None, help="Target location x y in meters")
@click.pass_obj
def gen_route(run: RunContext, start: Optional[Tuple[float, float]], end: Optional[Tuple[float, float]]):
    """Generate a trajectory with 8-direction greedy stepping and write it as CSV"""
    with handle_errors():
        trajectory = resolve_route(run.config, run.config.grid_spec, None, start, end)
        path = write_trajectory_csv(trajectory, run.out_dir / "route.csv")
        first, last = trajectory.waypoints[0], trajectory.waypoints[-1]
        click.echo(
            f"route: {len(trajectory)} waypoints from ({first[0]:.1f}, {first[1]:.1f}) "
            f"to ({last[0]:.1f}, {last[1]:.1f})"
        )
        logger.info(f"Route written to {Path(path)}")
