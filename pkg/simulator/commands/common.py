"""
Shared CLI plumbing: run context, error-to-exit-code mapping, route resolution
"""
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import click
import numpy as np

from config.global_config import GlobalConfig
from config.run_config import RunConfig
from simulator.errors import EXIT_IO_ERROR, HandoverSimError
from simulator.services.evaluation_system import route_seed
from simulator.services.radio_map import GridSpec
from simulator.services.trajectory import (
    Trajectory,
    generate_trajectory,
    random_trajectory,
    read_trajectory_csv,
)

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """Validated configuration shared by every command"""

    config: RunConfig

    @property
    def out_dir(self) -> Path:
        return GlobalConfig.create_directories([self.config.output_dir])[0]


@contextmanager
def handle_errors() -> Iterator[None]:
    """Map simulator and I/O failures to the documented exit codes"""
    try:
        yield
    except HandoverSimError as e:
        logger.error(f"{type(e).__name__}: {e}")
        click.echo(f"error: {e}", err=True)
        sys.exit(e.exit_code)
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_IO_ERROR)


def parse_weight_pairs(text: str) -> List[Tuple[float, float]]:
    """'0:1,1:9,1:1' -> [(0.0, 1.0), (1.0, 9.0), (1.0, 1.0)]"""
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            w_ho, w_rsrp = (float(v) for v in item.split(":"))
        except ValueError as e:
            raise click.BadParameter(f"'{item}' is not of the form w_ho:w_rsrp") from e
        pairs.append((w_ho, w_rsrp))
    if not pairs:
        raise click.BadParameter("No weight pair given")
    return pairs


def resolve_route(
    config: RunConfig,
    spec: GridSpec,
    route_csv: Optional[Path],
    start: Optional[Tuple[float, float]],
    end: Optional[Tuple[float, float]],
) -> Trajectory:
    """Route CSV, then explicit endpoints, then the config route, then a seeded random route"""
    step = config.experiment.step_length_m
    if route_csv is not None:
        return read_trajectory_csv(route_csv)
    if start is not None and end is not None:
        return generate_trajectory(start, end, step, spec)
    if config.route is not None:
        return generate_trajectory(config.route.start, config.route.end, step, spec)
    rng = np.random.default_rng(route_seed(config.experiment.master_seed, 0))
    return random_trajectory(
        spec,
        rng,
        step_length_m=step,
        min_route_length_m=config.experiment.min_route_length_m,
        margin_m=config.experiment.route_margin_m,
    )
