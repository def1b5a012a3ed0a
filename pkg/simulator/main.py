"""
UAV Handover Simulator - Command Line Entry Point
=================================================

Radio map synthesis, route generation, per-route Q-learning and multi-route
sweeps comparing learned handover decisions with the strongest-cell baseline.

Version: 0.1.0
License: MIT
"""

import logging
from pathlib import Path
from typing import Optional

import click
from dotenv import load_dotenv

from config.global_config import GlobalConfig
from config.logging_config import setup_logging
from config.run_config import RunConfig
from simulator.commands import map_commands, sweep_commands, train_commands
from simulator.commands.common import RunContext, handle_errors, parse_weight_pairs

logger = logging.getLogger(__name__)


@click.group(help=GlobalConfig.DESCRIPTION, context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(GlobalConfig.VERSION, prog_name="uav-ho", message=f"{GlobalConfig.SYSTEM_NAME} %(version)s")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path),
              envvar="UAVHO_CONFIG", default=None, help="Run configuration YAML")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Master seed for routes and training")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Output directory")
@click.option("--parallel", type=click.IntRange(min=1), default=None, help="Worker processes for sweeps")
@click.option("--weights", default=None, help="Weight pairs as w_ho:w_rsrp,...")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Logging level")
@click.option("--json-logs", is_flag=True, default=False, help="Render logs as JSON lines")
@click.pass_context
def cli(
    ctx: click.Context,
    config_path: Optional[Path],
    seed: Optional[int],
    out_dir: Optional[Path],
    parallel: Optional[int],
    weights: Optional[str],
    log_level: Optional[str],
    json_logs: bool,
):
    load_dotenv()
    GlobalConfig.set_environment_variables()
    pairs = parse_weight_pairs(weights) if weights else None

    with handle_errors():
        config = RunConfig.from_yaml(config_path) if config_path else RunConfig.from_mapping({})
        config = config.with_overrides(
            seed=seed,
            output_dir=out_dir,
            parallel=parallel,
            weight_pairs=pairs,
        )
    setup_logging(log_level or config.logging_level, json_logs or None)
    failed = [name for name, ok in GlobalConfig.validate_configuration().items() if not ok]
    if failed:
        logger.warning(f"Built-in defaults failed checks: {failed}")
    logger.debug(f"Run configuration:\n{config.to_yaml()}")
    ctx.obj = RunContext(config)


cli.add_command(map_commands.synth_map)
cli.add_command(map_commands.gen_route)
cli.add_command(train_commands.train)
cli.add_command(sweep_commands.sweep)


def main():
    cli(prog_name="uav-ho")


if __name__ == "__main__":
    main()
