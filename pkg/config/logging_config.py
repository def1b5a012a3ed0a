"""
Logging setup: module loggers stay stdlib, records are rendered through structlog
"""

import logging
import sys

import structlog

from config.global_config import GlobalConfig


def setup_logging(level: str = None, json_logs: bool = None) -> None:
    """Route every stdlib record to stderr through a structlog formatter"""
    monitoring = GlobalConfig.MONITORING_CONFIG
    level = (level or monitoring["logging_level"]).upper()
    json_logs = monitoring["json_logs"] if json_logs is None else json_logs

    renderer = (
        structlog.processors.JSONRenderer()
        if json_logs
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=[
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
        ],
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)
