"""
UAV Handover Simulator - Global Configuration System
Centralized defaults for the radio map, trajectories, learning and experiments
"""

import math
import os
from pathlib import Path
from typing import Dict, List, Union
from dataclasses import dataclass
from enum import Enum

# Base project paths
PROJECT_ROOT = Path(__file__).parent.parent.absolute()
CONFIG_DIR = PROJECT_ROOT / "config"
OUTPUT_DIR = PROJECT_ROOT / "outputs"


class ExplorationMode(str, Enum):
    """Interpretation of the exploration coefficient"""
    LITERAL = "literal"  # greedy with probability epsilon
    CONVENTIONAL = "conventional"  # random with probability epsilon


class BinAveraging(str, Enum):
    """How samples falling in one bin are averaged"""
    DBM = "dbm"
    LINEAR = "linear"


class MapSource(str, Enum):
    """Where the radio map comes from"""
    SYNTHETIC = "synthetic"
    CSV = "csv"
    GRID_CSV = "grid_csv"  # already quantized, as written by synth-map


@dataclass
class SystemPaths:
    """System Path Configuration"""
    project_root: str = str(PROJECT_ROOT)
    config_dir: str = str(CONFIG_DIR)
    output_dir: str = str(OUTPUT_DIR)


class GlobalConfig:
    """Global Configuration Manager"""

    # System Information
    SYSTEM_NAME = "UAV Handover Simulator"
    VERSION = "0.1.0"
    DESCRIPTION = "Q-learning handover decisions for cellular-connected drones"

    # Paths
    PATHS = SystemPaths()

    # Service area and quantization bins
    GRID_CONFIG = {
        "width_m": 6000.0,
        "height_m": 5000.0,
        "bin_size_m": 50.0,
        "origin": (0.0, 0.0),
    }

    # Synthetic radio map (7 sites, 3 sectors each)
    SYNTHETIC_MAP_CONFIG = {
        "site_center": (3000.0, 2500.0),
        "inter_site_distance_m": 1732.0,
        "sectors_per_bs": 3,
        "sector_azimuths": [math.radians(30.0), math.radians(150.0), math.radians(270.0)],
        "bs_height_m": 30.0,
        "altitude_m": 50.0,
        "tx_power_dbm": 15.2,  # per resource element
        "reference_loss_db": 38.0,  # at 1 m, ~2 GHz
        "path_loss_exponent": 2.2,
        "main_lobe_gain_db": 15.0,
        "sidelobe_gain_db": -5.0,
        "downtilt_rad": math.radians(6.0),
        "horizontal_beamwidth_rad": math.radians(65.0),
        "vertical_beamwidth_rad": math.radians(10.0),
        "shadowing_std_db": 8.0,
        "samples_per_bin": 4,
        "stratified": True,
        "seed": 2021,
    }

    # Q-learning hyperparameters
    LEARNING_CONFIG = {
        "alpha": 0.5,
        "discount": 0.3,
        "epsilon": 0.2,
        "episodes": 1000,
        "w_ho": 1.0,
        "w_rsrp": 1.0,
        "k": 3,
        "exploration": ExplorationMode.LITERAL,
    }

    # Multi-route experiments
    EXPERIMENT_CONFIG = {
        "num_routes": 2000,
        "weight_pairs": [(0.0, 1.0), (1.0, 9.0), (1.0, 4.0), (1.0, 1.0), (4.0, 1.0)],
        "step_length_m": 50.0,
        "min_route_length_m": 1000.0,
        "route_margin_m": 100.0,
        "master_seed": 7,
        "parallel": 1,
    }

    # Monitoring Configuration
    MONITORING_CONFIG = {
        "logging_level": "INFO",
        "json_logs": False,
    }

    # Environment Variables
    ENV_VARS = {
        "UAVHO_VERSION": VERSION,
        "UAVHO_ROOT": str(PROJECT_ROOT),
        "UAVHO_OUTPUT": str(OUTPUT_DIR),
    }

    @classmethod
    def create_directories(cls, directories: List[Union[str, Path]] = None) -> List[Path]:
        """Create output directories, the default output directory when none are given"""
        paths = [Path(d) for d in (directories or [cls.PATHS.output_dir])]
        for path in paths:
            path.mkdir(parents=True, exist_ok=True)
        return paths

    @classmethod
    def set_environment_variables(cls):
        """Set environment variables that are not already defined"""
        for key, value in cls.ENV_VARS.items():
            os.environ.setdefault(key, str(value))

    @classmethod
    def validate_configuration(cls) -> Dict[str, bool]:
        """Sanity checks on the built-in defaults"""
        grid = cls.GRID_CONFIG
        learning = cls.LEARNING_CONFIG
        return {
            "grid": grid["width_m"] > 0 and grid["height_m"] > 0 and grid["bin_size_m"] > 0,
            "learning": 0 < learning["alpha"] <= 1 and 0 <= learning["discount"] < 1,
            "weights": all(w_ho >= 0 and w_rsrp >= 0 and w_ho + w_rsrp > 0
                           for w_ho, w_rsrp in cls.EXPERIMENT_CONFIG["weight_pairs"]),
            "sectors": len(cls.SYNTHETIC_MAP_CONFIG["sector_azimuths"])
            == cls.SYNTHETIC_MAP_CONFIG["sectors_per_bs"],
        }

