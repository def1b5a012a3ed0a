"""
Run Configuration Document
YAML file validated into pydantic models before any work starts
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.global_config import GlobalConfig, OUTPUT_DIR
from Models.qlearning.qlearning_agent import HyperParams
from simulator.errors import ConfigurationError
from simulator.services.evaluation_system import ExperimentConfig
from simulator.services.radio_map import GridSpec, MapSourceConfig


class RouteConfig(BaseModel):
    """Fixed route endpoints for train and gen-route"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    start: Tuple[float, float] = Field(..., description="First waypoint in meters")
    end: Tuple[float, float] = Field(..., description="Target location in meters")


class RunConfig(BaseModel):
    """
    Top-level document:

        map:          MapSourceConfig (grid, synthetic deployment or sample CSV)
        hyperparams:  HyperParams
        experiment:   ExperimentConfig without map/hyperparams
        route:        optional RouteConfig
        output_dir:   where artifacts are written
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)
    route: Optional[RouteConfig] = None
    output_dir: Path = Field(default_factory=lambda: Path(os.getenv("UAVHO_OUTPUT", str(OUTPUT_DIR))))
    logging_level: str = Field(GlobalConfig.MONITORING_CONFIG["logging_level"])

    @model_validator(mode="before")
    @classmethod
    def _lift_sections(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        experiment = dict(data.pop("experiment", None) or {})
        for section, key in (("map", "map_source"), ("hyperparams", "hyperparams")):
            if section in data:
                if key in experiment:
                    raise ValueError(f"'{section}' given both at top level and inside 'experiment'")
                experiment[key] = data.pop(section)
        data["experiment"] = experiment
        return data

    @property
    def map_source(self) -> MapSourceConfig:
        return self.experiment.map_source

    @property
    def grid_spec(self) -> GridSpec:
        return self.experiment.map_source.grid

    @property
    def hyperparams(self) -> HyperParams:
        return self.experiment.hyperparams

    @classmethod
    def from_mapping(cls, data: Optional[Dict[str, Any]]) -> "RunConfig":
        try:
            return cls.model_validate(data or {})
        except ValidationError as e:
            raise ConfigurationError(f"Invalid configuration:\n{e}") from e

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = yaml.safe_load(handle)
        except OSError as e:
            raise ConfigurationError(f"Cannot read configuration {path}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Configuration {path} is not valid YAML: {e}") from e
        if data is not None and not isinstance(data, dict):
            raise ConfigurationError(f"Configuration {path} must be a mapping at top level")
        return cls.from_mapping(data)

    def with_overrides(
        self,
        seed: Optional[int] = None,
        output_dir: Optional[Path] = None,
        parallel: Optional[int] = None,
        weight_pairs: Optional[List[Tuple[float, float]]] = None,
        hyperparams: Optional[Dict[str, Any]] = None,
        num_routes: Optional[int] = None,
    ) -> "RunConfig":
        """Re-validated copy with command-line overrides applied"""
        data = self.model_dump()
        experiment = data["experiment"]
        if seed is not None:
            experiment["master_seed"] = seed
        if parallel is not None:
            experiment["parallel"] = parallel
        if weight_pairs is not None:
            experiment["weight_pairs"] = weight_pairs
        if num_routes is not None:
            experiment["num_routes"] = num_routes
        if hyperparams:
            experiment["hyperparams"].update(hyperparams)
        if output_dir is not None:
            data["output_dir"] = output_dir
        return RunConfig.from_mapping(data)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)
