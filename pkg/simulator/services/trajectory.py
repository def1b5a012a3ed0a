"""
Trajectory Service - Fixed 2D flight routes built with 8-direction greedy stepping
"""
import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from config.global_config import GlobalConfig
from simulator.errors import ArgumentError, ConfigurationError
from simulator.services.radio_map import GridSpec, Position, RsrpGrid

logger = logging.getLogger(__name__)

_DIAGONAL = math.sqrt(0.5)

# exact axis components so axis-aligned routes stay on round coordinates
_UNIT_VECTORS = np.array([
    (1.0, 0.0),
    (_DIAGONAL, _DIAGONAL),
    (0.0, 1.0),
    (-_DIAGONAL, _DIAGONAL),
    (-1.0, 0.0),
    (-_DIAGONAL, -_DIAGONAL),
    (0.0, -1.0),
    (_DIAGONAL, -_DIAGONAL),
])


class Direction(IntEnum):
    """Movement direction; angle = index * pi / 4"""
    EAST = 0
    NORTH_EAST = 1
    NORTH = 2
    NORTH_WEST = 3
    WEST = 4
    SOUTH_WEST = 5
    SOUTH = 6
    SOUTH_EAST = 7

    @property
    def angle(self) -> float:
        return self.value * math.pi / 4.0

    @property
    def unit_vector(self) -> np.ndarray:
        return _UNIT_VECTORS[self.value]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Ordered waypoints; directions[i] is the step from waypoint i to i + 1"""

    waypoints: np.ndarray
    step_length_m: float
    directions: Tuple[Direction, ...] = ()

    def __post_init__(self):
        waypoints = np.asarray(self.waypoints, dtype=float).reshape(-1, 2)
        if waypoints.shape[0] < 1:
            raise ArgumentError("A trajectory needs at least one waypoint")
        if len(self.directions) != waypoints.shape[0] - 1:
            raise ArgumentError(
                f"{waypoints.shape[0]} waypoints need {waypoints.shape[0] - 1} directions, "
                f"got {len(self.directions)}"
            )
        if self.step_length_m <= 0:
            raise ArgumentError("step_length_m must be positive")
        waypoints.setflags(write=False)
        object.__setattr__(self, "waypoints", waypoints)
        object.__setattr__(self, "directions", tuple(Direction(d) for d in self.directions))

    def __len__(self) -> int:
        return self.waypoints.shape[0]

    @property
    def num_transitions(self) -> int:
        return len(self) - 1

    @property
    def headings(self) -> List[Optional[Direction]]:
        """Movement direction at each waypoint; the last one keeps the arriving heading"""
        if not self.directions:
            return [None]
        return list(self.directions) + [self.directions[-1]]

    def is_consistent(self, tol: float = 1e-9) -> bool:
        if not self.directions:
            return True
        steps = np.diff(self.waypoints, axis=0)
        expected = self.step_length_m * _UNIT_VECTORS[[int(d) for d in self.directions]]
        return bool(np.allclose(steps, expected, rtol=0.0, atol=tol * max(1.0, self.step_length_m)))


@dataclass(frozen=True)
class CoverageReport:
    """Waypoints whose bin holds no RSRP samples"""

    uncovered: Tuple[Tuple[int, Position], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.uncovered


def generate_trajectory(start: Position, end: Position, step_length_m: float, bounds: GridSpec) -> Trajectory:
    """Greedy 8-direction stepping towards end until no move gets strictly closer"""
    if step_length_m <= 0:
        raise ArgumentError("step_length_m must be positive")
    if not bounds.contains(*start):
        raise ArgumentError(f"Start {start} lies outside the service area")
    if not bounds.contains(*end):
        raise ArgumentError(f"End {end} lies outside the service area")

    target = np.asarray(end, dtype=float)
    current = np.asarray(start, dtype=float)
    distance = float(np.hypot(*(target - current)))
    waypoints = [current]
    directions: List[Direction] = []
    # each improving step far from the target gains at least ~0.4 step; the rest is slack
    max_steps = int(math.ceil(distance / (0.3 * step_length_m))) + 64

    for _ in range(max_steps):
        candidates = current + step_length_m * _UNIT_VECTORS
        eligible = np.array([bounds.contains(x, y) for x, y in candidates])
        distances = np.hypot(candidates[:, 0] - target[0], candidates[:, 1] - target[1])
        distances[~eligible] = np.inf
        best = int(np.argmin(distances))
        if not distances[best] < distance:
            break
        current = candidates[best]
        distance = float(distances[best])
        waypoints.append(current)
        directions.append(Direction(best))
    else:
        logger.warning(f"Route {start} -> {end} stopped after {max_steps} steps without settling")

    return Trajectory(np.array(waypoints), step_length_m, tuple(directions))


def validate_route_coverage(trajectory: Trajectory, grid: RsrpGrid) -> CoverageReport:
    uncovered = tuple(
        (i, (float(x), float(y)))
        for i, (x, y) in enumerate(trajectory.waypoints)
        if not grid.is_populated(x, y)
    )
    if uncovered:
        logger.debug(f"Route crosses {len(uncovered)} unpopulated bins")
    return CoverageReport(uncovered)


def random_route_endpoints(
    spec: GridSpec,
    rng: np.random.Generator,
    min_route_length_m: float = 0.0,
    margin_m: float = 0.0,
    max_attempts: int = 1000,
) -> Tuple[Position, Position]:
    """Uniform start and end in the area interior, at least min_route_length_m apart"""
    x0, y0 = spec.origin
    low = np.array([x0 + margin_m, y0 + margin_m])
    high = np.array([x0 + spec.width_m - margin_m, y0 + spec.height_m - margin_m])
    if np.any(high < low):
        raise ArgumentError(f"Margin {margin_m} m leaves no interior")
    for _ in range(max_attempts):
        start, end = rng.uniform(low, high, size=(2, 2))
        if np.hypot(*(end - start)) >= min_route_length_m:
            return (float(start[0]), float(start[1])), (float(end[0]), float(end[1]))
    raise ArgumentError(f"No endpoint pair {min_route_length_m} m apart found in {max_attempts} draws")


def random_trajectory(
    spec: GridSpec,
    rng: np.random.Generator,
    step_length_m: Optional[float] = None,
    min_route_length_m: Optional[float] = None,
    margin_m: Optional[float] = None,
) -> Trajectory:
    experiment = GlobalConfig.EXPERIMENT_CONFIG
    start, end = random_route_endpoints(
        spec,
        rng,
        experiment["min_route_length_m"] if min_route_length_m is None else min_route_length_m,
        experiment["route_margin_m"] if margin_m is None else margin_m,
    )
    step = experiment["step_length_m"] if step_length_m is None else step_length_m
    return generate_trajectory(start, end, step, spec)


# CSV interfaces

def write_trajectory_csv(trajectory: Trajectory, path: Union[str, Path]) -> Path:
    """index,x_m,y_m,direction_index; the last waypoint carries -1"""
    frame = pd.DataFrame({
        "index": np.arange(len(trajectory)),
        "x_m": trajectory.waypoints[:, 0],
        "y_m": trajectory.waypoints[:, 1],
        "direction_index": [int(d) for d in trajectory.directions] + [-1],
    })
    frame.to_csv(path, index=False)
    return Path(path)


def read_trajectory_csv(path: Union[str, Path], step_length_m: Optional[float] = None) -> Trajectory:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise ConfigurationError(f"Cannot read trajectory CSV {path}: {e}") from e
    missing = {"index", "x_m", "y_m", "direction_index"} - set(frame.columns)
    if missing:
        raise ConfigurationError(f"Trajectory CSV {path} lacks columns {sorted(missing)}")
    frame = frame.sort_values("index")
    try:
        waypoints = frame[["x_m", "y_m"]].to_numpy(dtype=float)
        directions = tuple(Direction(int(d)) for d in frame["direction_index"].iloc[:-1])
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Trajectory CSV {path}: {e}") from e
    if step_length_m is None:
        step_length_m = (
            float(np.hypot(*(waypoints[1] - waypoints[0])))
            if len(waypoints) > 1
            else GlobalConfig.EXPERIMENT_CONFIG["step_length_m"]
        )
    try:
        trajectory = Trajectory(waypoints, step_length_m, directions)
    except ArgumentError as e:
        raise ConfigurationError(f"Trajectory CSV {path}: {e}") from e
    if not trajectory.is_consistent(tol=1e-6):
        raise ConfigurationError(f"Trajectory CSV {path} has steps that disagree with their directions")
    return trajectory
