"""
Shared fixtures: tiny hand-built grids, a small synthetic deployment and
candidate tables with known numbers.
"""
import math

import numpy as np
import pytest

from Models.qlearning.qlearning_agent import CandidateTable, HyperParams
from simulator.services.evaluation_system import ExperimentConfig
from simulator.services.radio_map import (
    GridSpec,
    MapSourceConfig,
    RsrpGrid,
    SyntheticMapConfig,
    build_grid,
)

SECTOR_AZIMUTHS = [math.radians(30.0), math.radians(150.0), math.radians(270.0)]


@pytest.fixture
def tiny_spec() -> GridSpec:
    """2 x 2 bins of 50 m"""
    return GridSpec(width_m=100.0, height_m=100.0, bin_size_m=50.0)


@pytest.fixture
def small_spec() -> GridSpec:
    return GridSpec(width_m=1000.0, height_m=1000.0, bin_size_m=50.0)


@pytest.fixture
def small_synthetic() -> SyntheticMapConfig:
    """Three sectorized sites on a 1 km square"""
    return SyntheticMapConfig(
        bs_positions=[(250.0, 300.0), (750.0, 300.0), (500.0, 750.0)],
        sectors_per_bs=3,
        sector_azimuths=SECTOR_AZIMUTHS,
        shadowing_std_db=6.0,
        samples_per_bin=2,
        seed=11,
    )


@pytest.fixture
def small_grid(small_synthetic, small_spec) -> RsrpGrid:
    return build_grid(small_synthetic, small_spec)


@pytest.fixture
def small_experiment(small_synthetic, small_spec) -> ExperimentConfig:
    return ExperimentConfig(
        num_routes=6,
        weight_pairs=[(0.0, 1.0), (1.0, 1.0), (4.0, 1.0)],
        hyperparams=HyperParams(episodes=300),
        map_source=MapSourceConfig(grid=small_spec, synthetic=small_synthetic),
        min_route_length_m=400.0,
        route_margin_m=50.0,
        master_seed=5,
    )


@pytest.fixture
def swapped_candidates() -> CandidateTable:
    """Two waypoints, cells A=0 and B=1 swap order; RSRP 0.9 / 0.5 at waypoint 1"""
    return CandidateTable(
        cell_ids=np.array([[0, 1], [1, 0]]),
        norm_rsrp=np.array([[0.8, 0.6], [0.9, 0.5]]),
        raw_dbm=np.array([[-70.0, -80.0], [-65.0, -85.0]]),
    )


@pytest.fixture
def detour_candidates() -> CandidateTable:
    """Baseline hops A -> B -> A; staying on A costs 0.02 normalized RSRP at waypoint 1"""
    return CandidateTable(
        cell_ids=np.array([[0, 1], [1, 0], [0, 1], [0, 1]]),
        norm_rsrp=np.array([[0.8, 0.7], [0.52, 0.50], [0.8, 0.7], [0.8, 0.7]]),
        raw_dbm=np.array([[-70.0, -72.0], [-79.0, -79.4], [-70.0, -72.0], [-70.0, -72.0]]),
    )


@pytest.fixture
def random_candidates():
    """Factory of tables with distinct cells per row, strongest first"""

    def build(rng: np.random.Generator, length: int, k: int, num_cells: int = 4) -> CandidateTable:
        ids = np.array([rng.permutation(num_cells)[:k] for _ in range(length)])
        norms = -np.sort(-rng.random((length, k)), axis=1)
        return CandidateTable(ids, norms, -120.0 + 60.0 * norms)

    return build
