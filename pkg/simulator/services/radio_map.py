"""
Radio Map Service - Builds, ingests, normalizes and quantizes per-cell RSRP maps
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Any, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.global_config import GlobalConfig, BinAveraging, MapSource
from simulator.errors import (
    ArgumentError,
    ConfigurationError,
    DegenerateRangeError,
    UnpopulatedBinError,
)

logger = logging.getLogger(__name__)

Position = Tuple[float, float]


class GridSpec(BaseModel):
    """Rectangular service area partitioned into square bins"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    width_m: float = Field(..., gt=0, description="Area width along x")
    height_m: float = Field(..., gt=0, description="Area height along y")
    bin_size_m: float = Field(..., gt=0, description="Edge length of a square bin")
    origin: Tuple[float, float] = Field((0.0, 0.0), description="Lower-left corner of the area")

    @classmethod
    def default(cls) -> "GridSpec":
        return cls(**GlobalConfig.GRID_CONFIG)

    @property
    def num_bins_x(self) -> int:
        return max(1, math.ceil(self.width_m / self.bin_size_m - 1e-9))

    @property
    def num_bins_y(self) -> int:
        return max(1, math.ceil(self.height_m / self.bin_size_m - 1e-9))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.num_bins_x, self.num_bins_y

    @property
    def num_bins(self) -> int:
        return self.num_bins_x * self.num_bins_y

    def contains(self, x: float, y: float) -> bool:
        x0, y0 = self.origin
        return x0 <= x <= x0 + self.width_m and y0 <= y <= y0 + self.height_m

    def bin_index(self, x: float, y: float) -> Tuple[int, int]:
        """Bin holding (x, y); the far edges belong to the last bin"""
        if not self.contains(x, y):
            raise ArgumentError(f"Position ({x}, {y}) lies outside the service area")
        ix, iy = self.bin_indices(np.array([[x, y]], dtype=float))
        return int(ix[0]), int(iy[0])

    def bin_indices(self, positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x0, y0 = self.origin
        ix = np.floor((positions[:, 0] - x0) / self.bin_size_m).astype(np.int64)
        iy = np.floor((positions[:, 1] - y0) / self.bin_size_m).astype(np.int64)
        return np.clip(ix, 0, self.num_bins_x - 1), np.clip(iy, 0, self.num_bins_y - 1)


def hexagonal_sites(center: Position, inter_site_distance_m: float) -> List[Position]:
    """Centre site plus the first ring of six"""
    cx, cy = center
    d = inter_site_distance_m
    dy = d / 2.0 * math.sqrt(3.0)
    offsets = [(0.0, 0.0), (d, 0.0), (d / 2.0, dy), (-d / 2.0, dy),
               (-d, 0.0), (-d / 2.0, -dy), (d / 2.0, -dy)]
    return [(cx + ox, cy + oy) for ox, oy in offsets]


class SyntheticMapConfig(BaseModel):
    """Parametric deployment used to synthesize RSRP samples"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    bs_positions: List[Tuple[float, float]] = Field(..., min_length=1, description="Site positions in meters")
    sectors_per_bs: int = Field(3, ge=1, description="Cells per site; 1 means omnidirectional")
    sector_azimuths: List[float] = Field(default_factory=list, description="Boresight per sector, radians")
    bs_height_m: float = Field(30.0, ge=0)
    altitude_m: float = Field(50.0, ge=0, description="Drone altitude, metadata of the samples")
    tx_power_dbm: float = Field(15.2, description="Reference-signal transmit power")
    reference_loss_db: float = Field(38.0, description="Path loss at 1 m")
    path_loss_exponent: float = Field(2.2, gt=0)
    main_lobe_gain_db: float = Field(15.0)
    sidelobe_gain_db: float = Field(-5.0)
    downtilt_rad: float = Field(math.radians(6.0))
    horizontal_beamwidth_rad: float = Field(math.radians(65.0), gt=0)
    vertical_beamwidth_rad: float = Field(math.radians(10.0), gt=0)
    shadowing_std_db: float = Field(8.0, ge=0)
    samples_per_bin: int = Field(4, ge=1)
    stratified: bool = Field(True, description="Scatter samples inside every bin")
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_sectors(self) -> "SyntheticMapConfig":
        if self.sectors_per_bs > 1 and len(self.sector_azimuths) != self.sectors_per_bs:
            raise ValueError(
                f"sector_azimuths has {len(self.sector_azimuths)} entries, expected {self.sectors_per_bs}"
            )
        if self.sidelobe_gain_db > self.main_lobe_gain_db:
            raise ValueError("sidelobe_gain_db must not exceed main_lobe_gain_db")
        return self

    @classmethod
    def default(cls, **overrides: Any) -> "SyntheticMapConfig":
        defaults = dict(GlobalConfig.SYNTHETIC_MAP_CONFIG)
        center = defaults.pop("site_center")
        isd = defaults.pop("inter_site_distance_m")
        defaults["bs_positions"] = hexagonal_sites(center, isd)
        defaults.update(overrides)
        return cls(**defaults)

    @property
    def num_cells(self) -> int:
        return len(self.bs_positions) * self.sectors_per_bs


@dataclass(frozen=True)
class NormParams:
    """Affine map from dBm onto [0, 1]"""

    min_dbm: float
    max_dbm: float

    @property
    def span(self) -> float:
        return self.max_dbm - self.min_dbm

    def normalize(self, values):
        return (np.asarray(values, dtype=float) - self.min_dbm) / self.span

    def denormalize(self, values):
        return np.asarray(values, dtype=float) * self.span + self.min_dbm


@dataclass(frozen=True, eq=False)
class RsrpSampleSet:
    """Raw RSRP measurements; one dBm value per cell for every sample position"""

    positions: np.ndarray
    rsrp_dbm: np.ndarray
    altitude_m: float = 50.0
    rsrp_norm: Optional[np.ndarray] = None

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        rsrp = np.asarray(self.rsrp_dbm, dtype=float)
        if rsrp.ndim != 2 or rsrp.shape[0] != positions.shape[0]:
            raise ArgumentError(
                f"rsrp_dbm shape {rsrp.shape} does not match {positions.shape[0]} positions"
            )
        if not np.all(np.isfinite(rsrp)):
            raise ArgumentError("Every sample must carry a finite RSRP for every cell")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "rsrp_dbm", rsrp)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def num_cells(self) -> int:
        return self.rsrp_dbm.shape[1]


@dataclass(frozen=True, eq=False)
class RsrpGrid:
    """Quantized radio map; arrays are indexed [bin_x, bin_y, cell]"""

    spec: GridSpec
    raw_mean_dbm: np.ndarray
    norm: np.ndarray
    counts: np.ndarray
    norm_params: NormParams
    averaging: BinAveraging = BinAveraging.DBM
    altitude_m: float = 50.0
    _populated: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("raw_mean_dbm", "norm", "counts"):
            getattr(self, name).setflags(write=False)
        populated = self.counts > 0
        populated.setflags(write=False)
        object.__setattr__(self, "_populated", populated)

    @classmethod
    def from_bin_means(
        cls,
        spec: GridSpec,
        raw_mean_dbm: np.ndarray,
        norm_params: Optional[NormParams] = None,
    ) -> "RsrpGrid":
        """Build a grid from bin means; bins holding NaN are left empty"""
        raw = np.array(raw_mean_dbm, dtype=float)
        if raw.ndim != 3 or raw.shape[:2] != spec.shape:
            raise ArgumentError(f"Bin means of shape {raw.shape} do not fit grid {spec.shape}")
        populated = np.all(np.isfinite(raw), axis=2)
        if norm_params is None:
            values = raw[populated]
            if values.size == 0:
                raise ArgumentError("Grid has no populated bin")
            norm_params = NormParams(float(values.min()), float(values.max()))
            if norm_params.span <= 0:
                raise DegenerateRangeError("All bin means are equal")
        raw[~populated] = np.nan
        norm = np.clip(norm_params.normalize(raw), 0.0, 1.0)
        return cls(spec, raw, norm, populated.astype(np.int64), norm_params)

    @property
    def num_cells(self) -> int:
        return self.raw_mean_dbm.shape[2]

    @property
    def populated(self) -> np.ndarray:
        return self._populated

    def is_populated(self, x: float, y: float) -> bool:
        if not self.spec.contains(x, y):
            return False
        return bool(self._populated[self.spec.bin_index(x, y)])

    def bin_values(self, x: float, y: float) -> Tuple[np.ndarray, np.ndarray]:
        """(raw dBm, normalized) per cell for the bin holding (x, y)"""
        ix, iy = self.spec.bin_index(x, y)
        if not self._populated[ix, iy]:
            raise UnpopulatedBinError((ix, iy), (x, y))
        return self.raw_mean_dbm[ix, iy], self.norm[ix, iy]


def _wrap_angle(angle: np.ndarray) -> np.ndarray:
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def antenna_gain_db(config: SyntheticMapConfig, azimuth_offset: np.ndarray, elevation: np.ndarray) -> np.ndarray:
    """Parabolic main lobe clipped at a flat sidelobe floor"""
    if config.sectors_per_bs == 1:
        return np.full(np.shape(azimuth_offset), config.main_lobe_gain_db)
    horizontal = 12.0 * (_wrap_angle(azimuth_offset) / config.horizontal_beamwidth_rad) ** 2
    vertical = 12.0 * ((elevation + config.downtilt_rad) / config.vertical_beamwidth_rad) ** 2
    floor = config.main_lobe_gain_db - config.sidelobe_gain_db
    return config.main_lobe_gain_db - np.minimum(horizontal + vertical, floor)


def path_loss_db(config: SyntheticMapConfig, distance_m: np.ndarray) -> np.ndarray:
    distance = np.maximum(distance_m, 1.0)
    return config.reference_loss_db + 10.0 * config.path_loss_exponent * np.log10(distance)


def rsrp_at(config: SyntheticMapConfig, positions: np.ndarray) -> np.ndarray:
    """Deterministic RSRP (no shadowing), shape (N, num_cells), cell = bs * sectors + sector"""
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    sites = np.asarray(config.bs_positions, dtype=float)
    dx = positions[:, None, 0] - sites[None, :, 0]
    dy = positions[:, None, 1] - sites[None, :, 1]
    dz = config.altitude_m - config.bs_height_m
    horizontal = np.hypot(dx, dy)
    distance = np.sqrt(horizontal ** 2 + dz ** 2)
    bearing = np.arctan2(dy, dx)
    elevation = np.arctan2(dz, horizontal)
    received = config.tx_power_dbm - path_loss_db(config, distance)

    azimuths = np.asarray(config.sector_azimuths or [0.0] * config.sectors_per_bs, dtype=float)
    gains = antenna_gain_db(
        config,
        bearing[:, :, None] - azimuths[None, None, :],
        np.broadcast_to(elevation[:, :, None], bearing.shape + (config.sectors_per_bs,)),
    )
    rsrp = received[:, :, None] + gains
    return rsrp.reshape(positions.shape[0], config.num_cells)


def synthesize_samples(
    config: SyntheticMapConfig,
    spec: GridSpec,
    samples_per_bin: Optional[int] = None,
) -> RsrpSampleSet:
    """Scatter sample positions over the area and evaluate every cell at each of them"""
    for x, y in config.bs_positions:
        if not spec.contains(x, y):
            raise ConfigurationError(f"Base station at ({x}, {y}) lies outside the service area")
    per_bin = samples_per_bin if samples_per_bin is not None else config.samples_per_bin
    if per_bin < 1:
        raise ArgumentError("samples_per_bin must be at least 1")

    rng = np.random.default_rng(config.seed)
    x0, y0 = spec.origin
    total = per_bin * spec.num_bins
    if config.stratified:
        ix, iy = np.meshgrid(np.arange(spec.num_bins_x), np.arange(spec.num_bins_y), indexing="ij")
        lower_x = np.repeat(x0 + ix.ravel() * spec.bin_size_m, per_bin)
        lower_y = np.repeat(y0 + iy.ravel() * spec.bin_size_m, per_bin)
        extent_x = np.minimum(lower_x + spec.bin_size_m, x0 + spec.width_m) - lower_x
        extent_y = np.minimum(lower_y + spec.bin_size_m, y0 + spec.height_m) - lower_y
        offsets = rng.random((total, 2))
        positions = np.column_stack([lower_x + offsets[:, 0] * extent_x, lower_y + offsets[:, 1] * extent_y])
    else:
        offsets = rng.random((total, 2))
        positions = np.column_stack([x0 + offsets[:, 0] * spec.width_m, y0 + offsets[:, 1] * spec.height_m])

    rsrp = rsrp_at(config, positions)
    if config.shadowing_std_db > 0:
        rsrp = rsrp + rng.normal(0.0, config.shadowing_std_db, size=rsrp.shape)

    logger.info(
        f"Synthesized {total} samples for {config.num_cells} cells "
        f"({len(config.bs_positions)} sites x {config.sectors_per_bs} sectors)"
    )
    return RsrpSampleSet(positions, rsrp, altitude_m=config.altitude_m)


def normalize(samples: RsrpSampleSet) -> Tuple[RsrpSampleSet, NormParams]:
    """Map the global sample minimum to 0 and maximum to 1"""
    if len(samples) == 0:
        raise ArgumentError("Cannot normalize an empty sample set")
    params = NormParams(float(samples.rsrp_dbm.min()), float(samples.rsrp_dbm.max()))
    if params.span <= 0:
        raise DegenerateRangeError(f"All samples equal {params.min_dbm} dBm")
    normalized = RsrpSampleSet(
        samples.positions,
        samples.rsrp_dbm,
        altitude_m=samples.altitude_m,
        rsrp_norm=params.normalize(samples.rsrp_dbm),
    )
    return normalized, params


def quantize(
    samples: RsrpSampleSet,
    spec: GridSpec,
    norm_params: Optional[NormParams] = None,
    averaging: BinAveraging = BinAveraging.DBM,
) -> RsrpGrid:
    """Average the samples falling in each bin, per cell"""
    positions = samples.positions
    x0, y0 = spec.origin
    inside = (
        (positions[:, 0] >= x0) & (positions[:, 0] <= x0 + spec.width_m)
        & (positions[:, 1] >= y0) & (positions[:, 1] <= y0 + spec.height_m)
    )
    if not np.all(inside):
        raise ArgumentError(f"{int((~inside).sum())} samples lie outside the service area")
    if norm_params is None:
        _, norm_params = normalize(samples)

    ix, iy = spec.bin_indices(positions)
    flat = ix * spec.num_bins_y + iy
    counts = np.bincount(flat, minlength=spec.num_bins)

    averaging = BinAveraging(averaging)
    values = samples.rsrp_dbm if averaging is BinAveraging.DBM else np.power(10.0, samples.rsrp_dbm / 10.0)
    sums = np.column_stack([
        np.bincount(flat, weights=values[:, cell], minlength=spec.num_bins)
        for cell in range(samples.num_cells)
    ])
    means = np.full(sums.shape, np.nan)
    filled = counts > 0
    means[filled] = sums[filled] / counts[filled, None]
    if averaging is BinAveraging.LINEAR:
        means[filled] = 10.0 * np.log10(means[filled])

    raw = means.reshape(spec.num_bins_x, spec.num_bins_y, samples.num_cells)
    norm = np.clip(norm_params.normalize(raw), 0.0, 1.0)
    grid = RsrpGrid(
        spec,
        raw,
        norm,
        counts.reshape(spec.shape),
        norm_params,
        averaging=averaging,
        altitude_m=samples.altitude_m,
    )
    logger.info(
        f"Quantized {len(samples)} samples into {spec.num_bins_x}x{spec.num_bins_y} bins "
        f"(coverage {coverage_fraction(grid):.1%})"
    )
    return grid


def build_grid(config: SyntheticMapConfig, spec: GridSpec, averaging: BinAveraging = BinAveraging.DBM) -> RsrpGrid:
    """Synthesize, normalize and quantize in one go"""
    samples, params = normalize(synthesize_samples(config, spec))
    return quantize(samples, spec, params, averaging)


def ranked_cells(grid: RsrpGrid, x: float, y: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All cells of the bin at (x, y), strongest first, ties to the lower id"""
    raw, norm = grid.bin_values(x, y)
    order = np.lexsort((np.arange(raw.size), -raw))
    return order, norm[order], raw[order]


def top_k_cells(grid: RsrpGrid, position: Position, k: int) -> List[Tuple[int, float]]:
    """The k strongest cells at a position as (cell id, normalized RSRP)"""
    if k < 1 or k > grid.num_cells:
        raise ArgumentError(f"k={k} outside [1, {grid.num_cells}]")
    order, norm, _ = ranked_cells(grid, *position)
    return [(int(cell), float(value)) for cell, value in zip(order[:k], norm[:k])]


def strongest_cell(grid: RsrpGrid, position: Position) -> int:
    return top_k_cells(grid, position, 1)[0][0]


def association_map(grid: RsrpGrid) -> np.ndarray:
    """Strongest cell per bin, -1 where the bin is empty"""
    raw = np.where(grid.populated[:, :, None], grid.raw_mean_dbm, -np.inf)
    strongest = np.argmax(raw, axis=2)
    return np.where(grid.populated, strongest, -1)


def coverage_fraction(grid: RsrpGrid) -> float:
    return float(grid.populated.mean())


def grid_summary(grid: RsrpGrid) -> Dict[str, Any]:
    assoc = association_map(grid)
    return {
        "bins_x": grid.spec.num_bins_x,
        "bins_y": grid.spec.num_bins_y,
        "num_cells": grid.num_cells,
        "coverage": coverage_fraction(grid),
        "serving_cells": int(np.unique(assoc[assoc >= 0]).size),
        "norm_min_dbm": grid.norm_params.min_dbm,
        "norm_max_dbm": grid.norm_params.max_dbm,
    }


# CSV interfaces

def read_samples_csv(path: Union[str, Path], altitude_m: float = 50.0) -> RsrpSampleSet:
    """Header x_m,y_m,cell_0,...,cell_{C-1}; one row per sample position"""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise ConfigurationError(f"Cannot read sample CSV {path}: {e}") from e
    columns = list(frame.columns)
    if columns[:2] != ["x_m", "y_m"] or len(columns) < 3:
        raise ConfigurationError(f"Sample CSV {path} must start with x_m,y_m and hold cell columns")
    expected = [f"cell_{i}" for i in range(len(columns) - 2)]
    if columns[2:] != expected:
        raise ConfigurationError(f"Sample CSV {path} cell columns must be {expected[0]}..{expected[-1]} in order")
    if frame.isna().any().any():
        raise ConfigurationError(f"Sample CSV {path} has missing RSRP values")
    try:
        positions = frame[["x_m", "y_m"]].to_numpy(dtype=float)
        rsrp = frame[expected].to_numpy(dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Sample CSV {path} has non-numeric values: {e}") from e
    logger.info(f"Loaded {len(frame)} samples for {len(expected)} cells from {path}")
    return RsrpSampleSet(positions, rsrp, altitude_m=altitude_m)


def write_samples_csv(samples: RsrpSampleSet, path: Union[str, Path]) -> Path:
    frame = pd.DataFrame(samples.rsrp_dbm, columns=[f"cell_{i}" for i in range(samples.num_cells)])
    frame.insert(0, "y_m", samples.positions[:, 1])
    frame.insert(0, "x_m", samples.positions[:, 0])
    frame.to_csv(path, index=False)
    return Path(path)


def write_grid_csv(grid: RsrpGrid, path: Union[str, Path]) -> Path:
    """bin_x,bin_y,cell_id,raw_mean_dbm,norm for every populated bin and cell"""
    bx, by = np.nonzero(grid.populated)
    cells = np.arange(grid.num_cells)
    frame = pd.DataFrame({
        "bin_x": np.repeat(bx, grid.num_cells),
        "bin_y": np.repeat(by, grid.num_cells),
        "cell_id": np.tile(cells, bx.size),
        "raw_mean_dbm": grid.raw_mean_dbm[bx, by].ravel(),
        "norm": grid.norm[bx, by].ravel(),
    })
    frame.to_csv(path, index=False)
    return Path(path)


def read_grid_csv(path: Union[str, Path], spec: GridSpec) -> RsrpGrid:
    """Inverse of write_grid_csv; normalization bounds are recovered from the raw/norm pairs"""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise ConfigurationError(f"Cannot read grid CSV {path}: {e}") from e
    missing = {"bin_x", "bin_y", "cell_id", "raw_mean_dbm", "norm"} - set(frame.columns)
    if missing:
        raise ConfigurationError(f"Grid CSV {path} lacks columns {sorted(missing)}")
    if frame.empty:
        raise ConfigurationError(f"Grid CSV {path} holds no populated bin")

    try:
        bx = frame["bin_x"].to_numpy(dtype=np.int64)
        by = frame["bin_y"].to_numpy(dtype=np.int64)
        cells = frame["cell_id"].to_numpy(dtype=np.int64)
        raw_values = frame["raw_mean_dbm"].to_numpy(dtype=float)
        norm = frame["norm"].to_numpy(dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Grid CSV {path} has non-numeric values: {e}") from e
    nx, ny = spec.shape
    if bx.min() < 0 or by.min() < 0 or bx.max() >= nx or by.max() >= ny:
        raise ConfigurationError(f"Grid CSV {path} has bins outside a {nx}x{ny} grid")
    raw = np.full((nx, ny, int(cells.max()) + 1), np.nan)
    raw[bx, by, cells] = raw_values

    lo, hi = int(np.argmin(norm)), int(np.argmax(norm))
    if norm[hi] <= norm[lo]:
        raise DegenerateRangeError(f"Grid CSV {path} carries a constant normalized value")
    span = (raw_values[hi] - raw_values[lo]) / (norm[hi] - norm[lo])
    min_dbm = raw_values[lo] - norm[lo] * span
    return RsrpGrid.from_bin_means(spec, raw, NormParams(float(min_dbm), float(min_dbm + span)))


def write_association_csv(grid: RsrpGrid, path: Union[str, Path]) -> Path:
    """bin_x,bin_y,strongest_cell_id for every bin"""
    assoc = association_map(grid)
    bx, by = np.meshgrid(np.arange(grid.spec.num_bins_x), np.arange(grid.spec.num_bins_y), indexing="ij")
    frame = pd.DataFrame({
        "bin_x": bx.ravel(),
        "bin_y": by.ravel(),
        "strongest_cell_id": assoc.ravel(),
    })
    frame.to_csv(path, index=False)
    return Path(path)


class MapSourceConfig(BaseModel):
    """Where the radio map of a run comes from"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    source: MapSource = Field(MapSource.SYNTHETIC, description="synthetic, csv or grid_csv")
    grid: GridSpec = Field(default_factory=GridSpec.default)
    synthetic: SyntheticMapConfig = Field(default_factory=SyntheticMapConfig.default)
    samples_csv: Optional[Path] = Field(None, description="Sample CSV used when source is csv")
    grid_csv: Optional[Path] = Field(None, description="Grid CSV used when source is grid_csv")
    altitude_m: float = Field(50.0, ge=0, description="Altitude recorded for CSV samples")
    averaging: BinAveraging = Field(BinAveraging.DBM)

    @field_validator("grid", mode="before")
    @classmethod
    def _fill_grid(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {**GlobalConfig.GRID_CONFIG, **value}
        return value

    @field_validator("synthetic", mode="before")
    @classmethod
    def _fill_synthetic(cls, value: Any) -> Any:
        if isinstance(value, dict) and "bs_positions" not in value:
            return SyntheticMapConfig.default(**value)
        return value

    @model_validator(mode="after")
    def _check_source(self) -> "MapSourceConfig":
        if self.source is MapSource.CSV and self.samples_csv is None:
            raise ValueError("source 'csv' requires samples_csv")
        if self.source is MapSource.GRID_CSV and self.grid_csv is None:
            raise ValueError("source 'grid_csv' requires grid_csv")
        return self

    def load_samples(self) -> RsrpSampleSet:
        if self.source is MapSource.GRID_CSV:
            raise ConfigurationError("A grid_csv map source carries no raw samples")
        if self.source is MapSource.CSV:
            return read_samples_csv(self.samples_csv, self.altitude_m)
        return synthesize_samples(self.synthetic, self.grid)

    def load_grid(self) -> RsrpGrid:
        if self.source is MapSource.GRID_CSV:
            grid = read_grid_csv(self.grid_csv, self.grid)
            logger.info(f"Loaded a {grid.num_cells}-cell grid from {self.grid_csv}")
            return grid
        samples, params = normalize(self.load_samples())
        return quantize(samples, self.grid, params, self.averaging)
