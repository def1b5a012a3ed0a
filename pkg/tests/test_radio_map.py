import math

import numpy as np
import pandas as pd
import pytest

from config.global_config import BinAveraging, MapSource
from simulator.errors import (
    ArgumentError,
    ConfigurationError,
    DegenerateRangeError,
    UnpopulatedBinError,
)
from simulator.services.radio_map import (
    GridSpec,
    MapSourceConfig,
    NormParams,
    RsrpGrid,
    RsrpSampleSet,
    SyntheticMapConfig,
    association_map,
    build_grid,
    coverage_fraction,
    hexagonal_sites,
    normalize,
    path_loss_db,
    quantize,
    ranked_cells,
    read_grid_csv,
    read_samples_csv,
    rsrp_at,
    strongest_cell,
    synthesize_samples,
    top_k_cells,
    write_association_csv,
    write_grid_csv,
    write_samples_csv,
)


def omni_site(**overrides) -> SyntheticMapConfig:
    values = dict(
        bs_positions=[(500.0, 500.0)],
        sectors_per_bs=1,
        bs_height_m=50.0,
        altitude_m=50.0,
        path_loss_exponent=2.0,
        shadowing_std_db=0.0,
        seed=1,
    )
    values.update(overrides)
    return SyntheticMapConfig(**values)


def samples(positions, rsrp) -> RsrpSampleSet:
    return RsrpSampleSet(np.array(positions, dtype=float), np.array(rsrp, dtype=float))


class TestGridSpec:
    def test_default_area_has_120_by_100_bins(self):
        spec = GridSpec.default()
        assert spec.shape == (120, 100)
        assert spec.num_bins == 12000

    def test_partial_bins_round_up(self):
        spec = GridSpec(width_m=120.0, height_m=100.0, bin_size_m=50.0)
        assert spec.shape == (3, 2)

    def test_far_edges_belong_to_last_bin(self, tiny_spec):
        assert tiny_spec.bin_index(0.0, 0.0) == (0, 0)
        assert tiny_spec.bin_index(49.9, 50.0) == (0, 1)
        assert tiny_spec.bin_index(100.0, 100.0) == (1, 1)

    def test_outside_position_rejected(self, tiny_spec):
        with pytest.raises(ArgumentError):
            tiny_spec.bin_index(100.1, 10.0)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError):
            GridSpec(width_m=10.0, height_m=10.0, bin_size_m=5.0, depth_m=3.0)


class TestSynthesis:
    def test_equidistant_positions_receive_identical_rsrp(self):
        rsrp = rsrp_at(omni_site(), np.array([[600.0, 500.0], [500.0, 600.0], [400.0, 500.0]]))
        assert rsrp[0, 0] == pytest.approx(rsrp[1, 0], abs=1e-12)
        assert rsrp[0, 0] == pytest.approx(rsrp[2, 0], abs=1e-12)

    def test_doubling_distance_costs_6_02_db(self):
        rsrp = rsrp_at(omni_site(), np.array([[600.0, 500.0], [700.0, 500.0]]))
        assert rsrp[0, 0] - rsrp[1, 0] == pytest.approx(20.0 * math.log10(2.0), abs=1e-9)
        assert rsrp[0, 0] - rsrp[1, 0] == pytest.approx(6.02, abs=1e-3)

    def test_path_loss_floor_at_one_meter(self):
        config = omni_site()
        assert path_loss_db(config, np.array([0.0]))[0] == pytest.approx(config.reference_loss_db)

    def test_sector_main_lobe_beats_back_lobe(self):
        config = SyntheticMapConfig(
            bs_positions=[(500.0, 500.0)],
            sectors_per_bs=2,
            sector_azimuths=[0.0, math.pi],
            bs_height_m=50.0,
            altitude_m=50.0,
            downtilt_rad=0.0,
            shadowing_std_db=0.0,
        )
        east, west = rsrp_at(config, np.array([[800.0, 500.0], [200.0, 500.0]]))
        assert east[0] > east[1]
        assert west[1] > west[0]
        assert east[0] - east[1] == pytest.approx(config.main_lobe_gain_db - config.sidelobe_gain_db)

    def test_same_seed_is_bit_reproducible(self, small_synthetic, small_spec):
        a = synthesize_samples(small_synthetic, small_spec)
        b = synthesize_samples(small_synthetic, small_spec)
        np.testing.assert_array_equal(a.positions, b.positions)
        np.testing.assert_array_equal(a.rsrp_dbm, b.rsrp_dbm)

    def test_stratified_samples_fill_every_bin(self, small_grid):
        assert coverage_fraction(small_grid) == 1.0
        assert small_grid.counts.min() == 2

    def test_uniform_scatter_stays_in_bounds(self, small_synthetic, small_spec):
        config = small_synthetic.model_copy(update={"stratified": False})
        scattered = synthesize_samples(config, small_spec, samples_per_bin=1)
        assert len(scattered) == small_spec.num_bins
        assert scattered.positions.min() >= 0.0
        assert scattered.positions.max() <= 1000.0

    def test_site_outside_area_is_a_configuration_error(self, small_spec):
        with pytest.raises(ConfigurationError):
            synthesize_samples(omni_site(bs_positions=[(1500.0, 10.0)]), small_spec)

    def test_missing_azimuths_rejected(self):
        with pytest.raises(ValueError):
            SyntheticMapConfig(bs_positions=[(0.0, 0.0)], sectors_per_bs=3, sector_azimuths=[0.0])

    def test_hexagonal_layout(self):
        sites = hexagonal_sites((0.0, 0.0), 1000.0)
        assert len(sites) == 7
        distances = [math.hypot(x, y) for x, y in sites[1:]]
        assert distances == pytest.approx([1000.0] * 6)


class TestDefaultMap:
    def test_scale_and_cell_count(self):
        grid = build_grid(SyntheticMapConfig.default(), GridSpec.default())
        assert grid.spec.shape == (120, 100)
        assert grid.num_cells == 21
        assert coverage_fraction(grid) == 1.0
        assoc = association_map(grid)
        assert set(np.unique(assoc)) == set(range(21))


class TestNormalize:
    def test_endpoints(self):
        normalized, params = normalize(samples([[0, 0], [1, 1]], [[-100.0], [-60.0]]))
        np.testing.assert_allclose(normalized.rsrp_norm.ravel(), [0.0, 1.0])
        assert params == NormParams(-100.0, -60.0)

    def test_midpoint(self):
        normalized, _ = normalize(samples([[0, 0], [1, 1], [2, 2]], [[-100.0], [-80.0], [-60.0]]))
        np.testing.assert_allclose(normalized.rsrp_norm.ravel(), [0.0, 0.5, 1.0])

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        raw = rng.uniform(-130.0, -50.0, size=(50, 4))
        normalized, params = normalize(samples(rng.random((50, 2)), raw))
        np.testing.assert_allclose(params.denormalize(normalized.rsrp_norm), raw, rtol=1e-12)

    def test_monotone(self):
        raw = np.array([[-90.0], [-89.999], [-70.0], [-120.0]])
        normalized, _ = normalize(samples(np.zeros((4, 2)), raw))
        order = np.argsort(raw.ravel())
        assert np.all(np.diff(normalized.rsrp_norm.ravel()[order]) > 0)

    def test_constant_samples_rejected(self):
        with pytest.raises(DegenerateRangeError):
            normalize(samples([[0, 0], [1, 1]], [[-80.0], [-80.0]]))


class TestQuantize:
    def test_singleton_bin_keeps_its_sample(self, tiny_spec):
        grid = quantize(samples([[10, 10], [60, 60]], [[-70.0], [-90.0]]), tiny_spec)
        assert grid.raw_mean_dbm[0, 0, 0] == -70.0
        assert grid.raw_mean_dbm[1, 1, 0] == -90.0

    def test_two_samples_average_in_dbm(self, tiny_spec):
        grid = quantize(samples([[10, 10], [20, 30]], [[-70.0], [-80.0]]), tiny_spec)
        assert grid.raw_mean_dbm[0, 0, 0] == pytest.approx(-75.0)
        assert grid.counts[0, 0] == 2
        assert not grid.is_populated(75.0, 75.0)

    def test_linear_averaging(self, tiny_spec):
        grid = quantize(
            samples([[10, 10], [20, 30]], [[-70.0], [-80.0]]),
            tiny_spec,
            averaging=BinAveraging.LINEAR,
        )
        expected = 10.0 * math.log10((1e-7 + 1e-8) / 2.0)
        assert grid.raw_mean_dbm[0, 0, 0] == pytest.approx(expected)
        assert grid.averaging is BinAveraging.LINEAR

    def test_norm_uses_sample_bounds(self, tiny_spec):
        normalized, params = normalize(samples([[10, 10], [20, 30], [80, 80]], [[-70.0], [-80.0], [-100.0]]))
        grid = quantize(normalized, tiny_spec, params)
        assert grid.norm[0, 0, 0] == pytest.approx((-75.0 + 100.0) / 30.0)
        assert grid.norm[1, 1, 0] == 0.0

    def test_permutation_invariant(self, small_synthetic, small_spec):
        raw = synthesize_samples(small_synthetic, small_spec)
        order = np.random.default_rng(0).permutation(len(raw))
        shuffled = RsrpSampleSet(raw.positions[order], raw.rsrp_dbm[order])
        a = quantize(raw, small_spec)
        b = quantize(shuffled, small_spec)
        np.testing.assert_allclose(a.raw_mean_dbm, b.raw_mean_dbm, rtol=1e-12)
        np.testing.assert_array_equal(a.counts, b.counts)

    def test_outside_sample_rejected(self, tiny_spec):
        with pytest.raises(ArgumentError):
            quantize(samples([[10, 10], [200, 10]], [[-70.0], [-80.0]]), tiny_spec)

    def test_grid_is_read_only(self, small_grid):
        with pytest.raises(ValueError):
            small_grid.norm[0, 0, 0] = 1.0


class TestRanking:
    @pytest.fixture
    def tied_grid(self, tiny_spec) -> RsrpGrid:
        raw = np.full((2, 2, 3), np.nan)
        raw[0, 0] = [-80.0, -70.0, -70.0]
        raw[1, 0] = [-60.0, -90.0, -75.0]
        return RsrpGrid.from_bin_means(tiny_spec, raw)

    def test_ties_go_to_lower_cell_id(self, tied_grid):
        assert top_k_cells(tied_grid, (10.0, 10.0), 3)[0][0] == 1
        assert [cell for cell, _ in top_k_cells(tied_grid, (10.0, 10.0), 3)] == [1, 2, 0]
        assert strongest_cell(tied_grid, (10.0, 10.0)) == 1

    def test_full_ranking_is_a_permutation(self, tied_grid):
        cells = [cell for cell, _ in top_k_cells(tied_grid, (60.0, 10.0), 3)]
        assert sorted(cells) == [0, 1, 2]
        assert cells == [0, 2, 1]

    def test_norm_descends_with_rank(self, small_grid):
        for x, y in [(30.0, 30.0), (510.0, 420.0), (990.0, 990.0)]:
            _, norm, raw = ranked_cells(small_grid, x, y)
            assert np.all(np.diff(raw) <= 0)
            assert np.all(np.diff(norm) <= 0)

    def test_strongest_matches_linear_scan(self, small_grid):
        rng = np.random.default_rng(8)
        for x, y in rng.uniform(0.0, 1000.0, size=(40, 2)):
            raw, _ = small_grid.bin_values(x, y)
            best = max(range(raw.size), key=lambda c: (raw[c], -c))
            assert strongest_cell(small_grid, (x, y)) == best

    def test_top_one_is_strongest(self, small_grid):
        assert top_k_cells(small_grid, (420.0, 610.0), 1)[0][0] == strongest_cell(small_grid, (420.0, 610.0))

    def test_k_out_of_range(self, tied_grid):
        with pytest.raises(ArgumentError):
            top_k_cells(tied_grid, (10.0, 10.0), 4)

    def test_empty_bin_query(self, tied_grid):
        with pytest.raises(UnpopulatedBinError) as excinfo:
            top_k_cells(tied_grid, (80.0, 80.0), 1)
        assert excinfo.value.bin_index == (1, 1)

    def test_single_cell_map(self, tiny_spec):
        grid = RsrpGrid.from_bin_means(tiny_spec, np.array([[[-70.0], [-80.0]], [[-90.0], [-60.0]]]))
        assert strongest_cell(grid, (75.0, 75.0)) == 0

    def test_association_marks_empty_bins(self, tied_grid):
        assoc = association_map(tied_grid)
        assert assoc[0, 0] == 1
        assert assoc[1, 0] == 0
        assert assoc[1, 1] == -1


class TestCsvInterfaces:
    def test_samples_round_trip(self, tmp_path):
        original = samples([[10.0, 20.0], [30.0, 40.0]], [[-70.0, -80.5], [-90.0, -65.25]])
        path = write_samples_csv(original, tmp_path / "samples.csv")
        assert pd.read_csv(path).columns.tolist() == ["x_m", "y_m", "cell_0", "cell_1"]
        loaded = read_samples_csv(path)
        np.testing.assert_allclose(loaded.rsrp_dbm, original.rsrp_dbm)

    def test_sample_coordinates_reload_exactly(self, tmp_path):
        positions = np.random.default_rng(3).random((50, 2)) * 1000.0
        original = samples(positions, np.random.default_rng(4).normal(-80.0, 10.0, (50, 2)))
        loaded = read_samples_csv(write_samples_csv(original, tmp_path / "samples.csv"))
        np.testing.assert_array_equal(loaded.positions, original.positions)
        np.testing.assert_array_equal(loaded.rsrp_dbm, original.rsrp_dbm)

    def test_non_numeric_sample(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x_m,y_m,cell_0\n10,10,-70\n60,10,abc\n")
        with pytest.raises(ConfigurationError, match="non-numeric"):
            read_samples_csv(path)

    def test_non_numeric_grid_entry(self, tiny_spec, tmp_path):
        path = tmp_path / "grid.csv"
        path.write_text("bin_x,bin_y,cell_id,raw_mean_dbm,norm\n0,0,0,-70,1.0\n1,0,x,-90,0.0\n")
        with pytest.raises(ConfigurationError, match="non-numeric"):
            read_grid_csv(path, tiny_spec)

    def test_bad_sample_header(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x,y,a\n1,2,3\n")
        with pytest.raises(ConfigurationError):
            read_samples_csv(path)

    def test_grid_export_and_reload(self, small_grid, tmp_path):
        path = write_grid_csv(small_grid, tmp_path / "grid.csv")
        frame = pd.read_csv(path)
        assert frame.columns.tolist() == ["bin_x", "bin_y", "cell_id", "raw_mean_dbm", "norm"]
        assert len(frame) == small_grid.spec.num_bins * small_grid.num_cells
        reloaded = read_grid_csv(path, small_grid.spec)
        np.testing.assert_allclose(reloaded.raw_mean_dbm, small_grid.raw_mean_dbm, rtol=1e-9)
        np.testing.assert_allclose(reloaded.norm, small_grid.norm, atol=1e-9)

    def test_tiny_association_has_four_rows(self, tiny_spec, tmp_path):
        grid = quantize(samples([[10, 10], [60, 60], [10, 60], [60, 10]], [[-70.0], [-90.0], [-80.0], [-85.0]]), tiny_spec)
        frame = pd.read_csv(write_association_csv(grid, tmp_path / "association.csv"))
        assert frame.columns.tolist() == ["bin_x", "bin_y", "strongest_cell_id"]
        assert len(frame) == 4


class TestMapSource:
    def test_partial_sections_merge_with_defaults(self):
        source = MapSourceConfig.model_validate({"grid": {"bin_size_m": 100.0}, "synthetic": {"seed": 9}})
        assert source.grid.shape == (60, 50)
        assert source.synthetic.seed == 9
        assert source.synthetic.num_cells == 21

    def test_csv_source_needs_a_path(self):
        with pytest.raises(ValueError):
            MapSourceConfig(source=MapSource.CSV)

    def test_csv_source_loads_samples(self, tmp_path, tiny_spec):
        path = write_samples_csv(
            samples([[10, 10], [60, 60], [10, 60], [60, 10]], [[-70.0, -75.0]] * 2 + [[-80.0, -60.0]] * 2),
            tmp_path / "samples.csv",
        )
        grid = MapSourceConfig(source=MapSource.CSV, grid=tiny_spec, samples_csv=path).load_grid()
        assert grid.num_cells == 2
        assert coverage_fraction(grid) == 1.0

    def test_grid_csv_source_reloads_written_grid(self, small_grid, tmp_path):
        path = write_grid_csv(small_grid, tmp_path / "grid.csv")
        source = MapSourceConfig(source=MapSource.GRID_CSV, grid=small_grid.spec, grid_csv=path)
        grid = source.load_grid()
        np.testing.assert_array_equal(grid.raw_mean_dbm, small_grid.raw_mean_dbm)
        np.testing.assert_array_equal(association_map(grid), association_map(small_grid))

    def test_grid_csv_source_needs_a_path_and_has_no_samples(self, tmp_path):
        with pytest.raises(ValueError):
            MapSourceConfig(source=MapSource.GRID_CSV)
        source = MapSourceConfig(source=MapSource.GRID_CSV, grid_csv=tmp_path / "grid.csv")
        with pytest.raises(ConfigurationError):
            source.load_samples()
