import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cellloc import (
    Cell,
    CellPlan,
    DominanceParams,
    Grid,
    apply_defaults,
    azimuth_offset,
    bearing_degrees,
    compute_fields,
    dbm_from_watt,
    distance_3d,
    distance_loss,
    dominance,
    elevation_offset,
    fit_pattern,
    quality,
    signal_strength,
)


def logistic_oracle(s, mid, steep):
    """Direct high-precision evaluation via the math module."""
    return 1.0 / (1.0 + math.exp(-steep * (s - mid)))


def bisect_sigma(half_width, c, lo=1e-6, hi=1e5, iters=200):
    """Independent root-finder for the 3 dB half-width constraint."""
    def loss_at_hw(sigma):
        return c - c * math.exp(-half_width**2 / (2 * sigma**2))
    assert loss_at_hw(lo) > 3 > loss_at_hw(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if loss_at_hw(mid) > 3:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestConversions:
    def test_ten_watt(self):
        assert dbm_from_watt(10) == 40.0

    def test_one_watt(self):
        assert dbm_from_watt(1) == 30.0

    def test_zero_watt_rejected(self):
        with pytest.raises(ValueError):
            dbm_from_watt(0)

    def test_distance_loss_reference(self):
        assert distance_loss(1, 3.75) == 0.0
        assert distance_loss(100, 4) == pytest.approx(80.0, abs=1e-12)
        assert distance_loss(10, 2) == pytest.approx(20.0, abs=1e-12)


class TestRadiationPattern:
    def test_fit_horizontal_beam(self):
        pat = fit_pattern(32.5, 30.0)
        assert pat.sigma == pytest.approx(70.80, abs=0.01)
        assert pat.loss(32.5) == pytest.approx(3.0, abs=1e-9)

    def test_fit_vertical_beam(self):
        pat = fit_pattern(4.5, 30.0)
        assert pat.sigma == pytest.approx(9.80, abs=0.01)
        assert pat.loss(4.5) == pytest.approx(3.0, abs=1e-9)

    def test_closed_form_matches_bisection(self):
        for hw in (4.5, 10.0, 32.5, 60.0):
            for c in (10.0, 30.0, 50.0):
                assert fit_pattern(hw, c).sigma == pytest.approx(
                    bisect_sigma(hw, c), rel=1e-9)

    def test_peak_is_lossless(self):
        assert fit_pattern(32.5, 30.0).loss(0.0) == 0.0

    def test_even_monotone_bounded(self):
        pat = fit_pattern(32.5, 30.0)
        angles = np.arange(0.0, 181.0, 1.0)
        losses = pat.loss(angles)
        assert np.all(np.diff(losses) > 0)
        assert np.max(losses) < pat.max_loss_db
        np.testing.assert_allclose(pat.loss(-angles), losses, atol=0)

    def test_infeasible_max_loss(self):
        with pytest.raises(ValueError):
            fit_pattern(32.5, 3.0)
        with pytest.raises(ValueError):
            fit_pattern(0.0, 30.0)


OMNI = Cell("omni", 0, 0, height=30, directional=False, power=10,
            path_loss_exp=4, small=False)
SECTOR = Cell("sector", 0, 0, height=30, directional=True, azimuth=0.0,
              tilt=0.0, beam_h=65, beam_v=9, power=10, path_loss_exp=4,
              small=False)


class TestSignalStrength:
    def test_omni_composition(self):
        assert signal_strength(OMNI, 100) == pytest.approx(-40.0, abs=1e-12)

    def test_boresight_equals_omni(self):
        assert signal_strength(SECTOR, 100, 0, 0) == pytest.approx(-40.0, abs=1e-12)

    def test_half_width_loses_3db(self):
        s = signal_strength(SECTOR, 100, SECTOR.beam_h / 2, 0)
        assert s == pytest.approx(-43.0, abs=1e-9)
        s = signal_strength(SECTOR, 100, 0, SECTOR.beam_v / 2)
        assert s == pytest.approx(-43.0, abs=1e-9)

    def test_omni_non_increasing_with_distance(self):
        r = np.linspace(1, 10_000, 500)
        s = [signal_strength(OMNI, ri) for ri in r]
        assert all(a >= b for a, b in zip(s, s[1:]))

    def test_good_fair_boundary_distance(self):
        # with 10 W and gamma=4 on boresight the -90 dBm boundary sits at
        # r = 10**(130/40); derived by inverting the distance loss
        r_boundary = 10 ** (130.0 / 40.0)
        assert signal_strength(OMNI, r_boundary) == pytest.approx(-90.0, abs=1e-9)
        assert r_boundary == pytest.approx(1778.28, abs=0.01)
        assert quality(signal_strength(OMNI, r_boundary - 1)) == "Good"
        assert quality(signal_strength(OMNI, r_boundary + 1)) == "Fair"


class TestDominance:
    def test_midpoint_is_exactly_half(self):
        assert dominance(-92.5) == 0.5

    def test_matches_direct_evaluation(self):
        assert dominance(-70.0) == pytest.approx(
            logistic_oracle(-70, -92.5, 0.2), abs=1e-12)
        assert dominance(-70.0) == pytest.approx(0.98901, abs=1e-5)
        assert dominance(-115.0) == pytest.approx(
            logistic_oracle(-115, -92.5, 0.2), abs=1e-12)
        assert dominance(-115.0) == pytest.approx(0.01099, abs=1e-5)

    def test_symmetry_about_midpoint(self):
        assert dominance(-70.0) + dominance(-115.0) == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(-500, 500), st.floats(-500, 500))
    def test_monotone(self, s1, s2):
        if s1 < s2:
            assert dominance(s1) <= dominance(s2)

    def test_strictly_increasing_over_working_range(self):
        # strictness is checkable in float64 away from saturation
        s = np.linspace(-200.0, 40.0, 2001)
        d = dominance(s)
        assert np.all(np.diff(d) > 0)

    def test_extreme_inputs_saturate_without_overflow(self):
        assert dominance(1e6) == 1.0
        assert dominance(-1e6) == 0.0

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            DominanceParams(s_steep=0)
        with pytest.raises(ValueError):
            DominanceParams(min_dominance=1.0)


class TestQualityBands:
    @pytest.mark.parametrize("s,label", [
        (-60, "Excellent"), (-70, "Excellent"), (-80, "Good"), (-95, "Fair"),
        (-105, "Poor"), (-110, "Bad or no signal"), (-130, "Bad or no signal"),
    ])
    def test_labels(self, s, label):
        assert quality(s) == label


def brute_force_fields(plan, grid, params, max_loss=30.0):
    """Field computation as a plain double loop over the scalar operations."""
    strength = {}
    dom = {}
    for cell in plan:
        under = grid.tile_at(cell.x, cell.y)
        terrain_c = grid.elevation_at(under) if under is not None else 0.0
        for t in range(grid.n_tiles):
            tx, ty = grid.centroid(t)
            r = distance_3d(tx, ty, grid.elevation_at(t), cell.x, cell.y,
                            cell.height, terrain_c)
            if cell.directional:
                delta = azimuth_offset(bearing_degrees(cell.x, cell.y, tx, ty),
                                       cell.azimuth)
                horiz = math.hypot(tx - cell.x, ty - cell.y)
                eps = elevation_offset(
                    horiz, terrain_c + cell.height - grid.elevation_at(t),
                    cell.tilt)
                s = signal_strength(cell, r, delta, eps, max_loss)
            else:
                s = signal_strength(cell, r, max_pattern_loss_db=max_loss)
            d = dominance(s, params)
            if d >= params.min_dominance:
                strength[(cell.id, t)] = s
                dom[(cell.id, t)] = d
    return strength, dom


def mixed_plan(rng, n_cells, extent):
    cells = []
    for i in range(n_cells):
        x, y = rng.uniform(0, extent, 2)
        if rng.random() < 0.3:
            cells.append(Cell(f"c{i:03d}", x, y, small=True))
        else:
            cells.append(Cell(f"c{i:03d}", x, y,
                              azimuth=float(rng.uniform(0, 360))))
    return apply_defaults(CellPlan(tuple(cells)))


class TestComputeFields:
    def test_matches_brute_force_loop(self):
        rng = np.random.default_rng(42)
        elevation = rng.uniform(0, 40, 15 * 12)
        grid = Grid(0, 0, n_cols=15, n_rows=12, tile_size=150,
                    elevation=elevation)
        plan = mixed_plan(rng, 6, 15 * 150)
        params = DominanceParams(min_dominance=1e-6)
        strength, dom = compute_fields(plan, grid, params)

        exp_strength, exp_dom = brute_force_fields(plan, grid, params)
        got = {(c, t): v for c, t, v in strength.entries()}
        assert set(got) == set(exp_strength)
        for key, val in exp_strength.items():
            assert got[key] == pytest.approx(val, abs=1e-12)
        got_dom = {(c, t): v for c, t, v in dom.entries()}
        for key, val in exp_dom.items():
            assert got_dom[key] == pytest.approx(val, abs=1e-12)

    def test_thread_count_never_changes_output(self):
        rng = np.random.default_rng(3)
        grid = Grid(0, 0, n_cols=20, n_rows=20, tile_size=100)
        plan = mixed_plan(rng, 12, 2000)
        s1, d1 = compute_fields(plan, grid, threads=1)
        s8, d8 = compute_fields(plan, grid, threads=8)
        assert s1.cell_ids == s8.cell_ids
        for cid in s1.cell_ids:
            for a, b in ((s1, s8), (d1, d8)):
                ta, va = a.column(cid)
                tb, vb = b.column(cid)
                assert np.array_equal(ta, tb)
                assert va.tobytes() == vb.tobytes()

    def test_far_region_has_no_entries(self):
        grid = Grid(1e7, 1e7, n_cols=4, n_rows=4, tile_size=100)
        plan = apply_defaults(CellPlan((Cell("a", 0, 0, directional=False),)))
        _, dom = compute_fields(plan, grid)
        assert dom.nnz == 0

    def test_omni_field_radially_symmetric(self):
        grid = Grid(0, 0, n_cols=21, n_rows=21, tile_size=100)
        center = Cell("c", 1050, 1050, directional=False)
        _, dom = compute_fields(apply_defaults(CellPlan((center,))), grid)
        dense = dom.to_dense()["c"].reshape(21, 21)
        np.testing.assert_allclose(dense, dense[::-1, :], atol=1e-15)
        np.testing.assert_allclose(dense, dense[:, ::-1], atol=1e-15)
        np.testing.assert_allclose(dense, dense.T, atol=1e-15)

    def test_island_coverage_pattern(self, island_dataset):
        from cellloc import pipeline
        _, dom = pipeline.strength_and_dominance(island_dataset)
        assert dom.to_dense()["a1"].tolist() == [1.0, 1.0, 0.0]
        assert dom.to_dense()["a2"].tolist() == [0.0, 1.0, 1.0]
