import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cellloc import (
    Annulus,
    Grid,
    annulus_contains,
    azimuth_offset,
    bearing_degrees,
    distance_3d,
    elevation_offset,
    wrap_degrees,
)

finite_angles = st.floats(min_value=-1e6, max_value=1e6,
                          allow_nan=False, allow_infinity=False)


class TestGrid:
    def test_centroids_of_row_grid(self):
        grid = Grid(0, 0, n_cols=3, n_rows=1, tile_size=1000)
        assert grid.centroid(0) == (500.0, 500.0)
        assert grid.centroid(2) == (2500.0, 500.0)

    def test_out_of_range_tile(self):
        grid = Grid(0, 0, n_cols=3, n_rows=1, tile_size=1000)
        with pytest.raises(IndexError):
            grid.centroid(3)

    def test_centroid_spacing(self):
        grid = Grid(-250, 100, n_cols=7, n_rows=5, tile_size=35.0)
        c = grid.centroids()
        for t in range(grid.n_tiles - 1):
            if (t + 1) % grid.n_cols != 0:
                assert c[t + 1, 0] - c[t, 0] == pytest.approx(35.0, abs=1e-12)

    def test_centroids_match_scalar(self):
        grid = Grid(10, -20, n_cols=4, n_rows=3, tile_size=12.5)
        c = grid.centroids()
        for t in range(grid.n_tiles):
            assert tuple(c[t]) == grid.centroid(t)

    def test_tile_at_roundtrip(self):
        grid = Grid(0, 0, n_cols=4, n_rows=4, tile_size=100)
        for t in range(grid.n_tiles):
            x, y = grid.centroid(t)
            assert grid.tile_at(x, y) == t
        assert grid.tile_at(-1, 50) is None
        assert grid.tile_at(400, 50) is None  # right edge is exclusive

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            Grid(0, 0, n_cols=0, n_rows=1)
        with pytest.raises(ValueError):
            Grid(0, 0, n_cols=1, n_rows=1, tile_size=0)
        with pytest.raises(ValueError):
            Grid(0, 0, n_cols=2, n_rows=2, elevation=np.zeros(3))


class TestDistance3d:
    def test_pythagoras_with_mast_height(self):
        d = distance_3d(100, 0, 0, 0, 0, 55)
        assert d == pytest.approx(math.sqrt(100**2 + 55**2), abs=1e-9)

    def test_clamped_under_mast(self):
        assert distance_3d(0, 0, 0, 0, 0, 0) == 1.0

    def test_3_4_5_triangle(self):
        assert distance_3d(300, 400, 0, 0, 0, 0) == 500.0

    def test_horizontal_symmetry_and_floor(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            tx, ty, cx, cy = rng.uniform(-1000, 1000, 4)
            h = rng.uniform(0, 100)
            d1 = distance_3d(tx, ty, 0, cx, cy, h)
            d2 = distance_3d(cx, cy, 0, tx, ty, h)
            assert d1 == d2
            assert d1 >= 1.0

    def test_terrain_under_cell_raises_antenna(self):
        low = distance_3d(100, 0, 0, 0, 0, 30, cell_terrain=0)
        high = distance_3d(100, 0, 0, 0, 0, 30, cell_terrain=50)
        assert high > low


class TestAngles:
    def test_aligned(self):
        assert azimuth_offset(90, 90) == 0.0

    def test_quarter_turn(self):
        # tile due north of an east-pointing cell
        assert azimuth_offset(0, 90) == -90.0

    def test_wraparound(self):
        assert azimuth_offset(10, 350) == 20.0

    @given(finite_angles, finite_angles)
    def test_antisymmetry_after_wrapping(self, b, a):
        fwd = azimuth_offset(b, a)
        back = azimuth_offset(a, b)
        assert abs(fwd) <= 180.0
        assert wrap_degrees(fwd + back) == pytest.approx(0.0, abs=1e-6)

    @given(finite_angles)
    def test_wrap_degrees_range(self, x):
        w = wrap_degrees(x)
        assert -180.0 < w <= 180.0

    def test_bearing_convention(self):
        assert bearing_degrees(0, 0, 0, 10) == 0.0     # north
        assert bearing_degrees(0, 0, 10, 0) == 90.0    # east
        assert bearing_degrees(0, 0, 0, -10) == 180.0  # south
        assert bearing_degrees(0, 0, -10, 0) == 270.0  # west


class TestElevationOffset:
    def test_hand_trigonometry(self):
        expected = math.degrees(math.atan2(55, 100)) - 5
        assert elevation_offset(100, 55, 5) == pytest.approx(expected, abs=1e-12)
        assert elevation_offset(100, 55, 5) == pytest.approx(23.8107937, abs=1e-6)

    def test_level_geometry(self):
        assert elevation_offset(100, 0, 0) == 0.0

    def test_looking_straight_down(self):
        assert elevation_offset(0, 100, 4) == pytest.approx(86.0, abs=1e-12)

    def test_uphill_tile_gives_negative_offset(self):
        # tile higher than the antenna: line of sight points up
        assert elevation_offset(100, -30, 0) < 0


class TestAnnulus:
    def test_interval_membership(self):
        ann = Annulus(0, 0, 1093.68, 1328.04)
        assert annulus_contains(ann, 1200, 0)
        assert not annulus_contains(ann, 1000, 0)
        assert annulus_contains(ann, 1093.68, 0)       # inner edge inclusive
        assert not annulus_contains(ann, 1328.04, 0)   # outer edge exclusive

    def test_center_with_zero_inner_radius(self):
        ann = Annulus(5, 5, 0, 10)
        assert ann.contains(5, 5)

    def test_invalid_radii(self):
        with pytest.raises(ValueError):
            Annulus(0, 0, -1, 10)
        with pytest.raises(ValueError):
            Annulus(0, 0, 10, 10)

    @given(st.floats(0, 500), st.floats(1, 500), st.floats(0, 700),
           st.floats(0, 2000))
    def test_widening_is_monotone(self, inner, width, extra, dist):
        ann = Annulus(0, 0, inner, inner + width)
        wider = Annulus(0, 0, inner, inner + width + extra)
        if ann.contains(dist, 0):
            assert wider.contains(dist, 0)

    def test_contains_points_matches_scalar(self):
        rng = np.random.default_rng(11)
        pts = rng.uniform(-50, 50, (300, 2))
        ann = Annulus(3, -4, 10, 40)
        mask = ann.contains_points(pts)
        for p, m in zip(pts, mask):
            assert ann.contains(p[0], p[1]) == bool(m)
