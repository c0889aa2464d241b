"""Remap fields, resampling, whole-image warps, and the method comparison."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import panostep.remap as remap_mod
from panostep.geometry import (
    Displacement,
    ImageDims,
    PixelCoord,
    SphereDir,
    dir_to_pixel,
    horizontal_map_closed,
    map_dir,
    pixel_to_dir,
    vertical_map_closed,
)
from panostep.image import EquirectImage
from panostep.remap import (
    Interpolation,
    RemapMethod,
    build_remap_field,
    compare_methods,
    reproject_image,
    sample,
    warp_with_field,
)

from conftest import make_test_image

TWO_PI = 2 * math.pi


def col_dist(a, b, width):
    d = np.abs(a - b)
    return np.minimum(d, width - d)


def separable_reference(d_new: SphereDir, disp: Displacement) -> PixelCoord:
    """Scalar composition of the closed forms, mirroring the field kernel."""
    theta = (d_new.azimuth - disp.direction_rad + math.pi) % TWO_PI - math.pi
    if theta == -math.pi:
        theta = math.pi
    psi = horizontal_map_closed(theta, disp.step)
    a = disp.step * abs(psi) / math.pi
    beta = vertical_map_closed(d_new.polar - math.pi / 2, a)
    return dir_to_pixel(
        SphereDir(disp.direction_rad + psi, beta + math.pi / 2),
        ImageDims(2048, 1024),
    )


class TestBuildRemapField:
    @pytest.mark.parametrize("method", list(RemapMethod))
    def test_zero_step_is_identity_map(self, method):
        dims = ImageDims(256, 128)
        f = build_remap_field(dims, Displacement(0.0, 213.0), method, threads=1)
        xs, ys = np.meshgrid(np.arange(256.0), np.arange(128.0))
        assert col_dist(f.source_x, xs, 256).max() < 1e-9
        assert np.abs(f.source_y - ys).max() < 1e-9

    def test_oracle_field_matches_scalar_map(self):
        dims = ImageDims(2048, 1024)
        disp = Displacement(0.5, 33.7)
        f = build_remap_field(dims, disp, RemapMethod.ORACLE_3D, threads=1)
        rng = np.random.default_rng(1)
        for _ in range(200):
            x = int(rng.integers(0, dims.width))
            y = int(rng.integers(0, dims.height))
            want = dir_to_pixel(map_dir(pixel_to_dir(PixelCoord(x, y), dims), disp), dims)
            got = f.source_at(x, y)
            assert col_dist(got.x, want.x, dims.width) < 1e-9
            assert abs(got.y - want.y) < 1e-9

    def test_separable_field_matches_scalar_closed_forms(self):
        dims = ImageDims(2048, 1024)
        disp = Displacement(0.5, 33.7)
        f = build_remap_field(dims, disp, RemapMethod.PAPER_SEPARABLE, threads=1)
        rng = np.random.default_rng(2)
        for _ in range(200):
            x = int(rng.integers(0, dims.width))
            y = int(rng.integers(0, dims.height))
            want = separable_reference(pixel_to_dir(PixelCoord(x, y), dims), disp)
            got = f.source_at(x, y)
            assert col_dist(got.x, want.x, dims.width) < 1e-9
            assert abs(got.y - want.y) < 1e-9

    def test_equator_pixel_maps_to_sixty_degrees(self):
        # destination at azimuth 90 deg on the equator sources from 60 deg
        dims = ImageDims(2048, 1024)
        f = build_remap_field(dims, Displacement(0.5, 0.0), threads=1)
        x, y = 511, 511  # nearest pixel center to azimuth 90 deg, equator
        src = f.source_at(x, y)
        src_azimuth_deg = (src.x + 0.5) / dims.width * 360.0
        assert src_azimuth_deg == pytest.approx(60.0, abs=0.2)

    def test_zenith_row_sources_from_arcsin_step(self):
        dims = ImageDims(2048, 1024)
        f = build_remap_field(dims, Displacement(0.5, 0.0), threads=1)
        polar = (f.source_y[0] + 0.5) * math.pi / dims.height
        assert np.abs(polar - math.asin(0.5)).max() < math.pi / dims.height

    def test_field_is_cached(self):
        dims = ImageDims(256, 128)
        disp = Displacement(0.4, 17.0)
        a = build_remap_field(dims, disp, threads=1)
        b = build_remap_field(dims, disp, threads=2)
        assert a is b

    def test_thread_count_does_not_change_values(self):
        dims = ImageDims(512, 256)
        disp = Displacement(0.62, 301.5)
        remap_mod._field_cache.clear()
        a = build_remap_field(dims, disp, threads=1)
        remap_mod._field_cache.clear()
        b = build_remap_field(dims, disp, threads=7)
        assert np.array_equal(a.source_x, b.source_x)
        assert np.array_equal(a.source_y, b.source_y)

    @given(
        height=st.integers(1, 64),
        step=st.floats(0.0, 0.99),
        direction=st.floats(0.0, 360.0, exclude_max=True),
        method=st.sampled_from(list(RemapMethod)),
    )
    @settings(max_examples=120, deadline=None)
    def test_source_coordinates_always_in_range(self, height, step, direction, method):
        dims = ImageDims(2 * height, height)
        f = build_remap_field(dims, Displacement(step, direction), method, threads=1)
        assert f.source_x.min() >= 0.0
        assert f.source_x.max() < dims.width
        assert f.source_y.min() >= 0.0
        assert f.source_y.max() < dims.height


class TestSample:
    def test_pixel_center_exact_both_modes(self, small_image):
        for interp in Interpolation:
            got = sample(small_image, PixelCoord(13.0, 7.0), interp)
            assert got == tuple(small_image.pixels[7, 13])

    def test_horizontal_midpoint_averages(self):
        img = make_test_image(8)
        a = img.pixels[1, 2].astype(int)
        b = img.pixels[1, 3].astype(int)
        got = sample(img, PixelCoord(2.5, 1.0), Interpolation.BILINEAR)
        want = tuple(int((ai + bi + 1) // 2) for ai, bi in zip(a, b))
        assert got == want

    def test_seam_blend(self):
        img = make_test_image(8)
        left = img.pixels[2, 7].astype(np.float32)
        right = img.pixels[2, 0].astype(np.float32)
        got = sample(img, PixelCoord(7.75, 2.0), Interpolation.BILINEAR)
        want = tuple(int(v) for v in (left + 0.75 * (right - left) + 0.5))
        assert got == want

    def test_nearest_wraps_seam(self):
        img = make_test_image(8)
        assert sample(img, PixelCoord(7.6, 2.0), Interpolation.NEAREST) == tuple(
            img.pixels[2, 0]
        )

    def test_pole_rows_clamp(self):
        img = make_test_image(8)
        assert sample(img, PixelCoord(3.0, -0.4), Interpolation.NEAREST) == tuple(
            img.pixels[0, 3]
        )
        top = sample(img, PixelCoord(3.0, 0.0), Interpolation.BILINEAR)
        clamped = sample(img, PixelCoord(3.0, -0.4), Interpolation.BILINEAR)
        assert top == clamped  # both rows of the lerp collapse to row 0

    def test_matches_warp_output(self, small_image):
        disp = Displacement(0.45, 203.0)
        field = build_remap_field(small_image.dims, disp, threads=1)
        out = warp_with_field(small_image, field, Interpolation.BILINEAR, threads=1)
        rng = np.random.default_rng(3)
        for _ in range(50):
            x = int(rng.integers(0, small_image.dims.width))
            y = int(rng.integers(0, small_image.dims.height))
            assert tuple(out.pixels[y, x]) == sample(
                small_image, field.source_at(x, y), Interpolation.BILINEAR
            )


class TestReproject:
    def test_zero_step_nearest_byte_identical(self, small_image):
        out = reproject_image(
            small_image, Displacement(0.0, 45.0), interp=Interpolation.NEAREST, threads=1
        )
        assert np.array_equal(out.pixels, small_image.pixels)

    def test_zero_step_bilinear_within_one_lsb(self, small_image):
        out = reproject_image(small_image, Displacement(0.0, 45.0), threads=1)
        diff = np.abs(out.pixels.astype(int) - small_image.pixels.astype(int))
        assert diff.max() <= 1

    @pytest.mark.parametrize("method", list(RemapMethod))
    def test_solid_color_is_invariant(self, method):
        img = EquirectImage.solid(ImageDims(128, 64), (12, 200, 77))
        out = reproject_image(img, Displacement(0.7, 123.0), method, threads=1)
        assert np.array_equal(out.pixels, img.pixels)

    def test_white_pixel_fixed_point(self):
        dims = ImageDims(2048, 1024)
        x0, y0 = 300, dims.height // 2
        direction = 360.0 * (x0 + 0.5) / dims.width
        arr = np.zeros((dims.height, dims.width, 3), dtype=np.uint8)
        arr[y0, x0] = 255
        img = EquirectImage(dims, arr)
        disp = Displacement(0.5, direction)
        out = reproject_image(img, disp, interp=Interpolation.NEAREST, threads=1)
        assert tuple(out.pixels[y0, x0]) == (255, 255, 255)
        # magnification at the fixed point is 1/(1-step) = 2, so the single
        # white source may cover at most a 2x2 destination neighborhood
        white = np.argwhere((out.pixels == 255).all(axis=2))
        assert len(white) <= 4
        assert np.abs(white - [y0, x0]).max() <= 1
        # every other destination pixel's source agrees with the scalar oracle
        field = build_remap_field(dims, disp, threads=1)
        rng = np.random.default_rng(9)
        for _ in range(50):
            x = int(rng.integers(0, dims.width))
            y = int(rng.integers(0, dims.height))
            want = dir_to_pixel(map_dir(pixel_to_dir(PixelCoord(x, y), dims), disp), dims)
            got = field.source_at(x, y)
            assert col_dist(got.x, want.x, dims.width) < 1e-9
            assert abs(got.y - want.y) < 1e-9

    def test_deterministic_across_thread_counts(self, small_image):
        disp = Displacement(0.37, 99.9)
        outs = []
        for threads in (1, 2, 8):
            remap_mod._field_cache.clear()
            for interp in Interpolation:
                outs.append(
                    reproject_image(small_image, disp, interp=interp, threads=threads)
                )
        for i in range(2, len(outs), 2):
            assert np.array_equal(outs[i].pixels, outs[0].pixels)
            assert np.array_equal(outs[i + 1].pixels, outs[1].pixels)

    def test_c_kernel_matches_numpy_fallback(self, small_image):
        if remap_mod._kernels is None:
            pytest.skip("C kernel not built")
        disp = Displacement(0.44, 123.0)
        field = build_remap_field(small_image.dims, disp, threads=1)
        out_c = warp_with_field(small_image, field, threads=1)
        saved = remap_mod._kernels
        remap_mod._kernels = None
        try:
            out_np = warp_with_field(small_image, field, threads=1)
        finally:
            remap_mod._kernels = saved
        assert np.array_equal(out_c.pixels, out_np.pixels)

    def test_dims_mismatch_rejected(self, small_image):
        field = build_remap_field(ImageDims(128, 64), Displacement(0.2, 0.0), threads=1)
        with pytest.raises(ValueError):
            warp_with_field(small_image, field)


class TestEquivariance:
    """Image-level symmetry, byte-exact with nearest and grid-aligned cases."""

    def test_roll_equivariance(self):
        img = make_test_image(512, seed=11)
        w = img.dims.width
        rng = np.random.default_rng(101)
        for _ in range(5):
            m = int(rng.integers(0, w))
            k = int(rng.integers(1, w))
            step = float(rng.uniform(0.05, 0.9))
            base = m * (360.0 / w)
            rolled_dir = base + k * (360.0 / w)
            a = reproject_image(
                EquirectImage(img.dims, np.roll(img.pixels, k, axis=1)),
                Displacement(step, rolled_dir),
                interp=Interpolation.NEAREST, threads=1,
            )
            b = reproject_image(
                img, Displacement(step, base), interp=Interpolation.NEAREST, threads=1
            )
            assert np.array_equal(a.pixels, np.roll(b.pixels, k, axis=1))

    def test_vertical_mirror(self):
        img = make_test_image(512, seed=12)
        disp = Displacement(0.55, 217.3)
        a = reproject_image(
            EquirectImage(img.dims, np.ascontiguousarray(img.pixels[::-1])),
            disp, interp=Interpolation.NEAREST, threads=1,
        )
        b = reproject_image(img, disp, interp=Interpolation.NEAREST, threads=1)
        assert np.array_equal(a.pixels, b.pixels[::-1])

    def test_horizontal_mirror_about_displacement_axis(self):
        img = make_test_image(512, seed=13)
        w = img.dims.width
        rng = np.random.default_rng(103)
        for _ in range(5):
            m = int(rng.integers(0, w))
            step = float(rng.uniform(0.05, 0.9))
            disp = Displacement(step, m * (360.0 / w))
            perm = (2 * m - 1 - np.arange(w)) % w
            a = reproject_image(
                EquirectImage(img.dims, np.ascontiguousarray(img.pixels[:, perm])),
                disp, interp=Interpolation.NEAREST, threads=1,
            )
            b = reproject_image(img, disp, interp=Interpolation.NEAREST, threads=1)
            assert np.array_equal(a.pixels, b.pixels[:, perm])


class TestCompareMethods:
    def test_zero_step_zero_error(self):
        cm = compare_methods(ImageDims(512, 256), Displacement(0.0, 0.0))
        assert cm.max_error_rad < 1e-12
        assert cm.equator_max_error_rad < 1e-12

    def test_equator_exact_half_step(self):
        cm = compare_methods(ImageDims(2048, 1024), Displacement(0.5, 0.0))
        assert cm.equator_max_error_rad < 1e-9
        assert cm.equator_exact

    def test_off_equator_deviation_exists(self):
        cm = compare_methods(ImageDims(512, 256), Displacement(0.5, 0.0))
        assert cm.max_error_rad > 0.01
        assert 0 <= cm.worst_pixel[0] < 512
        assert 0 <= cm.worst_pixel[1] < 256
        assert cm.row_max_error_rad.shape == (256,)

    def test_direction_equivariant(self):
        a = compare_methods(ImageDims(256, 128), Displacement(0.5, 0.0))
        b = compare_methods(ImageDims(256, 128), Displacement(0.5, 90.0))
        assert a.max_error_rad == pytest.approx(b.max_error_rad, abs=1e-12)

    def test_grid_kept_on_request(self):
        cm = compare_methods(ImageDims(128, 64), Displacement(0.5, 0.0), keep_grid=True)
        assert cm.error_grid is not None
        assert cm.error_grid.shape == (64, 128)
        assert cm.error_grid.max() == pytest.approx(cm.max_error_rad)
