import numpy as np
import pytest

from harpipe.camera import (CameraIntrinsics, DepthImage, Point3D, backproject,
                            project, sample_depth)
from harpipe.errors import (BehindCameraError, BoundsError, ConfigError,
                            InvalidDepthError)


def make_depth(values, width=640, height=480):
    data = np.zeros((height, width), dtype=np.uint16)
    for (r, c), v in values.items():
        data[r, c] = v
    return DepthImage(width=width, height=height, data=data)


class TestBackproject:
    def test_principal_point_lies_on_optical_axis(self, intrinsics):
        p = backproject(320, 240, 3.0, intrinsics)
        assert p == Point3D(0.0, 0.0, 3.0)

    def test_direct_evaluation(self, intrinsics):
        p = backproject(570, 240, 2.0, intrinsics)
        assert p.x == pytest.approx(1.0)
        assert p.y == pytest.approx(0.0)
        assert p.z == 2.0

    def test_nonpositive_depth_rejected(self, intrinsics):
        with pytest.raises(InvalidDepthError):
            backproject(100, 100, 0.0, intrinsics)
        with pytest.raises(InvalidDepthError):
            backproject(100, 100, -1.0, intrinsics)

    def test_out_of_bounds_rejected(self, intrinsics):
        with pytest.raises(BoundsError):
            backproject(640, 100, 1.0, intrinsics)
        with pytest.raises(BoundsError):
            backproject(-1, 100, 1.0, intrinsics)

    def test_linear_in_depth(self, intrinsics):
        rng = np.random.default_rng(3)
        for _ in range(50):
            u = rng.uniform(0, 639)
            v = rng.uniform(0, 479)
            z = rng.uniform(0.3, 5.0)
            p1 = backproject(u, v, z, intrinsics)
            p2 = backproject(u, v, 2 * z, intrinsics)
            assert p2.x == pytest.approx(2 * p1.x, rel=1e-9, abs=1e-12)
            assert p2.y == pytest.approx(2 * p1.y, rel=1e-9, abs=1e-12)


class TestProject:
    def test_optical_axis_maps_to_principal_point(self, intrinsics):
        assert project(Point3D(0, 0, 1.7), intrinsics) == (320.0, 240.0)

    def test_hand_evaluated_point(self, intrinsics):
        assert project(Point3D(0.5, -0.25, 2.0), intrinsics) == (445.0, 177.5)

    def test_behind_camera_rejected(self, intrinsics):
        with pytest.raises(BehindCameraError):
            project(Point3D(0.1, 0.1, 0.0), intrinsics)

    def test_roundtrip_many(self, intrinsics):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            u = rng.uniform(0, 639.999)
            v = rng.uniform(0, 479.999)
            z = rng.uniform(0.3, 10.0)
            u2, v2 = project(backproject(u, v, z, intrinsics), intrinsics)
            assert u2 == pytest.approx(u, rel=1e-6)
            assert v2 == pytest.approx(v, rel=1e-6)


class TestSampleDepth:
    def test_direct_scaling(self, intrinsics):
        img = make_depth({(240, 320): 2000})
        assert sample_depth(img, 320, 240, intrinsics) == pytest.approx(2.0)

    def test_zero_pixel_uses_neighborhood_median(self, intrinsics):
        img = make_depth({(240, 319): 1000, (239, 321): 1200, (242, 322): 1400})
        assert sample_depth(img, 320, 240, intrinsics) == pytest.approx(1.2)

    def test_all_zero_patch_is_no_depth(self, intrinsics):
        img = make_depth({})
        assert sample_depth(img, 320, 240, intrinsics) is None

    def test_subpixel_rounds_to_nearest(self, intrinsics):
        img = make_depth({(240, 320): 3000})
        assert sample_depth(img, 320.4, 239.6, intrinsics) == pytest.approx(3.0)

    def test_out_of_bounds(self, intrinsics):
        img = make_depth({})
        with pytest.raises(BoundsError):
            sample_depth(img, 700, 10, intrinsics)

    def test_never_returns_nonpositive(self, intrinsics):
        rng = np.random.default_rng(5)
        data = rng.integers(0, 3, size=(480, 640)).astype(np.uint16) * 1500
        img = DepthImage(width=640, height=480, data=data)
        for _ in range(200):
            u = rng.uniform(0, 639)
            v = rng.uniform(0, 479)
            d = sample_depth(img, u, v, intrinsics)
            assert d is None or d > 0


class TestIntrinsics:
    def test_invalid_parameters_rejected(self):
        with pytest.raises(ConfigError):
            CameraIntrinsics(fx=0, fy=500, u0=320, v0=240,
                             depth_scale=0.001, width=640, height=480)
        with pytest.raises(ConfigError):
            CameraIntrinsics(fx=500, fy=500, u0=700, v0=240,
                             depth_scale=0.001, width=640, height=480)

    def test_json_roundtrip(self, tmp_path, intrinsics):
        path = tmp_path / "intrinsics.json"
        path.write_text(
            '{"fx": 500, "fy": 500, "u0": 320, "v0": 240,'
            ' "depth_scale": 0.001, "width": 640, "height": 480}')
        assert CameraIntrinsics.from_json(str(path)) == intrinsics
