import json

import numpy as np
import pytest

from pokegrasp.errors import (InvalidConfig, InvalidGeometry, PointBehindCamera,
                              RayParallelToPlane)
from pokegrasp.geometry import RigidTransform, rot_x, rot_z
from pokegrasp.scene import Box, CameraModel, ObjectModel, RevolutionProfile, Scene

from conftest import overhead_camera, straight_cup


def identity_camera():
    return CameraModel(fx=600, fy=600, cx=320, cy=240, width=640, height=480)


class TestProject:
    def test_optical_axis_maps_to_principal_point(self):
        cam = identity_camera()
        for depth in (0.1, 1.0, 7.3):
            assert cam.project([0.0, 0.0, depth]) == (320.0, 240.0)

    def test_hand_computed_pixel(self):
        # 600 * 0.1 / 1 + 320 = 380
        cam = identity_camera()
        u, v = cam.project([0.1, 0.0, 1.0])
        assert abs(u - 380.0) < 1e-12
        assert abs(v - 240.0) < 1e-12

    def test_point_behind_camera(self):
        cam = identity_camera()
        with pytest.raises(PointBehindCamera):
            cam.project([0.0, 0.0, -0.5])


class TestBackproject:
    def test_roundtrip_world_point(self):
        cam = overhead_camera(tilt=0.2)
        p = np.array([0.07, -0.04, 0.12])
        uv = cam.project(p)
        assert np.abs(cam.backproject_at_height(uv, p[2]) - p).max() < 1e-9

    def test_straight_down_center_pixel(self):
        cam = overhead_camera(height=1.0)
        p = cam.backproject_at_height((cam.cx, cam.cy), 0.0)
        assert np.allclose(p, [0.0, 0.0, 0.0], atol=1e-12)

    def test_against_independent_ray_plane_solver(self):
        # oracle: solve o + t*d with d built from first principles
        cam = overhead_camera(height=0.8, tilt=0.15)
        pixel = (411.0, 97.0)
        height = 0.04
        d_cam = np.array([(pixel[0] - cam.cx) / cam.fx, (pixel[1] - cam.cy) / cam.fy, 1.0])
        d_world = cam.pose.rotation @ d_cam
        o = cam.pose.translation
        t = (height - o[2]) / d_world[2]
        expected = o + t * d_world
        assert np.abs(cam.backproject_at_height(pixel, height) - expected).max() < 1e-9

    def test_parallel_ray_raises(self):
        # horizontal camera: the center-pixel ray has zero world-z component
        rot = rot_x(-np.pi / 2) @ np.diag([1.0, -1.0, -1.0])
        cam = CameraModel(fx=600, fy=600, cx=320, cy=240, width=640, height=480,
                          pose=RigidTransform(rot, [0.0, 0.0, 0.3]))
        with pytest.raises(RayParallelToPlane):
            cam.backproject_at_height((320.0, 240.0), 0.1)

    def test_project_backproject_identity_on_pixels(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            cam = overhead_camera(height=rng.uniform(0.3, 1.2), tilt=rng.uniform(0, 0.4))
            uv = (rng.uniform(0, 639), rng.uniform(0, 479))
            h = rng.uniform(0.0, 0.2)
            p = cam.backproject_at_height(uv, h)
            u2, v2 = cam.project(p)
            assert abs(u2 - uv[0]) < 1e-7 and abs(v2 - uv[1]) < 1e-7


class TestValidation:
    def test_camera_invariants(self):
        with pytest.raises(InvalidConfig):
            CameraModel(fx=-1, fy=600, cx=320, cy=240, width=640, height=480)
        with pytest.raises(InvalidConfig):
            CameraModel(fx=600, fy=600, cx=999, cy=240, width=640, height=480)

    def test_profile_invariants(self):
        with pytest.raises(InvalidGeometry):
            RevolutionProfile(points=((0.03, 0.1), (0.03, 0.0)))  # heights not increasing
        with pytest.raises(InvalidGeometry):
            RevolutionProfile(points=((-0.01, 0.0), (0.03, 0.1)))

    def test_wall_thickness_bound(self):
        shape = RevolutionProfile(points=((0.01, 0.0), (0.01, 0.1)), open_top=True)
        with pytest.raises(InvalidGeometry):
            ObjectModel(id=1, shape=shape, mass=0.1, wall_thickness=0.02)

    def test_unique_ids(self):
        cam = identity_camera()
        a = straight_cup(oid=1)
        b = straight_cup(oid=1)
        with pytest.raises(InvalidConfig):
            Scene(camera=cam, objects=(a, b))

    def test_table_normal_unit(self):
        with pytest.raises(InvalidGeometry):
            Scene(camera=identity_camera(), table_normal=np.array([0.0, 0.0, 2.0]))


def test_scene_json_roundtrip(tmp_path):
    cam = overhead_camera(tilt=0.1)
    box = ObjectModel(id=2, shape=Box(size=(0.05, 0.07, 0.09)), mass=0.15,
                      pose=RigidTransform(rot_z(0.4), [0.05, -0.02, 0.0]))
    sc = Scene(camera=cam, objects=(straight_cup(), box))
    path = tmp_path / "scene.json"
    sc.save(path)
    sc2 = Scene.load(path)
    assert json.dumps(sc.to_json(), sort_keys=True) == json.dumps(sc2.to_json(), sort_keys=True)
    assert sc2.object_by_id(2).shape == box.shape
