import numpy as np
import pytest

from pokegrasp.geometry import RigidTransform, rot_x, rot_z
from pokegrasp.scene import Box, CameraModel, ObjectModel, RevolutionProfile, Scene


def overhead_camera(height=0.6, fx=600.0, fy=600.0, cx=320.0, cy=240.0,
                    width=640, height_px=480, tilt=0.0):
    """Camera looking straight down (+ optional tilt about world x toward +y)."""
    flip = np.diag([1.0, -1.0, -1.0])  # cam +z -> world -z, +x -> +x
    rot = rot_x(-tilt) @ flip
    return CameraModel(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height_px,
                       pose=RigidTransform(rot, [0.0, height * np.tan(tilt), height]))


def straight_cup(radius=0.03, height=0.10, wall=0.003, mass=0.2, oid=1,
                 pose=None):
    shape = RevolutionProfile(points=((radius, 0.0), (radius, height)), open_top=True)
    return ObjectModel(id=oid, shape=shape, mass=mass, wall_thickness=wall,
                       pose=pose or RigidTransform.identity())


@pytest.fixture
def down_cam():
    return overhead_camera()


@pytest.fixture
def cup_scene(down_cam):
    return Scene(camera=down_cam, objects=(straight_cup(),))
