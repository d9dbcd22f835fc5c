import numpy as np
import pytest

from pokegrasp.errors import InvalidGeometry
from pokegrasp.geometry import RigidTransform, normalize, rot_x, rot_y, rot_z


def random_transform(rng):
    angles = rng.uniform(-np.pi, np.pi, size=3)
    rot = rot_z(angles[0]) @ rot_y(angles[1]) @ rot_x(angles[2])
    return RigidTransform(rot, rng.uniform(-1, 1, size=3))


def test_distances_preserved():
    rng = np.random.default_rng(42)
    for _ in range(50):
        t = random_transform(rng)
        a, b = rng.uniform(-1, 1, size=(2, 3))
        assert abs(np.linalg.norm(t.apply(a) - t.apply(b)) - np.linalg.norm(a - b)) < 1e-9


def test_inverse_and_compose():
    rng = np.random.default_rng(7)
    t = random_transform(rng)
    p = rng.uniform(-1, 1, size=3)
    assert np.allclose(t.inverse().apply(t.apply(p)), p, atol=1e-12)
    u = random_transform(rng)
    assert np.allclose((t @ u).apply(p), t.apply(u.apply(p)), atol=1e-12)


def test_rejects_non_rotation():
    with pytest.raises(InvalidGeometry):
        RigidTransform(np.eye(3) * 2.0, np.zeros(3))
    with pytest.raises(InvalidGeometry):
        RigidTransform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))  # reflection


def test_immutable():
    t = RigidTransform.identity()
    with pytest.raises(ValueError):
        t.rotation[0, 0] = 2.0


def test_json_roundtrip():
    t = RigidTransform(rot_z(0.3), [1.0, 2.0, 3.0])
    t2 = RigidTransform.from_json(t.to_json())
    assert np.allclose(t.rotation, t2.rotation)
    assert np.allclose(t.translation, t2.translation)


def test_normalize_zero_raises():
    with pytest.raises(InvalidGeometry):
        normalize([0.0, 0.0, 0.0])
