"""Scene description: camera model, parametric objects, table, JSON I/O.

World frame is the table frame: the table plane is z = ``table_height``
(default 0) with normal +z. Camera frame follows the usual pinhole
convention: +z along the view direction, +x to the image right, +y down
the image. ``CameraModel.pose`` maps camera-frame points into the world.

Objects come in two shapes:

* ``RevolutionProfile`` -- a solid of revolution about the local +z axis,
  described by a polyline of (radius, height) pairs with strictly
  increasing heights. Open-top profiles get a cavity: the inner surface is
  the outer profile offset inward by ``wall_thickness`` and the cavity
  floor sits ``wall_thickness`` above the lowest profile point (or at
  ``height_of_rim - cavity_depth`` when ``cavity_depth`` is given). This
  is what produces ring-shaped rims on upright vessels.
* ``Box`` -- a solid cuboid spanning x in [-w/2, w/2], y in [-d/2, d/2],
  z in [0, h] in its local frame.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidConfig, InvalidGeometry, IoError, PointBehindCamera, RayParallelToPlane
from .geometry import RigidTransform

RAY_PARALLEL_TOL = 1e-12


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera with a rigid camera-to-world pose."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidConfig("focal lengths must be positive")
        if not (0 <= self.cx < self.width) or not (0 <= self.cy < self.height):
            raise InvalidConfig("principal point outside the image")

    def project(self, p_world: np.ndarray) -> tuple[float, float]:
        """World point -> continuous pixel (u, v).

        Raises PointBehindCamera when the camera-frame depth is <= 0.
        """
        pc = self.pose.inverse().apply(np.asarray(p_world, dtype=np.float64))
        if pc[2] <= 0.0:
            raise PointBehindCamera(f"camera-frame depth {pc[2]:.6g} <= 0")
        return (self.fx * pc[0] / pc[2] + self.cx, self.fy * pc[1] / pc[2] + self.cy)

    def pixel_ray(self, pixel: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """World-frame (origin, unit direction) of the ray through a pixel."""
        u, v = float(pixel[0]), float(pixel[1])
        d_cam = np.array([(u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0])
        d_world = self.pose.apply_vector(d_cam)
        d_world /= np.linalg.norm(d_world)
        return self.pose.translation.copy(), d_world

    def backproject_at_height(self, pixel: Sequence[float], height: float) -> np.ndarray:
        """Intersect the pixel ray with the horizontal plane z = ``height``."""
        origin, d = self.pixel_ray(pixel)
        if abs(d[2]) < RAY_PARALLEL_TOL:
            raise RayParallelToPlane(f"pixel {pixel} ray is horizontal")
        t = (height - origin[2]) / d[2]
        return origin + t * d

    def to_json(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height, "pose": self.pose.to_json()}

    @staticmethod
    def from_json(d: dict) -> "CameraModel":
        return CameraModel(fx=d["fx"], fy=d["fy"], cx=d["cx"], cy=d["cy"],
                           width=d["width"], height=d["height"],
                           pose=RigidTransform.from_json(d["pose"]))


@dataclass(frozen=True)
class RevolutionProfile:
    """Solid of revolution about local +z, outer silhouette as (radius, height) pairs."""

    points: tuple[tuple[float, float], ...]
    open_top: bool = False
    cavity_depth: Optional[float] = None

    def __post_init__(self):
        pts = tuple((float(r), float(z)) for r, z in self.points)
        if len(pts) < 2:
            raise InvalidGeometry("profile needs at least two points")
        if any(r < 0 for r, _ in pts):
            raise InvalidGeometry("profile radii must be >= 0")
        heights = [z for _, z in pts]
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise InvalidGeometry("profile heights must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def z_min(self) -> float:
        return self.points[0][1]

    @property
    def z_max(self) -> float:
        return self.points[-1][1]

    @property
    def top_radius(self) -> float:
        return self.points[-1][0]

    @property
    def bottom_radius(self) -> float:
        return self.points[0][0]

    @property
    def max_radius(self) -> float:
        return max(r for r, _ in self.points)

    def radius_at(self, z):
        """Outer radius at height(s) z (linear interpolation, clamped ends)."""
        zs = [p[1] for p in self.points]
        rs = [p[0] for p in self.points]
        return np.interp(z, zs, rs)


@dataclass(frozen=True)
class Box:
    """Solid cuboid: local x in [-w/2, w/2], y in [-d/2, d/2], z in [0, h]."""

    size: tuple[float, float, float]

    def __post_init__(self):
        w, d, h = (float(s) for s in self.size)
        if min(w, d, h) <= 0:
            raise InvalidGeometry("box dimensions must be positive")
        object.__setattr__(self, "size", (w, d, h))


Shape = Union[RevolutionProfile, Box]


@dataclass(frozen=True)
class ObjectModel:
    """A posed rigid object with mass, for rendering and contact simulation."""

    id: int
    shape: Shape
    mass: float
    pose: RigidTransform = field(default_factory=RigidTransform.identity)
    wall_thickness: float = 0.002

    def __post_init__(self):
        if self.id < 1:
            raise InvalidConfig("object ids start at 1")
        if self.mass <= 0:
            raise InvalidConfig("mass must be positive")
        if self.wall_thickness <= 0:
            raise InvalidConfig("wall_thickness must be positive")
        if isinstance(self.shape, RevolutionProfile) and self.shape.open_top:
            if self.wall_thickness >= min(r for r, _ in self.shape.points if r > 0):
                raise InvalidGeometry("wall_thickness must be thinner than the narrowest radius")

    def to_json(self) -> dict:
        if isinstance(self.shape, RevolutionProfile):
            shape = {"type": "revolution", "profile": [list(p) for p in self.shape.points],
                     "open_top": self.shape.open_top, "cavity_depth": self.shape.cavity_depth}
        else:
            shape = {"type": "box", "size": list(self.shape.size)}
        return {"id": self.id, "mass": self.mass, "wall_thickness": self.wall_thickness,
                "pose": self.pose.to_json(), "shape": shape}

    @staticmethod
    def from_json(d: dict) -> "ObjectModel":
        sd = d["shape"]
        if sd["type"] == "revolution":
            shape: Shape = RevolutionProfile(points=tuple(tuple(p) for p in sd["profile"]),
                                             open_top=sd["open_top"],
                                             cavity_depth=sd.get("cavity_depth"))
        elif sd["type"] == "box":
            shape = Box(size=tuple(sd["size"]))
        else:
            raise IoError(f"unknown shape type {sd['type']!r}")
        return ObjectModel(id=d["id"], shape=shape, mass=d["mass"],
                           wall_thickness=d["wall_thickness"],
                           pose=RigidTransform.from_json(d["pose"]))


@dataclass(frozen=True)
class Scene:
    """Table plane, camera, and posed objects."""

    camera: CameraModel
    objects: tuple[ObjectModel, ...] = ()
    table_normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    table_height: float = 0.0

    def __post_init__(self):
        n = np.array(self.table_normal, dtype=np.float64)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise InvalidGeometry("table_normal must be unit length")
        n.setflags(write=False)
        object.__setattr__(self, "table_normal", n)
        object.__setattr__(self, "objects", tuple(self.objects))
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise InvalidConfig("object ids must be unique")

    def object_by_id(self, oid: int) -> ObjectModel:
        for o in self.objects:
            if o.id == oid:
                return o
        raise KeyError(oid)

    def to_json(self) -> dict:
        return {"table": {"normal": self.table_normal.tolist(), "height": self.table_height},
                "camera": self.camera.to_json(),
                "objects": [o.to_json() for o in self.objects]}

    @staticmethod
    def from_json(d: dict) -> "Scene":
        return Scene(camera=CameraModel.from_json(d["camera"]),
                     objects=tuple(ObjectModel.from_json(o) for o in d["objects"]),
                     table_normal=np.asarray(d["table"]["normal"]),
                     table_height=d["table"]["height"])

    def save(self, path) -> None:
        try:
            Path(path).write_text(json.dumps(self.to_json(), sort_keys=True, indent=1))
        except OSError as e:
            raise IoError(str(e)) from e

    @staticmethod
    def load(path) -> "Scene":
        try:
            return Scene.from_json(json.loads(Path(path).read_text()))
        except OSError as e:
            raise IoError(str(e)) from e
        except (KeyError, json.JSONDecodeError) as e:
            raise IoError(f"malformed scene file {path}: {e}") from e
