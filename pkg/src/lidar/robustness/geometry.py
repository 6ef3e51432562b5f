##############################################################################
#
# Copyright (c) 2026 lidar.robustness Contributors.
# All Rights Reserved.
#
# This software is subject to the provisions of the Zope Public License,
# Version 2.1 (ZPL).  A copy of the ZPL should accompany this distribution.
# THIS SOFTWARE IS PROVIDED "AS IS" AND ANY AND ALL EXPRESS OR IMPLIED
# WARRANTIES ARE DISCLAIMED, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
# WARRANTIES OF TITLE, MERCHANTABILITY, AGAINST INFRINGEMENT, AND FITNESS
# FOR A PARTICULAR PURPOSE.
#
##############################################################################
"""Geometric value types shared by every corruption kernel.

Points live in the LiDAR frame: +x forward, +y left, +z up. A cloud is
an immutable ``(N, 4)`` float64 array so that geometric invariants hold
at double precision; narrowing to float32 happens only when a cloud is
written to disk.
"""
import dataclasses
import math
from typing import NamedTuple

import numpy as np

from zope.interface import implementer

from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.interfaces import IBox3D
from lidar.robustness.interfaces import IPointCloud


__all__ = [
    'Point',
    'SphericalPoint',
    'PointCloud',
    'Box3D',
    'Severity',
    'SEVERITIES',
    'to_spherical',
    'to_cartesian',
    'cartesian_to_spherical',
    'spherical_to_cartesian',
    'normalize_angle',
    'normalize_angles',
]

TWO_PI = 2.0 * math.pi


class Point(NamedTuple):
    x: float
    y: float
    z: float
    reflectance: float = 0.0


class SphericalPoint(NamedTuple):
    """Range, polar angle from +z, azimuth, reflectance."""
    r: float
    theta: float
    phi: float
    reflectance: float = 0.0


def normalize_angle(angle):
    """Wrap *angle* (radians) into ``(-pi, pi]``.

    >>> normalize_angle(-math.pi) == math.pi
    True
    """
    wrapped = math.remainder(angle, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def normalize_angles(angles):
    """Vectorized `normalize_angle`."""
    wrapped = np.remainder(np.asarray(angles, dtype=np.float64) + math.pi,
                           TWO_PI) - math.pi
    return np.where(wrapped <= -math.pi, wrapped + TWO_PI, wrapped)


def to_spherical(p):
    x, y, z, refl = p
    r = math.sqrt(x * x + y * y + z * z)
    theta = math.acos(max(-1.0, min(1.0, z / r))) if r > 0.0 else 0.0
    # atan2 returns -pi for (-0.0, negative x); the azimuth range is
    # half-open at -pi.
    phi = math.atan2(y, x)
    if phi <= -math.pi:
        phi = math.pi
    return SphericalPoint(r, theta, phi, refl)


def to_cartesian(s):
    r, theta, phi, refl = s
    sin_theta = math.sin(theta)
    return Point(r * sin_theta * math.cos(phi),
                 r * sin_theta * math.sin(phi),
                 r * math.cos(theta),
                 refl)


def cartesian_to_spherical(xyz):
    """Convert an ``(N, 3)`` array to ``(N, 3)`` of ``r, theta, phi``."""
    xyz = np.asarray(xyz, dtype=np.float64)
    r = np.sqrt(np.einsum('ij,ij->i', xyz, xyz))
    with np.errstate(invalid='ignore', divide='ignore'):
        cos_theta = np.where(r > 0.0, xyz[:, 2] / np.where(r > 0, r, 1.0),
                             1.0)
    theta = np.arccos(np.clip(cos_theta, -1.0, 1.0))
    phi = np.arctan2(xyz[:, 1], xyz[:, 0])
    phi = np.where(phi <= -math.pi, math.pi, phi)
    return np.column_stack((r, theta, phi))


def spherical_to_cartesian(rtp):
    rtp = np.asarray(rtp, dtype=np.float64)
    r, theta, phi = rtp[:, 0], rtp[:, 1], rtp[:, 2]
    sin_theta = np.sin(theta)
    return np.column_stack((r * sin_theta * np.cos(phi),
                            r * sin_theta * np.sin(phi),
                            r * np.cos(theta)))


class Severity(int):
    """A corruption severity level, 0 (clean) through 5.
    """

    def __new__(cls, level):
        if isinstance(level, bool) or int(level) != level:
            raise InvalidArgument(f"severity must be an integer: {level!r}")
        level = int(level)
        if not 0 <= level <= 5:
            raise InvalidArgument(f"severity must be in 0..5: {level}")
        return super().__new__(cls, level)

    @property
    def level(self):
        return int(self)

    def __repr__(self):
        return f"Severity({int(self)})"


SEVERITIES = tuple(Severity(s) for s in range(6))


@implementer(IPointCloud)
class PointCloud:
    """
    An immutable frame of LiDAR points.

    *points* is anything convertible to an ``(N, 4)`` float array; the
    cloud keeps a private read-only float64 copy.
    """

    __slots__ = ('_points', 'frame_id')

    def __init__(self, points=(), frame_id=''):
        arr = np.array(points, dtype=np.float64, copy=True)
        if arr.size == 0:
            arr = arr.reshape(0, 4)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise InvalidArgument(
                f"points must have shape (N, 4), not {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self._points = arr
        self.frame_id = frame_id

    @classmethod
    def _wrap(cls, arr, frame_id):
        # Adopts *arr* without copying; callers hand over ownership.
        inst = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.float64).reshape(-1, 4)
        arr.flags.writeable = False
        inst._points = arr
        inst.frame_id = frame_id
        return inst

    @property
    def points(self):
        return self._points

    @property
    def xyz(self):
        return self._points[:, :3]

    @property
    def reflectance(self):
        return self._points[:, 3]

    def __len__(self):
        return self._points.shape[0]

    def __iter__(self):
        for row in self._points:
            yield Point(*row.tolist())

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return (self.frame_id == other.frame_id
                and np.array_equal(self._points, other._points))

    def __hash__(self):
        return hash((self.frame_id, self._points.tobytes()))

    def __repr__(self):
        return f"<PointCloud {self.frame_id!r} N={len(self)}>"

    def with_points(self, points):
        """Return a cloud with the same frame id and new *points*."""
        return type(self)._wrap(np.array(points, dtype=np.float64),
                                self.frame_id)

    def take(self, indices):
        """Return the points at *indices* (order kept as given)."""
        return type(self)._wrap(self._points[np.asarray(indices, dtype=int)],
                                self.frame_id)

    def delete(self, indices):
        """Return the cloud without *indices*; survivors keep their order.
        """
        keep = np.ones(len(self), dtype=bool)
        keep[np.asarray(indices, dtype=int)] = False
        return type(self)._wrap(self._points[keep], self.frame_id)

    def append(self, points):
        """Return the cloud with *points* appended after the originals."""
        extra = np.asarray(points, dtype=np.float64).reshape(-1, 4)
        return type(self)._wrap(np.concatenate((self._points, extra)),
                                self.frame_id)

    def bounds(self):
        """Return ``(min_xyz, max_xyz)`` of the axis-aligned bounding box.
        """
        if not len(self):
            raise InvalidArgument("an empty cloud has no bounds")
        xyz = self.xyz
        return xyz.min(axis=0), xyz.max(axis=0)


def _optional_float(value):
    return None if value is None else float(value)


@implementer(IBox3D)
@dataclasses.dataclass(frozen=True)
class Box3D:
    """
    An oriented box in the LiDAR frame.

    ``alpha`` and ``image_bbox`` are KITTI label columns carried through
    unchanged so labels can be written back.
    """

    cx: float
    cy: float
    cz: float
    length: float
    width: float
    height: float
    yaw: float
    class_label: str = 'Car'
    score: float | None = None
    truncation: float | None = None
    occlusion: int | None = None
    image_bbox: tuple | None = None
    alpha: float | None = None

    def __post_init__(self):
        for name in ('cx', 'cy', 'cz', 'length', 'width', 'height', 'yaw'):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgument(f"box {name} must be finite: {value}")
            object.__setattr__(self, name, value)
        if not (self.length > 0 and self.width > 0 and self.height > 0):
            raise InvalidArgument(
                "box dimensions must be positive: "
                f"{self.length}, {self.width}, {self.height}")
        object.__setattr__(self, 'yaw', normalize_angle(self.yaw))
        object.__setattr__(self, 'score', _optional_float(self.score))
        object.__setattr__(self, 'truncation',
                           _optional_float(self.truncation))
        if self.occlusion is not None:
            object.__setattr__(self, 'occlusion', int(self.occlusion))
        if self.image_bbox is not None:
            object.__setattr__(self, 'image_bbox',
                               tuple(float(v) for v in self.image_bbox))

    @property
    def center(self):
        return np.array((self.cx, self.cy, self.cz))

    @property
    def dimensions(self):
        return np.array((self.length, self.width, self.height))

    @property
    def volume(self):
        return self.length * self.width * self.height

    @property
    def bottom(self):
        return self.cz - self.height / 2.0

    @property
    def image_bbox_height(self):
        if self.image_bbox is None:
            return None
        return self.image_bbox[3] - self.image_bbox[1]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def rotation(self):
        """The 3x3 box-to-LiDAR rotation about +z."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return np.array(((c, -s, 0.0), (s, c, 0.0), (0.0, 0.0, 1.0)))

    def to_local(self, xyz):
        """Express LiDAR-frame ``(N, 3)`` points in the box frame."""
        return (np.asarray(xyz, dtype=np.float64) - self.center) \
            @ self.rotation()

    def from_local(self, local):
        """Inverse of `to_local`."""
        return np.asarray(local, dtype=np.float64) @ self.rotation().T \
            + self.center

    def corners_bev(self):
        """The four ground-plane corners, counter-clockwise."""
        half_l, half_w = self.length / 2.0, self.width / 2.0
        local = np.array(((half_l, half_w), (-half_l, half_w),
                          (-half_l, -half_w), (half_l, -half_w)))
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        rot = np.array(((c, -s), (s, c)))
        return local @ rot.T + (self.cx, self.cy)

    def contains(self, xyz, margin=1e-6):
        """Boolean mask of the ``(N, 3)`` points inside the box."""
        local = np.abs(self.to_local(xyz))
        half = self.dimensions / 2.0 + margin
        return np.all(local <= half, axis=1)
