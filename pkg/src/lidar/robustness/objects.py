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
"""Object-level corruptions

These kernels only touch the points inside ground-truth boxes. Each box
of a targeted class is corrupted independently, in label order, with its
own draws from the stream; points outside every targeted box come out
bit-identical.

Only ``scale``, ``rotation`` and ``translation`` change the boxes; every
other kernel returns the input boxes as they were.
"""
import dataclasses
import logging
import math
from typing import NamedTuple

import numpy as np
from scipy.special import comb

from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.fitting import PLANE
from lidar.robustness.fitting import densify
from lidar.robustness.geometry import Severity
from lidar.robustness.spatial import KnnIndex


__all__ = [
    'SCHEDULES',
    'NOISE_KINDS',
    'DENSITY_MODES',
    'POSE_MODES',
    'POSE_LIMITS',
    'check_pose_schedules',
    'CorruptionSpec',
    'ObjectSlice',
    'CorruptedFrame',
    'extract_objects',
    'object_noise',
    'object_density',
    'object_shear',
    'shear_matrix',
    'object_ffd',
    'ffd_offsets',
    'object_scale',
    'object_pose',
]

logger = logging.getLogger(__name__)

NOISE_KINDS = ('uniform', 'gaussian', 'impulse', 'upsample')
DENSITY_MODES = ('cutout', 'dec', 'inc')
POSE_MODES = ('rotate', 'translate')

SCHEDULES = {
    'uniform': (0.0, 0.02, 0.04, 0.06, 0.08, 0.10),
    'gaussian': (0.0, 0.02, 0.03, 0.04, 0.05, 0.06),
    'impulse': (None, 30, 25, 20, 15, 10),
    'upsample': (None, 5, 4, 3, 2, 1),
    # neighborhood centers per object
    'density': (0, 1, 2, 3, 4, 5),
    'shear': ((0.0, 0.0), (0.0, 0.10), (0.05, 0.15), (0.10, 0.20),
              (0.15, 0.25), (0.20, 0.30)),
    'ffd': (0.0, 0.1, 0.2, 0.3, 0.4, 0.5),
    'scale': (0.0, 0.04, 0.08, 0.12, 0.16, 0.20),
    # degrees
    'rotate': ((0.0, 0.0), (0.0, 2.0), (3.0, 4.0), (5.0, 6.0), (7.0, 8.0),
               (9.0, 10.0)),
    # meters, in the ground plane
    'translate': ((0.0, 0.0), (0.0, 0.2), (0.3, 0.4), (0.5, 0.6),
                  (0.7, 0.8), (0.9, 1.0)),
}

# Upper bounds of a pose change: degrees for rotate, meters for translate.
# Draws are half-open, so a schedule may reach but never exceed them.
POSE_LIMITS = {'rotate': 10.0, 'translate': 1.0}


def check_pose_schedules(schedules=SCHEDULES, limits=POSE_LIMITS):
    """Raise `InvalidArgument` if a pose schedule can exceed its limit."""
    for mode in POSE_MODES:
        for severity, (lo, hi) in enumerate(schedules[mode]):
            if not 0.0 <= lo <= hi <= limits[mode]:
                raise InvalidArgument(
                    f"{mode} schedule at severity {severity} is outside"
                    f" [0, {limits[mode]}]: ({lo}, {hi})")


check_pose_schedules()

IMPULSE_BIAS = 0.1
UPSAMPLE_BIAS = 0.05
CUTOUT_K = 20
DENSITY_K = 30
DEC_FRACTION = 0.75
FFD_DEGREE = 4
CONTAINMENT_MARGIN = 1e-6

_KIND_NAMES = {
    'uniform': 'uniform',
    'gaussian': 'gaussian',
    'impulse': 'impulse',
    'upsample': 'upsample_obj',
    'cutout': 'cutout_obj',
    'dec': 'local_dec_obj',
    'inc': 'local_inc_obj',
    'rotate': 'rotation',
    'translate': 'translation',
}


class CorruptionSpec(NamedTuple):
    """The ``(kind, severity, seed)`` naming one deterministic transform."""

    kind: str
    severity: int
    seed: int


@dataclasses.dataclass(frozen=True)
class ObjectSlice:
    """The points of *cloud* owned by one box."""

    box: object
    member_indices: np.ndarray

    def __len__(self):
        return len(self.member_indices)

    def to_local(self, xyz):
        return self.box.to_local(xyz)

    def from_local(self, local):
        return self.box.from_local(local)


@dataclasses.dataclass(frozen=True)
class CorruptedFrame:
    cloud: object
    boxes: tuple
    provenance: CorruptionSpec | None = None


def extract_objects(cloud, boxes, margin=CONTAINMENT_MARGIN):
    """
    One `ObjectSlice` per box, in box order.

    A point inside several boxes belongs to the one whose center is
    nearest (the first such box on a tie).
    """
    boxes = list(boxes)
    if not boxes:
        return []
    xyz = cloud.xyz
    inside = np.array([box.contains(xyz, margin) for box in boxes])
    owner = np.full(len(cloud), -1, dtype=np.int64)
    shared = np.count_nonzero(inside, axis=0)
    owner[shared == 1] = np.argmax(inside[:, shared == 1], axis=0)
    contested = np.flatnonzero(shared > 1)
    if len(contested):
        centers = np.array([box.center for box in boxes])
        delta = xyz[contested, None, :] - centers[None, :, :]
        dist = np.einsum('ijk,ijk->ij', delta, delta)
        dist[~inside[:, contested].T] = np.inf
        owner[contested] = np.argmin(dist, axis=1)
    return [ObjectSlice(box, np.flatnonzero(owner == i))
            for i, box in enumerate(boxes)]


class _Work:
    """Accumulates edits to one frame while its objects are visited."""

    def __init__(self, cloud, boxes, classes, kind, severity, stream):
        self.cloud = cloud
        self.boxes = list(boxes)
        self.points = np.array(cloud.points)
        self.deleted = []
        self.appended = []
        self.provenance = CorruptionSpec(kind, int(severity),
                                         getattr(stream, 'seed', None))
        self.slices = [
            (i, s) for i, s in enumerate(extract_objects(cloud, boxes))
            if classes is None or s.box.class_label in classes]

    def finish(self):
        points = self.points
        if self.deleted:
            keep = np.ones(len(points), dtype=bool)
            keep[np.concatenate(self.deleted)] = False
            points = points[keep]
        if self.appended:
            points = np.concatenate([points] + self.appended)
        return CorruptedFrame(self.cloud.with_points(points),
                              tuple(self.boxes), self.provenance)


def _identity(cloud, boxes, kind, stream):
    return CorruptedFrame(cloud, tuple(boxes),
                          CorruptionSpec(kind, 0,
                                         getattr(stream, 'seed', None)))


def _portion(n, divisor):
    return 0 if divisor is None else n // divisor


def object_noise(cloud, boxes, kind, severity, stream, stats=None,
                 classes=None):
    """
    Cartesian noise on member points.

    ``uniform`` and ``gaussian`` perturb every member on each axis.
    ``impulse`` biases a portion of the members by 0.1 m per axis with a
    random sign. ``upsample`` appends one jittered copy of a portion of
    the members.
    """
    if kind not in NOISE_KINDS:
        raise InvalidArgument(f"unknown object noise kind: {kind!r}")
    severity = Severity(severity)
    name = _KIND_NAMES[kind]
    if severity == 0:
        return _identity(cloud, boxes, name, stream)
    work = _Work(cloud, boxes, classes, name, severity, stream)
    points = work.points
    for _, obj in work.slices:
        members = obj.member_indices
        n = len(members)
        if not n:
            continue
        if kind == 'uniform':
            bound = SCHEDULES['uniform'][severity]
            points[members, :3] += stream.uniform(-bound, bound, (n, 3))
        elif kind == 'gaussian':
            points[members, :3] += stream.gaussian(
                0.0, SCHEDULES['gaussian'][severity], (n, 3))
        else:
            count = _portion(n, SCHEDULES[kind][severity])
            chosen = members[stream.choose_without_replacement(n, count)]
            if kind == 'impulse':
                points[chosen, :3] += IMPULSE_BIAS * stream.signs((count, 3))
            else:
                new = np.array(cloud.points[chosen])
                new[:, :3] += stream.uniform(-UPSAMPLE_BIAS, UPSAMPLE_BIAS,
                                             (count, 3))
                work.appended.append(new)
    return work.finish()


def object_density(cloud, boxes, mode, severity, stream, stats=None,
                   classes=None):
    """
    Cut out, thin or densify neighborhoods inside each object.

    Up to ``severity`` member points are picked as centers.
    ``cutout`` removes the 20 nearest members of each; ``dec`` removes
    75% of the 30 nearest; ``inc`` fits a plane to the 30 nearest and
    adds as many points on it. Neighbors are searched among members only.
    """
    if mode not in DENSITY_MODES:
        raise InvalidArgument(f"unknown object density mode: {mode!r}")
    severity = Severity(severity)
    name = _KIND_NAMES[mode]
    if severity == 0:
        return _identity(cloud, boxes, name, stream)
    work = _Work(cloud, boxes, classes, name, severity, stream)
    k = CUTOUT_K if mode == 'cutout' else DENSITY_K
    for _, obj in work.slices:
        members = obj.member_indices
        n = len(members)
        if not n:
            continue
        count = min(SCHEDULES['density'][severity], n)
        centers = stream.choose_without_replacement(n, count)
        index = KnnIndex(cloud.xyz[members])
        for center in centers:
            local, _ = index.knn(index.points[center], k)
            neighbors = members[local]
            if mode == 'cutout':
                work.deleted.append(neighbors)
            elif mode == 'dec':
                m = math.floor(DEC_FRACTION * len(neighbors))
                picked = stream.choose_without_replacement(
                    len(neighbors), m)
                work.deleted.append(neighbors[picked])
            else:
                work.appended.append(densify(
                    cloud.points[neighbors], len(neighbors), stream,
                    PLANE, stats))
    if work.deleted:
        work.deleted = [np.unique(np.concatenate(work.deleted))]
    return work.finish()


def shear_matrix(a, b, c, d):
    """``[[1, a, b], [c, 1, d], [0, 0, 1]]``"""
    return np.array(((1.0, a, b), (c, 1.0, d), (0.0, 0.0, 1.0)))


def object_shear(cloud, boxes, severity, stream, stats=None, classes=None):
    """
    Shear each object in its box frame; member ``z`` is never touched.
    """
    severity = Severity(severity)
    if severity == 0:
        return _identity(cloud, boxes, 'shear', stream)
    work = _Work(cloud, boxes, classes, 'shear', severity, stream)
    lo, hi = SCHEDULES['shear'][severity]
    for _, obj in work.slices:
        members = obj.member_indices
        coefficients = stream.uniform(lo, hi, 4) * stream.signs(4)
        if not len(members):
            continue
        matrix = shear_matrix(*coefficients)
        local = obj.to_local(cloud.xyz[members])
        sheared = obj.from_local(local @ matrix.T)
        work.points[members, :2] = sheared[:, :2]
    return work.finish()


def _bernstein(t):
    i = np.arange(FFD_DEGREE + 1)
    return comb(FFD_DEGREE, i) * t[:, None] ** i \
        * (1.0 - t[:, None]) ** (FFD_DEGREE - i)


def ffd_offsets(stu, displacement):
    """
    Displacement of points at lattice coordinates *stu* (``(N, 3)`` in
    ``[0, 1]``) under control point *displacement* (``(5, 5, 5, 3)``).

    The deformed point is the original plus this offset; with a zero
    displacement the map is exactly the identity.
    """
    stu = np.asarray(stu, dtype=np.float64)
    return np.einsum('ni,nj,nk,ijkc->nc',
                     _bernstein(stu[:, 0]), _bernstein(stu[:, 1]),
                     _bernstein(stu[:, 2]), displacement)


def object_ffd(cloud, boxes, severity, stream, stats=None, classes=None):
    """
    Free-form deformation with a 5x5x5 control lattice spanning the
    box-frame bounding box of the members.

    Each control point moves by up to ``rho`` times the extent on each
    axis. An axis with zero extent is left undeformed.
    """
    severity = Severity(severity)
    if severity == 0:
        return _identity(cloud, boxes, 'ffd', stream)
    work = _Work(cloud, boxes, classes, 'ffd', severity, stream)
    rho = SCHEDULES['ffd'][severity]
    shape = (FFD_DEGREE + 1,) * 3 + (3,)
    for _, obj in work.slices:
        members = obj.member_indices
        if not len(members):
            continue
        local = obj.to_local(cloud.xyz[members])
        lo, hi = local.min(axis=0), local.max(axis=0)
        extent = hi - lo
        displacement = stream.uniform(-rho, rho, shape) * extent
        flat = extent <= 0.0
        if np.any(flat):
            if stats is not None:
                stats['ffd_flat_axis'] += 1
            logger.debug("ffd: object has no extent on axes %s",
                         np.flatnonzero(flat).tolist())
        stu = np.divide(local - lo, extent, out=np.zeros_like(local),
                        where=~flat)
        deformed = obj.from_local(local + ffd_offsets(stu, displacement))
        work.points[members, :3] = deformed
    return work.finish()


_SCALE_FIELDS = ('length', 'width', 'height')


def object_scale(cloud, boxes, severity, stream, stats=None, classes=None):
    """
    Stretch or squeeze each object along one random box axis.

    The box dimension follows the points. A vertical scale keeps the
    bottom face where it was.
    """
    severity = Severity(severity)
    if severity == 0:
        return _identity(cloud, boxes, 'scale', stream)
    work = _Work(cloud, boxes, classes, 'scale', severity, stream)
    amount = SCHEDULES['scale'][severity]
    for i, obj in work.slices:
        box = obj.box
        axis = int(stream.integers(0, 3))
        factor = 1.0 + float(stream.signs(1)[0]) * amount
        field = _SCALE_FIELDS[axis]
        new_box = box.replace(**{field: getattr(box, field) * factor})
        lift = 0.0
        if axis == 2:
            lift = (new_box.height - box.height) / 2.0
            new_box = new_box.replace(cz=box.bottom + new_box.height / 2.0)
        work.boxes[i] = new_box
        members = obj.member_indices
        if not len(members):
            continue
        local = obj.to_local(cloud.xyz[members])
        local[:, axis] *= factor
        moved = obj.from_local(local)
        moved[:, 2] += lift
        work.points[members, :3] = moved
    return work.finish()


def _rotation_2d(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array(((c, -s), (s, c)))


def object_pose(cloud, boxes, mode, severity, stream, stats=None,
                classes=None):
    """
    Rigidly rotate each object about its vertical axis (``rotate``) or
    slide it across the ground plane (``translate``), box included.
    """
    if mode not in POSE_MODES:
        raise InvalidArgument(f"unknown object pose mode: {mode!r}")
    severity = Severity(severity)
    name = _KIND_NAMES[mode]
    if severity == 0:
        return _identity(cloud, boxes, name, stream)
    work = _Work(cloud, boxes, classes, name, severity, stream)
    lo, hi = SCHEDULES[mode][severity]
    for i, obj in work.slices:
        box = obj.box
        members = obj.member_indices
        xy = cloud.xyz[members, :2]
        if mode == 'rotate':
            angle = math.radians(stream.uniform(lo, hi)) \
                * float(stream.signs(1)[0])
            work.boxes[i] = box.replace(yaw=box.yaw + angle)
            center = np.array((box.cx, box.cy))
            moved = (xy - center) @ _rotation_2d(angle).T + center
        else:
            distance = stream.uniform(lo, hi)
            heading = stream.uniform(-math.pi, math.pi)
            offset = distance * np.array((math.cos(heading),
                                          math.sin(heading)))
            work.boxes[i] = box.replace(cx=box.cx + offset[0],
                                        cy=box.cy + offset[1])
            moved = xy + offset
        work.points[members, :2] = moved
    return work.finish()
