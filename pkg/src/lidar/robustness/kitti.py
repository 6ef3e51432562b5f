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
"""KITTI file formats

* velodyne ``.bin``: little-endian float32 ``x y z reflectance``
  quadruples, 16 bytes per point, no header;
* ``label_2`` text: one object per line, 15 whitespace separated fields
  (ground truth) or 16 (detections, trailing score);
* ``calib`` text: ``key: values`` lines, of which ``P2``, ``R0_rect`` and
  ``Tr_velo_to_cam`` are used.

Labels are camera-frame on disk and LiDAR-frame in memory. On disk the
location is the bottom-face center in rectified camera coordinates; in
memory `~lidar.robustness.geometry.Box3D` holds the geometric center,
which is the transformed bottom center lifted by half the height along
LiDAR +z.
"""
import logging
import math
import pathlib
from typing import NamedTuple

import numpy as np

from lidar.robustness.exceptions import FormatError
from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.geometry import Box3D
from lidar.robustness.geometry import PointCloud
from lidar.robustness.geometry import normalize_angle


__all__ = [
    'CalibrationMatrices',
    'LabelRecord',
    'Labels',
    'read_point_cloud',
    'write_point_cloud',
    'read_calibration',
    'read_labels',
    'write_labels',
    'read_detections',
    'list_frames',
]

logger = logging.getLogger(__name__)

POINT_DTYPE = np.dtype('<f4')
BYTES_PER_POINT = 16
DONT_CARE = 'DontCare'


def _io_error(exc, action, path):
    return type(exc)(exc.errno, f"{action}: {exc.strerror}", str(path))


def read_point_cloud(path, stats=None):
    """
    Read a velodyne binary into a `PointCloud` whose frame id is the file
    stem.

    Reflectance outside ``[0, 1]`` is clamped; the number of clamped
    values is logged and counted under ``stats['reflectance_clamped']``.
    """
    path = pathlib.Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise _io_error(e, "cannot read point cloud", path) from e
    remainder = len(data) % BYTES_PER_POINT
    if remainder:
        raise FormatError(
            f"file length {len(data)} is not a multiple of"
            f" {BYTES_PER_POINT}", path, offset=len(data) - remainder)
    points = np.frombuffer(data, dtype=POINT_DTYPE).reshape(-1, 4)
    points = points.astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(points).all(axis=1))
    if len(bad):
        raise FormatError(
            f"{len(bad)} points have non-finite values", path,
            offset=int(bad[0]) * BYTES_PER_POINT)
    refl = points[:, 3]
    outside = (refl < 0.0) | (refl > 1.0)
    n_outside = int(np.count_nonzero(outside))
    if n_outside:
        np.clip(refl, 0.0, 1.0, out=refl)
        logger.warning("%s: clamped %d reflectance values into [0, 1]",
                       path, n_outside)
        if stats is not None:
            stats['reflectance_clamped'] += n_outside
    return PointCloud._wrap(points, path.stem)


def write_point_cloud(cloud, path):
    path = pathlib.Path(path)
    data = np.ascontiguousarray(cloud.points, dtype=POINT_DTYPE).tobytes()
    try:
        path.write_bytes(data)
    except OSError as e:
        raise _io_error(e, "cannot write point cloud", path) from e


class CalibrationMatrices:
    """
    The three KITTI calibration matrices used here.

    *velo_to_cam* is 3x4, *rect* is 3x3 (``R0_rect``) and *cam_to_image*
    is the 3x4 ``P2`` projection.
    """

    ORTHONORMAL_TOLERANCE = 1e-3

    def __init__(self, velo_to_cam, rect=None, cam_to_image=None):
        self.velo_to_cam = np.asarray(velo_to_cam, dtype=np.float64) \
            .reshape(3, 4)
        self.rect = (np.eye(3) if rect is None
                     else np.asarray(rect, dtype=np.float64).reshape(3, 3))
        self.cam_to_image = (
            np.zeros((3, 4)) if cam_to_image is None
            else np.asarray(cam_to_image, dtype=np.float64).reshape(3, 4))
        rot = self.velo_to_cam[:, :3]
        if not np.allclose(rot @ rot.T, np.eye(3),
                           atol=self.ORTHONORMAL_TOLERANCE):
            raise InvalidArgument(
                "velo_to_cam rotation block is not orthonormal")
        forward = np.eye(4)
        forward[:3, :] = self.rect @ self.velo_to_cam
        self._velo_to_rect = forward
        self._rect_to_velo = np.linalg.inv(forward)

    def velo_to_rect(self, xyz):
        xyz = np.atleast_2d(np.asarray(xyz, dtype=np.float64))
        return xyz @ self._velo_to_rect[:3, :3].T + self._velo_to_rect[:3, 3]

    def rect_to_velo(self, xyz):
        xyz = np.atleast_2d(np.asarray(xyz, dtype=np.float64))
        return xyz @ self._rect_to_velo[:3, :3].T + self._rect_to_velo[:3, 3]

    def yaw_from_rotation_y(self, rotation_y):
        # The object's heading axis in camera coordinates is
        # (cos ry, 0, -sin ry).
        heading = np.array((math.cos(rotation_y), 0.0, -math.sin(rotation_y)))
        lidar = self._rect_to_velo[:3, :3] @ heading
        return math.atan2(lidar[1], lidar[0])

    def rotation_y_from_yaw(self, yaw):
        heading = np.array((math.cos(yaw), math.sin(yaw), 0.0))
        cam = self._velo_to_rect[:3, :3] @ heading
        return math.atan2(-cam[2], cam[0])


_CALIB_KEYS = {
    'Tr_velo_to_cam': 'velo_to_cam',
    'Tr_velo_cam': 'velo_to_cam',
    'R0_rect': 'rect',
    'R_rect': 'rect',
    'P2': 'cam_to_image',
}

_CALIB_SIZES = {'velo_to_cam': 12, 'rect': 9, 'cam_to_image': 12}


def read_calibration(path):
    path = pathlib.Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise _io_error(e, "cannot read calibration", path) from e
    found = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        key, sep, values = line.partition(':')
        if not sep:
            raise FormatError("expected 'key: values'", path, line=lineno)
        name = _CALIB_KEYS.get(key.strip())
        if name is None:
            continue
        try:
            numbers = [float(v) for v in values.split()]
        except ValueError as e:
            raise FormatError(str(e), path, line=lineno) from e
        if len(numbers) != _CALIB_SIZES[name]:
            raise FormatError(
                f"{key.strip()} needs {_CALIB_SIZES[name]} values,"
                f" found {len(numbers)}", path, line=lineno)
        found[name] = numbers
    if 'velo_to_cam' not in found:
        raise FormatError("missing Tr_velo_to_cam", path)
    return CalibrationMatrices(**found)


class LabelRecord(NamedTuple):
    """One line of a KITTI label or detection file, camera frame."""
    type: str
    truncated: float
    occluded: int
    alpha: float
    bbox: tuple
    dimensions: tuple   # h, w, l
    location: tuple     # bottom center x, y, z
    rotation_y: float
    score: float | None = None

    @classmethod
    def parse(cls, line, path='<string>', lineno=None):
        fields = line.split()
        if len(fields) not in (15, 16):
            raise FormatError(
                f"expected 15 or 16 fields, found {len(fields)}",
                path, line=lineno)
        try:
            values = [float(v) for v in fields[1:]]
        except ValueError as e:
            raise FormatError(str(e), path, line=lineno) from e
        return cls(
            type=fields[0],
            truncated=values[0],
            occluded=int(values[1]),
            alpha=values[2],
            bbox=tuple(values[3:7]),
            dimensions=tuple(values[7:10]),
            location=tuple(values[10:13]),
            rotation_y=values[13],
            score=values[14] if len(values) == 15 else None,
        )

    def format(self):
        parts = [self.type,
                 _fmt(self.truncated),
                 str(int(self.occluded)),
                 _fmt(self.alpha)]
        parts.extend(_fmt(v) for v in self.bbox)
        parts.extend(_fmt(v) for v in self.dimensions)
        parts.extend(_fmt(v) for v in self.location)
        parts.append(_fmt(self.rotation_y))
        if self.score is not None:
            parts.append(_fmt(self.score))
        return ' '.join(parts)


def _fmt(value):
    text = f'{value:.8f}'.rstrip('0')
    return text + '0' if text.endswith('.') else text


class Labels(NamedTuple):
    boxes: list
    dont_care: list


def _record_to_box(record, calib, lidar_frame):
    h, w, length = record.dimensions
    if lidar_frame:
        cx, cy, cz = record.location
        yaw = record.rotation_y
    else:
        bottom = calib.rect_to_velo(record.location)[0]
        cx, cy, cz = bottom[0], bottom[1], bottom[2] + h / 2.0
        yaw = calib.yaw_from_rotation_y(record.rotation_y)
    return Box3D(
        cx, cy, cz, length, w, h, yaw,
        class_label=record.type,
        score=record.score,
        truncation=None if record.truncated < 0 else record.truncated,
        occlusion=None if record.occluded < 0 else record.occluded,
        image_bbox=record.bbox,
        alpha=record.alpha,
    )


def _box_to_record(box, calib, lidar_frame):
    if lidar_frame:
        location = (box.cx, box.cy, box.cz)
        rotation_y = box.yaw
    else:
        bottom = calib.velo_to_rect((box.cx, box.cy, box.bottom))[0]
        location = tuple(bottom.tolist())
        rotation_y = normalize_angle(calib.rotation_y_from_yaw(box.yaw))
    if box.alpha is not None:
        alpha = box.alpha
    elif lidar_frame:
        alpha = normalize_angle(rotation_y - math.atan2(box.cy, box.cx))
    else:
        alpha = normalize_angle(
            rotation_y - math.atan2(location[0], location[2]))
    return LabelRecord(
        type=box.class_label,
        truncated=-1.0 if box.truncation is None else box.truncation,
        occluded=-1 if box.occlusion is None else box.occlusion,
        alpha=alpha,
        bbox=box.image_bbox or (0.0, 0.0, 0.0, 0.0),
        dimensions=(box.height, box.width, box.length),
        location=location,
        rotation_y=rotation_y,
        score=box.score,
    )


def _check_calib(calib, lidar_frame):
    if calib is None and not lidar_frame:
        raise InvalidArgument(
            "camera-frame labels need calibration (or lidar_frame=True)")


def _read_records(path):
    path = pathlib.Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise _io_error(e, "cannot read labels", path) from e
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip():
            records.append((lineno, LabelRecord.parse(line, path, lineno)))
    return records


def read_labels(path, calib=None, lidar_frame=False):
    """
    Read a label file into LiDAR-frame boxes.

    Returns ``Labels(boxes, dont_care)``; ``DontCare`` records are kept
    as raw `LabelRecord` instances so they can be written back verbatim.
    """
    _check_calib(calib, lidar_frame)
    boxes, ignored = [], []
    for _, record in _read_records(path):
        if record.type == DONT_CARE:
            ignored.append(record)
        else:
            boxes.append(_record_to_box(record, calib, lidar_frame))
    return Labels(boxes, ignored)


def read_detections(path, calib=None, lidar_frame=False):
    """Read a detection file; every line must carry a score."""
    _check_calib(calib, lidar_frame)
    path = pathlib.Path(path)
    boxes = []
    for lineno, record in _read_records(path):
        if record.score is None:
            raise FormatError("detection line has no score", path,
                              line=lineno)
        if record.type != DONT_CARE:
            boxes.append(_record_to_box(record, calib, lidar_frame))
    return boxes


def write_labels(boxes, calib, path, lidar_frame=False, dont_care=()):
    """Write *boxes* (and *dont_care* records, verbatim) to *path*."""
    _check_calib(calib, lidar_frame)
    path = pathlib.Path(path)
    lines = [_box_to_record(box, calib, lidar_frame).format()
             for box in boxes]
    lines.extend(record.format() for record in dont_care)
    text = ''.join(line + '\n' for line in lines)
    try:
        path.write_text(text)
    except OSError as e:
        raise _io_error(e, "cannot write labels", path) from e


def list_frames(directory, suffix):
    """Sorted frame ids of the files in *directory* ending in *suffix*."""
    directory = pathlib.Path(directory)
    if not directory.is_dir():
        return []
    return sorted(p.name[:-len(suffix)] for p in directory.iterdir()
                  if p.name.endswith(suffix))
