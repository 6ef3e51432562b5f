import math
import os
import shutil
import tempfile

import numpy as np


# KITTI-style extrinsics: LiDAR x forward, y left, z up; camera x right,
# y down, z forward.
VELO_TO_CAM = (0.0, -1.0, 0.0, 0.0,
               0.0, 0.0, -1.0, 0.0,
               1.0, 0.0, 0.0, 0.0)
RECT = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)
P2 = (721.5377, 0.0, 609.5593, 44.85728,
      0.0, 721.5377, 172.854, 0.2163791,
      0.0, 0.0, 1.0, 0.002745884)

CALIB_TEXT = (
    'P2: ' + ' '.join(str(v) for v in P2) + '\n'
    'R0_rect: ' + ' '.join(str(v) for v in RECT) + '\n'
    'Tr_velo_to_cam: ' + ' '.join(str(v) for v in VELO_TO_CAM) + '\n'
)

# Two cars on the ground ahead of the sensor, camera frame.
LABEL_TEXT = (
    'Car 0.00 0 -1.57 600.00 150.00 700.00 250.00'
    ' 1.50 1.60 3.90 0.00 1.73 10.00 -1.57\n'
    'Car 0.00 0 -1.20 300.00 160.00 380.00 220.00'
    ' 1.50 1.60 3.90 -5.00 1.73 20.00 -1.20\n'
    'DontCare -1 -1 -10 500.00 180.00 520.00 190.00'
    ' -1 -1 -1 -1000 -1000 -1000 -10\n'
)


def make_cloud(points, frame_id='000000'):
    from lidar.robustness.geometry import PointCloud
    return PointCloud(points, frame_id)


def random_cloud(n, seed=0, extent=20.0, frame_id='000000'):
    """*n* points uniform in a ``2 * extent`` cube, reflectance in [0, 1].
    """
    rng = np.random.default_rng(seed)
    xyz = rng.uniform(-extent, extent, (n, 3))
    refl = rng.uniform(0.0, 1.0, (n, 1))
    return make_cloud(np.hstack((xyz, refl)), frame_id)


def ring_cloud(n=200, radius=10.0, z=0.0):
    """Equally spaced points on a circle; every point sees the same
    neighborhood.
    """
    angles = np.arange(n) * (2.0 * math.pi / n)
    return make_cloud(np.column_stack((radius * np.cos(angles),
                                       radius * np.sin(angles),
                                       np.full(n, z), np.full(n, 0.5))))


def box_points(box, n, seed=0, fill=0.9):
    """*n* points uniform inside *box* (shrunk by *fill*), LiDAR frame."""
    rng = np.random.default_rng(seed)
    half = box.dimensions / 2.0 * fill
    local = rng.uniform(-half, half, (n, 3))
    xyz = box.from_local(local)
    return np.column_stack((xyz, rng.uniform(0.0, 1.0, n)))


def scene_with_objects(n_background=2000, n_object=400, seed=0):
    """A cloud with two cars and background points outside both boxes.
    """
    from lidar.robustness.geometry import Box3D
    boxes = [
        Box3D(10.0, 0.0, -0.98, 3.9, 1.6, 1.5, 0.0, 'Car',
              truncation=0.0, occlusion=0, image_bbox=(0, 0, 10, 60)),
        Box3D(20.0, 5.0, -0.98, 3.9, 1.6, 1.5, 0.5, 'Car',
              truncation=0.0, occlusion=0, image_bbox=(0, 0, 10, 60)),
    ]
    rng = np.random.default_rng(seed)
    background = rng.uniform((-40.0, -40.0, -2.0), (40.0, 40.0, 2.0),
                             (n_background * 2, 3))
    outside = np.ones(len(background), dtype=bool)
    for box in boxes:
        outside &= ~box.contains(background, 0.5)
    background = background[outside][:n_background]
    background = np.column_stack(
        (background, rng.uniform(0.0, 1.0, len(background))))
    members = [box_points(box, n_object, seed + i)
               for i, box in enumerate(boxes)]
    return make_cloud(np.vstack([background] + members)), boxes


class TempDirMixin:

    def _makeTempDir(self):
        path = tempfile.mkdtemp(prefix='lidar-robustness-')
        self.addCleanup(shutil.rmtree, path, True)
        return path


def write_dataset(root, frames=('000000', '000001'), n=3000, seed=0):
    """
    Lay out a small KITTI split under *root*: ``velodyne``, ``label_2``
    and ``calib`` with one entry per frame.
    """
    from lidar.robustness.kitti import read_calibration
    from lidar.robustness.kitti import read_labels
    from lidar.robustness.kitti import write_point_cloud
    for sub in ('velodyne', 'label_2', 'calib'):
        os.makedirs(os.path.join(root, sub), exist_ok=True)
    for i, frame in enumerate(frames):
        calib_path = os.path.join(root, 'calib', frame + '.txt')
        label_path = os.path.join(root, 'label_2', frame + '.txt')
        with open(calib_path, 'w') as f:
            f.write(CALIB_TEXT)
        with open(label_path, 'w') as f:
            f.write(LABEL_TEXT)
        boxes = read_labels(label_path, read_calibration(calib_path)).boxes
        rng = np.random.default_rng(seed + i)
        background = rng.uniform((-30.0, -30.0, -2.0), (30.0, 30.0, 2.0),
                                 (n, 3))
        members = [box_points(box, 300, seed + 10 * i + j)
                   for j, box in enumerate(boxes)]
        # float32-representable values so files round-trip exactly
        points = np.vstack(
            [np.column_stack((background, rng.uniform(0.0, 1.0, n)))]
            + members).astype(np.float32).astype(np.float64)
        write_point_cloud(make_cloud(points, frame),
                          os.path.join(root, 'velodyne', frame + '.bin'))
    return list(frames)


# Tests that swap utilities in the corruption registry subclass
# ``CleanUp`` so the defaults come back afterwards.
try:
    from zope.testing import cleanup
except ImportError:  # pragma: no cover

    class CleanUp:
        def cleanUp(self):
            from lidar.robustness.catalog import _reset
            _reset()

        setUp = tearDown = cleanUp
else:
    CleanUp = cleanup.CleanUp
