import numpy as np
import pyperf

from lidar.robustness.catalog import KINDS
from lidar.robustness.catalog import apply_corruption
from lidar.robustness.denoise import knn_outlier_removal
from lidar.robustness.geometry import Box3D
from lidar.robustness.geometry import PointCloud
from lidar.robustness.iou import iou_matrix
from lidar.robustness.spatial import KnnIndex
from lidar.robustness.stream import RandomStream


# Roughly one KITTI frame: 120k points, a handful of cars.
N_POINTS = 120000
INNER = 1

rng = np.random.default_rng(0)
boxes = [
    Box3D(8.0 + 6.0 * i, rng.uniform(-10, 10), -0.98, 3.9, 1.6, 1.5,
          rng.uniform(-np.pi, np.pi), 'Car')
    for i in range(8)
]
cloud = PointCloud(np.column_stack((
    rng.uniform((-60.0, -60.0, -2.0), (60.0, 60.0, 2.0), (N_POINTS, 3)),
    rng.uniform(0.0, 1.0, N_POINTS))), '000000')
detections = [b.replace(cx=b.cx + 0.3, score=0.5) for b in boxes] * 4


def bench_corruption(loops, name, severity):
    t0 = pyperf.perf_counter()
    for i in range(loops):
        apply_corruption(name, cloud, boxes, severity, RandomStream(i))
    return pyperf.perf_counter() - t0


def bench_knn_build(loops):
    t0 = pyperf.perf_counter()
    for _ in range(loops):
        KnnIndex(cloud.xyz)
    return pyperf.perf_counter() - t0


def bench_denoise(loops, k):
    t0 = pyperf.perf_counter()
    for _ in range(loops):
        knn_outlier_removal(cloud, k)
    return pyperf.perf_counter() - t0


def bench_iou_matrix(loops):
    t0 = pyperf.perf_counter()
    for _ in range(loops):
        iou_matrix(detections, boxes)
    return pyperf.perf_counter() - t0


runner = pyperf.Runner()

for name in KINDS:
    runner.bench_time_func(
        f'corrupt {name}@3',
        bench_corruption,
        name, 3,
        inner_loops=INNER
    )

runner.bench_time_func(
    'kd-tree build',
    bench_knn_build,
    inner_loops=INNER
)

runner.bench_time_func(
    'denoise k=50',
    bench_denoise,
    50,
    inner_loops=INNER
)

runner.bench_time_func(
    'iou matrix 32x8',
    bench_iou_matrix,
    inner_loops=INNER
)
