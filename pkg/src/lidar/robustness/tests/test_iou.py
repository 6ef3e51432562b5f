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
""" lidar.robustness.iou unit tests
"""
import math
import unittest

import numpy as np


def _box(*args, **kw):
    from lidar.robustness.geometry import Box3D
    return Box3D(*args, **kw)


def _random_box(rng):
    return _box(*rng.uniform(-1, 1, 3), *rng.uniform(0.5, 3.0, 3),
                rng.uniform(-math.pi, math.pi))


def _monte_carlo(a, b, rng, n=200000):
    corners = np.vstack((a.corners_bev(), b.corners_bev()))
    lo = np.append(corners.min(axis=0), min(a.bottom, b.bottom))
    hi = np.append(corners.max(axis=0),
                   max(a.cz + a.height / 2, b.cz + b.height / 2))
    samples = rng.uniform(lo, hi, (n, 3))
    in_a, in_b = a.contains(samples, 0.0), b.contains(samples, 0.0)
    union = np.count_nonzero(in_a | in_b)
    return np.count_nonzero(in_a & in_b) / union if union else 0.0


class Iou3dTests(unittest.TestCase):

    def _callFUT(self, a, b):
        from lidar.robustness.iou import iou3d
        return iou3d(a, b)

    def test_identical(self):
        box = _box(1, 2, 3, 4, 2, 1.5, 0.7)
        self.assertEqual(self._callFUT(box, box), 1.0)
        self.assertEqual(self._callFUT(box, box.replace(score=0.3)), 1.0)

    def test_offset_unit_cubes(self):
        a = _box(0, 0, 0, 1, 1, 1, 0)
        b = _box(0.5, 0, 0, 1, 1, 1, 0)
        self.assertAlmostEqual(self._callFUT(a, b), 1 / 3, places=12)

    def test_disjoint(self):
        a = _box(0, 0, 0, 1, 1, 1, 0)
        self.assertEqual(self._callFUT(a, _box(5, 0, 0, 1, 1, 1, 0)), 0.0)
        self.assertEqual(self._callFUT(a, _box(0, 0, 2, 1, 1, 1, 0)), 0.0)

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, b = _random_box(rng), _random_box(rng)
            self.assertEqual(self._callFUT(a, b), self._callFUT(b, a))

    def test_rigid_motion_invariant(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b = _random_box(rng), _random_box(rng)
            angle = rng.uniform(-math.pi, math.pi)
            shift = rng.uniform(-20, 20, 3)
            c, s = math.cos(angle), math.sin(angle)

            def move(box):
                x = c * box.cx - s * box.cy + shift[0]
                y = s * box.cx + c * box.cy + shift[1]
                return box.replace(cx=x, cy=y, cz=box.cz + shift[2],
                                   yaw=box.yaw + angle)

            self.assertAlmostEqual(self._callFUT(move(a), move(b)),
                                   self._callFUT(a, b), places=9)

    def test_rotated_square(self):
        # a unit square and the same square turned 45 degrees
        a = _box(0, 0, 0, 1, 1, 1, 0)
        b = _box(0, 0, 0, 1, 1, 1, math.pi / 4)
        inter = 2 * (math.sqrt(2) - 1)
        self.assertAlmostEqual(self._callFUT(a, b), inter / (2 - inter))

    def test_monte_carlo(self):
        rng = np.random.default_rng(2)
        checked = 0
        while checked < 20:
            a = _random_box(rng)
            b = _random_box(rng)
            expected = self._callFUT(a, b)
            if expected == 0.0:
                continue
            checked += 1
            self.assertAlmostEqual(_monte_carlo(a, b, rng), expected,
                                   delta=0.01)

    def test_range(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            value = self._callFUT(_random_box(rng), _random_box(rng))
            self.assertTrue(0.0 <= value <= 1.0)


class IouMatrixTests(unittest.TestCase):

    def test_matches_pairwise(self):
        from lidar.robustness.iou import iou3d
        from lidar.robustness.iou import iou_matrix
        rng = np.random.default_rng(4)
        dets = [_random_box(rng) for _ in range(4)]
        gts = [_random_box(rng) for _ in range(3)] + [dets[0]]
        matrix = iou_matrix(dets, gts)
        self.assertEqual(matrix.shape, (4, 4))
        for i, d in enumerate(dets):
            for j, g in enumerate(gts):
                self.assertEqual(matrix[i, j], iou3d(d, g))
        self.assertEqual(matrix[0, 3], 1.0)

    def test_empty(self):
        from lidar.robustness.iou import iou_matrix
        self.assertEqual(iou_matrix([], [_box(0, 0, 0, 1, 1, 1, 0)]).shape,
                         (0, 1))
