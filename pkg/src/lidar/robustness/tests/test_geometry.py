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
""" lidar.robustness.geometry unit tests
"""
import math
import unittest

import numpy as np


class NormalizeAngleTests(unittest.TestCase):

    def _callFUT(self, angle):
        from lidar.robustness.geometry import normalize_angle
        return normalize_angle(angle)

    def test_in_range_unchanged(self):
        self.assertEqual(self._callFUT(0.5), 0.5)

    def test_minus_pi_maps_to_pi(self):
        self.assertEqual(self._callFUT(-math.pi), math.pi)

    def test_wraps(self):
        self.assertAlmostEqual(self._callFUT(3 * math.pi / 2), -math.pi / 2)
        self.assertAlmostEqual(self._callFUT(-5 * math.pi / 2), -math.pi / 2)

    def test_vectorized_agrees(self):
        from lidar.robustness.geometry import normalize_angles
        angles = np.array((-math.pi, 0.0, 4.0, -7.0, math.pi))
        expected = [self._callFUT(a) for a in angles]
        np.testing.assert_allclose(normalize_angles(angles), expected,
                                   atol=1e-12)
        self.assertTrue(np.all(normalize_angles(angles) > -math.pi))


class SphericalTests(unittest.TestCase):

    def test_round_trip_point(self):
        from lidar.robustness.geometry import Point
        from lidar.robustness.geometry import to_cartesian
        from lidar.robustness.geometry import to_spherical
        p = Point(3.0, -4.0, 1.5, 0.25)
        s = to_spherical(p)
        self.assertAlmostEqual(s.r, math.sqrt(9 + 16 + 2.25))
        self.assertEqual(s.reflectance, 0.25)
        back = to_cartesian(s)
        for a, b in zip(back, p):
            self.assertAlmostEqual(a, b)

    def test_azimuth_half_open(self):
        from lidar.robustness.geometry import Point
        from lidar.robustness.geometry import to_spherical
        s = to_spherical(Point(-1.0, -0.0, 0.0))
        self.assertEqual(s.phi, math.pi)

    def test_origin(self):
        from lidar.robustness.geometry import Point
        from lidar.robustness.geometry import to_spherical
        s = to_spherical(Point(0.0, 0.0, 0.0))
        self.assertEqual((s.r, s.theta), (0.0, 0.0))

    def test_array_round_trip(self):
        from lidar.robustness.geometry import cartesian_to_spherical
        from lidar.robustness.geometry import spherical_to_cartesian
        xyz = np.random.default_rng(3).uniform(-50, 50, (100, 3))
        rtp = cartesian_to_spherical(xyz)
        self.assertTrue(np.all(rtp[:, 0] >= 0))
        self.assertTrue(np.all((rtp[:, 1] >= 0) & (rtp[:, 1] <= math.pi)))
        np.testing.assert_allclose(spherical_to_cartesian(rtp), xyz,
                                   atol=1e-9)


class SeverityTests(unittest.TestCase):

    def _makeOne(self, level):
        from lidar.robustness.geometry import Severity
        return Severity(level)

    def test_valid(self):
        for level in range(6):
            sev = self._makeOne(level)
            self.assertEqual(sev.level, level)
            self.assertEqual(sev, level)
        self.assertEqual(repr(self._makeOne(3)), 'Severity(3)')

    def test_out_of_range(self):
        from lidar.robustness.exceptions import InvalidArgument
        for level in (-1, 6, 2.5, True):
            self.assertRaises(InvalidArgument, self._makeOne, level)

    def test_severities(self):
        from lidar.robustness.geometry import SEVERITIES
        self.assertEqual(SEVERITIES, (0, 1, 2, 3, 4, 5))


class PointCloudTests(unittest.TestCase):

    def _getTargetClass(self):
        from lidar.robustness.geometry import PointCloud
        return PointCloud

    def _makeOne(self, points=(), frame_id='000001'):
        return self._getTargetClass()(points, frame_id)

    def _points(self, n=5):
        return np.column_stack((np.arange(n, dtype=float),
                                np.zeros(n), np.ones(n),
                                np.linspace(0, 1, n)))

    def test_class_conforms_to_IPointCloud(self):
        from zope.interface.verify import verifyClass

        from lidar.robustness.interfaces import IPointCloud
        verifyClass(IPointCloud, self._getTargetClass())

    def test_instance_conforms_to_IPointCloud(self):
        from zope.interface.verify import verifyObject

        from lidar.robustness.interfaces import IPointCloud
        cloud = self._makeOne(self._points())
        verifyObject(IPointCloud, cloud)
        IPointCloud.validateInvariants(cloud)

    def test_invariant_reflectance(self):
        from zope.interface.exceptions import Invalid

        from lidar.robustness.interfaces import IPointCloud
        points = self._points()
        points[0, 3] = 1.5
        self.assertRaises(Invalid, IPointCloud.validateInvariants,
                          self._makeOne(points))

    def test_empty(self):
        cloud = self._makeOne()
        self.assertEqual(len(cloud), 0)
        self.assertEqual(cloud.points.shape, (0, 4))

    def test_bad_shape(self):
        from lidar.robustness.exceptions import InvalidArgument
        self.assertRaises(InvalidArgument, self._makeOne, np.zeros((3, 3)))

    def test_copies_and_read_only(self):
        points = self._points()
        cloud = self._makeOne(points)
        points[0, 0] = 99.0
        self.assertEqual(cloud.points[0, 0], 0.0)
        self.assertFalse(cloud.points.flags.writeable)
        with self.assertRaises(ValueError):
            cloud.points[0, 0] = 1.0

    def test_iter_yields_points(self):
        from lidar.robustness.geometry import Point
        cloud = self._makeOne(self._points(2))
        self.assertEqual(list(cloud), [Point(0.0, 0.0, 1.0, 0.0),
                                       Point(1.0, 0.0, 1.0, 1.0)])

    def test_eq_hash(self):
        a = self._makeOne(self._points())
        b = self._makeOne(self._points())
        self.assertEqual(a, b)
        self.assertEqual(hash(a), hash(b))
        self.assertNotEqual(a, self._makeOne(self._points(), 'other'))
        self.assertNotEqual(a, self._makeOne(self._points(4)))

    def test_delete_keeps_order(self):
        cloud = self._makeOne(self._points())
        out = cloud.delete([1, 3])
        self.assertEqual(out.xyz[:, 0].tolist(), [0.0, 2.0, 4.0])
        self.assertEqual(out.frame_id, '000001')
        self.assertEqual(len(cloud), 5)

    def test_take_and_append(self):
        cloud = self._makeOne(self._points())
        self.assertEqual(cloud.take([4, 0]).xyz[:, 0].tolist(), [4.0, 0.0])
        out = cloud.append([[9.0, 9.0, 9.0, 0.5]])
        self.assertEqual(len(out), 6)
        np.testing.assert_array_equal(out.points[:5], cloud.points)
        self.assertEqual(out.points[5].tolist(), [9.0, 9.0, 9.0, 0.5])

    def test_bounds(self):
        cloud = self._makeOne(self._points())
        lo, hi = cloud.bounds()
        self.assertEqual(lo.tolist(), [0.0, 0.0, 1.0])
        self.assertEqual(hi.tolist(), [4.0, 0.0, 1.0])

    def test_bounds_empty(self):
        from lidar.robustness.exceptions import InvalidArgument
        self.assertRaises(InvalidArgument, self._makeOne().bounds)


class Box3DTests(unittest.TestCase):

    def _getTargetClass(self):
        from lidar.robustness.geometry import Box3D
        return Box3D

    def _makeOne(self, *args, **kw):
        return self._getTargetClass()(*args, **kw)

    def test_conforms_to_IBox3D(self):
        from zope.interface.verify import verifyObject

        from lidar.robustness.interfaces import IBox3D
        box = self._makeOne(0, 0, 0, 4, 2, 1.5, 0.3)
        verifyObject(IBox3D, box)
        IBox3D.validateInvariants(box)

    def test_non_positive_dimensions(self):
        from lidar.robustness.exceptions import InvalidArgument
        self.assertRaises(InvalidArgument, self._makeOne, 0, 0, 0, 0, 1, 1, 0)
        self.assertRaises(InvalidArgument, self._makeOne,
                          0, 0, 0, 1, 1, -1, 0)

    def test_non_finite(self):
        from lidar.robustness.exceptions import InvalidArgument
        self.assertRaises(InvalidArgument, self._makeOne,
                          math.nan, 0, 0, 1, 1, 1, 0)

    def test_yaw_normalized(self):
        box = self._makeOne(0, 0, 0, 1, 1, 1, -math.pi)
        self.assertEqual(box.yaw, math.pi)
        box = self._makeOne(0, 0, 0, 1, 1, 1, 2 * math.pi + 0.1)
        self.assertAlmostEqual(box.yaw, 0.1)

    def test_derived(self):
        box = self._makeOne(1, 2, 3, 4, 2, 1.5, 0.0,
                            image_bbox=(10, 20, 30, 60))
        self.assertEqual(box.volume, 12.0)
        self.assertEqual(box.bottom, 2.25)
        self.assertEqual(box.image_bbox_height, 40.0)
        self.assertIsNone(self._makeOne(0, 0, 0, 1, 1, 1, 0)
                          .image_bbox_height)

    def test_replace(self):
        box = self._makeOne(0, 0, 0, 4, 2, 1.5, 0.0, 'Car', score=0.9)
        moved = box.replace(cx=5.0)
        self.assertEqual(moved.cx, 5.0)
        self.assertEqual(moved.score, 0.9)
        self.assertEqual(box.cx, 0.0)

    def test_local_round_trip(self):
        box = self._makeOne(5, -3, 1, 4, 2, 1.5, 0.7)
        xyz = np.random.default_rng(0).uniform(-10, 10, (20, 3))
        np.testing.assert_allclose(box.from_local(box.to_local(xyz)), xyz,
                                   atol=1e-12)

    def test_to_local_axes(self):
        box = self._makeOne(1, 1, 0, 4, 2, 1.5, math.pi / 2)
        # one meter along the heading is +y in the LiDAR frame
        local = box.to_local([[1.0, 2.0, 0.0]])
        np.testing.assert_allclose(local, [[1.0, 0.0, 0.0]], atol=1e-12)

    def test_corners_ccw(self):
        box = self._makeOne(0, 0, 0, 4, 2, 1.5, 0.3)
        corners = box.corners_bev()
        x, y = corners[:, 0], corners[:, 1]
        area = 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        self.assertAlmostEqual(area, 8.0)

    def test_contains(self):
        box = self._makeOne(0, 0, 0, 4, 2, 2, math.pi / 2)
        mask = box.contains([[0.0, 1.9, 0.0], [1.9, 0.0, 0.0],
                             [0.0, 0.0, 1.0], [0.0, 0.0, 1.1]])
        self.assertEqual(mask.tolist(), [True, False, True, False])
