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
""" lidar.robustness.fitting unit tests
"""
import collections
import unittest

import numpy as np


class DensifyTests(unittest.TestCase):

    def _callFUT(self, neighbors, count, degree=None, stats=None, seed=0):
        from lidar.robustness.fitting import QUADRATIC
        from lidar.robustness.fitting import densify
        from lidar.robustness.stream import RandomStream
        return densify(neighbors, count, RandomStream(seed),
                       QUADRATIC if degree is None else degree, stats)

    def _surface(self, f, n=10):
        u = np.linspace(-1.0, 1.0, n)
        x, y = (a.ravel() for a in np.meshgrid(u, u))
        refl = np.linspace(0.0, 1.0, len(x))
        return np.column_stack((x, y, f(x, y), refl))

    def test_quadratic_exact(self):
        neighbors = self._surface(lambda x, y: x * x + y * y)
        new = self._callFUT(neighbors, 50)
        self.assertEqual(new.shape, (50, 4))
        np.testing.assert_allclose(new[:, 2], new[:, 0] ** 2 + new[:, 1] ** 2,
                                   atol=1e-6)

    def test_plane_exact(self):
        from lidar.robustness.fitting import PLANE
        neighbors = self._surface(lambda x, y: 2 * x - y + 1)
        new = self._callFUT(neighbors, 30, PLANE)
        np.testing.assert_allclose(new[:, 2], 2 * new[:, 0] - new[:, 1] + 1,
                                   atol=1e-6)

    def test_samples_in_footprint(self):
        neighbors = self._surface(lambda x, y: 0 * x)
        new = self._callFUT(neighbors, 200)
        self.assertTrue(np.all(np.abs(new[:, :2]) <= 1.0))

    def test_reflectance_from_nearest(self):
        neighbors = self._surface(lambda x, y: 0 * x)
        new = self._callFUT(neighbors, 20)
        self.assertTrue(set(new[:, 3].tolist()) <= set(neighbors[:, 3]))

    def test_plane_fallback(self):
        stats = collections.Counter()
        neighbors = np.array(((0, 0, 1, 0.1), (1, 0, 3, 0.2), (0, 1, 0, 0.3),
                              (1, 1, 2, 0.4), (0.5, 0.2, 1.8, 0.5)))
        # five points cannot pin six quadratic coefficients
        new = self._callFUT(neighbors, 10, stats=stats)
        self.assertEqual(stats['fit_plane_fallback'], 1)
        self.assertEqual(stats['fit_jitter_fallback'], 0)
        np.testing.assert_allclose(new[:, 2], 1 + 2 * new[:, 0] - new[:, 1],
                                   atol=1e-6)

    def test_collinear_jitter_fallback(self):
        stats = collections.Counter()
        t = np.linspace(0.0, 1.0, 20)
        neighbors = np.column_stack((t, 2 * t, t, np.full(20, 0.5)))
        new = self._callFUT(neighbors, 40, stats=stats)
        self.assertEqual(stats['fit_plane_fallback'], 1)
        self.assertEqual(stats['fit_jitter_fallback'], 1)
        source = neighbors[np.arange(40) % 20]
        self.assertTrue(np.all(np.abs(new[:, :3] - source[:, :3]) <= 0.01))

    def test_nothing_requested(self):
        self.assertEqual(self._callFUT(np.ones((5, 4)), 0).shape, (0, 4))
        self.assertEqual(self._callFUT(np.empty((0, 4)), 5).shape, (0, 4))
