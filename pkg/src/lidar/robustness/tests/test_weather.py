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
""" lidar.robustness.weather unit tests
"""
import collections
import math
import unittest

import numpy as np

from lidar.robustness.tests import make_cloud


def _stream(seed=0):
    from lidar.robustness.stream import RandomStream
    return RandomStream(seed)


def _cloud(n=3000, reflectance=None, seed=0, r_min=5.0, r_max=50.0):
    from lidar.robustness.geometry import spherical_to_cartesian
    rng = np.random.default_rng(seed)
    rtp = np.column_stack((rng.uniform(r_min, r_max, n),
                           rng.uniform(1.3, 1.8, n),
                           rng.uniform(-math.pi, math.pi, n)))
    refl = (rng.uniform(0.0, 1.0, n) if reflectance is None
            else np.full(n, reflectance))
    return make_cloud(np.column_stack((spherical_to_cartesian(rtp), refl)))


class WeatherConfigTests(unittest.TestCase):

    def test_defaults(self):
        from lidar.robustness.weather import WeatherConfig
        config = WeatherConfig()
        self.assertEqual(config.min_detectable_intensity, 0.002)
        self.assertEqual(config.beta, 5.0)
        self.assertEqual(config.scatter_range_max, 20.0)

    def test_from_mapping(self):
        from lidar.robustness.weather import WeatherConfig
        config = WeatherConfig.from_mapping({'beta': 2, 'rain_exponent': 0.5})
        self.assertEqual((config.beta, config.rain_exponent), (2.0, 0.5))

    def test_from_mapping_unknown(self):
        from lidar.robustness.exceptions import InvalidArgument
        from lidar.robustness.weather import WeatherConfig
        self.assertRaises(InvalidArgument, WeatherConfig.from_mapping,
                          {'hail': 1})


class WeatherParamsTests(unittest.TestCase):

    def test_one_active_parameter(self):
        from lidar.robustness.weather import WeatherParams
        fog = WeatherParams.for_severity('fog', 5)
        self.assertEqual(fog.alpha_per_m, 0.1)
        self.assertIsNone(fog.rate_mm_per_hr)
        rain = WeatherParams.for_severity('rain', 3)
        self.assertEqual(rain.rate_mm_per_hr, 50.0)
        self.assertIsNone(rain.alpha_per_m)

    def test_unknown_kind(self):
        from lidar.robustness.exceptions import InvalidArgument
        from lidar.robustness.weather import WeatherParams
        self.assertRaises(InvalidArgument, WeatherParams.for_severity,
                          'hail', 1)


class SimplifiedScatteringModelTests(unittest.TestCase):

    def _getTargetClass(self):
        from lidar.robustness.weather import SimplifiedScatteringModel
        return SimplifiedScatteringModel

    def _makeOne(self, **kw):
        from lidar.robustness.weather import WeatherConfig
        return self._getTargetClass()(WeatherConfig(**kw))

    def test_conforms_to_IScatteringModel(self):
        from zope.interface.verify import verifyObject

        from lidar.robustness.interfaces import IScatteringModel
        verifyObject(IScatteringModel, self._makeOne())

    def test_extinction(self):
        model = self._makeOne()
        self.assertEqual(model.extinction('fog', 4), 0.05)
        self.assertAlmostEqual(model.extinction('rain', 1), 0.01 * 5 ** 0.6)
        self.assertAlmostEqual(model.extinction('snow', 5), 0.07 * 50 ** 0.7)
        for kind in ('rain', 'snow', 'fog'):
            self.assertEqual(model.extinction(kind, 0), 0.0)

    def test_attenuate_closed_form(self):
        model = self._makeOne()
        self.assertAlmostEqual(model.attenuate(0.5, 30.0, 0.1),
                               0.5 * math.exp(-6.0))
        self.assertAlmostEqual(model.attenuate(0.5, 30.0, 0.1), 0.00124,
                               places=5)

    def test_fog_attenuation_in_cloud(self):
        # no backscatter, threshold below the attenuated value
        model = self._makeOne(min_detectable_intensity=0.001, beta=0.0)
        cloud = make_cloud([[30.0, 0.0, 0.0, 0.5]])
        out = model.apply(cloud, 'fog', 5, _stream())
        self.assertEqual(len(out), 1)
        self.assertAlmostEqual(out.reflectance[0], 0.5 * math.exp(-6.0))
        np.testing.assert_array_equal(out.xyz, cloud.xyz)

    def test_fog_drops_below_threshold(self):
        stats = collections.Counter()
        cloud = make_cloud([[30.0, 0.0, 0.0, 0.5], [2.0, 0.0, 0.0, 0.5]])
        out = self._makeOne(beta=0.0).apply(cloud, 'fog', 5, _stream(),
                                             stats)
        self.assertEqual(len(out), 1)
        self.assertEqual(out.xyz[0, 0], 2.0)
        self.assertEqual(stats['weather_dropped'], 1)

    def test_severity_zero_identity(self):
        model = self._makeOne()
        cloud = _cloud(100)
        for kind in ('rain', 'snow', 'fog'):
            self.assertIs(model.apply(cloud, kind, 0, _stream()), cloud)

    def test_never_adds_points(self):
        model = self._makeOne()
        cloud = _cloud(2000, r_min=0.5)
        for kind in ('rain', 'snow', 'fog'):
            for severity in range(1, 6):
                out = model.apply(cloud, kind, severity, _stream(severity))
                self.assertLessEqual(len(out), len(cloud))

    def test_dropout_monotone_in_alpha(self):
        model = self._makeOne()
        cloud = _cloud(3000, r_min=0.5, r_max=80.0)
        dropped = []
        for severity in range(1, 6):
            stats = collections.Counter()
            model.apply(cloud, 'fog', severity, _stream(), stats)
            dropped.append(stats['weather_dropped'])
        self.assertEqual(dropped, sorted(dropped))
        self.assertGreater(dropped[-1], 0)

    def test_zero_reflectance_passthrough(self):
        cloud = _cloud(500, reflectance=0.0)
        out = self._makeOne().apply(cloud, 'rain', 5, _stream())
        self.assertEqual(out, cloud)

    def test_backscatter_along_ray(self):
        from lidar.robustness.geometry import cartesian_to_spherical
        stats = collections.Counter()
        # fog 1 never drops a unit-reflectance point within 50 m
        model = self._makeOne(beta=200.0)
        cloud = _cloud(2000, reflectance=1.0)
        out = model.apply(cloud, 'fog', 1, _stream(), stats)
        self.assertEqual(len(out), len(cloud))
        before = cartesian_to_spherical(cloud.xyz)
        after = cartesian_to_spherical(out.xyz)
        moved = np.abs(after[:, 0] - before[:, 0]) > 0
        self.assertEqual(np.count_nonzero(moved), stats['weather_scattered'])
        self.assertGreater(stats['weather_scattered'], 0)
        self.assertTrue(np.all(after[moved, 0] < before[moved, 0]))
        self.assertTrue(np.all(after[moved, 0] >= 1.0))
        self.assertTrue(np.all(after[moved, 0] <= 20.0 + 1e-9))
        np.testing.assert_allclose(after[moved, 1:], before[moved, 1:],
                                   atol=1e-9)
        self.assertTrue(np.all(out.reflectance[moved] <= 0.1))

    def test_deterministic(self):
        model = self._makeOne()
        cloud = _cloud(1000, r_min=0.5)
        self.assertEqual(model.apply(cloud, 'snow', 3, _stream(9)),
                         model.apply(cloud, 'snow', 3, _stream(9)))


class WeatherTests(unittest.TestCase):

    def _callFUT(self, *args, **kw):
        from lidar.robustness.weather import weather
        return weather(*args, **kw)

    def test_unknown_kind(self):
        from lidar.robustness.exceptions import InvalidArgument
        self.assertRaises(InvalidArgument, self._callFUT, _cloud(10), 'hail',
                          1, _stream())

    def test_custom_model(self):
        calls = []

        class Model:
            def apply(self, cloud, kind, severity, stream, stats=None):
                calls.append((kind, severity))
                return cloud

        cloud = _cloud(10)
        self.assertIs(self._callFUT(cloud, 'fog', 2, _stream(),
                                    model=Model()), cloud)
        self.assertEqual(calls, [('fog', 2)])
