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
"""Rain, snow and fog

The severity schedules are rain and snow rates in mm/hr and the fog
extinction coefficient in 1/m. `SimplifiedScatteringModel` turns them
into three effects on every point:

1. attenuation: reflectance is scaled by ``exp(-2 alpha r)``;
2. dropout: points whose attenuated reflectance is below the detection
   threshold disappear, except points whose reflectance is exactly 0,
   which pass through untouched;
3. backscatter: each surviving beam, with probability
   ``1 - exp(-beta alpha)``, returns from a droplet instead, at a range
   drawn from ``U(1 m, min(r, scatter_range_max))`` along the same ray
   and with reflectance ``U(0, 0.1)``.

Rain and snow rates map to ``alpha`` through ``c * R ** e``. Weather
never adds points.

The physics is an `~lidar.robustness.interfaces.IScatteringModel`;
another model may be passed to `weather`.
"""
import dataclasses
import logging
import math

import numpy as np

from zope.interface import implementer

from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.geometry import Severity
from lidar.robustness.interfaces import IScatteringModel


__all__ = [
    'WEATHER_KINDS',
    'SCHEDULES',
    'WeatherConfig',
    'WeatherParams',
    'SimplifiedScatteringModel',
    'weather',
]

logger = logging.getLogger(__name__)

WEATHER_KINDS = ('rain', 'snow', 'fog')

SCHEDULES = {
    'rain': (0.0, 5.0, 15.0, 50.0, 150.0, 500.0),    # mm/hr
    'snow': (0.0, 0.5, 1.5, 5.0, 15.0, 50.0),        # mm/hr
    'fog': (0.0, 0.005, 0.01, 0.02, 0.05, 0.1),      # 1/m
}

MIN_SCATTER_RANGE = 1.0
SCATTER_REFLECTANCE = 0.1


@dataclasses.dataclass(frozen=True)
class WeatherConfig:
    """Tunable constants of `SimplifiedScatteringModel`."""

    min_detectable_intensity: float = 0.002
    beta: float = 5.0
    scatter_range_max: float = 20.0
    rain_coefficient: float = 0.01
    rain_exponent: float = 0.6
    snow_coefficient: float = 0.07
    snow_exponent: float = 0.7

    @classmethod
    def from_mapping(cls, mapping):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(mapping) - names
        if unknown:
            raise InvalidArgument(
                f"unknown weather settings: {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in mapping.items()})


@dataclasses.dataclass(frozen=True)
class WeatherParams:
    """The active parameters of one weather kind at one severity."""

    kind: str
    rate_mm_per_hr: float | None
    alpha_per_m: float | None
    min_detectable_intensity: float
    scatter_range_max_m: float

    @classmethod
    def for_severity(cls, kind, severity, config=WeatherConfig()):
        if kind not in WEATHER_KINDS:
            raise InvalidArgument(f"unknown weather kind: {kind!r}")
        value = SCHEDULES[kind][Severity(severity)]
        return cls(
            kind=kind,
            rate_mm_per_hr=None if kind == 'fog' else value,
            alpha_per_m=value if kind == 'fog' else None,
            min_detectable_intensity=config.min_detectable_intensity,
            scatter_range_max_m=config.scatter_range_max,
        )


@implementer(IScatteringModel)
class SimplifiedScatteringModel:
    """
    Beer-Lambert attenuation, a fixed detection threshold and Poisson
    droplet backscatter.
    """

    def __init__(self, config=None):
        self.config = config or WeatherConfig()

    def __repr__(self):
        return f"<{self.__class__.__name__} {self.config}>"

    def extinction(self, kind, severity):
        params = WeatherParams.for_severity(kind, severity, self.config)
        if params.alpha_per_m is not None:
            return params.alpha_per_m
        rate = params.rate_mm_per_hr
        if rate == 0:
            return 0.0
        if kind == 'rain':
            return self.config.rain_coefficient \
                * rate ** self.config.rain_exponent
        return self.config.snow_coefficient \
            * rate ** self.config.snow_exponent

    def attenuate(self, reflectance, rng, alpha):
        return reflectance * np.exp(-2.0 * alpha * rng)

    def scatter_probability(self, alpha):
        return 1.0 - math.exp(-self.config.beta * alpha)

    def apply(self, cloud, kind, severity, stream, stats=None):
        severity = Severity(severity)
        alpha = self.extinction(kind, severity)
        if severity == 0 or alpha == 0 or not len(cloud):
            return cloud
        points = np.array(cloud.points)
        n = len(points)
        xyz = points[:, :3]
        r = np.sqrt(np.einsum('ij,ij->i', xyz, xyz))
        # Draws for every point, in index order, whatever survives.
        scatter_draw = stream.uniform(0.0, 1.0, n)
        range_draw = stream.uniform(0.0, 1.0, n)
        refl_draw = stream.uniform(0.0, SCATTER_REFLECTANCE, n)

        original = points[:, 3]
        passthrough = original == 0.0
        attenuated = self.attenuate(original, r, alpha)
        dropped = ~passthrough \
            & (attenuated < self.config.min_detectable_intensity)

        far_limit = np.minimum(r, self.config.scatter_range_max)
        scattered = (~passthrough & ~dropped
                     & (scatter_draw < self.scatter_probability(alpha))
                     & (far_limit > MIN_SCATTER_RANGE))
        new_r = MIN_SCATTER_RANGE \
            + range_draw * (far_limit - MIN_SCATTER_RANGE)
        new_r = np.minimum(new_r, np.nextafter(r, 0.0))

        points[:, 3] = np.where(passthrough, original, attenuated)
        moved = np.flatnonzero(scattered)
        points[moved, :3] = xyz[moved] * (new_r[moved] / r[moved])[:, None]
        points[moved, 3] = refl_draw[moved]

        if stats is not None:
            stats['weather_dropped'] += int(np.count_nonzero(dropped))
            stats['weather_scattered'] += len(moved)
        logger.debug("%s %s@%d: alpha=%g dropped=%d scattered=%d",
                     cloud.frame_id, kind, severity, alpha,
                     np.count_nonzero(dropped), len(moved))
        return cloud.with_points(points[~dropped])


def weather(cloud, kind, severity, stream, stats=None, model=None):
    """Apply *kind* weather at *severity* with *model* (default physics).
    """
    if kind not in WEATHER_KINDS:
        raise InvalidArgument(f"unknown weather kind: {kind!r}")
    model = model or SimplifiedScatteringModel()
    return model.apply(cloud, kind, severity, stream, stats)
