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
"""Scene-level corruptions

Each kernel is a pure function ``(cloud, ..., severity, stream) ->
cloud``. Severity 0 returns the input cloud itself. Portions written
``N/d`` in the schedules are ``N // d``; ``None`` stands for the
infinite divisor of level 0.

Random draws happen in a fixed order for a given input, so equal
``(cloud, severity, seed)`` give bit-identical output.
"""
import logging
import math

import numpy as np

from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.fitting import QUADRATIC
from lidar.robustness.fitting import densify
from lidar.robustness.geometry import Severity
from lidar.robustness.geometry import cartesian_to_spherical
from lidar.robustness.geometry import spherical_to_cartesian
from lidar.robustness.spatial import KnnIndex


__all__ = [
    'SCHEDULES',
    'RADIAL_KINDS',
    'DENSITY_MODES',
    'radial_noise',
    'background_noise',
    'scene_upsample',
    'scene_cutout',
    'scene_local_density',
    'beam_delete',
    'layer_delete',
]

logger = logging.getLogger(__name__)

RADIAL_KINDS = ('uniform', 'gaussian', 'impulse')
DENSITY_MODES = ('dec', 'inc')

SCHEDULES = {
    # half-width of U(-b, b) added to the range, meters
    'uniform_rad': (0.0, 0.04, 0.08, 0.12, 0.16, 0.20),
    # stddev of the range noise, meters
    'gaussian_rad': (0.0, 0.04, 0.06, 0.08, 0.10, 0.12),
    # portion divisors
    'impulse_rad': (None, 30, 25, 20, 15, 10),
    'background': (None, 45, 40, 35, 30, 20),
    'upsample': (None, 10, 8, 6, 4, 2),
    'cutout': (None, 2000, 1500, 1000, 800, 600),
    'local_dec': (None, 300, 250, 200, 150, 100),
    'local_inc': (None, 2000, 1500, 1000, 800, 600),
    'beam_del': (None, 100, 30, 10, 5, 3),
    # number of deleted theta bins
    'layer_del': (0, 3, 7, 11, 15, 19),
}

IMPULSE_RANGE = 0.2
UPSAMPLE_BIAS = 0.1
NEIGHBORHOOD = 100
DEC_FRACTION = 0.75
LAYER_COUNTS = (32, 64)


def _portion(n, divisor):
    return 0 if divisor is None else n // divisor


def _shift_ranges(cloud, dr):
    """Move the points with nonzero *dr* along their own rays."""
    changed = np.flatnonzero(dr)
    if not len(changed):
        return cloud
    points = np.array(cloud.points)
    xyz = points[changed, :3]
    r = np.sqrt(np.einsum('ij,ij->i', xyz, xyz))
    new_r = np.maximum(r + dr[changed], 0.0)
    moved = np.empty_like(xyz)
    along = r > 0.0
    moved[along] = xyz[along] * (new_r[along] / r[along])[:, None]
    # A point at the origin has theta = phi = 0, i.e. the +z ray.
    origin = ~along
    if np.any(origin):
        rtp = np.column_stack((new_r[origin],
                               np.zeros(np.count_nonzero(origin)),
                               np.zeros(np.count_nonzero(origin))))
        moved[origin] = spherical_to_cartesian(rtp)
    points[changed, :3] = moved
    return cloud.with_points(points)


def radial_noise(cloud, kind, severity, stream, stats=None):
    """
    Perturb the range ``r`` of points, keeping ``theta``, ``phi`` and
    reflectance.

    *kind* is ``uniform``, ``gaussian`` or ``impulse``. Ranges are
    clamped at zero.
    """
    if kind not in RADIAL_KINDS:
        raise InvalidArgument(f"unknown radial noise kind: {kind!r}")
    severity = Severity(severity)
    if severity == 0 or not len(cloud):
        return cloud
    n = len(cloud)
    if kind == 'uniform':
        bound = SCHEDULES['uniform_rad'][severity]
        dr = stream.uniform(-bound, bound, n)
    elif kind == 'gaussian':
        dr = stream.gaussian(0.0, SCHEDULES['gaussian_rad'][severity], n)
    else:
        count = _portion(n, SCHEDULES['impulse_rad'][severity])
        chosen = stream.choose_without_replacement(n, count)
        dr = np.zeros(n)
        dr[chosen] = IMPULSE_RANGE * stream.signs(count)
    return _shift_ranges(cloud, np.asarray(dr, dtype=np.float64))


def background_noise(cloud, severity, stream, stats=None):
    """Append points drawn uniformly inside the cloud's bounding box."""
    severity = Severity(severity)
    if severity == 0:
        return cloud
    if not len(cloud):
        raise InvalidArgument("background noise needs a non-empty cloud")
    count = _portion(len(cloud), SCHEDULES['background'][severity])
    lo, hi = cloud.bounds()
    unit = stream.uniform(0.0, 1.0, (count, 3))
    xyz = np.minimum(lo + unit * (hi - lo), hi)
    reflectance = stream.uniform(0.0, 1.0, count)
    return cloud.append(np.column_stack((xyz, reflectance)))


def scene_upsample(cloud, severity, stream, stats=None):
    """Append one jittered copy of a scheduled portion of the points."""
    severity = Severity(severity)
    if severity == 0:
        return cloud
    n = len(cloud)
    count = _portion(n, SCHEDULES['upsample'][severity])
    chosen = stream.choose_without_replacement(n, count)
    new = np.array(cloud.points[chosen])
    new[:, :3] += stream.uniform(-UPSAMPLE_BIAS, UPSAMPLE_BIAS, (count, 3))
    return cloud.append(new)


def _neighborhoods(cloud, centers, k):
    index = KnnIndex(cloud.xyz)
    for center in centers:
        yield index.knn(cloud.xyz[center], k)[0]


def scene_cutout(cloud, severity, stream, stats=None):
    """Erase the 100-point neighborhoods of randomly chosen centers."""
    severity = Severity(severity)
    if severity == 0:
        return cloud
    n = len(cloud)
    count = _portion(n, SCHEDULES['cutout'][severity])
    centers = stream.choose_without_replacement(n, count)
    if not count:
        return cloud
    erased = np.concatenate(list(_neighborhoods(cloud, centers,
                                                NEIGHBORHOOD)))
    return cloud.delete(np.unique(erased))


def scene_local_density(cloud, mode, severity, stream, stats=None):
    """
    Thin out (``dec``) or densify (``inc``) 100-point neighborhoods.

    ``dec`` deletes 75% of each neighborhood, chosen uniformly. ``inc``
    fits a quadratic surface to each neighborhood and appends as many
    new points as the neighborhood holds.
    """
    if mode not in DENSITY_MODES:
        raise InvalidArgument(f"unknown local density mode: {mode!r}")
    severity = Severity(severity)
    if severity == 0:
        return cloud
    n = len(cloud)
    count = _portion(n, SCHEDULES['local_' + mode][severity])
    centers = stream.choose_without_replacement(n, count)
    if not count:
        return cloud
    if mode == 'dec':
        deleted = []
        for neighbors in _neighborhoods(cloud, centers, NEIGHBORHOOD):
            m = math.floor(DEC_FRACTION * len(neighbors))
            picked = stream.choose_without_replacement(len(neighbors), m)
            deleted.append(neighbors[picked])
        return cloud.delete(np.unique(np.concatenate(deleted)))
    added = [densify(cloud.points[neighbors], len(neighbors), stream,
                     QUADRATIC, stats)
             for neighbors in _neighborhoods(cloud, centers, NEIGHBORHOOD)]
    return cloud.append(np.concatenate(added))


def beam_delete(cloud, severity, stream, stats=None):
    """Delete a scheduled portion of points chosen uniformly."""
    severity = Severity(severity)
    if severity == 0:
        return cloud
    n = len(cloud)
    count = _portion(n, SCHEDULES['beam_del'][severity])
    return cloud.delete(stream.choose_without_replacement(n, count))


def theta_bins(cloud, n_layers):
    """
    Index of the equal-width polar-angle bin of every point.

    Bins span the observed ``[theta_min, theta_max]``; the last bin is
    closed above.
    """
    theta = cartesian_to_spherical(cloud.xyz)[:, 1]
    lo, hi = theta.min(), theta.max()
    if hi <= lo:
        return np.zeros(len(theta), dtype=np.int64)
    bins = np.floor((theta - lo) / (hi - lo) * n_layers).astype(np.int64)
    return np.clip(bins, 0, n_layers - 1)


def layer_delete(cloud, severity, stream, n_layers=64, stats=None):
    """Delete every point in a scheduled number of random theta bins."""
    if n_layers not in LAYER_COUNTS:
        raise InvalidArgument(
            f"n_layers must be one of {LAYER_COUNTS}: {n_layers}")
    severity = Severity(severity)
    if severity == 0:
        return cloud
    if not len(cloud):
        logger.warning("layer deletion on an empty cloud %r is a no-op",
                       cloud.frame_id)
        if stats is not None:
            stats['layer_del_empty'] += 1
        return cloud
    bins = theta_bins(cloud, n_layers)
    chosen = stream.choose_without_replacement(
        n_layers, SCHEDULES['layer_del'][severity])
    return cloud.delete(np.flatnonzero(np.isin(bins, chosen)))
