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
"""Surface fits used to densify a neighborhood

A neighborhood is fitted with ``z = f(x, y)`` by least squares, either
the quadratic ``a0 + a1 x + a2 y + a3 x^2 + a4 x y + a5 y^2`` or the
plane ``a0 + a1 x + a2 y``. New ``(x, y)`` are drawn uniformly in the
neighborhood's footprint and lifted onto the fit. A rank-deficient fit
steps down the ladder quadratic -> plane -> jittered duplicates.
"""
import logging

import numpy as np


__all__ = [
    'QUADRATIC',
    'PLANE',
    'densify',
]

logger = logging.getLogger(__name__)

QUADRATIC = 2
PLANE = 1
JITTER = 0.01


def _design(uv, degree):
    u, v = uv[:, 0], uv[:, 1]
    ones = np.ones_like(u)
    if degree == QUADRATIC:
        return np.column_stack((ones, u, v, u * u, u * v, v * v))
    return np.column_stack((ones, u, v))


def _fit(uv, z, degree):
    design = _design(uv, degree)
    if len(z) < design.shape[1]:
        return None
    coef, _, rank, _ = np.linalg.lstsq(design, z, rcond=None)
    if rank < design.shape[1]:
        return None
    return coef


def _nearest_reflectance(new_xyz, neighbors):
    delta = new_xyz[:, None, :] - neighbors[None, :, :3]
    nearest = np.argmin(np.einsum('ijk,ijk->ij', delta, delta), axis=1)
    return neighbors[nearest, 3]


def densify(neighbors, count, stream, degree=QUADRATIC, stats=None):
    """
    Return ``(count, 4)`` new points sampled on a surface fitted to the
    ``(k, 4)`` *neighbors*.

    New reflectance copies the nearest original neighbor. Fallbacks are
    counted in *stats* under ``fit_plane_fallback`` and
    ``fit_jitter_fallback``.
    """
    neighbors = np.asarray(neighbors, dtype=np.float64)
    if count <= 0 or not len(neighbors):
        return np.empty((0, 4))
    xy = neighbors[:, :2]
    origin = xy.mean(axis=0)
    uv = xy - origin
    z = neighbors[:, 2]

    coef = _fit(uv, z, degree)
    if coef is None and degree == QUADRATIC:
        degree = PLANE
        coef = _fit(uv, z, degree)
        if stats is not None:
            stats['fit_plane_fallback'] += 1
        logger.debug("quadratic fit degenerate; using a plane")
    if coef is None:
        if stats is not None:
            stats['fit_jitter_fallback'] += 1
        logger.debug("surface fit degenerate; jittering duplicates")
        source = neighbors[np.arange(count) % len(neighbors)]
        jitter = stream.uniform(-JITTER, JITTER, (count, 3))
        new = source.copy()
        new[:, :3] += jitter
        return new

    lo, hi = xy.min(axis=0), xy.max(axis=0)
    new_x = stream.uniform(lo[0], hi[0], count)
    new_y = stream.uniform(lo[1], hi[1], count)
    new_uv = np.column_stack((new_x, new_y)) - origin
    new_z = _design(new_uv, degree) @ coef
    new_xyz = np.column_stack((new_x, new_y, new_z))
    refl = _nearest_reflectance(new_xyz, neighbors)
    return np.column_stack((new_xyz, refl))
