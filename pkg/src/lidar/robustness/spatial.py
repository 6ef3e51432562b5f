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
"""Exact k-nearest-neighbor queries

The partition itself is scipy's balanced kd-tree. `KnnIndex.knn` adds
the ordering contract the corruption kernels rely on: results ascend by
Euclidean distance and equal distances are ordered by source index, so
the neighborhood of a query is unique even on lattices.
"""
import numpy as np
from scipy.spatial import cKDTree

from zope.interface import implementer

from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.interfaces import IKnnIndex


__all__ = [
    'KnnIndex',
    'build',
    'knn',
]


@implementer(IKnnIndex)
class KnnIndex:

    def __init__(self, points):
        xyz = np.asarray(points, dtype=np.float64)
        if xyz.size == 0:
            xyz = xyz.reshape(0, 3)
        elif xyz.ndim == 2 and xyz.shape[1] > 3:
            xyz = xyz[:, :3]
        xyz = np.array(xyz, dtype=np.float64)
        xyz.flags.writeable = False
        self._xyz = xyz
        self._tree = cKDTree(xyz, balanced_tree=True) if len(xyz) else None

    def __len__(self):
        return len(self._xyz)

    @property
    def points(self):
        return self._xyz

    def knn(self, query, k):
        if k < 1:
            raise InvalidArgument(f"k must be >= 1: {k}")
        n = len(self._xyz)
        if n == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        k = min(int(k), n)
        q = np.asarray(query, dtype=np.float64)[:3]
        dist, _ = self._tree.query(q, k=k)
        kth = float(np.atleast_1d(dist)[-1])
        # Every point tied with the k-th distance is a candidate; the
        # ball is widened by a few ulps so no tie is lost to rounding.
        radius = np.nextafter(kth, np.inf) * (1.0 + 1e-12) + 1e-300
        candidates = np.asarray(self._tree.query_ball_point(q, radius),
                                dtype=np.int64)
        delta = self._xyz[candidates] - q
        cand_dist = np.sqrt(np.einsum('ij,ij->i', delta, delta))
        order = np.lexsort((candidates, cand_dist))[:k]
        return candidates[order], cand_dist[order]

    def knn_distances(self, k):
        """
        Distances from every indexed point to its *k* nearest other
        points and their indices, as two ``(N, min(k, N - 1))`` arrays.

        Tie order cannot change a distance multiset, so this uses the
        tree's batch query directly.
        """
        n = len(self._xyz)
        kk = min(int(k), n - 1)
        if kk < 1:
            return np.empty((n, 0)), np.empty((n, 0), dtype=np.int64)
        dist, idx = self._tree.query(self._xyz, k=kk + 1)
        return dist[:, 1:], idx[:, 1:]


def build(points):
    """Build a `KnnIndex` over ``(N, 3)`` or ``(N, 4)`` *points*."""
    return KnnIndex(points)


def knn(index, query, k):
    """Return ``(indices, distances)`` for *query*; see `KnnIndex.knn`."""
    return index.knn(query, k)
