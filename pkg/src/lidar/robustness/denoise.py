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
"""KNN statistical outlier removal

Each point's score is its mean distance to its *k* nearest neighbors. A
point is an outlier when its score exceeds ``mean + n_sigma * stddev`` of
all scores (or, with ``per_cluster``, of the scores of its own
neighborhood).
"""
import logging
from typing import NamedTuple

import numpy as np

from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.spatial import KnnIndex


__all__ = [
    'DenoiseResult',
    'knn_outlier_removal',
]

logger = logging.getLogger(__name__)

# Relative slack on the threshold so equal scores are never split by
# summation rounding.
_TOLERANCE = 1e-9


class DenoiseResult(NamedTuple):
    cloud: object
    removed: np.ndarray
    skipped: bool = False


def knn_outlier_removal(cloud, k=50, n_sigma=3.0, per_cluster=False,
                        stats=None):
    """Return a `DenoiseResult` for *cloud*.

    A cloud of at most *k* points is returned unchanged with ``skipped``
    set.
    """
    if k < 2:
        raise InvalidArgument(f"k must be >= 2: {k}")
    if not n_sigma > 0:
        raise InvalidArgument(f"n_sigma must be > 0: {n_sigma}")
    n = len(cloud)
    if n <= k:
        logger.warning("%s: %d points is too few for k=%d; not denoised",
                       cloud.frame_id, n, k)
        if stats is not None:
            stats['denoise_skipped'] += 1
        return DenoiseResult(cloud, np.empty(0, dtype=np.int64), True)

    dist, idx = KnnIndex(cloud.xyz).knn_distances(k)
    scores = dist.mean(axis=1)
    if per_cluster:
        local = scores[idx]
        mean = local.mean(axis=1)
        std = local.std(axis=1)
    else:
        mean = scores.mean()
        std = scores.std()
    threshold = mean + n_sigma * std
    removed = np.flatnonzero(
        scores > threshold + _TOLERANCE * np.maximum(np.abs(threshold), 1.0))
    if stats is not None:
        stats['denoise_removed'] += len(removed)
    logger.debug("%s: removed %d of %d points", cloud.frame_id,
                 len(removed), n)
    if not len(removed):
        return DenoiseResult(cloud, removed)
    return DenoiseResult(cloud.delete(removed), removed)
