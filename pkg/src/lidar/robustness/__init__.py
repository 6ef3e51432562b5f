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
"""Robustness of LiDAR 3D detection under common corruptions

The package synthesizes 25 corruptions of KITTI point clouds at six
severities, filters outliers with a KNN denoiser and measures how much
detectors suffer.

Its public modules are:

  o `geometry` has points, clouds, boxes and severities.

  o `kitti` reads and writes velodyne binaries, labels and calibration.

  o `catalog` is the registry of all corruptions, looked up by name.

  o `scene`, `weather` and `objects` hold the corruption kernels.

  o `denoise` has the outlier filter.

  o `evaluation` and `robustness` compute AP, CE, bug rates and risks.

  o `interfaces` declares the contracts of all of the above.

The most used names are imported here.
"""
__docformat__ = 'restructuredtext'

from lidar.robustness.catalog import KINDS
from lidar.robustness.catalog import apply_corruption
from lidar.robustness.catalog import lookup_corruption
from lidar.robustness.catalog import random_corruption
from lidar.robustness.denoise import knn_outlier_removal
from lidar.robustness.geometry import Box3D
from lidar.robustness.geometry import PointCloud
from lidar.robustness.geometry import Severity
from lidar.robustness.iou import iou3d
from lidar.robustness.robustness import RobustnessReport
from lidar.robustness.stream import RandomStream


__all__ = (
    'KINDS',
    'Box3D',
    'PointCloud',
    'RandomStream',
    'RobustnessReport',
    'Severity',
    'apply_corruption',
    'iou3d',
    'knn_outlier_removal',
    'lookup_corruption',
    'random_corruption',
)
