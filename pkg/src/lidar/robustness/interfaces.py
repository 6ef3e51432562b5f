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
"""Robustness Toolkit Interfaces
"""
__docformat__ = 'restructuredtext'

import math

import numpy as np

from zope.interface import Attribute
from zope.interface import Interface
from zope.interface import Invalid
from zope.interface import implementer
from zope.interface import invariant
from zope.interface.interfaces import IObjectEvent
from zope.interface.interfaces import ObjectEvent


__all__ = [
    'IPointCloud',
    'IBox3D',
    'IRandomStream',
    'IKnnIndex',
    'ICorruption',
    'ISceneCorruption',
    'IObjectCorruption',
    'IScatteringModel',
    'IMatchResult',
    'IRobustnessReport',
    'IProvenanceEvent',
    'IFrameCorrupted',
    'IFrameDenoised',
    'IFrameFailed',
    'ProvenanceEvent',
    'FrameCorrupted',
    'FrameDenoised',
    'FrameFailed',
]

# pylint:disable=inherit-non-class,no-method-argument,no-self-argument


class IPointCloud(Interface):
    """
    One LiDAR sweep: ``N`` points of ``(x, y, z, reflectance)``.

    Coordinates are meters in the sensor frame; reflectance is unitless.
    Point order is significant: operations that neither delete nor insert
    points keep each point at its index.
    """

    points = Attribute(
        "points",
        "Read-only (N, 4) float64 array of x, y, z, reflectance.")

    frame_id = Attribute("frame_id", "Scene identifier string.")

    def __len__():
        """Return the number of points ``N``."""

    @invariant
    def coordinatesFinite(cloud):
        if not np.all(np.isfinite(cloud.points[:, :3])):
            raise Invalid("point coordinates must be finite")

    @invariant
    def reflectanceInUnitRange(cloud):
        refl = cloud.points[:, 3]
        if refl.size and (refl.min() < 0.0 or refl.max() > 1.0):
            raise Invalid("reflectance must lie in [0, 1]")


class IBox3D(Interface):
    """
    An oriented 3D box in the LiDAR frame.

    Houses both ground truth and detections. ``(cx, cy, cz)`` is the
    geometric center, ``length`` runs along the heading axis, ``width``
    across it and ``height`` along +z. ``yaw`` is the heading about +z.
    """

    cx = Attribute("cx", "Center x, meters.")
    cy = Attribute("cy", "Center y, meters.")
    cz = Attribute("cz", "Center z, meters.")
    length = Attribute("length", "Extent along the heading, meters.")
    width = Attribute("width", "Extent across the heading, meters.")
    height = Attribute("height", "Vertical extent, meters.")
    yaw = Attribute("yaw", "Heading about +z, radians in (-pi, pi].")
    class_label = Attribute("class_label", "Class name, e.g. ``Car``.")
    score = Attribute("score", "Detection confidence or None.")
    truncation = Attribute("truncation", "KITTI truncation or None.")
    occlusion = Attribute("occlusion", "KITTI occlusion state or None.")
    image_bbox_height = Attribute(
        "image_bbox_height", "Height of the 2D image box in pixels, or None.")

    @invariant
    def positiveDimensions(box):
        if not (box.length > 0 and box.width > 0 and box.height > 0):
            raise Invalid("box dimensions must be positive")

    @invariant
    def normalizedYaw(box):
        if not -math.pi < box.yaw <= math.pi:
            raise Invalid("yaw must be normalized to (-pi, pi]")


class IRandomStream(Interface):
    """
    A seeded, reproducible source of random draws.

    Identical seeds and identical call sequences produce identical
    outputs. A stream is owned by exactly one corruption invocation.
    """

    seed = Attribute("seed", "64-bit unsigned seed.")
    algorithm_id = Attribute(
        "algorithm_id", "Identifier of the generator algorithm.")

    def uniform(lo, hi, size=None):
        """Draw from U[lo, hi); ``lo == hi`` returns ``lo``."""

    def gaussian(mean, stddev, size=None):
        """Draw from N(mean, stddev**2)."""

    def choose_without_replacement(n, k):
        """Return ``k`` distinct sorted indices from ``range(n)``.

        Raises `~lidar.robustness.exceptions.InvalidArgument` if k > n.
        """

    def signs(size):
        """Return an array of fair-coin signs, each -1.0 or +1.0."""


class IKnnIndex(Interface):
    """
    An immutable exact k-nearest-neighbor index over a point sequence.
    """

    def knn(query, k):
        """
        Return ``(indices, distances)`` of the ``min(k, N)`` nearest
        points, ascending by distance with ties broken by lower index.
        """

    def __len__():
        """The number of indexed points."""


class ICorruption(Interface):
    """
    A named, severity-scheduled corruption.

    Severity 0 is the identity for every corruption.
    """

    name = Attribute("name", "Canonical kind name, e.g. ``beam_del``.")
    level = Attribute("level", "``scene`` or ``object``.")
    category = Attribute(
        "category",
        "One of ``weather``, ``noise``, ``density``, ``transformation``.")
    mutates_labels = Attribute(
        "mutates_labels",
        "True if the corruption rewrites ground-truth boxes.")


class ISceneCorruption(ICorruption):
    """A corruption applied to the whole frame."""

    def __call__(cloud, severity, stream, stats=None):
        """Return the corrupted `IPointCloud`."""


class IObjectCorruption(ICorruption):
    """A corruption applied to points inside annotated boxes."""

    def __call__(cloud, boxes, severity, stream, stats=None, classes=None):
        """
        Return a corrupted frame: the new cloud, the (possibly updated)
        boxes and the provenance of the invocation.
        """


class IScatteringModel(Interface):
    """
    The physics used by the rain, snow and fog corruptions.

    A model maps a weather kind and severity to an extinction coefficient
    and applies attenuation, dropout and droplet backscatter to a cloud.
    """

    def extinction(kind, severity):
        """Return the extinction coefficient (1/m) for *kind* at *severity*.
        """

    def attenuate(reflectance, rng, alpha):
        """Return reflectance after two-way travel over range *rng*."""

    def apply(cloud, kind, severity, stream, stats=None):
        """Return the weathered `IPointCloud`."""


class IMatchResult(Interface):
    """
    Per-frame assignment of detections to ground truth.

    The bug categories ``TD``, ``FC``, ``FD`` and ``MD`` partition the
    detections.
    """

    categories = Attribute(
        "categories", "Bug category of each detection, in input order.")
    matched_gt = Attribute(
        "matched_gt",
        "Ground-truth index claimed by each detection, or None.")
    max_iou = Attribute("max_iou", "Maximum IoU of each detection.")
    gt_matched_by = Attribute(
        "gt_matched_by",
        "Detection index matched to each ground truth, or None.")

    def counts():
        """Return a mapping of bug category to count."""

    @invariant
    def categoriesPartitionDetections(result):
        counts = result.counts()
        if sum(counts.values()) != len(result.categories):
            raise Invalid("bug categories must partition the detections")

    @invariant
    def groundTruthClaimedOnce(result):
        claimed = [g for g in result.matched_gt if g is not None]
        if len(claimed) != len(set(claimed)):
            raise Invalid("a ground-truth box is matched at most once")


class IRobustnessReport(Interface):
    """
    OA, CE, recall and bug-rate cells for (detector, class, corruption,
    severity), with mCE and mCR aggregates.
    """

    rows = Attribute("rows", "A `pandas.DataFrame`, one row per cell.")
    metadata = Attribute(
        "metadata", "Mapping of run metadata (seed, score floor, ...).")

    def mean_corruption_error(detector, class_label):
        """Return mCE over severities 1..5 and all corruptions."""

    def mean_corruption_risk(detector, class_label, category):
        """Return mCR for one bug category."""


class IProvenanceEvent(IObjectEvent):
    """A unit of batch work finished; ``object`` is its record mapping."""


class IFrameCorrupted(IProvenanceEvent):
    """A frame was written at one (kind, severity)."""


class IFrameDenoised(IProvenanceEvent):
    """A frame was passed through the outlier filter."""


class IFrameFailed(IProvenanceEvent):
    """Processing a frame raised an error."""


@implementer(IProvenanceEvent)
class ProvenanceEvent(ObjectEvent):
    """Base implementation; ``object`` is a JSON-compatible dict."""


@implementer(IFrameCorrupted)
class FrameCorrupted(ProvenanceEvent):
    pass


@implementer(IFrameDenoised)
class FrameDenoised(ProvenanceEvent):
    pass


@implementer(IFrameFailed)
class FrameFailed(ProvenanceEvent):
    pass
