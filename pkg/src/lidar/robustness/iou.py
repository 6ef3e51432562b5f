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
"""Intersection over union of yaw-rotated 3D boxes
"""
import numpy as np
from shapely.geometry import Polygon


__all__ = [
    'bev_polygon',
    'iou3d',
    'iou_matrix',
]


def bev_polygon(box):
    """The ground-plane footprint of *box* as a shapely polygon."""
    return Polygon(box.corners_bev())


def _vertical_overlap(a, b):
    top = min(a.cz + a.height / 2.0, b.cz + b.height / 2.0)
    bottom = max(a.bottom, b.bottom)
    return max(top - bottom, 0.0)


def _iou(a, a_poly, b, b_poly):
    height = _vertical_overlap(a, b)
    if height <= 0.0:
        return 0.0
    area = a_poly.intersection(b_poly).area
    if area <= 0.0:
        return 0.0
    inter = area * height
    union = a.volume + b.volume - inter
    return min(max(inter / union, 0.0), 1.0)


def iou3d(a, b):
    """
    Return the 3D IoU of boxes *a* and *b*.

    The intersection is the footprint overlap times the vertical
    overlap. ``iou3d(a, a)`` is exactly 1.
    """
    if _key(a) == _key(b):
        return 1.0
    # Order the operands so the result is symmetric to the last bit.
    if _key(b) < _key(a):
        a, b = b, a
    return _iou(a, bev_polygon(a), b, bev_polygon(b))


def _key(box):
    return (box.cx, box.cy, box.cz, box.length, box.width, box.height,
            box.yaw)


def iou_matrix(dets, gts):
    """``(len(dets), len(gts))`` array of `iou3d` values."""
    dets, gts = list(dets), list(gts)
    out = np.zeros((len(dets), len(gts)))
    if not dets or not gts:
        return out
    gt_polys = [bev_polygon(g) for g in gts]
    for i, d in enumerate(dets):
        d_poly = bev_polygon(d)
        for j, g in enumerate(gts):
            if _key(g) == _key(d):
                out[i, j] = 1.0
            elif _key(g) < _key(d):
                out[i, j] = _iou(g, gt_polys[j], d, d_poly)
            else:
                out[i, j] = _iou(d, d_poly, g, gt_polys[j])
    return out
