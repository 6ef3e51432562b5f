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
"""Detection matching, the bug partition and average precision

Per frame, `classify_detections` sorts every detection into exactly one
bug category:

``TD``
    true detection: right class and IoU at or above the class threshold
    against a ground truth nobody else has claimed.
``FC``
    false classification: the best-overlapping ground truth has another
    class.
``FD``
    false detection: right class, overlapping, but below the threshold
    or beaten to the ground truth by a higher score.
``MD``
    missed detection: the detection overlaps no ground truth at all.

Ground truths no detection claims are counted separately as
``gt_misses``.

`average_precision` follows the KITTI protocol, interpolated at 40
recall points by default (11 on request).
"""
import dataclasses
import enum
import logging
from typing import NamedTuple

import numpy as np

from zope.interface import implementer

from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.interfaces import IMatchResult
from lidar.robustness.iou import iou_matrix


__all__ = [
    'BUG_CATEGORIES',
    'DEFAULT_IOU_THRESHOLDS',
    'Difficulty',
    'DifficultyLevel',
    'EvaluationConfig',
    'MatchResult',
    'assign_difficulty',
    'classify_detections',
    'average_precision',
    'recall',
    'overall_accuracy',
    'evaluate_class',
]

logger = logging.getLogger(__name__)

BUG_CATEGORIES = ('TD', 'FC', 'FD', 'MD')

DEFAULT_IOU_THRESHOLDS = {
    'Car': 0.7,
    'Pedestrian': 0.5,
    'Cyclist': 0.5,
}

# Threshold for classes missing from the table.
FALLBACK_IOU_THRESHOLD = 0.5


class Difficulty(NamedTuple):
    min_height: float
    max_occlusion: int
    max_truncation: float


class DifficultyLevel(enum.Enum):
    """KITTI difficulty levels, loosest last."""

    EASY = Difficulty(40.0, 0, 0.15)
    MODERATE = Difficulty(25.0, 1, 0.30)
    HARD = Difficulty(25.0, 2, 0.50)

    def admits(self, box):
        limits = self.value
        return (box.image_bbox_height >= limits.min_height
                and box.occlusion <= limits.max_occlusion
                and box.truncation <= limits.max_truncation)


@dataclasses.dataclass(frozen=True)
class EvaluationConfig:
    recall_points: int = 40
    score_floor: float = 0.0
    allow_partial: bool = False
    iou_thresholds: dict = dataclasses.field(
        default_factory=lambda: dict(DEFAULT_IOU_THRESHOLDS))

    def __post_init__(self):
        if self.recall_points not in (11, 40):
            raise InvalidArgument(
                f"recall_points must be 11 or 40: {self.recall_points}")

    def threshold(self, class_label):
        return self.iou_thresholds.get(class_label, FALLBACK_IOU_THRESHOLD)

    @classmethod
    def from_mapping(cls, mapping):
        mapping = dict(mapping)
        thresholds = dict(DEFAULT_IOU_THRESHOLDS)
        thresholds.update(mapping.pop('iou_thresholds', {}))
        try:
            return cls(iou_thresholds=thresholds, **mapping)
        except TypeError as e:
            raise InvalidArgument(f"bad evaluation settings: {e}") from e


def assign_difficulty(gt, stats=None):
    """
    Return the frozenset of `DifficultyLevel` at which *gt* counts.

    A box without truncation, occlusion or image-box height counts as
    ``HARD`` only.
    """
    if None in (gt.truncation, gt.occlusion, gt.image_bbox_height):
        logger.warning("%s box has no difficulty attributes; assigned"
                       " to Hard", gt.class_label)
        if stats is not None:
            stats['difficulty_missing'] += 1
        return frozenset((DifficultyLevel.HARD,))
    return frozenset(level for level in DifficultyLevel if level.admits(gt))


def _score(box):
    return 1.0 if box.score is None else box.score


def _by_score(dets):
    """Detection indices by descending score, input order on ties."""
    return sorted(range(len(dets)), key=lambda i: (-_score(dets[i]), i))


@implementer(IMatchResult)
@dataclasses.dataclass(frozen=True)
class MatchResult:
    """Bug categories for the detections of one frame.

    ``detections`` are those that passed the score floor; every
    per-detection tuple is aligned with it.
    """

    detections: tuple
    categories: tuple
    matched_gt: tuple
    max_iou: tuple
    class_match: tuple
    gt_matched_by: tuple

    def counts(self):
        counts = dict.fromkeys(BUG_CATEGORIES, 0)
        for category in self.categories:
            counts[category] += 1
        return counts

    @property
    def gt_misses(self):
        return sum(1 for d in self.gt_matched_by if d is None)


def classify_detections(dets, gts, iou_thresholds=None, score_floor=0.0):
    """Partition the detections of one frame into bug categories.

    Detections are visited by descending score. A detection's best
    ground truth is the one of maximum IoU, the lowest index on ties.
    """
    thresholds = DEFAULT_IOU_THRESHOLDS if iou_thresholds is None \
        else iou_thresholds
    dets = tuple(d for d in dets if _score(d) >= score_floor)
    gts = tuple(gts)
    ious = iou_matrix(dets, gts)
    n = len(dets)
    categories = [None] * n
    matched = [None] * n
    max_iou = [0.0] * n
    class_match = [False] * n
    claimed = [None] * len(gts)
    for i in _by_score(dets):
        det = dets[i]
        if not gts or ious[i].max() <= 0.0:
            categories[i] = 'MD'
            continue
        j = int(np.argmax(ious[i]))
        max_iou[i] = float(ious[i, j])
        if gts[j].class_label != det.class_label:
            categories[i] = 'FC'
            continue
        class_match[i] = True
        threshold = thresholds.get(det.class_label, FALLBACK_IOU_THRESHOLD)
        if max_iou[i] >= threshold and claimed[j] is None:
            categories[i] = 'TD'
            matched[i] = j
            claimed[j] = i
        else:
            categories[i] = 'FD'
    return MatchResult(dets, tuple(categories), tuple(matched),
                       tuple(max_iou), tuple(class_match), tuple(claimed))


class _FrameMatches(NamedTuple):
    scores: list
    positives: list
    n_eligible: int


def _match_frame(dets, gts, class_label, level, iou_threshold,
                 score_floor, stats):
    dets = [d for d in dets
            if d.class_label == class_label and _score(d) >= score_floor]
    gts = [g for g in gts if g.class_label == class_label]
    eligible = [level in assign_difficulty(g, stats) for g in gts]
    ious = iou_matrix(dets, gts)
    taken = [False] * len(gts)
    scores, positives = [], []
    for i in _by_score(dets):
        best, best_ignored = None, None
        for j in range(len(gts)):
            if taken[j] or ious[i, j] < iou_threshold:
                continue
            if eligible[j]:
                if best is None or ious[i, j] > ious[i, best]:
                    best = j
            elif best_ignored is None or ious[i, j] > ious[i, best_ignored]:
                best_ignored = j
        if best is not None:
            taken[best] = True
            scores.append(_score(dets[i]))
            positives.append(True)
        elif best_ignored is not None:
            # Hits on boxes outside this difficulty are neither kind.
            taken[best_ignored] = True
        else:
            scores.append(_score(dets[i]))
            positives.append(False)
    return _FrameMatches(scores, positives, sum(eligible))


def _accumulate(dets_by_frame, gts_by_frame, class_label, level,
                iou_threshold, score_floor, stats):
    scores, positives, n_eligible = [], [], 0
    for frame in sorted(set(gts_by_frame) | set(dets_by_frame)):
        m = _match_frame(dets_by_frame.get(frame, ()),
                         gts_by_frame.get(frame, ()), class_label, level,
                         iou_threshold, score_floor, stats)
        scores.extend(m.scores)
        positives.extend(m.positives)
        n_eligible += m.n_eligible
    return np.asarray(scores), np.asarray(positives, dtype=bool), n_eligible


def _recall_grid(recall_points):
    if recall_points == 40:
        return np.arange(1, 41) / 40.0
    if recall_points == 11:
        return np.arange(0, 11) / 10.0
    raise InvalidArgument(f"recall_points must be 11 or 40: {recall_points}")


def average_precision(dets_by_frame, gts_by_frame, class_label, level,
                      iou_threshold, recall_points=40, score_floor=0.0,
                      stats=None):
    """
    AP of *class_label* at difficulty *level*, or None when no ground
    truth is eligible.

    Both mappings go from frame id to a list of boxes.
    """
    return _interpolated_ap(*_accumulate(
        dets_by_frame, gts_by_frame, class_label, level, iou_threshold,
        score_floor, stats), recall_points)


def _interpolated_ap(scores, positives, n_eligible, recall_points):
    grid = _recall_grid(recall_points)
    if n_eligible == 0:
        return None
    if not len(scores):
        return 0.0
    order = np.argsort(-scores, kind='stable')
    tp = np.cumsum(positives[order])
    fp = np.cumsum(~positives[order])
    recalls = tp / n_eligible
    precisions = tp / (tp + fp)
    # Precision envelope: the best precision at this recall or beyond.
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    at = np.searchsorted(recalls, grid - 1e-12, side='left')
    interpolated = np.where(at < len(envelope),
                            envelope[np.minimum(at, len(envelope) - 1)], 0.0)
    return float(np.mean(interpolated))


def recall(dets_by_frame, gts_by_frame, class_label, level, iou_threshold,
           score_floor=0.0, stats=None):
    """Fraction of eligible ground truths found, or None if there are none.
    """
    _, positives, n_eligible = _accumulate(
        dets_by_frame, gts_by_frame, class_label, level, iou_threshold,
        score_floor, stats)
    if n_eligible == 0:
        return None
    return int(np.count_nonzero(positives)) / n_eligible


def overall_accuracy(aps):
    """Mean of the APs that are not None; None if all are."""
    defined = [ap for ap in aps if ap is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


def evaluate_class(dets_by_frame, gts_by_frame, class_label, config=None,
                   stats=None):
    """
    Everything the report needs for one class over one set of frames.

    Returns a dict with ``ap`` and ``recall`` (keyed by level), ``oa``,
    ``recall_mean``, the summed bug ``counts``, ``n_det`` and
    ``gt_misses``.
    """
    config = config or EvaluationConfig()
    threshold = config.threshold(class_label)
    aps, recalls = {}, {}
    for level in DifficultyLevel:
        scores, positives, n_eligible = _accumulate(
            dets_by_frame, gts_by_frame, class_label, level, threshold,
            config.score_floor, stats if level is DifficultyLevel.HARD
            else None)
        aps[level] = _interpolated_ap(scores, positives, n_eligible,
                                      config.recall_points)
        recalls[level] = None if n_eligible == 0 \
            else int(np.count_nonzero(positives)) / n_eligible
    counts = dict.fromkeys(BUG_CATEGORIES, 0)
    gt_misses = 0
    for frame in sorted(set(gts_by_frame) | set(dets_by_frame)):
        dets = [d for d in dets_by_frame.get(frame, ())
                if d.class_label == class_label]
        result = classify_detections(dets, gts_by_frame.get(frame, ()),
                                     config.iou_thresholds,
                                     config.score_floor)
        for category, n in result.counts().items():
            counts[category] += n
        gt_misses += sum(
            1 for j, g in enumerate(gts_by_frame.get(frame, ()))
            if g.class_label == class_label
            and result.gt_matched_by[j] is None)
    return {
        'ap': aps,
        'oa': overall_accuracy(aps.values()),
        'recall': recalls,
        'recall_mean': overall_accuracy(recalls.values()),
        'counts': counts,
        'n_det': sum(counts.values()),
        'gt_misses': gt_misses,
    }
