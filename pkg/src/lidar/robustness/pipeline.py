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
"""Batch commands

Each command works frame by frame. With ``jobs > 1`` frames are spread
over a process pool with a bounded number of pending units; the parent
process notifies every provenance event, so a `ProvenanceLog` opened
there sees all of them.
"""
import collections
import concurrent.futures
import contextlib
import logging
import os
import pathlib
import shutil
from typing import NamedTuple

import zope.event

from lidar.robustness import catalog
from lidar.robustness import kitti
from lidar.robustness.denoise import knn_outlier_removal
from lidar.robustness.evaluation import EvaluationConfig
from lidar.robustness.evaluation import evaluate_class
from lidar.robustness.events import ProvenanceLog
from lidar.robustness.exceptions import MissingBaseline
from lidar.robustness.interfaces import FrameCorrupted
from lidar.robustness.interfaces import FrameDenoised
from lidar.robustness.interfaces import FrameFailed
from lidar.robustness.interfaces import IScatteringModel
from lidar.robustness.report import format_report
from lidar.robustness.robustness import CLEAN
from lidar.robustness.robustness import RobustnessReport
from lidar.robustness.stream import ALGORITHM_ID
from lidar.robustness.stream import RandomStream
from lidar.robustness.stream import derive_seed
from lidar.robustness.weather import SimplifiedScatteringModel
from lidar.robustness.weather import WeatherConfig


__all__ = [
    'BatchSummary',
    'select_frames',
    'cmd_corrupt',
    'cmd_denoise',
    'cmd_evaluate',
    'cmd_report',
]

logger = logging.getLogger(__name__)

PROVENANCE_FILE = 'provenance.jsonl'
REPORT_CSV = 'robustness.csv'
REPORT_TEXT = 'robustness.txt'
# Pending units per worker.
QUEUE_DEPTH = 4


class BatchSummary(NamedTuple):
    done: int
    failed: int


def select_frames(manifest):
    """The frame ids a manifest covers, after ``subset`` sampling."""
    frames = list(manifest.frames) or kitti.list_frames(
        manifest.velodyne_dir, '.bin')
    frames = sorted(frames)
    if manifest.subset and manifest.subset < len(frames):
        stream = RandomStream(derive_seed(manifest.seed, 'subset'))
        picked = stream.choose_without_replacement(len(frames),
                                                   manifest.subset)
        frames = [frames[i] for i in picked]
    return frames


def _scattering_model(weather_config):
    """
    The model a corrupt run uses: the registered one, unless that is the
    stock `SimplifiedScatteringModel`, which is rebuilt from the run's
    ``[weather]`` settings.
    """
    current = catalog.registry.getUtility(IScatteringModel)
    if type(current) is SimplifiedScatteringModel \
            and current.config == WeatherConfig():
        return SimplifiedScatteringModel(weather_config)
    return current


def _init_worker(model, n_layers):
    catalog.provide_scattering_model(model)
    catalog.provide_layer_count(n_layers)


def _attempt(work, unit):
    try:
        return unit, work(*unit), None
    except Exception as e:
        logger.debug("unit %r failed", unit, exc_info=True)
        return unit, None, e


def _run(units, work, jobs, settings=None):
    """
    Yield ``(unit, result, error)`` for each unit, in unit order.

    *settings* is ``(model, n_layers)`` for the corruption registry;
    it only applies while the units run.
    """
    if jobs <= 1:
        scope = catalog.configured(*settings) if settings \
            else contextlib.nullcontext()
        with scope:
            for unit in units:
                yield _attempt(work, unit)
        return
    units = iter(enumerate(units))
    with concurrent.futures.ProcessPoolExecutor(
            max_workers=jobs,
            initializer=_init_worker if settings else None,
            initargs=settings or ()) as pool:
        pending = {}
        finished = {}
        next_index = 0
        while True:
            while len(pending) + len(finished) < jobs * QUEUE_DEPTH:
                item = next(units, None)
                if item is None:
                    break
                pending[pool.submit(work, *item[1])] = item
            if not pending and not finished:
                return
            if pending:
                done, _ = concurrent.futures.wait(
                    pending, return_when=concurrent.futures.FIRST_COMPLETED)
                for future in done:
                    index, unit = pending.pop(future)
                    try:
                        finished[index] = (unit, future.result(), None)
                    except Exception as e:
                        finished[index] = (unit, None, e)
            while next_index in finished:
                yield finished.pop(next_index)
                next_index += 1


def _read_calib(manifest, frame):
    if manifest.labels_in_lidar:
        return None
    return kitti.read_calibration(
        os.path.join(manifest.calib_dir, frame + '.txt'))


def _copy_clean(source, target, link):
    if os.path.lexists(target):
        os.remove(target)
    if link:
        os.symlink(os.path.abspath(source), target)
    else:
        shutil.copyfile(source, target)


def _corrupt_unit(manifest, frame, kind, severity):
    corruption = catalog.lookup_corruption(kind)
    seed = manifest.frame_seed(frame, kind, severity)
    bin_in = os.path.join(manifest.velodyne_dir, frame + '.bin')
    bin_out = os.path.join(manifest.output_dir(kind, severity),
                           frame + '.bin')
    label_in = os.path.join(manifest.labels_dir, frame + '.txt')
    label_out = os.path.join(manifest.output_dir(kind, severity, 'label_2'),
                             frame + '.txt')
    record = {'frame': frame, 'kind': kind, 'severity': severity,
              'seed': seed, 'algorithm': ALGORITHM_ID}
    if severity == 0:
        _copy_clean(bin_in, bin_out, manifest.link_clean)
        if corruption.mutates_labels:
            _copy_clean(label_in, label_out, manifest.link_clean)
        n = os.path.getsize(bin_in) // kitti.BYTES_PER_POINT
        record.update(n_in=n, n_out=n, stats={})
        return record

    stats = collections.Counter()
    cloud = kitti.read_point_cloud(bin_in, stats)
    boxes, dont_care, calib = (), (), None
    if corruption.level == 'object':
        calib = _read_calib(manifest, frame)
        labels = kitti.read_labels(label_in, calib, manifest.labels_in_lidar)
        boxes, dont_care = labels.boxes, labels.dont_care
    result = catalog.apply_corruption(
        kind, cloud, boxes, severity, RandomStream(seed), stats=stats,
        classes=set(manifest.targets) or None)
    kitti.write_point_cloud(result.cloud, bin_out)
    if corruption.mutates_labels:
        kitti.write_labels(result.boxes, calib, label_out,
                           manifest.labels_in_lidar, dont_care)
    record.update(n_in=len(cloud), n_out=len(result.cloud),
                  stats=dict(stats))
    return record


def cmd_corrupt(manifest, jobs=1, log_path=None):
    """
    Write every (frame, kind, severity) of *manifest* under its output
    root, logging provenance to *log_path* (default
    ``<output>/provenance.jsonl``).
    """
    frames = select_frames(manifest)
    for kind in manifest.kinds:
        for severity in manifest.severities:
            os.makedirs(manifest.output_dir(kind, severity), exist_ok=True)
            if catalog.lookup_corruption(kind).mutates_labels:
                os.makedirs(manifest.output_dir(kind, severity, 'label_2'),
                            exist_ok=True)
    units = ((manifest, frame, kind, severity)
             for frame in frames
             for kind in manifest.kinds
             for severity in manifest.severities)
    log_path = log_path or os.path.join(manifest.output, PROVENANCE_FILE)
    done = failed = 0
    settings = (_scattering_model(manifest.weather), manifest.n_layers)
    with ProvenanceLog(log_path):
        for unit, record, error in _run(units, _corrupt_unit, jobs,
                                        settings):
            _, frame, kind, severity = unit
            if error is not None:
                failed += 1
                logger.error("%s %s@%d failed: %s", frame, kind, severity,
                             error)
                zope.event.notify(FrameFailed({
                    'frame': frame, 'kind': kind, 'severity': severity,
                    'error': str(error)}))
                continue
            done += 1
            zope.event.notify(FrameCorrupted(record))
    logger.info("corrupted %d units, %d failed", done, failed)
    return BatchSummary(done, failed)


def _denoise_unit(source, target, k, n_sigma, per_cluster):
    stats = collections.Counter()
    cloud = kitti.read_point_cloud(source, stats)
    result = knn_outlier_removal(cloud, k, n_sigma, per_cluster, stats)
    os.makedirs(os.path.dirname(target), exist_ok=True)
    if result.cloud is cloud and not stats['reflectance_clamped']:
        shutil.copyfile(source, target)
    else:
        kitti.write_point_cloud(result.cloud, target)
    return {'frame': cloud.frame_id, 'path': str(target),
            'n_in': len(cloud), 'n_out': len(result.cloud),
            'removed': len(result.removed), 'skipped': result.skipped,
            'k': k, 'n_sigma': n_sigma, 'per_cluster': per_cluster}


def cmd_denoise(input_dir, output_dir, k=50, n_sigma=3.0, per_cluster=False,
                jobs=1, log_path=None):
    """
    Filter every ``.bin`` below *input_dir* into the same relative path
    below *output_dir*.
    """
    input_dir, output_dir = pathlib.Path(input_dir), pathlib.Path(output_dir)
    sources = sorted(input_dir.rglob('*.bin')) if input_dir.is_dir() else []
    units = [(str(s), str(output_dir / s.relative_to(input_dir)), k,
              n_sigma, per_cluster) for s in sources]
    os.makedirs(output_dir, exist_ok=True)
    log_path = log_path or os.path.join(output_dir, PROVENANCE_FILE)
    done = failed = removed = 0
    with ProvenanceLog(log_path):
        for unit, record, error in _run(units, _denoise_unit, jobs):
            if error is not None:
                failed += 1
                logger.error("%s failed: %s", unit[0], error)
                zope.event.notify(FrameFailed({'path': unit[0],
                                               'error': str(error)}))
                continue
            done += 1
            removed += record['removed']
            zope.event.notify(FrameDenoised(record))
    logger.info("denoised %d frames, removed %d points, %d failed",
                done, removed, failed)
    return BatchSummary(done, failed)


def _load_boxes(directory, frames, calibs, lidar_frame, detections):
    reader = kitti.read_detections if detections else kitti.read_labels
    loaded = {}
    for frame in frames:
        path = os.path.join(directory, frame + '.txt')
        if not os.path.exists(path):
            if detections:
                logger.debug("%s: no detections for %s", directory, frame)
            loaded[frame] = []
            continue
        result = reader(path, calibs.get(frame), lidar_frame)
        loaded[frame] = list(result if detections else result.boxes)
    return loaded


def _cells(detector_dir, kinds):
    """``(kind, severity)`` directories present for one detector."""
    cells = []
    for kind in kinds:
        kind_dir = os.path.join(detector_dir, kind)
        if not os.path.isdir(kind_dir):
            continue
        for entry in sorted(os.listdir(kind_dir)):
            if entry.isdigit() and 1 <= int(entry) <= 5:
                cells.append((kind, int(entry)))
    return cells


def cmd_evaluate(gt_dir, det_dir, calib_dir=None, classes=None, kinds=None,
                 config=None, labels_in_lidar=False, corrupted_root=None,
                 output_dir=None):
    """
    Evaluate ``det/<detector>/clean`` and ``det/<detector>/<kind>/<sev>``
    against the ground truth and return a `RobustnessReport`.

    For label-mutating kinds, ground truth is read from
    ``<corrupted_root>/<kind>/<sev>/label_2`` when it exists. With
    *output_dir* the CSV and text reports are written there.
    """
    config = config or EvaluationConfig()
    classes = list(classes or ('Car', 'Pedestrian', 'Cyclist'))
    frames = kitti.list_frames(gt_dir, '.txt')
    calibs = {}
    if not labels_in_lidar:
        calibs = {frame: kitti.read_calibration(
            os.path.join(calib_dir, frame + '.txt')) for frame in frames}
    gts = _load_boxes(gt_dir, frames, calibs, labels_in_lidar, False)
    detectors = sorted(
        d for d in os.listdir(det_dir)
        if os.path.isdir(os.path.join(det_dir, d))) \
        if os.path.isdir(det_dir) else []
    declared = list(kinds) if kinds else [
        k for k in catalog.KINDS
        if any(os.path.isdir(os.path.join(det_dir, d, k))
               for d in detectors)]
    for kind in declared:
        catalog.lookup_corruption(kind)

    stats = collections.Counter()
    results = {}
    for detector in detectors:
        root = os.path.join(det_dir, detector)
        clean_dir = os.path.join(root, CLEAN)
        if not os.path.isdir(clean_dir):
            raise MissingBaseline(f"{clean_dir} does not exist")
        cells = [(CLEAN, 0, clean_dir)] + [
            (kind, sev, os.path.join(root, kind, str(sev)))
            for kind, sev in _cells(root, declared)]
        for kind, severity, directory in cells:
            dets = _load_boxes(directory, frames, calibs, labels_in_lidar,
                               True)
            cell_gts = gts
            if corrupted_root and kind in catalog.LABEL_MUTATING:
                mutated = os.path.join(corrupted_root, kind, str(severity),
                                       'label_2')
                if os.path.isdir(mutated):
                    cell_gts = _load_boxes(mutated, frames, calibs,
                                           labels_in_lidar, False)
            for class_label in classes:
                results[(detector, class_label, kind, severity)] = \
                    evaluate_class(dets, cell_gts, class_label, config,
                                   stats)
            logger.info("evaluated %s %s@%d", detector, kind, severity)

    metadata = {
        'corruptions': declared,
        'frames': len(frames),
        'score_floor': config.score_floor,
        'recall_points': config.recall_points,
        'iou_thresholds': dict(config.iou_thresholds),
        'stats': dict(stats),
    }
    report = RobustnessReport.from_results(
        results, declared, metadata, allow_partial=config.allow_partial)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        report.to_csv(os.path.join(output_dir, REPORT_CSV))
        with open(os.path.join(output_dir, REPORT_TEXT), 'w') as f:
            f.write(format_report(report))
    return report


def cmd_report(paths):
    """Render the CSV reports at *paths* as text tables."""
    return '\n'.join(format_report(RobustnessReport.from_csv(path))
                     for path in paths)
