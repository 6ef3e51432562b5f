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
"""Robustness metrics

``CE`` is the drop in overall accuracy from the clean data to one
(corruption, severity) cell, and ``mCE`` its mean over severities 1..5
and every corruption. ``BR`` is the share of detections in each bug
category, ``CR`` the increase of a bug rate over clean, and ``mCR`` the
mean ``CR``.

All values are fractions; reports format them as percentages.
"""
import logging
import math

import pandas as pd

from zope.interface import implementer

from lidar.robustness.catalog import category_of
from lidar.robustness.evaluation import BUG_CATEGORIES
from lidar.robustness.exceptions import IncompleteTable
from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.exceptions import MissingBaseline
from lidar.robustness.interfaces import IRobustnessReport


__all__ = [
    'CLEAN',
    'MEAN',
    'ALL',
    'COLUMNS',
    'CORRUPTED_SEVERITIES',
    'corruption_error',
    'mean_corruption_error',
    'bug_rate',
    'corruption_risk',
    'mean_corruption_risk',
    'RobustnessReport',
]

logger = logging.getLogger(__name__)

CLEAN = 'clean'
MEAN = 'mean'
ALL = 'all'
CORRUPTED_SEVERITIES = (1, 2, 3, 4, 5)
RISK_CATEGORIES = ('FC', 'FD', 'MD')

COLUMNS = (
    'detector', 'class', 'corruption', 'category', 'severity', 'oa', 'ce',
    'recall', 'ce_recall', 'br_td', 'br_fc', 'br_fd', 'br_md', 'cr_fc',
    'cr_fd', 'cr_md', 'n_det', 'gt_misses',
)


def _defined(value):
    return value is not None and not (isinstance(value, float)
                                      and math.isnan(value))


def corruption_error(oa_clean, oa_corrupted):
    """``oa_clean - oa_corrupted``; None if either is undefined."""
    if not (_defined(oa_clean) and _defined(oa_corrupted)):
        return None
    return oa_clean - oa_corrupted


def _table_mean(metric, table, corruptions, severities, allow_partial):
    if corruptions is None:
        corruptions = sorted({c for c, _ in table})
    cells = [(c, s) for c in corruptions for s in severities]
    missing = [cell for cell in cells if not _defined(table.get(cell))]
    if missing and not allow_partial:
        raise IncompleteTable(metric, missing)
    present = [table[cell] for cell in cells if cell not in missing]
    if missing:
        logger.warning("%s over %d of %d cells", metric, len(present),
                       len(cells))
    if not present:
        return None
    return sum(present) / len(present)


def mean_corruption_error(ce_table, corruptions=None,
                          severities=CORRUPTED_SEVERITIES,
                          allow_partial=False):
    """
    Mean of a ``{(corruption, severity): CE}`` table.

    The table must hold a value for every declared corruption (by default
    those appearing in it) at every severity, unless *allow_partial*.
    """
    return _table_mean('mCE', ce_table, corruptions, severities,
                       allow_partial)


def bug_rate(counts):
    """
    ``{category: rate}`` from a match result or a ``{category: count}``
    mapping; None when there are no detections.
    """
    if hasattr(counts, 'counts'):
        counts = counts.counts()
    total = sum(counts.get(c, 0) for c in BUG_CATEGORIES)
    if total == 0:
        return None
    return {c: counts.get(c, 0) / total for c in BUG_CATEGORIES}


def corruption_risk(br_corrupted, br_clean):
    """``{category: BR_corrupted - BR_clean}``; None if either is None."""
    if br_corrupted is None or br_clean is None:
        return None
    return {c: br_corrupted[c] - br_clean[c] for c in BUG_CATEGORIES}


def mean_corruption_risk(cr_table, corruptions=None,
                         severities=CORRUPTED_SEVERITIES,
                         allow_partial=False):
    """Mean of a ``{(corruption, severity): CR}`` table for one category.
    """
    return _table_mean('mCR', cr_table, corruptions, severities,
                       allow_partial)


def _row(detector, class_label, corruption, category, severity, result,
         clean):
    br = bug_rate(result['counts'])
    row = dict.fromkeys(COLUMNS)
    row.update(
        detector=detector,
        **{'class': class_label},
        corruption=corruption,
        category=category,
        severity=str(severity),
        oa=result['oa'],
        recall=result['recall_mean'],
        n_det=result['n_det'],
        gt_misses=result['gt_misses'],
    )
    if br is not None:
        for c in BUG_CATEGORIES:
            row['br_' + c.lower()] = br[c]
    if clean is not None:
        row['ce'] = corruption_error(clean['oa'], result['oa'])
        row['ce_recall'] = corruption_error(clean['recall_mean'],
                                            result['recall_mean'])
        cr = corruption_risk(br, bug_rate(clean['counts']))
        if cr is not None:
            for c in RISK_CATEGORIES:
                row['cr_' + c.lower()] = cr[c]
    return row


@implementer(IRobustnessReport)
class RobustnessReport:
    """
    One row per (detector, class, corruption, severity) cell.

    The clean cell of each (detector, class) has corruption ``clean`` and
    severity ``0``. Aggregate rows use severity ``mean``: one per
    corruption, one per category (corruption ``all``) and one overall
    (corruption and category ``all``), whose ``ce`` is mCE and whose
    ``cr_*`` are mCR.
    """

    def __init__(self, rows, metadata=None):
        rows = pd.DataFrame(rows)
        for column in COLUMNS:
            if column not in rows:
                rows[column] = None
        self.rows = rows.loc[:, list(COLUMNS)]
        self.metadata = dict(metadata or {})

    def __repr__(self):
        return f"<RobustnessReport {len(self.rows)} rows>"

    @classmethod
    def from_results(cls, results, corruptions, metadata=None,
                     allow_partial=False):
        """
        Build a report from ``{(detector, class, corruption, severity):
        result}`` where each result is an
        `~lidar.robustness.evaluation.evaluate_class` mapping and the clean
        cell is keyed ``(detector, class, 'clean', 0)``.

        *corruptions* are the kinds the run declared; aggregates refuse
        to average over missing cells unless *allow_partial*.
        """
        metadata = dict(metadata or {})
        metadata['allow_partial'] = bool(allow_partial)
        metadata.setdefault('corruptions', list(corruptions))
        pairs = sorted({(d, k) for d, k, _, _ in results})
        rows = []
        for detector, class_label in pairs:
            clean = results.get((detector, class_label, CLEAN, 0))
            if clean is None:
                raise MissingBaseline(
                    f"no clean results for {detector}/{class_label}")
            rows.append(_row(detector, class_label, CLEAN, CLEAN, 0, clean,
                             clean))
            for corruption in corruptions:
                for severity in CORRUPTED_SEVERITIES:
                    result = results.get(
                        (detector, class_label, corruption, severity))
                    if result is None:
                        continue
                    rows.append(_row(detector, class_label, corruption,
                                     category_of(corruption), severity,
                                     result, clean))
        report = cls(rows, metadata)
        report._add_aggregates(corruptions, allow_partial)
        return report

    def _cells(self, detector, class_label):
        rows = self.rows
        return rows[(rows['detector'] == detector)
                    & (rows['class'] == class_label)
                    & (rows['corruption'] != CLEAN)
                    & (rows['severity'] != MEAN)]

    def _table(self, detector, class_label, column, corruptions=None):
        cells = self._cells(detector, class_label)
        if corruptions is not None:
            cells = cells[cells['corruption'].isin(list(corruptions))]
        return {(r.corruption, int(r.severity)): getattr(r, column)
                for r in cells.itertuples(index=False)}

    def _declared(self, detector, class_label):
        declared = self.metadata.get('corruptions')
        if declared is None:
            declared = sorted(set(
                self._cells(detector, class_label)['corruption']))
        return list(declared)

    def mean_corruption_error(self, detector, class_label,
                              allow_partial=None, corruptions=None):
        if allow_partial is None:
            allow_partial = self.metadata.get('allow_partial', False)
        corruptions = corruptions or self._declared(detector, class_label)
        return mean_corruption_error(
            self._table(detector, class_label, 'ce', corruptions),
            corruptions, allow_partial=allow_partial)

    def mean_corruption_risk(self, detector, class_label, category,
                             allow_partial=None, corruptions=None):
        if category not in RISK_CATEGORIES:
            raise InvalidArgument(f"no corruption risk for {category!r}")
        if allow_partial is None:
            allow_partial = self.metadata.get('allow_partial', False)
        corruptions = corruptions or self._declared(detector, class_label)
        return mean_corruption_risk(
            self._table(detector, class_label, 'cr_' + category.lower(),
                        corruptions),
            corruptions, allow_partial=allow_partial)

    def _aggregate(self, detector, class_label, corruption, category,
                   corruptions, allow_partial):
        cells = self._cells(detector, class_label)
        cells = cells[cells['corruption'].isin(corruptions)]
        row = dict.fromkeys(COLUMNS)
        row.update(detector=detector, corruption=corruption,
                   category=category, severity=MEAN,
                   **{'class': class_label})
        row['ce'] = self.mean_corruption_error(
            detector, class_label, allow_partial, corruptions)
        for c in RISK_CATEGORIES:
            row['cr_' + c.lower()] = self.mean_corruption_risk(
                detector, class_label, c, allow_partial, corruptions)
        for column in ('oa', 'recall', 'ce_recall', 'br_td', 'br_fc',
                       'br_fd', 'br_md'):
            values = pd.to_numeric(cells[column], errors='coerce').dropna()
            row[column] = float(values.mean()) if len(values) else None
        for column in ('n_det', 'gt_misses'):
            row[column] = int(pd.to_numeric(cells[column]).sum())
        return row

    def _add_aggregates(self, corruptions, allow_partial):
        pairs = self.rows[['detector', 'class']].drop_duplicates()
        extra = []
        for detector, class_label in pairs.itertuples(index=False):
            for corruption in corruptions:
                extra.append(self._aggregate(
                    detector, class_label, corruption,
                    category_of(corruption), [corruption], allow_partial))
            by_category = {}
            for corruption in corruptions:
                by_category.setdefault(category_of(corruption),
                                       []).append(corruption)
            for category, members in by_category.items():
                extra.append(self._aggregate(
                    detector, class_label, ALL, category, members,
                    allow_partial))
            extra.append(self._aggregate(
                detector, class_label, ALL, ALL, list(corruptions),
                allow_partial))
        if extra:
            self.rows = pd.concat([self.rows, pd.DataFrame(extra)],
                                  ignore_index=True).loc[:, list(COLUMNS)]

    def aggregates(self):
        """The ``mean`` rows."""
        return self.rows[self.rows['severity'] == MEAN]

    def to_csv(self, path):
        self.rows.to_csv(path, index=False, float_format='%.10g')

    @classmethod
    def from_csv(cls, path, metadata=None):
        rows = pd.read_csv(path, dtype={'severity': str},
                           keep_default_na=True)
        rows = rows.astype(object).where(rows.notna(), None)
        return cls(rows, metadata)
