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
"""Text tables for robustness reports

Values are percentages with two decimals. In the CE tables the lowest
value of each row is marked with ``*``.
"""
import pandas as pd


__all__ = [
    'ce_table',
    'severity_table',
    'bug_table',
    'format_report',
]

MARK = '*'
AVERAGE = 'average'


def _pct(value):
    if value is None or pd.isna(value):
        return '-'
    return f'{100.0 * float(value):.2f}'


def _numeric(frame, column):
    frame = frame.copy()
    frame[column] = pd.to_numeric(frame[column], errors='coerce')
    return frame


def _mark_minimum(table):
    rendered = table.map(_pct)
    for label, row in table.iterrows():
        values = pd.to_numeric(row, errors='coerce')
        if values.notna().any():
            column = values.idxmin()
            rendered.loc[label, column] += MARK
    return rendered


def ce_table(report, class_label):
    """Corruption by detector mCE per corruption, with an average column.

    The last row is the mCE over every corruption.
    """
    rows = report.rows
    overall = rows['category'] == 'all'
    rows = rows[(rows['class'] == class_label) & (rows['severity'] == 'mean')
                & ((rows['corruption'] != 'all') | overall)]
    rows = _numeric(rows, 'ce')
    table = rows.pivot_table(index='corruption', columns='detector',
                             values='ce', aggfunc='mean', sort=False)
    if table.empty:
        return pd.DataFrame(columns=[AVERAGE])
    table[AVERAGE] = table.mean(axis=1)
    order = [c for c in table.index if c != 'all'] + \
        [c for c in table.index if c == 'all']
    table = table.loc[order].rename(index={'all': 'mCE'})
    return _mark_minimum(table)


def severity_table(report, class_label):
    """Corruption by severity CE, averaged over detectors."""
    rows = report.rows
    rows = rows[(rows['class'] == class_label)
                & ~rows['severity'].isin(['mean', '0'])]
    rows = _numeric(rows, 'ce')
    table = rows.pivot_table(index='corruption', columns='severity',
                             values='ce', aggfunc='mean', sort=False)
    if table.empty:
        return pd.DataFrame(columns=[str(s) for s in range(1, 6)])
    return table.map(_pct)


def bug_table(report, class_label):
    """Bug rates averaged over detectors, clean row first."""
    columns = ['br_td', 'br_fc', 'br_fd', 'br_md']
    rows = report.rows
    rows = rows[(rows['class'] == class_label)
                & rows['severity'].isin(['mean', '0'])
                & (rows['corruption'] != 'all')]
    for column in columns:
        rows = _numeric(rows, column)
    table = rows.groupby('corruption', sort=False)[columns].mean()
    table.columns = ['TD', 'FC', 'FD', 'MD']
    if 'clean' in table.index:
        table = table.loc[['clean'] + [c for c in table.index
                                       if c != 'clean']]
    return table.map(_pct)


def _render(title, table):
    if table.empty:
        header = '  '.join(str(c) for c in table.columns)
        return f'{title}\n{header}\n'
    return f'{title}\n{table.to_string()}\n'


def format_report(report):
    """All tables of *report*, one block per class."""
    classes = list(dict.fromkeys(report.rows['class']))
    if not classes:
        return _render('Corruption error (%)',
                       pd.DataFrame(columns=['corruption', AVERAGE]))
    blocks = []
    for class_label in classes:
        blocks.append(_render(f'{class_label}: corruption error (%)',
                              ce_table(report, class_label)))
        blocks.append(_render(f'{class_label}: CE by severity (%)',
                              severity_table(report, class_label)))
        blocks.append(_render(f'{class_label}: bug rates (%)',
                              bug_table(report, class_label)))
    return '\n'.join(blocks)
