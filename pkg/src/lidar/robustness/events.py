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
"""Provenance logging

Batch commands `zope.event.notify` one provenance event per unit of
work. A `ProvenanceLog` subscribes to them while it is open and writes
each record as one JSON line.
"""
import json
import logging

import zope.event

from lidar.robustness.interfaces import IFrameFailed
from lidar.robustness.interfaces import IProvenanceEvent


__all__ = [
    'ProvenanceLog',
]

logger = logging.getLogger(__name__)


class ProvenanceLog:
    """
    Append provenance records to *path*.

    Use as a context manager; events notified while it is open are
    written in notification order.
    """

    def __init__(self, path):
        self.path = path
        self.written = 0
        self.failed = 0
        self._file = None

    def __enter__(self):
        self._file = open(self.path, 'a', encoding='utf-8')
        zope.event.subscribers.append(self)
        return self

    def __exit__(self, *exc_info):
        try:
            zope.event.subscribers.remove(self)
        except ValueError:
            pass
        self._file.close()
        self._file = None

    def __call__(self, event):
        if not IProvenanceEvent.providedBy(event):
            return
        record = dict(event.object)
        record['event'] = type(event).__name__
        if IFrameFailed.providedBy(event):
            self.failed += 1
        self._file.write(json.dumps(record, sort_keys=True,
                                    default=_jsonable) + '\n')
        self._file.flush()
        self.written += 1


def _jsonable(value):
    if hasattr(value, 'item'):
        return value.item()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"not JSON serializable: {value!r}")
