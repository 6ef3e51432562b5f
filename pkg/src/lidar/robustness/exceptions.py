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
"""Toolkit-specific exceptions
"""
from zope.interface.interfaces import ComponentLookupError


__all__ = [
    'RobustnessError',
    'InvalidArgument',
    'FormatError',
    'IncompleteTable',
    'MissingBaseline',
    'UnknownCorruption',
]


class RobustnessError(Exception):
    """Base class for errors raised by this package.
    """


class InvalidArgument(RobustnessError, ValueError):
    """An argument violates the precondition of an operation.
    """


class FormatError(RobustnessError, ValueError):
    """
    FormatError(message, path[, line=None, offset=None])

    A file on disk does not follow the expected KITTI layout.

    Exactly one of *line* (1-based, text formats) or *offset* (bytes,
    binary formats) is usually given; the string value cites whichever
    is present.
    """

    def __init__(self, message, path, line=None, offset=None):
        super().__init__(message, path, line, offset)

    @property
    def message(self):
        return self.args[0]

    @property
    def path(self):
        return self.args[1]

    @property
    def line(self):
        return self.args[2]

    @property
    def offset(self):
        return self.args[3]

    @property
    def _str_location(self):
        if self.line is not None:
            return f"{self.path}:{self.line}"
        if self.offset is not None:
            return f"{self.path} at byte offset {self.offset}"
        return str(self.path)

    def __str__(self):
        return f"{self._str_location}: {self.message}"


class IncompleteTable(RobustnessError):
    """
    IncompleteTable(metric, missing)

    A mean over severities and corruptions was requested but *missing*,
    a sequence of ``(corruption, severity)`` pairs, has no value.
    """

    def __init__(self, metric, missing):
        super().__init__(metric, tuple(sorted(missing)))

    @property
    def metric(self):
        return self.args[0]

    @property
    def missing(self):
        return self.args[1]

    def __str__(self):
        cells = ', '.join(f'{kind}@{severity}'
                          for kind, severity in self.missing)
        return (f"Cannot compute {self.metric} over an incomplete table;"
                f" missing cells: {cells}")


class MissingBaseline(RobustnessError):
    """No clean (uncorrupted) results exist to compare against.
    """


class UnknownCorruption(ComponentLookupError, RobustnessError):
    """No corruption is registered under the requested name.
    """

    def __str__(self):
        name = self.args[0] if self.args else '<unknown>'
        return f"Unknown corruption kind {name!r}"
