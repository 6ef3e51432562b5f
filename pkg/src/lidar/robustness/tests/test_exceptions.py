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
""" lidar.robustness.exceptions unit tests
"""
import unittest


class FormatErrorTests(unittest.TestCase):

    def _getTargetClass(self):
        from lidar.robustness.exceptions import FormatError
        return FormatError

    def _makeOne(self, *args, **kw):
        return self._getTargetClass()(*args, **kw)

    def test___str__w_line(self):
        err = self._makeOne('expected 15 fields', 'label_2/000001.txt', 3)
        self.assertEqual(str(err),
                         'label_2/000001.txt:3: expected 15 fields')
        self.assertEqual(err.line, 3)
        self.assertIsNone(err.offset)

    def test___str__w_offset(self):
        err = self._makeOne('truncated record', 'x.bin', offset=48)
        self.assertEqual(str(err),
                         'x.bin at byte offset 48: truncated record')

    def test___str__wo_location(self):
        err = self._makeOne('no transform', 'calib.txt')
        self.assertEqual(str(err), 'calib.txt: no transform')

    def test_is_value_error(self):
        from lidar.robustness.exceptions import RobustnessError
        err = self._makeOne('bad', 'p')
        self.assertIsInstance(err, ValueError)
        self.assertIsInstance(err, RobustnessError)


class IncompleteTableTests(unittest.TestCase):

    def _makeOne(self, *args):
        from lidar.robustness.exceptions import IncompleteTable
        return IncompleteTable(*args)

    def test_missing_sorted(self):
        err = self._makeOne('mCE', [('snow', 2), ('fog', 5)])
        self.assertEqual(err.missing, (('fog', 5), ('snow', 2)))
        self.assertEqual(err.metric, 'mCE')

    def test___str__(self):
        err = self._makeOne('mCE', [('snow', 2), ('fog', 5)])
        self.assertEqual(
            str(err),
            'Cannot compute mCE over an incomplete table;'
            ' missing cells: fog@5, snow@2')


class UnknownCorruptionTests(unittest.TestCase):

    def test___str__(self):
        from lidar.robustness.exceptions import UnknownCorruption
        self.assertEqual(str(UnknownCorruption('hail')),
                         "Unknown corruption kind 'hail'")

    def test_is_component_lookup_error(self):
        from zope.interface.interfaces import ComponentLookupError

        from lidar.robustness.exceptions import UnknownCorruption
        self.assertTrue(issubclass(UnknownCorruption, ComponentLookupError))
