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
"""The corruption catalog

Every corruption is a named utility in `registry`, providing
`~lidar.robustness.interfaces.ISceneCorruption` or
`~lidar.robustness.interfaces.IObjectCorruption`. The weather kinds get
their physics from the registry's
`~lidar.robustness.interfaces.IScatteringModel` utility, so a different
model can be swapped in with `provide_scattering_model`.
"""
import contextlib
import functools
import logging

from zope.interface import implementer
from zope.interface.registry import Components

from lidar.robustness import objects
from lidar.robustness import scene
from lidar.robustness import weather
from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.exceptions import UnknownCorruption
from lidar.robustness.geometry import SEVERITIES
from lidar.robustness.geometry import Severity
from lidar.robustness.interfaces import IObjectCorruption
from lidar.robustness.interfaces import IScatteringModel
from lidar.robustness.interfaces import ISceneCorruption
from lidar.robustness.objects import CorruptedFrame
from lidar.robustness.objects import CorruptionSpec


__all__ = [
    'TAXONOMY',
    'CATEGORIES',
    'KINDS',
    'LABEL_MUTATING',
    'registry',
    'lookup_corruption',
    'category_of',
    'apply_corruption',
    'random_corruption',
    'provide_scattering_model',
    'provide_layer_count',
    'configured',
]

logger = logging.getLogger(__name__)

CATEGORIES = ('weather', 'noise', 'density', 'transformation')

# name -> (level, category, kernel, options)
_DEFINITIONS = {
    'rain': ('scene', 'weather', None, {'kind': 'rain'}),
    'snow': ('scene', 'weather', None, {'kind': 'snow'}),
    'fog': ('scene', 'weather', None, {'kind': 'fog'}),
    'uniform_rad': ('scene', 'noise', scene.radial_noise,
                    {'kind': 'uniform'}),
    'gaussian_rad': ('scene', 'noise', scene.radial_noise,
                     {'kind': 'gaussian'}),
    'impulse_rad': ('scene', 'noise', scene.radial_noise,
                    {'kind': 'impulse'}),
    'upsample': ('scene', 'noise', scene.scene_upsample, {}),
    'background': ('scene', 'noise', scene.background_noise, {}),
    'cutout': ('scene', 'density', scene.scene_cutout, {}),
    'local_dec': ('scene', 'density', scene.scene_local_density,
                  {'mode': 'dec'}),
    'local_inc': ('scene', 'density', scene.scene_local_density,
                  {'mode': 'inc'}),
    'beam_del': ('scene', 'density', scene.beam_delete, {}),
    'layer_del': ('scene', 'density', scene.layer_delete, {}),
    'uniform': ('object', 'noise', objects.object_noise,
                {'kind': 'uniform'}),
    'gaussian': ('object', 'noise', objects.object_noise,
                 {'kind': 'gaussian'}),
    'impulse': ('object', 'noise', objects.object_noise,
                {'kind': 'impulse'}),
    'upsample_obj': ('object', 'noise', objects.object_noise,
                     {'kind': 'upsample'}),
    'cutout_obj': ('object', 'density', objects.object_density,
                   {'mode': 'cutout'}),
    'local_dec_obj': ('object', 'density', objects.object_density,
                      {'mode': 'dec'}),
    'local_inc_obj': ('object', 'density', objects.object_density,
                      {'mode': 'inc'}),
    'translation': ('object', 'transformation', objects.object_pose,
                    {'mode': 'translate'}),
    'rotation': ('object', 'transformation', objects.object_pose,
                 {'mode': 'rotate'}),
    'shear': ('object', 'transformation', objects.object_shear, {}),
    'ffd': ('object', 'transformation', objects.object_ffd, {}),
    'scale': ('object', 'transformation', objects.object_scale, {}),
}

TAXONOMY = {name: (level, category)
            for name, (level, category, _, _) in _DEFINITIONS.items()}
KINDS = tuple(_DEFINITIONS)
LABEL_MUTATING = frozenset(('scale', 'rotation', 'translation'))


class _Corruption:

    def __init__(self, name, level, category, kernel, options):
        self.name = name
        self.level = level
        self.category = category
        self.mutates_labels = name in LABEL_MUTATING
        self._kernel = functools.partial(kernel, **options) \
            if kernel is not None else None
        self._options = options

    def __repr__(self):
        return f"<{self.__class__.__name__} {self.name}>"


@implementer(ISceneCorruption)
class SceneCorruption(_Corruption):

    def __call__(self, cloud, severity, stream, stats=None):
        if self._kernel is None:
            model = registry.getUtility(IScatteringModel)
            return weather.weather(cloud, self._options['kind'], severity,
                                   stream, stats=stats, model=model)
        return self._kernel(cloud, severity=severity, stream=stream,
                            stats=stats)


@implementer(IObjectCorruption)
class ObjectCorruption(_Corruption):

    def __call__(self, cloud, boxes, severity, stream, stats=None,
                 classes=None):
        return self._kernel(cloud, boxes, severity=severity, stream=stream,
                            stats=stats, classes=classes)


registry = Components('lidar.robustness')


def _register_defaults():
    for name, (level, category, kernel, options) in _DEFINITIONS.items():
        factory = SceneCorruption if level == 'scene' else ObjectCorruption
        provided = ISceneCorruption if level == 'scene' \
            else IObjectCorruption
        registry.registerUtility(
            factory(name, level, category, kernel, options), provided, name)
    provide_scattering_model(weather.SimplifiedScatteringModel())


def provide_scattering_model(model):
    """Make *model* the physics of the rain, snow and fog corruptions."""
    registry.registerUtility(model, IScatteringModel)


def provide_layer_count(n_layers):
    """Make ``layer_del`` bin elevation into *n_layers* beams."""
    if n_layers not in scene.LAYER_COUNTS:
        raise InvalidArgument(
            f"n_layers must be one of {scene.LAYER_COUNTS}: {n_layers}")
    level, category, kernel, options = _DEFINITIONS['layer_del']
    registry.registerUtility(
        SceneCorruption('layer_del', level, category, kernel,
                        dict(options, n_layers=n_layers)),
        ISceneCorruption, 'layer_del')


@contextlib.contextmanager
def configured(model=None, n_layers=None):
    """
    Within the block use *model* for the weather kinds and *n_layers*
    for ``layer_del`` (``None`` keeps what is registered). The previous
    utilities are registered again on exit.
    """
    saved = [(registry.getUtility(IScatteringModel), IScatteringModel, ''),
             (registry.getUtility(ISceneCorruption, 'layer_del'),
              ISceneCorruption, 'layer_del')]
    try:
        if model is not None:
            provide_scattering_model(model)
        if n_layers is not None:
            provide_layer_count(n_layers)
        yield
    finally:
        for component, provided, name in saved:
            registry.registerUtility(component, provided, name)


def lookup_corruption(name):
    """Return the corruption registered as *name*.

    Raises `~lidar.robustness.exceptions.UnknownCorruption` otherwise.
    """
    for provided in (ISceneCorruption, IObjectCorruption):
        corruption = registry.queryUtility(provided, name)
        if corruption is not None:
            return corruption
    raise UnknownCorruption(name)


def category_of(name):
    try:
        return TAXONOMY[name][1]
    except KeyError:
        raise UnknownCorruption(name) from None


def apply_corruption(name, cloud, boxes, severity, stream, stats=None,
                     classes=None):
    """Run corruption *name* and return a
    `~lidar.robustness.objects.CorruptedFrame` whatever its level.
    """
    corruption = lookup_corruption(name)
    severity = Severity(severity)
    if IObjectCorruption.providedBy(corruption):
        return corruption(cloud, boxes, severity, stream, stats=stats,
                          classes=classes)
    return CorruptedFrame(corruption(cloud, severity, stream, stats=stats),
                          tuple(boxes),
                          CorruptionSpec(name, int(severity), stream.seed))


def random_corruption(cloud, boxes, stream, kinds=KINDS,
                      severities=SEVERITIES[1:], stats=None, classes=None):
    """Apply a uniformly drawn ``(kind, severity)`` to a frame.

    Meant as a training-time augmentation hook; the draw comes from
    *stream* so augmentation is reproducible.
    """
    kinds = tuple(kinds)
    severities = tuple(severities)
    name = kinds[int(stream.integers(0, len(kinds)))]
    severity = severities[int(stream.integers(0, len(severities)))]
    logger.debug("augmenting %s with %s@%d", cloud.frame_id, name, severity)
    return apply_corruption(name, cloud, boxes, severity, stream,
                            stats=stats, classes=classes)


def _reset():
    # Components.__init__ doubles as a reset.
    registry.__init__(registry.__name__)
    _register_defaults()


_register_defaults()

try:
    from zope.testing.cleanup import addCleanUp
except ImportError:  # pragma: no cover
    pass
else:
    addCleanUp(_reset)
