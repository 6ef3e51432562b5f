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
"""Run manifests

A manifest is a TOML file::

    [dataset]
    root = "kitti/training"
    velodyne = "velodyne"          # relative to root
    labels = "label_2"
    calib = "calib"
    frames = ["000000", "000001"]  # default: every .bin in velodyne
    classes = ["Car", "Pedestrian", "Cyclist"]  # evaluated classes
    labels_in_lidar = false

    [corruption]
    kinds = ["beam_del", "fog"]    # default: all 25
    severities = [0, 1, 2, 3, 4, 5]
    seed = 0
    subset = 0                     # sample this many frames; 0 = all
    link_clean = false             # symlink severity 0 instead of copy
    targets = ["Car"]              # boxes to corrupt; default: all
    n_layers = 64                  # beams binned by layer_del: 32 or 64

    [output]
    root = "out"

    [weather]
    min_detectable_intensity = 0.002

    [denoise]
    k = 50
    n_sigma = 3.0

    [evaluation]
    recall_points = 40
    iou_thresholds = {Car = 0.7}

Relative paths are resolved against the manifest's directory. Command
line flags override manifest values through `DatasetManifest.replace`.
"""
import dataclasses
import os
import tomllib

from lidar.robustness.catalog import KINDS
from lidar.robustness.catalog import lookup_corruption
from lidar.robustness.evaluation import EvaluationConfig
from lidar.robustness.exceptions import InvalidArgument
from lidar.robustness.geometry import SEVERITIES
from lidar.robustness.geometry import Severity
from lidar.robustness.scene import LAYER_COUNTS
from lidar.robustness.stream import derive_seed
from lidar.robustness.weather import WeatherConfig


__all__ = [
    'DenoiseConfig',
    'DatasetManifest',
    'load_manifest',
]

DEFAULT_CLASSES = ('Car', 'Pedestrian', 'Cyclist')


@dataclasses.dataclass(frozen=True)
class DenoiseConfig:
    k: int = 50
    n_sigma: float = 3.0
    per_cluster: bool = False

    def __post_init__(self):
        if self.k < 2:
            raise InvalidArgument(f"denoise k must be >= 2: {self.k}")
        if not self.n_sigma > 0:
            raise InvalidArgument(
                f"denoise n_sigma must be > 0: {self.n_sigma}")


@dataclasses.dataclass(frozen=True)
class DatasetManifest:
    """Everything a batch run needs to know."""

    root: str = '.'
    velodyne: str = 'velodyne'
    labels: str = 'label_2'
    calib: str = 'calib'
    frames: tuple = ()
    classes: tuple = DEFAULT_CLASSES
    labels_in_lidar: bool = False
    kinds: tuple = KINDS
    severities: tuple = tuple(int(s) for s in SEVERITIES)
    seed: int = 0
    subset: int = 0
    link_clean: bool = False
    targets: tuple = ()
    n_layers: int = 64
    output: str = 'out'
    weather: WeatherConfig = WeatherConfig()
    denoise: DenoiseConfig = DenoiseConfig()
    evaluation: EvaluationConfig = dataclasses.field(
        default_factory=EvaluationConfig)

    def __post_init__(self):
        for kind in self.kinds:
            lookup_corruption(kind)
        object.__setattr__(self, 'kinds', tuple(self.kinds))
        object.__setattr__(self, 'severities',
                           tuple(int(Severity(s)) for s in self.severities))
        object.__setattr__(self, 'frames', tuple(self.frames))
        object.__setattr__(self, 'classes', tuple(self.classes))
        object.__setattr__(self, 'targets', tuple(self.targets))
        if self.n_layers not in LAYER_COUNTS:
            raise InvalidArgument(
                f"n_layers must be one of {LAYER_COUNTS}: {self.n_layers}")
        if self.subset < 0:
            raise InvalidArgument(f"subset must be >= 0: {self.subset}")

    def replace(self, **changes):
        """Return a copy with the non-None *changes* applied."""
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def _path(self, sub):
        return os.path.join(self.root, sub)

    @property
    def velodyne_dir(self):
        return self._path(self.velodyne)

    @property
    def labels_dir(self):
        return self._path(self.labels)

    @property
    def calib_dir(self):
        return self._path(self.calib)

    def frame_seed(self, frame_id, kind, severity):
        """The seed of one (frame, kind, severity) unit of work."""
        return derive_seed(self.seed, frame_id, kind, int(severity))

    def output_dir(self, kind, severity, what='velodyne'):
        return os.path.join(self.output, kind, str(int(severity)), what)


_SECTIONS = {
    'dataset': ('root', 'velodyne', 'labels', 'calib', 'frames', 'classes',
                'labels_in_lidar'),
    'corruption': ('kinds', 'severities', 'seed', 'subset', 'link_clean',
                   'targets', 'n_layers'),
    'output': ('root',),
}


def _resolve(base, path):
    path = os.path.expanduser(path)
    return path if os.path.isabs(path) else os.path.join(base, path)


def load_manifest(path):
    """Read a `DatasetManifest` from the TOML file at *path*."""
    try:
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise InvalidArgument(f"{path}: {e}") from e
    base = os.path.dirname(os.path.abspath(path))
    unknown = set(data) - set(_SECTIONS) - {'weather', 'denoise',
                                            'evaluation'}
    if unknown:
        raise InvalidArgument(
            f"{path}: unknown sections {', '.join(sorted(unknown))}")
    values = {}
    for section, keys in _SECTIONS.items():
        table = data.get(section, {})
        extra = set(table) - set(keys)
        if extra:
            raise InvalidArgument(
                f"{path}: unknown keys in [{section}]:"
                f" {', '.join(sorted(extra))}")
        for key, value in table.items():
            name = 'output' if section == 'output' else key
            values[name] = value
    values['root'] = _resolve(base, values.get('root', '.'))
    values['output'] = _resolve(base, values.get('output', 'out'))
    try:
        values['weather'] = WeatherConfig.from_mapping(
            data.get('weather', {}))
        values['denoise'] = DenoiseConfig(**data.get('denoise', {}))
        values['evaluation'] = EvaluationConfig.from_mapping(
            data.get('evaluation', {}))
        return DatasetManifest(**values)
    except TypeError as e:
        raise InvalidArgument(f"{path}: {e}") from e
