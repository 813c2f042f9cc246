"""Pipeline configuration: a YAML file merged over documented defaults.

Recognised keys (defaults in brackets)::

    seed: 0                  # master seed for forests, tuning and protocols
    jobs: 1                  # parallel workers (-1 = all cores)
    max_objects: null        # object budget O; null = largest count in training data
    mirror: null             # handedness mirroring; null = on for cad60/cad120 only
    skeleton: null           # joint table name; null = from dataset format / joint count
    filter:   {median_window: 5, savgol_window: 11, savgol_order: 3}
    dtw:      {window: null} # Sakoe-Chiba band half-width, null = unconstrained
    wavelet:  {family: daubechies, order: null, levels: 1, autotune: true}
    forest:   {n_trees: 500, features_per_split: sqrt, max_depth: null, min_samples_leaf: 1}
    protocol: {kind: losubo, folds: 2, repeats: 10, train_fraction: 0.5}

Unknown keys raise ``ConfigError`` naming every offender.
"""
from __future__ import annotations

import dataclasses
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .exceptions import ConfigError, MissingFile

PROTOCOL_KINDS = ("losubo", "kfold", "loseqo", "holdout")
MIRROR_BY_DEFAULT = ("cad60", "cad120")


@dataclass
class FilterSection:
    median_window: int = 5
    savgol_window: int = 11
    savgol_order: int = 3


@dataclass
class DtwSection:
    window: int | None = None


@dataclass
class WaveletSection:
    family: str = "daubechies"
    order: int | None = None
    levels: int = 1
    autotune: bool = True


@dataclass
class ForestSection:
    n_trees: int = 500
    features_per_split: str | int = "sqrt"
    max_depth: int | None = None
    min_samples_leaf: int = 1


@dataclass
class ProtocolSection:
    kind: str = "losubo"
    folds: int = 2
    repeats: int = 10
    train_fraction: float = 0.5


@dataclass
class PipelineConfig:
    seed: int = 0
    jobs: int = 1
    max_objects: int | None = None
    mirror: bool | None = None
    skeleton: str | None = None
    filter: FilterSection = field(default_factory=FilterSection)
    dtw: DtwSection = field(default_factory=DtwSection)
    wavelet: WaveletSection = field(default_factory=WaveletSection)
    forest: ForestSection = field(default_factory=ForestSection)
    protocol: ProtocolSection = field(default_factory=ProtocolSection)

    def to_dict(self) -> dict:
        return asdict(self)

    def mirror_for(self, dataset_format: str | None) -> bool:
        if self.mirror is not None:
            return bool(self.mirror)
        return dataset_format in MIRROR_BY_DEFAULT

    def classifier_params(self, dataset_format: str | None = None, skeleton=None) -> dict:
        """Keyword arguments for ``TemplateActionClassifier``."""
        return dict(
            skeleton=skeleton if skeleton is not None else self.skeleton,
            max_objects=self.max_objects,
            median_window=self.filter.median_window,
            savgol_window=self.filter.savgol_window,
            savgol_order=self.filter.savgol_order,
            mirror=self.mirror_for(dataset_format),
            dtw_window=self.dtw.window,
            wavelet_family=self.wavelet.family,
            wavelet_order=self.wavelet.order,
            wavelet_levels=self.wavelet.levels,
            autotune=self.wavelet.autotune,
            n_trees=self.forest.n_trees,
            features_per_split=self.forest.features_per_split,
            max_depth=self.forest.max_depth,
            min_samples_leaf=self.forest.min_samples_leaf,
            random_state=self.seed,
            n_jobs=self.jobs,
        )

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


def _merge(cls, data, prefix, unknown):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"'{prefix.rstrip('.')}' must be a mapping", [prefix.rstrip(".")])
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            unknown.append(prefix + str(key))
            continue
        sub = names[key].default_factory if names[key].default_factory is not dataclasses.MISSING else None
        if sub is not None and dataclasses.is_dataclass(sub):
            kwargs[key] = _merge(sub, value, f"{prefix}{key}.", unknown)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def _check(cfg: PipelineConfig):
    bad = []
    if cfg.protocol.kind not in PROTOCOL_KINDS:
        bad.append(("protocol.kind", f"must be one of {PROTOCOL_KINDS}"))
    if not (isinstance(cfg.protocol.repeats, int) and cfg.protocol.repeats >= 1):
        bad.append(("protocol.repeats", "must be a positive integer"))
    if not (isinstance(cfg.protocol.folds, int) and cfg.protocol.folds >= 2):
        bad.append(("protocol.folds", "must be an integer >= 2"))
    if not 0 < cfg.protocol.train_fraction < 1:
        bad.append(("protocol.train_fraction", "must lie in (0, 1)"))
    if not (isinstance(cfg.forest.n_trees, int) and cfg.forest.n_trees >= 1):
        bad.append(("forest.n_trees", "must be a positive integer"))
    if cfg.mirror not in (None, True, False):
        bad.append(("mirror", "must be true, false or null"))
    if not isinstance(cfg.wavelet.autotune, bool):
        bad.append(("wavelet.autotune", "must be true or false"))
    if bad:
        raise ConfigError("invalid config values: " + "; ".join(f"{k} {m}" for k, m in bad),
                          [k for k, _ in bad])


def config_from_dict(data: dict | None) -> PipelineConfig:
    unknown = []
    cfg = _merge(PipelineConfig, data or {}, "", unknown)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}", unknown)
    _check(cfg)
    return cfg


def load_config(path=None) -> PipelineConfig:
    """Defaults when ``path`` is None or the file is empty."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"config not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data)
