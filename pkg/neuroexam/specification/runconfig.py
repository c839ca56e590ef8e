###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Run configuration loaded from YAML.

A configuration file holds nested sections, flat dotted keys, or a mix of
both::

    seed: 3
    preprocess:
      median_window: 7
    evaluation.split: subject_based

Everything not given falls back to :data:`DEFAULTS`.
"""
from copy import deepcopy
import hashlib
import json
import logging

import yaml

from neuroexam.analysis.evaluation import SplitScheme
from neuroexam.datastructures.features import ExtractionConfig, SawConfig
from neuroexam.errors import ConfigError
from neuroexam.preprocess import PreprocessConfig
from neuroexam.specification.validation import load_schema, validate_schema
from neuroexam.synth import SynthParams
from neuroexam.utils import create_dictionary, to_builtin

LOGGER = logging.getLogger(__name__)


def _synth_defaults():
    params = SynthParams().to_dict()
    params.pop("seed")
    return params


DEFAULTS = {
    "seed": 0,
    "preprocess": {
        "median_window": 5,
        "savgol_window": 11,
        "savgol_order": 3,
        "confidence_threshold": 0.3,
        "truncate_range": None,
        "reference_fps": 60.0,
    },
    "extract": {
        "prominence_frac": 0.2,
        "period_from": "maxima",
        "resample_points": 100,
        "fit_tolerance": 1e-6,
    },
    "saw": {
        "stand_threshold": 0.5,
        "walk_threshold": 0.25,
        "turn_min_duration": 0.2,
        "hold_duration": 0.3,
        "min_walk_duration": 0.5,
        "refine_fraction": 0.5,
        "step_prominence_frac": 0.2,
    },
    "logreg": {"lr": 0.1, "epochs": 2000, "l2": 1e-3, "tol": 1e-8},
    "forest": {
        "n_trees": 200,
        "max_depth": 8,
        "min_leaf": 2,
        "feature_subsample": "sqrt",
    },
    "evaluation": {
        "folds": 5,
        "split": "video_based",
        "model": "logreg",
        "threshold": 0.5,
    },
    "pca": {"k": 2},
    "density": {"grid_points": 200},
    "synth": _synth_defaults(),
    "cohort": {"n_subjects": 20, "profile": None, "device_noise": 0.01},
}


def _nest(document):
    """Expand ``section.key`` entries into nested sections."""
    nested = {}
    for key, value in document.items():
        key = str(key)
        if "." in key:
            section, name = key.split(".", 1)
            target = nested.setdefault(section, {})
            if not isinstance(target, dict):
                msg = "Key '{}' conflicts with the scalar '{}'." \
                      .format(key, section)
                LOGGER.error(msg)
                raise ConfigError(msg)
            target[name] = value
        elif isinstance(value, dict) and isinstance(nested.get(key), dict):
            nested[key].update(value)
        else:
            nested[key] = value
    return nested


def _merge(base, update):
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


class RunConfig(object):
    """
    Effective configuration of a run.

    Instances always hold every section of :data:`DEFAULTS`; user values
    override them key by key.
    """

    def __init__(self, data=None):
        self.path = None
        self.data = _merge(deepcopy(DEFAULTS), _nest(data or {}))

    @classmethod
    def load_config(cls, path):
        """
        Load and verify a configuration file.

        :param path: Path to a YAML configuration.
        :returns: A verified RunConfig.
        """
        LOGGER.info("Loading configuration -- path = %s", path)
        try:
            with open(path, "r") as data:
                config = cls.load_config_from_stream(data)
        except OSError as exc:
            msg = "Cannot read configuration '{}': {}".format(path, exc)
            LOGGER.error(msg)
            raise ConfigError(msg)

        config.path = path
        return config

    @classmethod
    def load_config_from_stream(cls, stream):
        """
        Load and verify a configuration from a text stream.

        :raises ConfigError: On malformed YAML, unknown keys or invalid
            values.
        """
        try:
            document = yaml.safe_load(stream)
        except yaml.YAMLError as exc:
            msg = "Configuration is not valid YAML: {}".format(exc)
            LOGGER.error(msg)
            raise ConfigError(msg)

        if document is None:
            document = {}
        if not isinstance(document, dict):
            msg = "Configuration must be a mapping, found '{}'." \
                  .format(type(document).__name__)
            LOGGER.error(msg)
            raise ConfigError(msg)

        nested = _nest(document)
        validate_schema("config", nested, load_schema("runconfig.json"),
                        exc=ConfigError)
        config = cls(nested)
        config.verify()
        LOGGER.debug("Loaded configuration -- \n%s", config.data)
        return config

    def verify(self):
        """
        Check the effective configuration against the schema and build every
        typed settings object once.

        :raises ConfigError: On the first invalid section.
        """
        validate_schema("config", self.data, load_schema("runconfig.json"),
                        exc=ConfigError)
        for build in (self.extraction_config, self.synth_params,
                      self.split_scheme):
            build()

    def apply_overrides(self, params):
        """
        Override values from ``section.key:value`` strings.

        Values are parsed as YAML scalars, so ``7`` is an integer and
        ``null`` is None.
        """
        try:
            pairs = create_dictionary(params or [], token=":")
        except ValueError as exc:
            raise ConfigError(str(exc))

        overrides = {}
        for key, value in pairs.items():
            try:
                overrides[key] = yaml.safe_load(value)
            except yaml.YAMLError:
                overrides[key] = value
        nested = _nest(overrides)
        validate_schema("overrides", nested, load_schema("runconfig.json"),
                        exc=ConfigError)
        _merge(self.data, nested)
        self.verify()
        return self

    def set(self, key, value):
        """Set one dotted key and re-verify."""
        _merge(self.data, _nest({key: value}))
        self.verify()
        return self

    def get(self, key, default=None):
        value = self.data
        for part in key.split("."):
            if not isinstance(value, dict) or part not in value:
                return default
            value = value[part]
        return value

    @property
    def seed(self):
        return int(self.data["seed"])

    def as_dict(self):
        return deepcopy(self.data)

    def config_hash(self):
        """First 12 hex digits of the SHA-1 of the canonical JSON."""
        canonical = json.dumps(to_builtin(self.data), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha1(canonical.encode("utf-8")).hexdigest()[:12]

    def _build(self, section, factory, values):
        try:
            return factory(**values)
        except (TypeError, ValueError) as exc:
            msg = "Invalid '{}' settings: {}".format(section, exc)
            LOGGER.error(msg)
            raise ConfigError(msg)

    def preprocess_config(self):
        values = dict(self.data["preprocess"])
        if values["truncate_range"] is not None:
            values["truncate_range"] = tuple(values["truncate_range"])
        return self._build("preprocess", PreprocessConfig, values)

    def extraction_config(self):
        return self._build("extract", ExtractionConfig, dict(
            self.data["extract"],
            preprocess=self.preprocess_config(),
            saw=self._build("saw", SawConfig, self.data["saw"])))

    def synth_params(self, **changes):
        values = dict(self.data["synth"], seed=self.seed)
        values.update(changes)
        return self._build("synth", SynthParams, values)

    def split_scheme(self, kind=None):
        section = self.data["evaluation"]
        return self._build("evaluation", SplitScheme, {
            "kind": kind or section["split"],
            "folds": section["folds"],
            "seed": self.seed,
        })

    def classifier(self, model=None):
        """Unfitted classifier configured from its section."""
        from neuroexam.analysis import ClassifierFactory

        key = model or self.data["evaluation"]["model"]
        try:
            cls = ClassifierFactory.get_classifier(key)
        except ValueError as exc:
            raise ConfigError(str(exc))
        if cls.key == "rf":
            return self._build("forest", cls,
                               dict(self.data["forest"], seed=self.seed))
        return self._build(cls.key, cls, self.data[cls.key])
