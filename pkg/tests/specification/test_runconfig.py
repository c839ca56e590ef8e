from contextlib import nullcontext as does_not_raise
from io import StringIO
import os

import pytest
from pytest import raises

from neuroexam.abstracts.enums import ExamKind
from neuroexam.analysis.forest import RandomForest
from neuroexam.analysis.logreg import LogisticRegression
from neuroexam.errors import ConfigError
from neuroexam.specification.runconfig import DEFAULTS, RunConfig


@pytest.mark.parametrize(
    "file_name, error",
    [
        ("nested.yaml", does_not_raise()),
        ("flat.yaml", does_not_raise()),
        ("empty.yaml", does_not_raise()),
        ("unknown_section.yaml", raises(ConfigError)),
        ("unknown_key.yaml", raises(ConfigError)),
        ("bad_type.yaml", raises(ConfigError)),
        ("even_window.yaml", raises(ConfigError)),
        ("bad_split.yaml", raises(ConfigError)),
        ("not_mapping.yaml", raises(ConfigError)),
        ("malformed.yaml", raises(ConfigError)),
        ("missing.yaml", raises(ConfigError)),
    ],
)
def test_load_config(config_path, file_name, error):
    with error:
        config = RunConfig.load_config(config_path(file_name))
        assert config.path == config_path(file_name)


@pytest.mark.parametrize(
    "file_name, message",
    [
        ("unknown_section.yaml", "Unrecognized key 'plotting' found in "
                                 "config."),
        ("unknown_key.yaml", "Unrecognized key 'gaussian_sigma' found in "
                             "config.preprocess."),
        ("bad_split.yaml", "evaluation.split must be one of video_based, "
                           "subject_based"),
        ("bad_type.yaml", "seed must be of type 'integer'"),
    ],
)
def test_load_config_messages(config_path, file_name, message):
    with raises(ConfigError) as excinfo:
        RunConfig.load_config(config_path(file_name))
    assert message in str(excinfo.value)


def test_flat_and_nested_keys_agree(config_path):
    """Dotted keys and nested sections describe the same configuration."""
    nested = RunConfig.load_config(config_path("nested.yaml"))
    flat = RunConfig.load_config(config_path("flat.yaml"))
    assert nested.as_dict() == flat.as_dict()
    assert nested.config_hash() == flat.config_hash()
    assert nested.get("preprocess.median_window") == 7
    assert nested.get("preprocess.savgol_order") == 3
    assert nested.seed == 3


def test_defaults(config_path):
    config = RunConfig.load_config(config_path("empty.yaml"))
    assert config.as_dict() == RunConfig().as_dict()
    assert config.get("evaluation.split") == "video_based"
    assert config.get("pca.k") == 2
    assert config.get("evaluation.missing", "fallback") == "fallback"
    assert DEFAULTS["seed"] == 0


def test_config_hash():
    """The hash is a short, stable digest that tracks every value."""
    base = RunConfig()
    digest = base.config_hash()
    assert len(digest) == 12
    assert digest == RunConfig().config_hash()
    assert RunConfig().set("seed", 1).config_hash() != digest
    assert RunConfig().set("saw.walk_threshold", 0.3).config_hash() != digest


@pytest.mark.parametrize(
    "params, key, expected, error",
    [
        (["seed:5"], "seed", 5, does_not_raise()),
        (["preprocess.median_window: 9"], "preprocess.median_window", 9,
         does_not_raise()),
        (["evaluation.model:rf"], "evaluation.model", "rf",
         does_not_raise()),
        (["preprocess.truncate_range:[10, 200]"], "preprocess.truncate_range",
         [10, 200], does_not_raise()),
        (["cohort.profile:null"], "cohort.profile", None, does_not_raise()),
        (["seed=5"], None, None, raises(ConfigError)),
        (["preprocess.median_window:8"], None, None, raises(ConfigError)),
        (["pca.components:3"], None, None, raises(ConfigError)),
        (["evaluation.folds:one"], None, None, raises(ConfigError)),
    ],
)
def test_apply_overrides(params, key, expected, error):
    with error:
        config = RunConfig().apply_overrides(params)
        assert config.get(key) == expected


def test_load_from_stream():
    config = RunConfig.load_config_from_stream(
        StringIO("extract:\n  period_from: minima\n"))
    assert config.extraction_config().period_from == "minima"
    assert config.path is None


def test_typed_settings(config_path):
    config = RunConfig.load_config(config_path("nested.yaml"))

    preprocess = config.preprocess_config()
    assert preprocess.median_window == 7
    assert preprocess.savgol_window == 15

    extraction = config.extraction_config()
    assert extraction.preprocess == preprocess
    assert extraction.saw.walk_threshold == 0.25

    scheme = config.split_scheme()
    assert (scheme.kind, scheme.folds, scheme.seed) == \
        ("subject_based", 4, 3)
    assert config.split_scheme("video_based").kind == "video_based"


def test_truncate_range_becomes_tuple():
    config = RunConfig().apply_overrides(
        ["preprocess.truncate_range:[0, 30]"])
    assert config.preprocess_config().truncate_range == (0, 30)


def test_synth_params():
    config = RunConfig().set("seed", 4)
    params = config.synth_params(test_kind="FR", duration=3.0)
    assert params.test_kind is ExamKind.FR
    assert params.duration == 3.0
    assert params.seed == 4
    with raises(ConfigError):
        config.synth_params(fps=-1.0)


@pytest.mark.parametrize(
    "model, cls, error",
    [
        (None, LogisticRegression, does_not_raise()),
        ("logreg", LogisticRegression, does_not_raise()),
        ("RF", RandomForest, does_not_raise()),
        ("svm", None, raises(ConfigError)),
    ],
)
def test_classifier(config_path, model, cls, error):
    config = RunConfig.load_config(config_path("nested.yaml"))
    with error:
        classifier = config.classifier(model)
        assert isinstance(classifier, cls)
        assert classifier.key == cls.key


def test_forest_settings(config_path):
    forest = RunConfig.load_config(config_path("nested.yaml")) \
        .classifier("rf")
    assert forest.n_trees == 50
    assert forest.seed == 3


SAMPLES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                           os.pardir, os.pardir, "samples")


@pytest.mark.parametrize(
    "file_name",
    sorted(name for name in os.listdir(SAMPLES_DIR)
           if name.endswith(".yaml")),
)
def test_sample_configs(file_name):
    config = RunConfig.load_config(os.path.join(SAMPLES_DIR, file_name))
    assert config.config_hash() != RunConfig().config_hash()


def test_sample_cohort_profile():
    config = RunConfig.load_config(
        os.path.join(SAMPLES_DIR, "knee_brace_cohort.yaml"))
    assert config.synth_params().test_kind is ExamKind.SAW
    assert config.get("cohort.profile") == "stand_up_walk"
    assert config.get("saw.hold_duration") == 0.4
