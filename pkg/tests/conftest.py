from functools import lru_cache
import os

import numpy as np
import pytest

from neuroexam.abstracts.enums import ExamKind, Side, Skeleton
from neuroexam.analysis.matrix import FeatureMatrix
from neuroexam.datastructures.pose import SkeletonConvention
from neuroexam.features import extract_features
from neuroexam.synth import SynthParams, gen_cohort, generate

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))


@pytest.fixture
def recording_path():
    """Fixture for providing recordings from test data directories"""
    def load_recording(file_name):
        return os.path.join(TESTS_DIR, "specification", "test_recordings",
                            file_name)

    return load_recording


@pytest.fixture
def config_path():
    """Fixture for providing run configurations from test data directories"""
    def load_config(file_name):
        return os.path.join(TESTS_DIR, "specification", "test_configs",
                            file_name)

    return load_config


@pytest.fixture
def synth_recording():
    """
    Fixture for building noise free synthetic recordings of one exam kind
    """
    def build(kind, **changes):
        return generate(SynthParams(test_kind=ExamKind.from_str(kind),
                                    **changes))

    return build


@lru_cache(maxsize=None)
def _cohort_matrix(profile, n_subjects, seed):
    recordings = gen_cohort(n_subjects, profile=profile, seed=seed)
    return FeatureMatrix.from_vectors(
        [extract_features(rec) for rec in recordings])


@pytest.fixture
def cohort_features():
    """
    Fixture for feature matrices of simulated cohorts, cached across tests
    """
    def load_cohort(profile, n_subjects=10, seed=0):
        return _cohort_matrix(profile, n_subjects, seed)

    return load_cohort


@pytest.fixture
def mirror_recording():
    """
    Fixture for mirroring a subject: x is negated and sides are swapped
    """
    opposite = {Side.RIGHT: Side.LEFT, Side.LEFT: Side.RIGHT,
                Side.CENTER: Side.CENTER}

    def mirror(rec):
        changes = {}
        for group in rec.groups:
            array = np.array(getattr(rec, group))
            array[..., 0] = -array[..., 0]
            if group in ("body2d", "body3d"):
                skeleton = Skeleton.B2 if group == "body2d" else Skeleton.B3
                order = [SkeletonConvention.slot(skeleton, joint,
                                                 opposite[side])
                         for joint, side in
                         SkeletonConvention.slots(skeleton)]
                array = array[:, order]
            changes[group] = array
        changes["hand2d_right"], changes["hand2d_left"] = \
            changes.get("hand2d_left"), changes.get("hand2d_right")
        return rec.replace(**changes)

    return mirror
