import numpy as np
import pytest
from sklearn.metrics import silhouette_score

from neuroexam.abstracts.enums import ExamKind
from neuroexam.analysis.distance import distance_study
from neuroexam.analysis.evaluation import ModelBundle, SplitScheme, evaluate
from neuroexam.analysis.forest import RandomForest
from neuroexam.analysis.logreg import LogisticRegression
from neuroexam.analysis.matrix import FeatureMatrix, FeaturePipeline
from neuroexam.analysis.pca import pca
from neuroexam.features import extract_features
from neuroexam.synth import gen_cohort

pytestmark = pytest.mark.integration

COHORT_SIZE = 20
PROFILES = [
    ("finger_tapping", ExamKind.FT),
    ("finger_to_finger", ExamKind.FTF),
    ("forearm_roll", ExamKind.FR),
    ("stand_up_walk", ExamKind.SAW),
]


@pytest.mark.parametrize("profile, kind", PROFILES)
@pytest.mark.parametrize("split", ["video_based", "subject_based"])
@pytest.mark.parametrize(
    "build", [LogisticRegression, lambda: RandomForest(n_trees=50)],
    ids=["logreg", "rf"],
)
def test_impairment_is_detected(cohort_features, profile, kind, split,
                                build):
    m = cohort_features(profile, COHORT_SIZE).select_kind(kind)
    report = evaluate(build(), m, SplitScheme(split, folds=5, seed=0))
    assert report.n_rows == 4 * COHORT_SIZE
    assert report.metrics["accuracy"] >= 0.9
    assert report.metrics["auc"] >= 0.9


@pytest.mark.parametrize(
    "build", [LogisticRegression, lambda: RandomForest(n_trees=50)],
    ids=["logreg", "rf"],
)
def test_accuracy_ignores_column_order(cohort_features, build):
    m = cohort_features("finger_tapping", COHORT_SIZE) \
        .select_kind(ExamKind.FT)
    columns = list(m.columns)
    np.random.default_rng(1).shuffle(columns)
    split = SplitScheme("video_based", folds=5, seed=0)
    report = evaluate(build(), m, split)
    shuffled = evaluate(build(), m.take(columns=columns), split)
    assert shuffled.metrics["accuracy"] == report.metrics["accuracy"]


def test_shuffled_labels_are_guessed(cohort_features):
    """Without a link between rows and labels accuracy stays near chance."""
    m = cohort_features("finger_tapping").select_kind(ExamKind.FT)
    rng = np.random.default_rng(7)
    accuracies = []
    for _ in range(10):
        labels = [m.labels[i] for i in rng.permutation(m.n_rows)]
        shuffled = FeatureMatrix(m.values, m.columns, m.recording_ids,
                                 labels, m.groups, m.devices)
        report = evaluate(LogisticRegression(), shuffled,
                          SplitScheme("video_based", folds=5, seed=0))
        accuracies.append(report.metrics["accuracy"])
    assert np.mean(accuracies) == pytest.approx(0.5, abs=0.1)


@pytest.mark.parametrize("profile, kind", PROFILES)
def test_classes_are_farther_apart_than_devices(cohort_features, profile,
                                                kind):
    m = cohort_features(profile, COHORT_SIZE).select_kind(kind)
    report = distance_study(m)
    assert len(report.subjects) == COHORT_SIZE
    assert report.separated_fraction() >= 0.9


def test_noise_free_devices_agree():
    """Without device noise both captures of a performance are identical."""
    recordings = gen_cohort(3, profile="forearm_roll", device_noise=0.0)
    m = FeatureMatrix.from_vectors([extract_features(r) for r in recordings])
    report = distance_study(m)
    np.testing.assert_array_equal(np.nan_to_num(report.aa), 0.0)
    np.testing.assert_array_equal(np.nan_to_num(report.nn), 0.0)
    assert np.nanmin(report.means()["na"]) >= 0.0


def test_principal_components_cluster_by_label(cohort_features):
    m = cohort_features("finger_tapping").select_kind(ExamKind.FT)
    result = pca(FeaturePipeline().fit_transform(m), k=2)
    assert np.sum(result.explained_variance) <= 1.0
    assert silhouette_score(result.projections, m.targets) > 0.2


def test_one_sided_impairment_is_attributed(cohort_features):
    """Only the left hand changes, so an asymmetry feature leads."""
    m = cohort_features("finger_tapping_left", COHORT_SIZE) \
        .select_kind(ExamKind.FT)
    bundle = ModelBundle.train(RandomForest(n_trees=50), m)
    top = [name for name, _ in bundle.feature_importance()[:3]]
    assert any(name.endswith(".asym") for name in top)
