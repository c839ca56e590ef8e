import pytest
from pytest import raises

from neuroexam import report_renderer_factory


@pytest.fixture
def metrics_report():
    return {
        "Metric": ["accuracy", "auc", "f1"],
        "Mean": [0.95, 0.987654, None],
        "Folds": [5, 5, 5],
    }


def test_layouts():
    assert set(report_renderer_factory.get_layouts()) == {"flat", "legacy"}
    with raises(ValueError):
        report_renderer_factory.get_renderer("narrow")


def test_legacy_layout(metrics_report):
    renderer = report_renderer_factory.get_renderer("legacy")
    renderer.layout(metrics_report, title="FT logreg")
    lines = renderer.render_to_str().split("\n")

    assert lines[0] == lines[2] == lines[-2]
    assert set(lines[0]) == {"="}
    assert lines[1] == "FT logreg"
    assert lines[3].split() == ["Metric", "Mean", "Folds"]
    assert lines[5].split() == ["accuracy", "0.95", "5"]
    assert lines[6].split() == ["auc", "0.9877", "5"]
    assert lines[7].split() == ["f1", "5"]


def test_legacy_layout_without_title(metrics_report):
    renderer = report_renderer_factory.get_renderer("legacy")
    renderer.layout(metrics_report)
    lines = renderer.render_to_str().split("\n")
    assert lines[1].split() == ["Metric", "Mean", "Folds"]


def test_flat_layout(metrics_report):
    """Captures the table to a string without color codes."""
    renderer = report_renderer_factory.get_renderer("flat",
                                                     disable_theme=True)
    renderer.layout(metrics_report, title="FT logreg")
    text = renderer.render_to_str(width=80)

    assert "FT logreg" in text
    for cell in ("Metric", "accuracy", "0.9877", "Folds"):
        assert cell in text
    assert "\x1b[" not in text
    assert max(len(line) for line in text.splitlines()) <= 80


@pytest.mark.parametrize("layout", ["flat", "legacy"])
@pytest.mark.parametrize(
    "report",
    [{}, None, {"Metric": ["auc"], "Mean": [0.5, 0.6]}],
)
def test_invalid_report(layout, report):
    renderer = report_renderer_factory.get_renderer(layout)
    with raises(ValueError):
        renderer.layout(report)
