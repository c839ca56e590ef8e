###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Static SVG figures of the analysis results.

Figures are drawn on standalone :class:`matplotlib.figure.Figure` objects so
no GUI backend is touched. SVG output carries no timestamp and a fixed hash
salt, which keeps repeated runs byte-identical.
"""
import logging
import math
import os

import numpy as np
from matplotlib import rc_context
from matplotlib.figure import Figure

from neuroexam.abstracts.enums import Label
from neuroexam.utils import create_parentdir

LOGGER = logging.getLogger(__name__)

COLORS = {
    Label.NORMAL: "#1f77b4",
    Label.ABNORMAL: "#d62728",
    Label.UNLABELED: "#7f7f7f",
}
GOLDEN_RATIO = (math.sqrt(5) - 1.0) / 2.0


def _figure(width=6.0, height=None, nrows=1, ncols=1):
    height = height or width * GOLDEN_RATIO
    fig = Figure(figsize=(width, height), facecolor="w")
    axes = fig.subplots(nrows, ncols, squeeze=False)
    return fig, axes


def save_svg(fig, path):
    """Write a figure as reproducible SVG."""
    create_parentdir(os.path.dirname(os.path.abspath(path)))
    with rc_context({"svg.hashsalt": "neuroexam", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    LOGGER.debug("Figure written to %s", path)
    return path


def pca_scatter(projections, labels, path, title=None):
    """
    Scatter of the first two principal component projections.

    A single component is drawn against zero.

    :param projections: Array of shape (rows, k).
    :param labels: One Label per row.
    """
    projections = np.asarray(projections, dtype=float)
    x = projections[:, 0]
    y = projections[:, 1] if projections.shape[1] > 1 else np.zeros(len(x))

    fig, axes = _figure()
    ax = axes[0][0]
    for label in Label:
        mask = np.array([lab is label for lab in labels], dtype=bool)
        if np.any(mask):
            ax.scatter(x[mask], y[mask], s=18, color=COLORS[label],
                       label=label.value)
    ax.set_xlabel("PC 1")
    ax.set_ylabel("PC 2" if projections.shape[1] > 1 else "")
    ax.legend(loc="best", frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return save_svg(fig, path)


def distance_boxplot(report, path, title=None):
    """Box plot of the normalized A-A, N-N and N-A distances."""
    data, names = [], []
    for kind, name in (("aa", "A-A"), ("nn", "N-N"), ("na", "N-A")):
        values = np.asarray(getattr(report, kind), dtype=float).ravel()
        data.append(values[~np.isnan(values)])
        names.append(name)

    fig, axes = _figure(width=5.0)
    ax = axes[0][0]
    ax.boxplot(data, showfliers=False)
    ax.set_xticks(range(1, len(names) + 1))
    ax.set_xticklabels(names)
    ax.set_ylabel("Normalized distance")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return save_svg(fig, path)


def density_plot(densities, path, features=None, max_features=6):
    """
    Class-wise density curves of selected features.

    :param densities: Mapping of feature name to FeatureDensity.
    :param features: Names to draw; defaults to the features with the
        smallest overlap.
    """
    if features is None:
        ranked = sorted(
            (d for d in densities.values() if d.overlap is not None),
            key=lambda d: d.overlap)
        features = [d.name for d in ranked[:max_features]]
        if not features:
            features = list(densities)[:max_features]

    ncols = 2 if len(features) > 1 else 1
    nrows = max(1, int(math.ceil(len(features) / ncols)))
    fig, axes = _figure(width=4.0 * ncols, height=2.6 * nrows, nrows=nrows,
                        ncols=ncols)
    for i, name in enumerate(features):
        ax = axes[i // ncols][i % ncols]
        density = densities[name]
        for label, curve in density.densities.items():
            if curve is not None:
                ax.plot(density.grid, curve, color=COLORS[label],
                        label=label.value)
        ax.set_title(name, fontsize=9)
    for j in range(len(features), nrows * ncols):
        axes[j // ncols][j % ncols].set_axis_off()
    if features:
        axes[0][0].legend(loc="best", frameon=False, fontsize=8)
    fig.tight_layout()
    return save_svg(fig, path)
