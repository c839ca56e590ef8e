###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Class-wise feature distributions and their overlap."""
from collections import OrderedDict
from dataclasses import dataclass
import logging
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import gaussian_kde

from neuroexam.abstracts.enums import Label
from neuroexam.errors import EmptyMatrixError
from neuroexam.signals import is_constant

LOGGER = logging.getLogger(__name__)

CLASSES = (Label.NORMAL, Label.ABNORMAL)


@dataclass(frozen=True, eq=False)
class FeatureDensity:
    """
    Kernel density estimates of one feature for each class.

    A class with fewer than two distinct observed values has no density, and
    the overlap is then None.
    """

    name: str
    grid: np.ndarray
    densities: dict
    means: dict
    stds: dict
    counts: dict
    overlap: Optional[float]

    def to_dict(self):
        out = OrderedDict([("grid", self.grid.tolist())])
        for label in CLASSES:
            density = self.densities[label]
            out[label.value] = OrderedDict([
                ("count", self.counts[label]),
                ("mean", self.means[label]),
                ("std", self.stds[label]),
                ("density", None if density is None else density.tolist()),
            ])
        out["overlap"] = self.overlap
        return out


def _kde(values, grid):
    if len(values) < 2 or is_constant(values):
        return None
    try:
        return gaussian_kde(values)(grid)
    except np.linalg.LinAlgError:
        LOGGER.debug("Singular kernel density skipped.")
        return None


def feature_density(name, values, targets, grid_points=200):
    """
    Densities of one feature column split by class target.

    :param values: Feature column with NaN for missing entries.
    :param targets: 0 for normal and 1 for abnormal rows.
    """
    values = np.asarray(values, dtype=float)
    targets = np.asarray(targets, dtype=int)
    observed = ~np.isnan(values)
    per_class = {label: values[observed & (targets == label.target)]
                 for label in CLASSES}

    pooled = values[observed]
    if len(pooled):
        lo, hi = float(np.min(pooled)), float(np.max(pooled))
    else:
        lo = hi = 0.0
    pad = 0.25 * (hi - lo) if hi > lo else 1.0
    grid = np.linspace(lo - pad, hi + pad, int(grid_points))

    densities = {label: _kde(per_class[label], grid) for label in CLASSES}
    overlap = None
    if all(d is not None for d in densities.values()):
        overlap = float(trapezoid(np.minimum(*[densities[label]
                                               for label in CLASSES]), grid))

    def stat(func, label):
        data = per_class[label]
        return float(func(data)) if len(data) else None

    return FeatureDensity(
        name=name,
        grid=grid,
        densities=densities,
        means={label: stat(np.mean, label) for label in CLASSES},
        stds={label: stat(np.std, label) for label in CLASSES},
        counts={label: int(len(per_class[label])) for label in CLASSES},
        overlap=overlap,
    )


def class_densities(m, grid_points=200):
    """
    Per-feature class densities of the labeled rows of a matrix.

    :returns: OrderedDict of feature name to FeatureDensity.
    """
    if int(grid_points) != grid_points or grid_points < 2:
        raise ValueError("grid_points must be an integer of at least 2.")
    m = m.labeled()
    if m.n_rows == 0 or m.n_columns == 0:
        msg = "No labeled rows or feature columns for the density study."
        LOGGER.error(msg)
        raise EmptyMatrixError(msg)

    targets = m.targets
    out = OrderedDict()
    for j, name in enumerate(m.columns):
        out[name] = feature_density(name, m.values[:, j], targets,
                                    grid_points)
    return out
