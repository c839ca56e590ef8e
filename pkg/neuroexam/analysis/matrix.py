###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Feature matrices, imputation and standardization.

The feature table CSV leads with the ``recording_id``, ``subject_id``,
``device`` and ``label`` columns, followed by one column per feature. Missing
features are empty cells and become NaN in memory.
"""
from dataclasses import dataclass
import logging
import warnings

import numpy as np
import pandas as pd

from neuroexam.abstracts.enums import ExamKind, Label
from neuroexam.datastructures.features import catalogue_order
from neuroexam.errors import EmptyMatrixError, ParseError, SchemaError

LOGGER = logging.getLogger(__name__)

META_COLUMNS = ("recording_id", "subject_id", "device", "label")
# Relative spread below which a column counts as constant.
CONSTANT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """
    Rows of named features with their recording metadata.

    ``values`` holds NaN where a feature is missing. ``labels`` holds the
    Label of each row and ``groups`` its subject id.
    """

    values: np.ndarray
    columns: tuple
    recording_ids: tuple
    labels: tuple
    groups: tuple
    devices: tuple

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            values = values.reshape(len(self.recording_ids), -1)
        object.__setattr__(self, "values", values)
        for name in ("columns", "recording_ids", "groups", "devices"):
            object.__setattr__(self, name,
                               tuple(str(v) for v in getattr(self, name)))
        object.__setattr__(self, "labels", tuple(
            v if isinstance(v, Label) else Label.from_str(v)
            for v in self.labels))

        n, p = values.shape
        if len(self.columns) != p:
            raise SchemaError("Expected {} column names, got {}.".format(
                p, len(self.columns)))
        if len(set(self.columns)) != p:
            raise SchemaError("Feature column names must be unique.")
        for name in ("recording_ids", "labels", "groups", "devices"):
            if len(getattr(self, name)) != n:
                raise SchemaError("Expected {} entries in {}, got {}."
                                  .format(n, name, len(getattr(self, name))))

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_columns(self):
        return self.values.shape[1]

    @property
    def targets(self):
        """Binary targets: 0 normal, 1 abnormal, -1 unlabeled."""
        return np.array([label.target for label in self.labels], dtype=int)

    @classmethod
    def from_vectors(cls, vectors):
        """
        Stack FeatureVectors into a matrix.

        Columns are the union of the vectors' catalogues in canonical order.
        """
        vectors = list(vectors)
        present = set()
        for vec in vectors:
            present.update(vec.names)
        columns = [name for name in catalogue_order() if name in present]

        values = np.full((len(vectors), len(columns)), np.nan)
        index = {name: j for j, name in enumerate(columns)}
        for i, vec in enumerate(vectors):
            for name, value in vec.values.items():
                if value is not None:
                    values[i, index[name]] = value

        return cls(values, tuple(columns),
                   tuple(v.recording_id for v in vectors),
                   tuple(v.label for v in vectors),
                   tuple(v.subject_id for v in vectors),
                   tuple(v.device for v in vectors))

    @classmethod
    def from_frame(cls, frame):
        """Build a matrix from a table with the metadata columns first."""
        missing = [col for col in META_COLUMNS if col not in frame.columns]
        if missing:
            msg = "Feature table is missing column '{}'.".format(missing[0])
            LOGGER.error(msg)
            raise SchemaError(msg)

        columns = [col for col in frame.columns if col not in META_COLUMNS]
        try:
            values = frame[columns].to_numpy(dtype=float)
        except (TypeError, ValueError):
            msg = "Feature table holds non-numeric feature cells."
            LOGGER.error(msg)
            raise SchemaError(msg)

        meta = frame[list(META_COLUMNS)].fillna("").astype(str)
        try:
            return cls(values.reshape(len(frame), len(columns)),
                       tuple(columns),
                       tuple(meta["recording_id"]),
                       tuple(meta["label"]),
                       tuple(meta["subject_id"]),
                       tuple(meta["device"]))
        except ValueError as exc:
            msg = "Invalid feature table: {}".format(exc)
            LOGGER.error(msg)
            raise SchemaError(msg)

    @classmethod
    def read_csv(cls, source):
        """Read a feature table from a path or text stream."""
        try:
            frame = pd.read_csv(source,
                                dtype={col: str for col in META_COLUMNS},
                                float_precision="round_trip")
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
            msg = "Malformed feature table: {}".format(exc)
            LOGGER.error(msg)
            raise ParseError(msg)
        return cls.from_frame(frame)

    def to_frame(self):
        frame = pd.DataFrame(self.values, columns=list(self.columns))
        meta = pd.DataFrame({
            "recording_id": self.recording_ids,
            "subject_id": self.groups,
            "device": self.devices,
            "label": [label.value for label in self.labels],
        })
        return pd.concat([meta, frame], axis=1)

    def write_csv(self, target):
        """Write the table; missing values become empty cells."""
        self.to_frame().to_csv(target, index=False, na_rep="",
                               float_format="%.17g", lineterminator="\n")

    def take(self, rows=None, columns=None):
        """Sub-matrix of the given row indices and column names."""
        rows = np.arange(self.n_rows) if rows is None else np.asarray(rows,
                                                                       int)
        columns = list(self.columns) if columns is None else list(columns)
        index = [self.columns.index(name) for name in columns]
        return FeatureMatrix(
            self.values[np.ix_(rows, index)], tuple(columns),
            tuple(self.recording_ids[i] for i in rows),
            tuple(self.labels[i] for i in rows),
            tuple(self.groups[i] for i in rows),
            tuple(self.devices[i] for i in rows))

    def labeled(self):
        """Rows labeled normal or abnormal."""
        return self.take(np.flatnonzero(self.targets >= 0))

    def kinds(self):
        """Exam kinds whose features appear in the columns."""
        prefixes = {name.split(".", 1)[0] for name in self.columns}
        return [kind for kind in ExamKind
                if kind.value.lower() in prefixes]

    def select_kind(self, kind):
        """
        Columns of one exam kind and the rows that carry any of them.

        :raises EmptyMatrixError: If nothing of that exam is present.
        """
        kind = kind if isinstance(kind, ExamKind) else ExamKind.from_str(kind)
        prefix = kind.value.lower() + "."
        columns = [c for c in self.columns if c.startswith(prefix)]
        if not columns:
            msg = "No {} feature columns in the table.".format(kind.value)
            LOGGER.error(msg)
            raise EmptyMatrixError(msg)
        sub = self.take(columns=columns)
        rows = np.flatnonzero(~np.all(np.isnan(sub.values), axis=1))
        if not len(rows):
            msg = "No {} rows in the table.".format(kind.value)
            LOGGER.error(msg)
            raise EmptyMatrixError(msg)
        return sub.take(rows)


class Standardizer(object):
    """
    Column-wise z-scoring with statistics fixed at fit time.

    Columns that are constant on the fitted rows are dropped.
    """

    def __init__(self, mean=None, std=None, keep=None):
        self.mean = None if mean is None else np.asarray(mean, float)
        self.std = None if std is None else np.asarray(std, float)
        self.keep = None if keep is None else np.asarray(keep, bool)

    def fit(self, X, columns=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            msg = "Cannot standardize an empty matrix of shape {}." \
                  .format(X.shape)
            LOGGER.error(msg)
            raise EmptyMatrixError(msg)

        mean = X.mean(axis=0)
        std = X.std(axis=0)
        scale = np.maximum(1.0, np.abs(mean))
        keep = std > CONSTANT_RTOL * scale
        if not np.all(keep):
            names = np.flatnonzero(~keep) if columns is None else \
                [columns[j] for j in np.flatnonzero(~keep)]
            msg = "Dropping {} constant column(s): {}".format(
                int(np.sum(~keep)), list(names))
            LOGGER.warning(msg)
            warnings.warn(msg, UserWarning)
        if not np.any(keep):
            msg = "Every column is constant; nothing left to standardize."
            LOGGER.error(msg)
            raise EmptyMatrixError(msg)

        self.mean, self.std, self.keep = mean[keep], std[keep], keep
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        return (X[:, self.keep] - self.mean) / self.std

    def fit_transform(self, X, columns=None):
        return self.fit(X, columns).transform(X)

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist(),
                "keep": self.keep.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["mean"], data["std"], data["keep"])


def standardize(m):
    """
    Z-score a complete feature matrix.

    :returns: (standardized FeatureMatrix, fitted Standardizer)
    """
    if np.any(np.isnan(m.values)):
        raise SchemaError("Impute missing values before standardizing.")
    scaler = Standardizer().fit(m.values, m.columns)
    columns = tuple(c for c, k in zip(m.columns, scaler.keep) if k)
    out = FeatureMatrix(scaler.transform(m.values), columns, m.recording_ids,
                        m.labels, m.groups, m.devices)
    return out, scaler


class FeaturePipeline(object):
    """
    Median imputation followed by standardization.

    Everything is fitted on training rows only and then replayed on any
    other rows with the same columns.
    """

    def __init__(self, columns=None, medians=None, scaler=None):
        self.columns = None if columns is None else tuple(columns)
        self.medians = None if medians is None else np.asarray(medians,
                                                               float)
        self.scaler = scaler

    @property
    def output_columns(self):
        return tuple(c for c, k in zip(self.columns, self.scaler.keep) if k)

    def fit(self, m):
        if m.n_rows == 0:
            raise EmptyMatrixError("No training rows.")
        observed = ~np.all(np.isnan(m.values), axis=0)
        if not np.any(observed):
            msg = "Every feature column is missing on the training rows."
            LOGGER.error(msg)
            raise EmptyMatrixError(msg)

        self.columns = tuple(c for c, o in zip(m.columns, observed) if o)
        values = m.take(columns=self.columns).values
        self.medians = np.nanmedian(values, axis=0)
        self.scaler = Standardizer().fit(self._impute(values), self.columns)
        return self

    def _impute(self, values):
        values = np.array(values, dtype=float)
        rows, cols = np.nonzero(np.isnan(values))
        values[rows, cols] = self.medians[cols]
        return values

    def transform(self, m):
        """Imputed and standardized array of a matrix's rows."""
        missing = [c for c in self.columns if c not in m.columns]
        if missing:
            msg = "Feature table lacks column '{}' the pipeline was fitted " \
                  "on.".format(missing[0])
            LOGGER.error(msg)
            raise SchemaError(msg)
        values = m.take(columns=self.columns).values
        return self.scaler.transform(self._impute(values))

    def fit_transform(self, m):
        return self.fit(m).transform(m)

    def to_dict(self):
        return {"columns": list(self.columns),
                "medians": self.medians.tolist(),
                "scaler": self.scaler.to_dict()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["columns"], data["medians"],
                   Standardizer.from_dict(data["scaler"]))
