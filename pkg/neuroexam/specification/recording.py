###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Reading and writing canonical pose recordings.

Two on-disk formats are supported. The JSON format carries metadata and
frames in one document. The CSV format holds one row per frame with columns
named ``<group>_<side>_<joint>_<axis>`` and keeps its metadata in a
``<stem>.meta.json`` sidecar next to the table.
"""
from io import StringIO
import json
import logging
import os

import numpy as np
import pandas as pd

from neuroexam.datastructures.pose import GROUP_SHAPES, PoseRecording, \
    SkeletonConvention
from neuroexam.errors import ParseError, SchemaError
from neuroexam.specification.validation import load_schema, validate_schema
from neuroexam.utils import create_parentdir

LOGGER = logging.getLogger(__name__)

FORMATS = ("json", "csv")
META_SUFFIX = ".meta.json"


def _read_text(source):
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, (bytes, bytearray)):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            msg = "Recording is not valid UTF-8 text: {}".format(exc)
            LOGGER.error(msg)
            raise ParseError(msg)
    return source


def _metadata_kwargs(doc, recording_id):
    return {
        "fps": doc["fps"],
        "test_kind": doc["test_kind"],
        "label": doc.get("label", "unlabeled"),
        "subject_id": doc.get("subject_id", ""),
        "device": doc.get("device", ""),
        "recording_id": doc.get("recording_id", recording_id or ""),
    }


def _load_json(text, recording_id):
    try:
        doc = json.loads(text)
    except ValueError as exc:
        msg = "Malformed JSON recording: {}".format(exc)
        LOGGER.error(msg)
        raise ParseError(msg)

    schema = load_schema("recording.json")
    validate_schema("recording", doc, schema["RECORDING"])
    return PoseRecording.from_frames(doc["frames"],
                                     **_metadata_kwargs(doc, recording_id))


def _load_csv(text, meta, recording_id):
    if meta is None:
        msg = "CSV recordings require a metadata sidecar."
        LOGGER.error(msg)
        raise SchemaError(msg)
    schema = load_schema("recording.json")
    validate_schema("metadata", meta, schema["METADATA"])

    try:
        table = pd.read_csv(StringIO(text), float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        msg = "Malformed CSV recording: {}".format(exc)
        LOGGER.error(msg)
        raise ParseError(msg)

    columns = set(table.columns)
    known = set()
    groups = {}
    for group, (_, slots, width) in GROUP_SHAPES.items():
        expected = SkeletonConvention.columns(group)
        known.update(expected)
        present = [col for col in expected if col in columns]
        if not present:
            continue
        if len(present) != len(expected):
            missing = [col for col in expected if col not in columns]
            msg = "CSV recording is missing {} column(s) of group '{}', " \
                  "starting with '{}'.".format(len(missing), group,
                                                missing[0])
            LOGGER.error(msg)
            raise SchemaError(msg)

        try:
            values = table[expected].to_numpy(dtype=float)
        except (TypeError, ValueError):
            msg = "Group '{}' holds non-numeric cells.".format(group)
            LOGGER.error(msg)
            raise SchemaError(msg)
        groups[group] = values.reshape(len(table), slots, width)

    unknown = sorted(columns - known)
    if unknown:
        msg = "Unrecognized column '{}' found in CSV recording." \
              .format(unknown[0])
        LOGGER.error(msg)
        raise SchemaError(msg)

    return PoseRecording(**_metadata_kwargs(meta, recording_id), **groups)


def load_recording(source, format="json", meta=None, recording_id=None):
    """
    Load a recording from a stream or raw document.

    :param source: A readable stream, bytes or a string holding the document.
    :param format: 'json' or 'csv'.
    :param meta: Metadata mapping, required for the CSV format.
    :param recording_id: Identifier used when the document carries none.
    :returns: A validated PoseRecording.
    """
    format = str(format).lower()
    if format not in FORMATS:
        msg = "Unknown recording format '{}'. Expected one of {}." \
              .format(format, ", ".join(FORMATS))
        LOGGER.error(msg)
        raise ValueError(msg)

    text = _read_text(source)
    if format == "json":
        return _load_json(text, recording_id)
    return _load_csv(text, meta, recording_id)


def recording_to_dict(rec):
    """Canonical JSON document of a recording."""
    doc = dict(rec.metadata())
    doc["frames"] = [
        {group: getattr(rec, group)[i].tolist() for group in rec.groups}
        for i in range(rec.n_frames)
    ]
    return doc


def recording_to_table(rec):
    """One row per frame with the canonical flat column names."""
    columns, blocks = [], []
    for group in rec.groups:
        columns.extend(SkeletonConvention.columns(group))
        blocks.append(getattr(rec, group).reshape(rec.n_frames, -1))
    return pd.DataFrame(np.hstack(blocks), columns=columns)


def save_recording(rec, stream, format="json"):
    """
    Serialize a recording into a text stream.

    The CSV format writes the frame table only; its metadata is available
    from :meth:`PoseRecording.metadata`.
    """
    format = str(format).lower()
    if format == "json":
        json.dump(recording_to_dict(rec), stream)
    elif format == "csv":
        recording_to_table(rec).to_csv(stream, index=False)
    else:
        msg = "Unknown recording format '{}'.".format(format)
        LOGGER.error(msg)
        raise ValueError(msg)


def recording_stem(path):
    """File name without directory and recording extension."""
    name = os.path.basename(path)
    for ext in (META_SUFFIX, ".json", ".csv"):
        if name.lower().endswith(ext):
            return name[:-len(ext)]
    return os.path.splitext(name)[0]


def _format_from_path(path, format):
    if format:
        return format
    ext = os.path.splitext(path)[1].lower().lstrip(".")
    if ext not in FORMATS:
        msg = "Cannot infer the recording format of '{}'.".format(path)
        LOGGER.error(msg)
        raise ParseError(msg)
    return ext


def read_recording(path, format=None):
    """
    Read a recording file.

    :param path: Path to a '.json' or '.csv' recording.
    :param format: Optional explicit format overriding the extension.
    :returns: A validated PoseRecording; its id defaults to the file stem.
    """
    format = _format_from_path(path, format)
    stem = recording_stem(path)
    LOGGER.debug("Reading %s recording '%s'.", format, path)

    meta = None
    if format == "csv":
        meta_path = os.path.join(os.path.dirname(path), stem + META_SUFFIX)
        if not os.path.exists(meta_path):
            msg = "Metadata sidecar '{}' not found.".format(meta_path)
            LOGGER.error(msg)
            raise SchemaError(msg)
        with open(meta_path, "r") as meta_file:
            try:
                meta = json.load(meta_file)
            except ValueError as exc:
                msg = "Malformed metadata sidecar: {}".format(exc)
                LOGGER.error(msg)
                raise ParseError(msg)

    with open(path, "rb") as data:
        return load_recording(data, format, meta=meta, recording_id=stem)


def write_recording(rec, path, format=None):
    """
    Write a recording file, plus its metadata sidecar for CSV.

    :returns: List of written paths.
    """
    format = _format_from_path(path, format)
    parent = os.path.dirname(os.path.abspath(path))
    create_parentdir(parent)

    with open(path, "w", newline="") as data:
        save_recording(rec, data, format)
    written = [path]

    if format == "csv":
        meta_path = os.path.join(parent, recording_stem(path) + META_SUFFIX)
        with open(meta_path, "w") as meta_file:
            json.dump(rec.metadata(), meta_file, indent=2)
        written.append(meta_path)

    LOGGER.debug("Recording '%s' written to %s.", rec.recording_id, path)
    return written
