###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""JSON schema helpers shared by the recording and configuration loaders."""
from functools import lru_cache
import json
import logging
import os
import re

import jsonschema

from neuroexam.errors import SchemaError

LOGGER = logging.getLogger(__name__)

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                          "schemas")


@lru_cache(maxsize=None)
def load_schema(name):
    """
    Load one of the packaged JSON schema files.

    :param name: File name inside the schemas directory.
    :returns: The parsed schema document.
    """
    with open(os.path.join(SCHEMA_DIR, name), "r") as json_file:
        return json.load(json_file)


def _raise(exc, msg):
    LOGGER.error(msg)
    raise exc(msg)


def validate_schema(parent_key, instance, schema, exc=SchemaError):
    """
    Validate an instance against a JSON schema.

    The first violation found is reported with a readable message naming the
    offending key path relative to ``parent_key``.

    :param parent_key: Name of the validated section, used in messages.
    :param instance: The decoded document or section.
    :param schema: The JSON schema for that section.
    :param exc: Exception class raised on the first violation.
    """
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(instance),
                    key=lambda e: [str(p) for p in e.absolute_path])
    for error in errors:
        path = ".".join(str(p) for p in error.absolute_path)
        where = "{}.{}".format(parent_key, path) if path else parent_key

        if error.validator == "additionalProperties":
            unrecognized = (
                re.search(r"'.+?'", error.message).group(0).strip("'")
            )
            _raise(exc, "Unrecognized key '{0}' found in {1}."
                   .format(unrecognized, where))

        elif error.validator == "type":
            expected_type = error.validator_value
            if isinstance(expected_type, list):
                expected_type = "' or '".join(expected_type)
            _raise(exc, f"In {parent_key}, {path or 'the document'} must be "
                        f"of type '{expected_type}', but found "
                        f"'{type(error.instance).__name__}'.")

        elif error.validator == "required":
            missing = re.search(r"'.+?'", error.message).group(0).strip("'")
            _raise(exc, "Key '{0}' is missing from {1}."
                   .format(missing, where))

        elif error.validator == "minLength":
            _raise(exc, "In {0}, empty string found as value for {1}."
                   .format(parent_key, path))

        elif error.validator == "enum":
            _raise(exc, "In {0}, {1} must be one of {2}, but found '{3}'."
                   .format(parent_key, path,
                           ", ".join(str(v) for v in error.validator_value),
                           error.instance))

        elif error.validator in ("minItems", "maxItems"):
            _raise(exc, "In {0}, {1} must hold {2} entries, found {3}."
                   .format(parent_key, path, error.validator_value,
                           len(error.instance)))

        else:
            _raise(exc, "In {0}, {1}: {2}"
                   .format(parent_key, path or "document", error.message))
