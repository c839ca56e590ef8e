###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Filesystem, serialization and logging helpers shared by the CLI."""
import json
import logging
import os
import string

import coloredlogs
import numpy as np

LOGGER = logging.getLogger(__name__)

_SAFE_CHARACTERS = frozenset("-_.() " + string.ascii_letters + string.digits)
_LEVELS = {
    1: logging.DEBUG,
    2: logging.INFO,
    3: logging.WARNING,
    4: logging.ERROR,
}


def create_parentdir(path):
    """
    Create a directory and any missing parents.

    :param path: Directory to create; ``~`` is expanded.
    """
    path = os.path.expanduser(path)
    if not os.path.isdir(path):
        LOGGER.info("Creating output directory %s", path)
        os.makedirs(path, exist_ok=True)


def make_safe_path(base_path, *args):
    """
    Join recording ids or file names onto a directory.

    Characters outside letters, digits and ``-_.() `` are dropped from each
    component and spaces become underscores, so ids never escape
    ``base_path``.

    :param base_path: Directory the components are joined onto.
    :param args: Path components, usually derived from recording ids.
    :returns: The joined path.
    """
    parts = [base_path]
    for arg in args:
        kept = "".join(c for c in str(arg) if c in _SAFE_CHARACTERS)
        parts.append(kept.replace(" ", "_"))
    return os.path.join(*parts)


def create_dictionary(list_keyvalues, token=":"):
    """
    Parse ``key<token>value`` strings such as CLI ``--param`` overrides.

    Only the first token splits, so values may contain it.

    :param list_keyvalues: Strings to parse.
    :param token: Separator between key and value.
    :returns: Mapping of stripped keys to stripped values.
    """
    pairs = {}
    for item in list_keyvalues:
        if token not in item:
            msg = "Cannot split '{}' on '{}'; overrides are written as " \
                  "'section.key{}value'.".format(item, token, token)
            LOGGER.error(msg)
            raise ValueError(msg)
        key, value = item.split(token, 1)
        pairs[key.strip()] = value.strip()

    return pairs


def to_builtin(value):
    """
    Convert numpy scalars and arrays into JSON serializable builtins.

    Non-finite floats become None so that written JSON stays strict.
    """
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


def dump_json(data, fstream):
    """Write data as indented JSON with sorted keys."""
    json.dump(to_builtin(data), fstream, indent=2, sort_keys=True)
    fstream.write("\n")


class LoggerUtility:
    """Console and file logging setup for the ``neuroexam`` logger tree."""

    def __init__(self, logger):
        """
        :param logger: Logger whose handlers are managed.
        """
        self._logger = logger

    def configure(self, log_format, log_lvl=2, colors=True):
        """
        Set the root level and attach the console handler.

        :param log_format: Format string of every record.
        :param log_lvl: Verbosity from 1 (debug) to 5 (critical).
        :param colors: Color console records with coloredlogs.
        """
        level = self.map_level(log_lvl)
        logging.basicConfig(level=level, format=log_format)
        if colors:
            coloredlogs.install(level=level, logger=self._logger,
                                fmt=log_format)

    def add_file_handler(self, log_path, log_format, log_lvl=2):
        """
        Also write records to a file.

        :param log_path: Log file, appended to when it exists.
        :param log_format: Format string of every record.
        :param log_lvl: Verbosity from 1 (debug) to 5 (critical).
        """
        handler = logging.FileHandler(log_path)
        handler.setLevel(self.map_level(log_lvl))
        handler.setFormatter(logging.Formatter(log_format))
        self._logger.addHandler(handler)

    @staticmethod
    def map_level(log_lvl):
        """Logging level of a 1-5 verbosity; anything above 4 is critical."""
        return _LEVELS.get(log_lvl, logging.CRITICAL)
