###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Per-exam feature extractors and the factory that finds them."""
import importlib
import inspect
import logging
import pkgutil

from neuroexam.abstracts import FeatureExtractor
from neuroexam.abstracts.enums import ExamKind

__all__ = ("ExtractorFactory", "extract_features")
LOGGER = logging.getLogger(__name__)


def iter_extractors():
    """
    Walk the modules of this package and collect every concrete
    FeatureExtractor they define.

    :returns: A list of extractor classes.
    """
    found = []
    for _, name, _ in pkgutil.iter_modules(__path__, __name__ + "."):
        module = importlib.import_module(name)
        for _, cls in inspect.getmembers(module, inspect.isclass):
            if issubclass(cls, FeatureExtractor) and \
                    not inspect.isabstract(cls) and cls not in found:
                found.append(cls)
    return found


class ExtractorFactory(object):
    """Maps each exam kind to the extractor class that handles it."""

    factories = {
        extractor.key: extractor for extractor in iter_extractors()
    }

    @classmethod
    def get_extractor(cls, test_kind):
        try:
            kind = test_kind if isinstance(test_kind, ExamKind) \
                else ExamKind.from_str(test_kind)
        except ValueError:
            kind = None

        if kind not in cls.factories:
            msg = "Extractor for exam '{0}' not found. Specify one of {1} " \
                  "or implement a new extractor keyed to '{0}'." \
                  .format(str(test_kind),
                          ", ".join(k.value for k in cls.factories))
            LOGGER.error(msg)
            raise ValueError(msg)

        return cls.factories[kind]

    @classmethod
    def get_valid_extractors(cls):
        return cls.factories.keys()


def extract_features(rec, cfg=None, config_hash=""):
    """
    Compute the feature vector of a recording with the extractor of its exam.

    :param rec: A PoseRecording.
    :param cfg: An ExtractionConfig, or None for the defaults.
    :param config_hash: Provenance stored in the returned FeatureVector.
    """
    extractor = ExtractorFactory.get_extractor(rec.test_kind)(cfg)
    LOGGER.debug("Extracting %s features of '%s'.", rec.test_kind.value,
                 rec.recording_id)
    return extractor.extract(rec, config_hash)
