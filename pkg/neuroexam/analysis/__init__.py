###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Feature matrices, classifiers, evaluation and cohort studies."""
import importlib
import inspect
import logging
import pkgutil

from neuroexam.abstracts import Classifier

__all__ = ("ClassifierFactory",)
LOGGER = logging.getLogger(__name__)


def iter_classifiers():
    """Concrete Classifier subclasses defined in this package's modules."""
    found = []
    for _, name, _ in pkgutil.iter_modules(__path__, __name__ + "."):
        module = importlib.import_module(name)
        for _, cls in inspect.getmembers(module, inspect.isclass):
            if issubclass(cls, Classifier) and \
                    not inspect.isabstract(cls) and cls not in found:
                found.append(cls)
    return found


class ClassifierFactory(object):
    """Looks up classifier classes by their ``key``."""

    factories = {
        classifier.key: classifier for classifier in iter_classifiers()
    }

    @classmethod
    def get_classifier(cls, model_id):
        if str(model_id).lower() not in cls.factories:
            msg = "Model '{0}' not found. Specify one of {1} or implement a " \
                  "new classifier keyed to '{0}'." \
                  .format(str(model_id), ", ".join(cls.factories))
            LOGGER.error(msg)
            raise ValueError(msg)

        return cls.factories[str(model_id).lower()]

    @classmethod
    def get_valid_classifiers(cls):
        return cls.factories.keys()
