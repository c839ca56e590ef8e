###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""Loading and validation of recordings and run configurations."""
from neuroexam.specification.runconfig import RunConfig

__all__ = ("RunConfig",)
