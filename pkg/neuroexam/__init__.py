###############################################################################
# Copyright (c) 2024, the neuroexam developers.
#
# This file is part of neuroexam. It is distributed under the MIT License;
# see the LICENSE file at the repository root for the full text.
###############################################################################

"""
Clinically interpretable features from pose time series of neurological
exams, and the analyses built on them.

The package root holds the console report renderers used by the command line
interface. Feature extraction lives in :mod:`neuroexam.features`, the
studies in :mod:`neuroexam.analysis` and the synthetic recordings in
:mod:`neuroexam.synth`.
"""
from abc import ABCMeta, abstractmethod
from importlib.metadata import PackageNotFoundError, version
import inspect
from io import StringIO
import logging
import sys

from rich.console import Console
from rich.table import Table
from rich.theme import Theme
import tabulate

LOGGER = logging.getLogger(__name__)
LOGGER.addHandler(logging.NullHandler())

try:
    __version__ = version(__package__)
except PackageNotFoundError:
    __version__ = "0.0.0"


class BaseReportRenderer(metaclass=ABCMeta):
    """
    Console table of a report.

    Report data is a mapping of column name to a list of cell values, one
    entry per row.
    """

    def __init__(self, *args, **kwargs):
        self._report_data = {}
        self._report_table = None
        self._theme_dict = {}
        self.disable_theme = kwargs.pop("disable_theme", False)

    @staticmethod
    def _check(report_data):
        if not isinstance(report_data, dict) or not report_data:
            raise ValueError("Report data required to layout a table")
        lengths = {len(values) for values in report_data.values()}
        if len(lengths) != 1:
            raise ValueError("Report columns must have equal lengths")
        return report_data

    @staticmethod
    def _cell(value):
        if isinstance(value, float):
            return "{:.4g}".format(value)
        return "" if value is None else str(value)

    @abstractmethod
    def layout(self, report_data, title=None):
        """
        Lay out the report table.

        :param report_data: Mapping of column name to row values.
        :param title: Optional title shown above the table.
        """

    @abstractmethod
    def render_to_str(self, width=120):
        """Rendered table as a string."""

    def render(self):
        print(self.render_to_str())


class LegacyReportRenderer(BaseReportRenderer):
    """Plain text table rendered with tabulate."""

    layout_type = "legacy"

    def layout(self, report_data, title=None):
        self._report_data = self._check(report_data)
        cells = {key: [self._cell(v) for v in values]
                 for key, values in self._report_data.items()}
        table_str = tabulate.tabulate(cells, headers="keys")
        rule = "".ljust(max(len(line) for line in table_str.split("\n")),
                        "=")

        lines = [rule]
        if title:
            lines += [title, rule]
        lines += [table_str, rule]
        self._report_table = "\n".join(lines) + "\n"

    def render_to_str(self, width=120):
        return self._report_table


class FlatReportRenderer(BaseReportRenderer):
    """Rich table with alternating row styles."""

    layout_type = "flat"

    def __init__(self, *args, **kwargs):
        super(FlatReportRenderer, self).__init__(*args, **kwargs)
        self._theme_dict = {
            "Feature": "bold",
            "Metric": "bold",
            "col_style_1": "",
            "col_style_2": "blue",
        }

    def layout(self, report_data, title=None):
        self._report_data = self._check(report_data)
        self._report_table = Table()
        if title:
            self._report_table.title = title

        for nominal_col_num, col in enumerate(self._report_data):
            if col in self._theme_dict:
                col_style = col
            else:
                col_style = "col_style_{}".format(nominal_col_num % 2 + 1)
            self._report_table.add_column(col, style=col_style,
                                          overflow="fold")

        num_rows = len(next(iter(self._report_data.values())))
        for row in range(num_rows):
            self._report_table.add_row(
                *[self._cell(values[row])
                  for values in self._report_data.values()],
                style="dim" if row % 2 == 0 else "none")

    def render_to_str(self, width=120):
        theme = self._theme_dict
        if self.disable_theme:
            theme = {key: "none" for key in theme}
        printer = Console(theme=Theme(theme), file=StringIO(), width=width)
        printer.print(self._report_table)
        return printer.file.getvalue()


def iter_report_renderers():
    """(name, class) pairs of the concrete renderers in this module."""
    def member_is_renderer(member):
        return (inspect.isclass(member) and member.__module__ == __name__
                and issubclass(member, BaseReportRenderer)
                and not inspect.isabstract(member))

    for member in inspect.getmembers(sys.modules[__name__],
                                     member_is_renderer):
        yield member


class ReportRendererFactory:
    """Registry of console report layouts by name."""

    def __init__(self):
        self._layouts = {}
        for _, renderer in iter_report_renderers():
            self.register_layout(renderer.layout_type, renderer)

    def register_layout(self, layout, renderer):
        self._layouts[layout] = renderer

    def get_renderer(self, layout, disable_theme=False):
        renderer = self._layouts.get(layout)
        if not renderer:
            raise ValueError(layout)
        return renderer(disable_theme=disable_theme)

    def get_layouts(self):
        return self._layouts.keys()


report_renderer_factory = ReportRendererFactory()
