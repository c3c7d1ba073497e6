"""Static figure rendering for simulation sweep CSV datasets.

This package is a pure consumer: it reads the fig1..fig4 CSV files that
the simulation harness exports, and draws them.  No simulation logic
lives here, and nothing here imports the simulator.
"""

from figplots.readers import (EmptyData, MissingInput, SchemaMismatch,
                              read_figure_csv)
from figplots.render import FigureJob, render

__all__ = ["EmptyData", "MissingInput", "SchemaMismatch",
           "read_figure_csv", "FigureJob", "render"]
