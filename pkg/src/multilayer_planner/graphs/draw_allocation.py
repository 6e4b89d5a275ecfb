"""This file contains code for the wavelength allocation table
of a plan: a matrix with one row per used fiber instance and
one column per channel or slot, drawn as text, CSV or a
matplotlib heat map."""

from pathlib import Path

import matplotlib.pyplot
import numpy

from multilayer_planner.model.types import Plan
from multilayer_planner.planning.bom import used_fiber_instances

LINK_COLUMN = "link"


def row_label(link_id: str, instance: int) -> str:
    """Row label of a fiber instance, e.g. "L1:0"."""
    return f"{link_id}:{instance}"


def allocation_table(plan: Plan) -> tuple[list[str], list[list[str]]]:
    """Builds the wavelength allocation table of a plan.

    Rows are the fiber instances carrying at least one working
    or protection assignment, ordered by link id and then
    instance. Columns are the grid cells; a cell holds the id of
    the lightpath occupying it, or is blank.

    Args:
        plan (Plan): The plan.

    Returns:
        tuple[list[str], list[list[str]]]: The header (link
            column then cell indices) and the rows, each starting
            with its row label.
    """
    size = plan.grid.size
    header = [LINK_COLUMN] + [str(index) for index in range(size)]
    cells = {
        key: [""] * size for key in used_fiber_instances(plan.lightpaths)
    }
    for lightpath in plan.lightpaths:
        for assignment in (lightpath.spectrum, lightpath.protection_spectrum):
            if assignment is None:
                continue
            stop = assignment.start + assignment.width
            for item in assignment.fiber_instances:
                row = cells[(item.link_id, item.instance)]
                row[assignment.start : stop] = [lightpath.id] * (
                    stop - assignment.start
                )
    rows = [
        [row_label(link_id, instance)] + row
        for (link_id, instance), row in cells.items()
    ]
    return header, rows


def format_allocation_table(
    header: list[str], rows: list[list[str]]
) -> str:
    """Formats an allocation table as aligned text.

    Columns after the last occupied cell are left out, so an
    empty table prints the link column only.

    Args:
        header (list[str]): Header from `allocation_table`.
        rows (list[list[str]]): Rows from `allocation_table`.

    Returns:
        str: The table, one line per row, newline terminated.
    """
    used = [
        index
        for row in rows
        for index, cell in enumerate(row)
        if index > 0 and cell
    ]
    stop = max(used, default=0) + 1
    lines = [header[:stop]] + [row[:stop] for row in rows]
    widths = [
        max(len(line[column]) for line in lines) for column in range(stop)
    ]
    text = [
        " ".join(
            cell.ljust(width) for cell, width in zip(line, widths)
        ).rstrip()
        for line in lines
    ]
    return "\n".join(text) + "\n"


def draw_allocation_table(
    header: list[str], rows: list[list[str]], path: str | Path
) -> Path:
    """Draws an allocation table as a heat map and saves it.

    Each lightpath gets its own color; free cells are white.

    Args:
        header (list[str]): Header from `allocation_table`.
        rows (list[list[str]]): Rows from `allocation_table`.
        path (str | Path): Image file to write.

    Returns:
        Path: The written file.
    """
    path = Path(path)
    lightpath_ids = sorted({cell for row in rows for cell in row[1:] if cell})
    codes = {
        lightpath_id: code
        for code, lightpath_id in enumerate(lightpath_ids, start=1)
    }
    matrix = numpy.array(
        [[codes.get(cell, 0) for cell in row[1:]] for row in rows],
        dtype=float,
    ).reshape(len(rows), len(header) - 1)
    matrix[matrix == 0] = numpy.nan

    fig, ax = matplotlib.pyplot.subplots()
    ax.imshow(matrix, aspect="auto", interpolation="nearest", cmap="tab20")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels([row[0] for row in rows])
    ax.set_xlabel("channel / slot")
    ax.set_ylabel("fiber instance")
    fig.savefig(path)
    matplotlib.pyplot.close(fig)
    return path
