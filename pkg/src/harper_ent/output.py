"""CSV and gnuplot-script writers.

Every CSV starts with ``#`` comment lines carrying the tool version and the full
parameter set, then one header row. Files are written to a temporary sibling
and renamed into place.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__

TOOL = "harper-ent"


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def render_csv(header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(f"# {TOOL} {__version__}\n")
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(path, header, rows, comments=()) -> Path:
    return atomic_write_text(path, render_csv(header, rows, comments))


def read_csv(path):
    """Parse a file written by :func:`write_csv` into (comments, list of dict rows)."""
    comments, body = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                body.append(line)
    return comments, list(csv.DictReader(body))


def lambda_tag(lam: float) -> str:
    return format(float(lam), "g")


def gnuplot_script(
    title: str,
    xlabel: str,
    ylabel: str,
    series: Sequence[tuple],
    output_png: str,
) -> str:
    """Gnuplot script plotting (csv_file, x_column, y_column, label) tuples."""
    lines = [
        f"# {TOOL} {__version__} plot script; run with: gnuplot <this file>",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        "set terminal pngcairo size 800,560",
        f"set output '{output_png}'",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
    ]
    parts = [
        f"'{name}' using '{x}':'{y}' with lines title '{label}'"
        for name, x, y, label in series
    ]
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"
