"""Pinned CSV schemas for the four figure datasets, and their readers.

The harness exports one CSV per figure with a fixed header.  The readers
here re-declare those headers rather than importing them, so a drifting
producer fails loudly with SchemaMismatch instead of silently plotting
the wrong columns.

fig1: one row per (q, n) grid point with the empirical segregation
probability, its 95 percent interval, and the beta lower bound.
fig2: one row per finished run with its absorption time and a reference
time C(n,2)/(1-q) ("inf" at q=1).
fig3: one row per segregation run with the two largest component sizes,
surviving edges, and component count.
fig4: one row per finished multi-opinion run with final counts per label
(count_0..count_{k-1}, k read off the header) and the three largest
component sizes.
"""

import csv
import os


class MissingInput(FileNotFoundError):
    """Input CSV does not exist."""


class SchemaMismatch(ValueError):
    """Input CSV header differs from the pinned schema."""


class EmptyData(ValueError):
    """Dataset has a header but no rows where rows are required."""


FIG1_COLUMNS = ["q", "n", "p_hat", "ci_lo", "ci_hi", "beta_bound"]
FIG2_COLUMNS = ["q", "n", "tau_abs", "outcome", "ref_tau"]
FIG3_COLUMNS = ["q", "n", "c1", "c2", "edges_remaining", "n_components"]
FIG4_PREFIX = ["q", "n"]
FIG4_SUFFIX = ["c1", "c2", "c3", "strong_segregation"]


def _read_raw(path):
    if not os.path.isfile(path):
        raise MissingInput("no such input file: %s" % (path,))
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaMismatch("%s: empty file, expected a header" % (path,))
    return rows[0], rows[1:]


def _check_header(path, header, expected):
    if header != expected:
        raise SchemaMismatch("%s: header %r does not match the pinned "
                             "schema %r" % (path, header, expected))


def _fig4_count_labels(path, header):
    """Validate the fig4 header and return its count_* column names."""
    counts = [c for c in header if c.startswith("count_")]
    expected = FIG4_PREFIX + counts + FIG4_SUFFIX
    if (header != expected or len(counts) < 2
            or counts != ["count_%d" % i for i in range(len(counts))]):
        raise SchemaMismatch("%s: header %r does not match the pinned "
                             "schema %r" % (path, header,
                                            FIG4_PREFIX + ["count_0..."]
                                            + FIG4_SUFFIX))
    return counts


def read_figure_csv(path, which):
    """Read one figure dataset and return a list of per-row dicts.

    Numeric fields come back as float (counts and sizes as int); the
    fig2 outcome column stays a string.  Raises MissingInput,
    SchemaMismatch, or, for fig1/fig2 with zero rows, EmptyData.  fig3
    and fig4 may legitimately be empty (no qualifying runs), so their
    empty datasets return [].
    """
    header, raw = _read_raw(path)
    if which == 1:
        _check_header(path, header, FIG1_COLUMNS)
        rows = [dict(q=float(r[0]), n=int(r[1]), p_hat=float(r[2]),
                     ci_lo=float(r[3]), ci_hi=float(r[4]),
                     beta_bound=float(r[5])) for r in raw]
        if not rows:
            raise EmptyData("%s: no grid points to plot" % (path,))
    elif which == 2:
        _check_header(path, header, FIG2_COLUMNS)
        rows = [dict(q=float(r[0]), n=int(r[1]), tau_abs=int(r[2]),
                     outcome=r[3], ref_tau=float(r[4])) for r in raw]
        if not rows:
            raise EmptyData("%s: no runs to plot" % (path,))
    elif which == 3:
        _check_header(path, header, FIG3_COLUMNS)
        rows = [dict(q=float(r[0]), n=int(r[1]), c1=int(r[2]), c2=int(r[3]),
                     edges_remaining=int(r[4]), n_components=int(r[5]))
                for r in raw]
    elif which == 4:
        labels = _fig4_count_labels(path, header)
        rows = []
        for r in raw:
            row = dict(q=float(r[0]), n=int(r[1]))
            row["counts"] = tuple(int(v) for v in r[2:2 + len(labels)])
            c1, c2, c3, strong = r[2 + len(labels):]
            row.update(c1=int(c1), c2=int(c2), c3=int(c3),
                       strong_segregation=bool(int(strong)))
            rows.append(row)
    else:
        raise ValueError("which must be 1..4, got %r" % (which,))
    return rows
