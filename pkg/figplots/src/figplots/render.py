"""Draw the four standard figures from their CSV datasets.

Rendering is a pure function of the input CSV plus the format flag: same
bytes in, same picture out.  fig3 and fig4 accept empty datasets (zero
qualifying runs) and render annotated empty axes instead of failing.
"""

import math
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from figplots.readers import read_figure_csv  # noqa: E402

_MARKERS = ["o", "s", "^", "D", "v", "P"]


@dataclass(frozen=True)
class FigureJob:
    """One rendering task: which figure, where from, where to."""

    which: int
    input_dir: str
    output_path: str
    format: str = "png"

    def __post_init__(self):
        if self.which not in (1, 2, 3, 4):
            raise ValueError("which must be 1..4, got %r" % (self.which,))
        if self.format not in ("png", "svg"):
            raise ValueError("format must be png or svg, got %r"
                             % (self.format,))

    @property
    def input_path(self):
        return os.path.join(self.input_dir, "fig%d.csv" % self.which)


def _annotate_empty(ax, message):
    ax.text(0.5, 0.5, message, ha="center", va="center",
            transform=ax.transAxes, fontsize=11, color="0.4")
    ax.set_xticks([])
    ax.set_yticks([])


def _split_by_n(rows):
    by_n = {}
    for row in rows:
        by_n.setdefault(row["n"], []).append(row)
    return sorted(by_n.items())


def _render_fig1(rows, fig):
    """Segregation probability versus q, with the beta bound overlaid."""
    ax = fig.subplots()
    for i, (n, grp) in enumerate(_split_by_n(rows)):
        grp = sorted(grp, key=lambda r: r["q"])
        qs = [r["q"] for r in grp]
        ps = [r["p_hat"] for r in grp]
        err = [[r["p_hat"] - r["ci_lo"] for r in grp],
               [r["ci_hi"] - r["p_hat"] for r in grp]]
        ax.errorbar(qs, ps, yerr=err, linestyle="none",
                    marker=_MARKERS[i % len(_MARKERS)], capsize=3,
                    markersize=5, label="N = %d" % n)
    bound = sorted({(r["q"], r["beta_bound"]) for r in rows})
    ax.plot([b[0] for b in bound], [b[1] for b in bound], "k--",
            label=r"$\beta(q/(2(1-q)))$ bound")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("update probability q")
    ax.set_ylabel("empirical P(segregation)")
    ax.legend(frameon=False)


def _render_fig2(rows, fig):
    """Histogram of absorption times with the C(n,2)/(1-q) reference."""
    ax = fig.subplots()
    outcomes = sorted({r["outcome"] for r in rows})
    data = [[r["tau_abs"] for r in rows if r["outcome"] == o]
            for o in outcomes]
    ax.hist(data, bins=40, stacked=True, label=outcomes)
    for ref in sorted({r["ref_tau"] for r in rows}):
        if math.isfinite(ref):
            ax.axvline(ref, color="k", linestyle="--", linewidth=1.2,
                       label=r"$\binom{N}{2}/(1-q)$")
    # dedupe legend labels (one vline per (q, n) pair)
    handles, labels = ax.get_legend_handles_labels()
    seen = {}
    for h, l in zip(handles, labels):
        seen.setdefault(l, h)
    ax.legend(seen.values(), seen.keys(), frameon=False)
    ax.set_xlabel(r"absorption time $\tau_{abs}$")
    ax.set_ylabel("runs")


def _render_fig3(rows, fig):
    """Component-size panels over segregation runs."""
    axes = fig.subplots(2, 2).ravel()
    if not rows:
        for ax in axes:
            _annotate_empty(ax, "no segregation runs in dataset")
        return
    qs = [r["q"] for r in rows]
    names = ["c1", "c2", "edges_remaining", "n_components"]
    titles = ["largest component $C_1$", "second component $C_2$",
              "surviving edges", "number of components"]
    for ax, name, title in zip(axes[:2], names[:2], titles[:2]):
        ax.scatter(qs, [r[name] for r in rows], s=8, alpha=0.5)
        ax.set_xlabel("q")
        ax.set_ylabel(title)
    for ax, name, title in zip(axes[2:], names[2:], titles[2:]):
        ax.hist([r[name] for r in rows], bins=30)
        ax.set_xlabel(title)
        ax.set_ylabel("runs")


def _ternary_xy(freqs):
    """Barycentric (f0, f1, f2) -> 2D simplex coordinates."""
    f0, f1, f2 = freqs
    return f1 + 0.5 * f2, f2 * math.sqrt(3.0) / 2.0


def _render_fig4(rows, fig):
    """Multi-opinion panels: sorted final frequencies, component sizes,
    the ternary simplex of final frequencies, and strong segregation."""
    axes = fig.subplots(2, 2).ravel()
    if not rows:
        for ax in axes:
            _annotate_empty(ax, "no finished runs in dataset")
        return
    k = len(rows[0]["counts"])

    by_q = {}
    for r in rows:
        by_q.setdefault(r["q"], []).append(r)
    qs = sorted(by_q)

    sorted_freq = np.array(
        [np.mean([np.sort(r["counts"]) / r["n"] for r in by_q[q]], axis=0)
         for q in qs])
    for j in range(k):
        axes[0].plot(qs, sorted_freq[:, j], marker="o", markersize=4,
                     label=r"$z_{(%d)}$" % (j + 1))
    axes[0].set_xlabel("q")
    axes[0].set_ylabel("mean sorted final frequency")
    axes[0].legend(frameon=False)

    all_q = [r["q"] for r in rows]
    for name, label in (("c1", "$C_1/N$"), ("c2", "$C_2/N$")):
        axes[1].scatter(all_q, [r[name] / r["n"] for r in rows], s=8,
                        alpha=0.4, label=label)
    axes[1].set_xlabel("q")
    axes[1].set_ylabel("component size fraction")
    axes[1].legend(frameon=False)

    ax = axes[2]
    if k == 3:
        corners = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)]
        for a, b in ((0, 1), (1, 2), (2, 0)):
            ax.plot([corners[a][0], corners[b][0]],
                    [corners[a][1], corners[b][1]], color="0.3",
                    linewidth=1.0)
        pts = [_ternary_xy(np.array(r["counts"]) / r["n"]) for r in rows]
        strong = [r["strong_segregation"] for r in rows]
        for flag, color, label in ((True, "C0", "all opinions survive"),
                                   (False, "C3", "some opinion dies")):
            sel = [p for p, s in zip(pts, strong) if s is flag]
            if sel:
                ax.scatter([p[0] for p in sel], [p[1] for p in sel], s=10,
                           alpha=0.5, color=color, label=label)
        for (x, y), text in zip(corners, ("0", "1", "2")):
            if y == 0:
                ax.annotate("opinion " + text, (x, y), ha="center",
                            xytext=(x, y - 0.06), fontsize=9)
            else:
                ax.annotate("opinion " + text, (x, y), ha="left",
                            xytext=(x + 0.06, y), fontsize=9)
        ax.set_xlim(-0.1, 1.1)
        ax.set_ylim(-0.12, 1.0)
        ax.set_aspect("equal")
        ax.axis("off")
        ax.legend(frameon=False, loc="upper left", fontsize=8,
                  bbox_to_anchor=(-0.25, 1.0))
    else:
        _annotate_empty(ax, "ternary panel needs exactly 3 opinion "
                            "labels (dataset has %d)" % k)

    strong_rate = [np.mean([r["strong_segregation"] for r in by_q[q]])
                   for q in qs]
    axes[3].plot(qs, strong_rate, marker="s", markersize=4, color="C2")
    axes[3].set_xlabel("q")
    axes[3].set_ylabel("P(all %d opinions survive)" % k)
    axes[3].set_ylim(-0.02, 1.02)


_RENDERERS = {1: _render_fig1, 2: _render_fig2, 3: _render_fig3,
              4: _render_fig4}


def render(job: FigureJob) -> str:
    """Render one figure and return the written path."""
    rows = read_figure_csv(job.input_path, job.which)
    fig = plt.figure(figsize=(8, 6) if job.which in (3, 4) else (6, 4.5),
                     dpi=150)
    try:
        _RENDERERS[job.which](rows, fig)
        fig.suptitle("fig%d  (%d rows)" % (job.which, len(rows)),
                     fontsize=10, y=0.995)
        fig.tight_layout()
        fig.savefig(job.output_path, format=job.format)
    finally:
        plt.close(fig)
    return job.output_path
