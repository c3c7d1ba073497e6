"""Secondary-package tests: readers, renderers, and the per-figure CLIs.

Everything renders from the golden CSVs checked into golden/; no
simulation code is imported or executed here.
"""

import shutil
from pathlib import Path

import pytest

from figplots import cli
from figplots.readers import (EmptyData, MissingInput, SchemaMismatch,
                              FIG1_COLUMNS, FIG3_COLUMNS, read_figure_csv)
from figplots.render import FigureJob, _ternary_xy, render

GOLDEN = Path(__file__).resolve().parent.parent / "golden"


def golden_copy(tmp_path, *figs):
    for which in figs:
        shutil.copy(GOLDEN / ("fig%d.csv" % which), tmp_path)
    return tmp_path


def test_golden_files_parse():
    rows1 = read_figure_csv(GOLDEN / "fig1.csv", 1)
    assert len(rows1) == 11
    assert all(0.0 <= r["ci_lo"] <= r["p_hat"] <= r["ci_hi"] <= 1.0
               for r in rows1)
    rows2 = read_figure_csv(GOLDEN / "fig2.csv", 2)
    assert {r["outcome"] for r in rows2} >= {"segregation"}
    assert any(r["ref_tau"] == float("inf") for r in rows2)
    rows3 = read_figure_csv(GOLDEN / "fig3.csv", 3)
    assert all(r["c1"] >= r["c2"] >= 0 for r in rows3)
    rows4 = read_figure_csv(GOLDEN / "fig4.csv", 4)
    assert all(len(r["counts"]) == 3 for r in rows4)
    assert all(sum(r["counts"]) == r["n"] for r in rows4)


@pytest.mark.parametrize("which", [1, 2, 3, 4])
@pytest.mark.parametrize("fmt", ["png", "svg"])
def test_render_golden_to_nonempty_image(tmp_path, which, fmt):
    out = tmp_path / ("fig%d.%s" % (which, fmt))
    job = FigureJob(which=which, input_dir=str(GOLDEN),
                    output_path=str(out), format=fmt)
    assert render(job) == str(out)
    assert out.stat().st_size > 1000
    if fmt == "png":
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    else:
        assert b"<svg" in out.read_bytes()[:1000]


def test_fig3_empty_renders_annotated_plot(tmp_path):
    (tmp_path / "fig3.csv").write_text(",".join(FIG3_COLUMNS) + "\n",
                                       encoding="utf-8")
    out = tmp_path / "fig3.png"
    render(FigureJob(3, str(tmp_path), str(out)))
    assert out.stat().st_size > 1000


def test_fig4_empty_renders_annotated_plot(tmp_path):
    header = "q,n,count_0,count_1,count_2,c1,c2,c3,strong_segregation\n"
    (tmp_path / "fig4.csv").write_text(header, encoding="utf-8")
    out = tmp_path / "fig4.svg"
    render(FigureJob(4, str(tmp_path), str(out), format="svg"))
    assert out.stat().st_size > 500


def test_fig4_two_opinion_dataset_renders(tmp_path):
    text = ("q,n,count_0,count_1,c1,c2,c3,strong_segregation\n"
            "0.5,8,3,5,5,3,0,1\n"
            "0.5,8,0,8,8,0,0,0\n")
    (tmp_path / "fig4.csv").write_text(text, encoding="utf-8")
    rows = read_figure_csv(tmp_path / "fig4.csv", 4)
    assert rows[0]["counts"] == (3, 5)
    out = tmp_path / "fig4.png"
    render(FigureJob(4, str(tmp_path), str(out)))
    assert out.stat().st_size > 1000


def test_missing_input_raises(tmp_path):
    with pytest.raises(MissingInput):
        read_figure_csv(tmp_path / "fig1.csv", 1)


def test_empty_fig1_fig2_raise(tmp_path):
    (tmp_path / "fig1.csv").write_text(",".join(FIG1_COLUMNS) + "\n",
                                       encoding="utf-8")
    with pytest.raises(EmptyData):
        read_figure_csv(tmp_path / "fig1.csv", 1)
    (tmp_path / "fig2.csv").write_text("q,n,tau_abs,outcome,ref_tau\n",
                                       encoding="utf-8")
    with pytest.raises(EmptyData):
        read_figure_csv(tmp_path / "fig2.csv", 2)


def test_schema_mismatch_on_truncated_header(tmp_path):
    (tmp_path / "fig1.csv").write_text("q,n,p_hat,ci_lo,ci_hi\n0,8,1,1,1\n",
                                       encoding="utf-8")
    with pytest.raises(SchemaMismatch):
        read_figure_csv(tmp_path / "fig1.csv", 1)
    (tmp_path / "fig4.csv").write_text(
        "q,n,count_0,count_2,c1,c2,c3,strong_segregation\n",
        encoding="utf-8")
    with pytest.raises(SchemaMismatch):
        read_figure_csv(tmp_path / "fig4.csv", 4)
    (tmp_path / "fig3.csv").write_text("", encoding="utf-8")
    with pytest.raises(SchemaMismatch):
        read_figure_csv(tmp_path / "fig3.csv", 3)


def test_job_validation():
    with pytest.raises(ValueError):
        FigureJob(5, ".", "out.png")
    with pytest.raises(ValueError):
        FigureJob(1, ".", "out.pdf", format="pdf")
    with pytest.raises(ValueError):
        read_figure_csv(GOLDEN / "fig1.csv", 0)


def test_ternary_mapping_corners_and_center():
    assert _ternary_xy((1.0, 0.0, 0.0)) == (0.0, 0.0)
    assert _ternary_xy((0.0, 1.0, 0.0)) == (1.0, 0.0)
    x, y = _ternary_xy((0.0, 0.0, 1.0))
    assert abs(x - 0.5) < 1e-12 and abs(y - 3 ** 0.5 / 2) < 1e-12
    x, y = _ternary_xy((1 / 3, 1 / 3, 1 / 3))
    assert abs(x - 0.5) < 1e-12 and abs(y - 3 ** 0.5 / 6) < 1e-12


def test_cli_renders_each_figure(tmp_path, capsys):
    golden_copy(tmp_path, 1, 2, 3, 4)
    mains = {1: cli.main_fig1, 2: cli.main_fig2, 3: cli.main_fig3,
             4: cli.main_fig4}
    for which, main in mains.items():
        code = main(["--from", str(tmp_path)])
        out = capsys.readouterr().out.strip()
        assert code == 0
        assert out == str(tmp_path / ("fig%d.png" % which))
        assert (tmp_path / ("fig%d.png" % which)).stat().st_size > 1000
    code = main(["--from", str(tmp_path), "--format", "svg",
                 "--out", str(tmp_path / "custom.svg")])
    capsys.readouterr()
    assert code == 0
    assert (tmp_path / "custom.svg").exists()


def test_cli_error_paths(tmp_path, capsys):
    code = cli.main_fig1(["--from", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 2 and "MissingInput" in err
    (tmp_path / "fig1.csv").write_text("wrong,header\n1,2\n",
                                       encoding="utf-8")
    code = cli.main_fig1(["--from", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 2 and "SchemaMismatch" in err
