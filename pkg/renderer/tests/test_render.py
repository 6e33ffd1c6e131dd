"""Renderer contract: curves and reference line, slope annotation, loud
column errors, and byte-level determinism."""

import shutil
import subprocess
import sys

import matplotlib.pyplot as plt
import pytest

from figrender import PlotSpec, RenderError, build_figure, read_table, render
from figrender.cli import EXIT_CONFIG, EXIT_OK, main

FIG1_HEADER = "eta,k,cost_improved,cost_sql,ratio\n"


def write_fig1_csv(path, etas=(0.9, 0.99, 0.999)):
    # shapes mirroring the real table: one channel never dips below
    # break-even, the cleaner two dip and recover
    curves = {
        0.9: (3.5, 3.3, 3.4, 4.1, 6.0, 9.2),
        0.99: (1.2, 0.8, 0.6, 0.9, 1.4, 3.0),
        0.999: (1.1, 0.7, 0.4, 0.5, 0.9, 1.8),
    }
    lines = [FIG1_HEADER]
    for eta in etas:
        for k, ratio in enumerate(curves[eta], start=1):
            lines.append(f"{eta},{k},{ratio * 100.0},{100.0},{ratio}\n")
    path.write_text("".join(lines), encoding="utf-8")
    return path


def write_scaling_csv(path, slope=-0.5, rows=6):
    # exact power law, so the fitted slope is known by construction
    lines = ["mean_sends,rms_error_t,protocol\n"]
    for i in range(rows):
        x = 100.0 * 4.0**i
        lines.append(f"{x},{x ** slope},one-way\n")
    path.write_text("".join(lines), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# figure structure
# ---------------------------------------------------------------------------


def test_fig1_draws_one_curve_per_eta_plus_unity_line(tmp_path):
    csv_path = write_fig1_csv(tmp_path / "fig1.csv")
    fig = build_figure(PlotSpec(csv_path, tmp_path / "fig1.png", "fig1_ratio"))
    try:
        ax = fig.axes[0]
        assert len(ax.lines) == 4  # three data curves + break-even line
        reference = ax.lines[-1]
        assert set(reference.get_ydata()) == {1.0}
        labels = [line.get_label() for line in ax.lines[:3]]
        assert labels == ["η = 0.9", "η = 0.99", "η = 0.999"]
        assert ax.get_yscale() == "log"
    finally:
        plt.close(fig)


def test_fig1_renders_file(tmp_path):
    csv_path = write_fig1_csv(tmp_path / "fig1.csv")
    out = render(PlotSpec(csv_path, tmp_path / "fig1.png", "fig1_ratio"))
    assert out.exists() and out.stat().st_size > 0


def test_scaling_annotates_fitted_slope(tmp_path):
    csv_path = write_scaling_csv(tmp_path / "sweep.csv", slope=-0.5)
    fig = build_figure(PlotSpec(csv_path, tmp_path / "s.png", "scaling_loglog"))
    try:
        ax = fig.axes[0]
        assert ax.get_xscale() == "log" and ax.get_yscale() == "log"
        assert ax.texts[0].get_text() == "fitted slope = -0.50"
    finally:
        plt.close(fig)


def test_scaling_slope_follows_data(tmp_path):
    csv_path = write_scaling_csv(tmp_path / "sweep.csv", slope=-1.0)
    fig = build_figure(PlotSpec(csv_path, tmp_path / "s.png", "scaling_loglog"))
    try:
        assert fig.axes[0].texts[0].get_text() == "fitted slope = -1.00"
    finally:
        plt.close(fig)


def test_axis_overrides(tmp_path):
    csv_path = write_fig1_csv(tmp_path / "fig1.csv")
    spec = PlotSpec(
        csv_path, tmp_path / "fig1.png", "fig1_ratio",
        xlabel="precision", ylabel="advantage", logy=False,
    )
    fig = build_figure(spec)
    try:
        ax = fig.axes[0]
        assert ax.get_xlabel() == "precision"
        assert ax.get_ylabel() == "advantage"
        assert ax.get_yscale() == "linear"
    finally:
        plt.close(fig)


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("suffix", (".png", ".svg"))
def test_output_bytes_are_deterministic(tmp_path, suffix):
    csv_path = write_fig1_csv(tmp_path / "fig1.csv")
    first = render(PlotSpec(csv_path, tmp_path / f"a{suffix}", "fig1_ratio"))
    second = render(PlotSpec(csv_path, tmp_path / f"b{suffix}", "fig1_ratio"))
    assert first.read_bytes() == second.read_bytes()


def test_svg_has_no_timestamp(tmp_path):
    csv_path = write_fig1_csv(tmp_path / "fig1.csv")
    out = render(PlotSpec(csv_path, tmp_path / "fig1.svg", "fig1_ratio"))
    text = out.read_text(encoding="utf-8")
    assert "dc:date" not in text
    assert "figrender" in text  # pinned creator replaces the tool version


# ---------------------------------------------------------------------------
# contract violations fail loudly
# ---------------------------------------------------------------------------


def test_missing_column_is_named(tmp_path):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("eta,k,cost_improved\n0.9,1,3.5\n", encoding="utf-8")
    with pytest.raises(RenderError, match="ratio"):
        read_table(csv_path, ("eta", "k", "ratio"))


def test_empty_csv_is_an_error(tmp_path):
    csv_path = tmp_path / "empty.csv"
    csv_path.write_text("", encoding="utf-8")
    with pytest.raises(RenderError, match="no header"):
        read_table(csv_path, ("eta",))


def test_header_only_csv_is_an_error(tmp_path):
    csv_path = tmp_path / "headeronly.csv"
    csv_path.write_text(FIG1_HEADER, encoding="utf-8")
    with pytest.raises(RenderError, match="no data rows"):
        read_table(csv_path, ("eta", "k", "ratio"))


def test_non_numeric_cell_is_named(tmp_path):
    csv_path = tmp_path / "nan.csv"
    csv_path.write_text("eta,k,ratio\n0.9,one,3.5\n", encoding="utf-8")
    with pytest.raises(RenderError, match="'k'"):
        read_table(csv_path, ("eta", "k", "ratio"))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(RenderError, match="plot kind"):
        PlotSpec(tmp_path / "x.csv", tmp_path / "x.png", "pie")


def test_unknown_extension_rejected(tmp_path):
    with pytest.raises(RenderError, match=".png or .svg"):
        PlotSpec(tmp_path / "x.csv", tmp_path / "x.pdf", "fig1_ratio")


def test_nonpositive_values_rejected_for_loglog(tmp_path):
    csv_path = tmp_path / "zero.csv"
    csv_path.write_text("mean_sends,rms_error_t\n100,0.0\n200,0.1\n", encoding="utf-8")
    with pytest.raises(RenderError, match="rms_error_t"):
        build_figure(PlotSpec(csv_path, tmp_path / "z.png", "scaling_loglog"))


def test_infinite_ratio_rows_are_dropped_from_their_curve(tmp_path):
    # the cost table reports overflowed retry costs as inf at high k; those
    # rows must not crash the log axis, and the curve keeps its finite part
    csv_path = tmp_path / "fig1.csv"
    csv_path.write_text(
        FIG1_HEADER
        + "0.9,1,350,100,3.5\n0.9,2,330,100,3.3\n0.9,3,inf,100,inf\n"
        + "0.99,1,120,100,1.2\n0.99,2,80,100,0.8\n0.99,3,140,100,1.4\n",
        encoding="utf-8",
    )
    fig = build_figure(PlotSpec(csv_path, tmp_path / "f.png", "fig1_ratio"))
    try:
        ax = fig.axes[0]
        assert len(ax.lines) == 3  # two curves + break-even line
        assert len(ax.lines[0].get_xdata()) == 2  # inf row dropped
    finally:
        plt.close(fig)
    assert render(
        PlotSpec(csv_path, tmp_path / "f.png", "fig1_ratio")
    ).stat().st_size > 0


def test_all_infinite_ratios_is_an_error(tmp_path):
    csv_path = tmp_path / "fig1.csv"
    csv_path.write_text(FIG1_HEADER + "0.9,1,inf,100,inf\n", encoding="utf-8")
    with pytest.raises(RenderError, match="finite"):
        build_figure(PlotSpec(csv_path, tmp_path / "f.png", "fig1_ratio"))


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def test_cli_renders(tmp_path, capsys):
    csv_path = write_fig1_csv(tmp_path / "fig1.csv")
    out_path = tmp_path / "fig1.png"
    code = main(["--kind", "fig1_ratio", "--in", str(csv_path), "--out", str(out_path)])
    assert code == EXIT_OK
    assert out_path.exists()
    assert "wrote" in capsys.readouterr().out


def test_cli_missing_column_exits_nonzero_naming_it(tmp_path, capsys):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("eta,k\n0.9,1\n", encoding="utf-8")
    code = main(["--kind", "fig1_ratio", "--in", str(csv_path),
                 "--out", str(tmp_path / "x.png")])
    assert code == EXIT_CONFIG
    assert "ratio" in capsys.readouterr().err


def test_module_entrypoint(tmp_path):
    csv_path = write_scaling_csv(tmp_path / "sweep.csv")
    out_path = tmp_path / "s.svg"
    proc = subprocess.run(
        [sys.executable, "-m", "figrender", "--kind", "scaling_loglog",
         "--in", str(csv_path), "--out", str(out_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == EXIT_OK, proc.stderr
    assert out_path.exists()


# ---------------------------------------------------------------------------
# live contract with the simulation package, when it happens to be installed
# ---------------------------------------------------------------------------


@pytest.mark.skipif(
    shutil.which("tickclock") is None,
    reason="simulation CLI not installed; renderer is standalone",
)
def test_renders_real_ratio_table(tmp_path):
    # default table size on purpose: its high-k rows for the lossiest
    # channel carry inf ratios, exercising the drop path on real data
    csv_path = tmp_path / "fig1.csv"
    proc = subprocess.run(
        ["tickclock", "fig1", "--etas", "0.9,0.99,0.999", "--kmax", "16",
         "--out", str(csv_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    fig = build_figure(PlotSpec(csv_path, tmp_path / "fig1.png", "fig1_ratio"))
    try:
        assert len(fig.axes[0].lines) == 4
    finally:
        plt.close(fig)
    out = render(PlotSpec(csv_path, tmp_path / "fig1.png", "fig1_ratio"))
    assert out.stat().st_size > 0
