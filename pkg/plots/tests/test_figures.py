import numpy as np
import pytest

from torusplots.figures import (
    EmptyInputError,
    FigureRequest,
    SchemaError,
    build_figure,
    render,
)

SPECTRUM_HEADER = "index,re,im,abs_minus_one"


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def spectrum_csv(tmp_path):
    rows = [SPECTRUM_HEADER]
    values = [1.0 + 0j, 1.0 + 0j, 1.0 + 1e-9j, 1.0 - 1e-9j,
              np.exp(1j * np.pi * np.sqrt(2)), np.exp(-1j * np.pi * np.sqrt(2))]
    for k, lam in enumerate(values, start=1):
        lam = complex(lam)
        rows.append(f"{k},{lam.real!r},{lam.imag!r},{abs(lam - 1.0)!r}")
    return write(tmp_path / "multipliers.csv", "\n".join(rows) + "\n")


@pytest.fixture
def family_csv(tmp_path):
    rows = ["beta_1,eps,y_norm,residual,freq_1,converged,unit_multiplicity"]
    for e in (0.0, 0.1):
        for b in (0.9, 1.0, 1.1):
            rows.append(f"{b},{e},{0.01 * e},{1e-12},{1.0 + e * b},1,2")
    rows.append("1.2,0.1,nan,nan,nan,0,0")
    return write(tmp_path / "family.csv", "\n".join(rows) + "\n")


@pytest.fixture
def twist_csv(tmp_path):
    rows = ["beta_1,beta_2,eps,twist_det,degenerate"]
    for b1 in (0.9, 1.0):
        for b2 in (0.4, 0.5):
            rows.append(f"{b1},{b2},0.1,{0.04 * b1},0")
    rows.append("1.0,0.5,0.0,0.0,1")
    return write(tmp_path / "twist.csv", "\n".join(rows) + "\n")


class TestSpectrum:
    def test_marker_count_matches_rows(self, spectrum_csv, tmp_path):
        req = FigureRequest("spectrum", [spectrum_csv], str(tmp_path / "s.png"))
        fig, meta = build_figure(req)
        assert meta["n_markers"] == 6
        assert meta["n_near_unit"] == 4

    def test_missing_column_named(self, tmp_path):
        path = write(tmp_path / "bad.csv", "index,re,im\n1,1.0,0.0\n")
        with pytest.raises(SchemaError, match="abs_minus_one"):
            build_figure(FigureRequest("spectrum", [path], str(tmp_path / "s.png")))

    def test_empty_data_rejected(self, tmp_path):
        path = write(tmp_path / "empty.csv", SPECTRUM_HEADER + "\n")
        with pytest.raises(EmptyInputError):
            build_figure(FigureRequest("spectrum", [path], str(tmp_path / "s.png")))


class TestFamily:
    def test_renders_with_gaps(self, family_csv, tmp_path):
        req = FigureRequest("family", [family_csv], str(tmp_path / "f.png"))
        fig, meta = build_figure(req)
        assert meta["n_points"] == 7
        assert meta["n_eps"] == 2
        assert meta["n_unconverged"] == 1

    def test_frequencies_missing_column_named(self, tmp_path):
        path = write(tmp_path / "nofreq.csv",
                     "beta_1,eps,y_norm,residual,converged,unit_multiplicity\n"
                     "1.0,0.0,0.0,0.0,1,2\n")
        with pytest.raises(SchemaError, match="freq_1"):
            build_figure(FigureRequest("frequencies", [path], str(tmp_path / "q.png")))

    def test_frequencies_resonance_gridlines(self, family_csv, tmp_path):
        req = FigureRequest("frequencies", [family_csv], str(tmp_path / "q.png"),
                            resonance_gridlines=True)
        fig, meta = build_figure(req)
        assert meta["n_components"] == 1


class TestTwist:
    def test_renders_heatmap(self, twist_csv, tmp_path):
        req = FigureRequest("twist", [twist_csv], str(tmp_path / "t.png"))
        fig, meta = build_figure(req)
        assert meta["n_cells"] == 5
        assert meta["n_degenerate"] == 1


class TestRender:
    def test_atomic_write(self, spectrum_csv, tmp_path):
        out = tmp_path / "nested" / "spec.png"
        path = render(FigureRequest("spectrum", [spectrum_csv], str(out)))
        assert out.exists()
        assert path == str(out)
        leftovers = [p for p in out.parent.iterdir() if p.suffix != ".png"]
        assert leftovers == []

    def test_input_not_mutated(self, spectrum_csv, tmp_path):
        before = open(spectrum_csv, "rb").read()
        render(FigureRequest("spectrum", [spectrum_csv], str(tmp_path / "s.png")))
        assert open(spectrum_csv, "rb").read() == before

    def test_rerender_same_plotted_data(self, family_csv, tmp_path):
        req = FigureRequest("family", [family_csv], str(tmp_path / "f.png"))
        _, meta1 = build_figure(req)
        _, meta2 = build_figure(req)
        assert meta1 == meta2

    def test_unknown_kind_rejected(self, spectrum_csv, tmp_path):
        with pytest.raises(ValueError, match="kind"):
            build_figure(FigureRequest("pie", [spectrum_csv], str(tmp_path / "p.png")))


class TestCli:
    def test_cli_spectrum(self, spectrum_csv, tmp_path, capsys):
        from torusplots.cli import main

        out = tmp_path / "s.png"
        assert main(["spectrum", spectrum_csv, "-o", str(out)]) == 0
        assert out.exists()
        assert capsys.readouterr().out.strip() == str(out)

    def test_cli_schema_error_exit_two(self, tmp_path, capsys):
        from torusplots.cli import main

        path = write(tmp_path / "bad.csv", "index,re,im\n1,1.0,0.0\n")
        assert main(["spectrum", path, "-o", str(tmp_path / "s.png")]) == 2
        assert "abs_minus_one" in capsys.readouterr().err
