import struct
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from figkit.cli import main as cli_main
from figkit.io import SchemaError, read_matrix_dump, read_results, read_summary
from figkit.render import FigureRequest, render

FIXTURES = Path(__file__).parent / "fixtures"
RESULTS = FIXTURES / "results.csv"
SUMMARY = FIXTURES / "summary.json"
SPECTROGRAM = FIXTURES / "spectrogram_600000as.bin"


def png_size(path: Path) -> tuple[int, int]:
    raw = path.read_bytes()
    assert raw[:8] == b"\x89PNG\r\n\x1a\n"
    w, h = struct.unpack(">II", raw[16:24])
    return w, h


class TestReaders:
    def test_results_columns(self):
        data = read_results(RESULTS)
        assert data["delay_fs"].size == 52
        assert np.all(np.diff(data["delay_fs"]) >= 0)

    def test_missing_column_named(self, tmp_path):
        lines = RESULTS.read_text().splitlines()
        header = lines[0].split(",")
        drop = header.index("separation_fs")
        trimmed = [
            ",".join(c for i, c in enumerate(line.split(",")) if i != drop)
            for line in lines
        ]
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(trimmed))
        with pytest.raises(SchemaError, match="separation_fs"):
            read_results(bad)

    def test_summary_keys(self):
        summary = read_summary(SUMMARY)
        assert len(summary["per_nominal_delay"]) == 4
        assert summary["coherence"]["t_coh_fs"] == pytest.approx(340, rel=0.25)

    def test_matrix_dump(self):
        data, row_step, col_step, _, _ = read_matrix_dump(SPECTROGRAM)
        assert data.ndim == 2
        assert row_step > 0 and col_step > 0


class TestRender:
    @pytest.mark.parametrize(
        "kind,inp,summary",
        [
            ("fringes", RESULTS, SUMMARY),
            ("decay", SUMMARY, None),
            ("lag", RESULTS, SUMMARY),
            ("spectrogram", SPECTROGRAM, None),
        ],
    )
    def test_all_kinds_render(self, tmp_path, kind, inp, summary):
        out = tmp_path / f"{kind}.png"
        render(
            FigureRequest(
                kind=kind,
                input_path=str(inp),
                output_path=str(out),
                summary_path=str(summary) if summary else None,
            )
        )
        assert out.exists() and out.stat().st_size > 1000
        w, h = png_size(out)
        assert w > 100 and h > 100

    def test_decay_title_carries_coherence_time(self, tmp_path):
        out = tmp_path / "decay.png"
        render(FigureRequest(kind="decay", input_path=str(SUMMARY),
                             output_path=str(out)))
        summary = read_summary(SUMMARY)
        tag = f"{summary['coherence']['t_coh_fs']:.0f}"
        assert tag.encode() in out.read_bytes()  # PNG tEXt Title chunk

    def test_inputs_not_mutated(self, tmp_path):
        before = RESULTS.read_bytes(), SUMMARY.read_bytes()
        render(FigureRequest(kind="lag", input_path=str(RESULTS),
                             output_path=str(tmp_path / "lag.png"),
                             summary_path=str(SUMMARY)))
        assert (RESULTS.read_bytes(), SUMMARY.read_bytes()) == before

    def test_same_inputs_same_dimensions(self, tmp_path):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        for out in (a, b):
            render(FigureRequest(kind="fringes", input_path=str(RESULTS),
                                 output_path=str(out), summary_path=str(SUMMARY),
                                 dpi=120))
        assert png_size(a) == png_size(b)
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaError, match="kind"):
            FigureRequest(kind="waterfall", input_path=str(RESULTS),
                          output_path="x.png")


class TestCli:
    def test_four_kinds_exit_zero(self, tmp_path):
        jobs = [
            ("fringes", RESULTS, SUMMARY),
            ("decay", SUMMARY, None),
            ("lag", RESULTS, SUMMARY),
            ("spectrogram", SPECTROGRAM, None),
        ]
        for kind, inp, summary in jobs:
            argv = [kind, "--in", str(inp), "--out", str(tmp_path / f"{kind}.png")]
            if summary:
                argv += ["--summary", str(summary)]
            assert cli_main(argv) == 0
            assert (tmp_path / f"{kind}.png").exists()

    def test_schema_error_exit_nonzero_names_column(self, tmp_path, capsys):
        lines = RESULTS.read_text().splitlines()
        header = lines[0].replace("separation_fs", "sep")
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join([header] + lines[1:]))
        code = cli_main(["lag", "--in", str(bad), "--out", str(tmp_path / "x.png")])
        assert code != 0
        assert "separation_fs" in capsys.readouterr().err

    def test_console_script(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "figkit.cli", "decay", "--in", str(SUMMARY),
             "--out", str(tmp_path / "d.png"), "--dpi", "110"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "d.png").exists()
