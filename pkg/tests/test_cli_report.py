"""End-to-end command-line flows, reports, artifacts, and the QQ plot."""

import json
import re

import numpy as np
import pytest

from censout import __version__
from censout.artifact import (
    AnalysisArtifact,
    artifact_from_json,
    artifact_to_json,
    bind_dataset,
    load_artifact,
    save_artifact,
)
from censout.cli import main
from censout.datasets import synthetic_survival_path
from censout.detect import DetectionResult, DetectorConfig, detect_boxplot, detect_score
from censout.errors import MissingFit
from censout.kernelkm import BandwidthConfig
from censout.report import COEF_LEVELS, coef_table, render_report
from censout.svgplot import render_qq_svg

from .conftest import make_dataset, manual_fit

BUNDLED = str(synthetic_survival_path())
SECTION_SCORES = (4.59, 4.54, 2.52, 2.35, 2.11, 1.95)


def detect_args(out, *extra):
    return [
        "detect",
        "--data",
        BUNDLED,
        "--time-col",
        "time",
        "--status-col",
        "status",
        "--covariates",
        "x",
        "--log-time",
        "--out",
        str(out),
        *extra,
    ]


@pytest.fixture(scope="module")
def deferred_run(tmp_path_factory):
    """Scoring detect on the bundled data without a cut-off."""
    out = tmp_path_factory.mktemp("deferred")
    assert main(detect_args(out)) == 0
    return out


@pytest.fixture(scope="module")
def scored_run(tmp_path_factory):
    """Scoring detect on the bundled data at k_s = 4."""
    out = tmp_path_factory.mktemp("scored")
    assert main(detect_args(out, "--k-s", "4")) == 0
    return out


def crafted_score_artifact(tmp, k_s=None):
    """A minimal scoring artifact over hand-written scores."""
    csv = tmp / "mini.csv"
    rows = ["time,status"]
    for i in range(len(SECTION_SCORES)):
        rows.append(f"{i + 1}.5,{1 if i % 2 == 0 else 0}")
    csv.write_text("\n".join(rows) + "\n")
    d, binding = bind_dataset(csv, "time", "status", (), False)
    cfg = DetectorConfig(method="score", k_s=k_s)
    result = detect_score(np.array(SECTION_SCORES), cfg, statuses=d.status)
    fits = {t: manual_fit(t, [3.0]) for t in (0.25, 0.5, 0.75)}
    art = AnalysisArtifact(
        version=__version__,
        data=binding,
        bandwidth=BandwidthConfig(),
        detector=cfg,
        fits=fits,
        detection=result,
    )
    path = tmp / "artifact.json"
    save_artifact(art, path)
    return path


class TestDetectCommand:
    def test_deferred_cutoff_reports_zero(self, deferred_run, capsys):
        report = (deferred_run / "report.txt").read_text()
        assert "Algorithm: scoring" in report
        assert "Model: locally weighted censored quantile regression" in report
        assert "Cut-off: undecided" in report
        assert "# of outliers detected: 0" in report
        assert "Top 6 outlying scores:" in report
        assert "0 of all 0 outliers were displayed." in report

    def test_outputs_exist(self, deferred_run):
        assert (deferred_run / "artifact.json").is_file()
        assert (deferred_run / "report.txt").is_file()
        assert (deferred_run / "scores.svg").is_file()

    def test_artifact_stores_all_coef_levels(self, deferred_run):
        payload = json.loads((deferred_run / "artifact.json").read_text())
        assert set(payload["fits"]) == {"0.1", "0.25", "0.5", "0.75", "0.9"}
        assert payload["version"] == __version__
        assert payload["data"]["log_time"] is True
        assert payload["data"]["covariate_cols"] == ["x"]

    def test_fast_fit_stores_method_levels_only(self, tmp_path, capsys):
        assert main(detect_args(tmp_path / "o", "--fast")) == 0
        payload = json.loads((tmp_path / "o" / "artifact.json").read_text())
        assert set(payload["fits"]) == {"0.25", "0.5", "0.75"}

    def test_cutoff_four_finds_the_planted_block(self, scored_run):
        report = (scored_run / "report.txt").read_text()
        assert "Cut-off: 4" in report
        assert "# of outliers detected: 6" in report
        assert "6 of all 6 outliers were displayed." in report
        assert report.count("*") == 6
        payload = json.loads((scored_run / "artifact.json").read_text())
        flagged = [i for i, f in enumerate(payload["detection"]["flags"]) if f]
        assert flagged == [120, 121, 122, 123, 124, 125]

    def test_report_echoed_to_stdout(self, tmp_path, capsys):
        assert main(detect_args(tmp_path / "o", "--k-s", "4")) == 0
        stdout = capsys.readouterr().out
        assert stdout == (tmp_path / "o" / "report.txt").read_text()

    def test_boxplot_matches_scoring_on_bundled_data(self, tmp_path, scored_run):
        assert main(detect_args(tmp_path / "b", "--method", "boxplot", "--k-b", "1")) == 0
        box = json.loads((tmp_path / "b" / "artifact.json").read_text())
        score = json.loads((scored_run / "artifact.json").read_text())
        assert box["detection"]["flags"] == score["detection"]["flags"]

    def test_non_scoring_method_writes_no_plot(self, tmp_path, capsys):
        out = tmp_path / "r"
        assert main(detect_args(out, "--method", "residual")) == 0
        assert (out / "artifact.json").is_file()
        assert not (out / "scores.svg").exists()
        assert "Algorithm: residual" in capsys.readouterr().out


class TestUpdateCommand:
    def test_rethreshold_counts(self, tmp_path, capsys):
        art = crafted_score_artifact(tmp_path)
        for k_s, expected in (("4", 2), ("100", 0), ("2", 5)):
            out = tmp_path / f"k{k_s}"
            assert main(["update", "--artifact", str(art), "--k-s", k_s, "--out", str(out)]) == 0
            report = capsys.readouterr().out
            assert f"# of outliers detected: {expected}" in report
            assert report.count("*") == min(expected, 6)

    def test_lower_cutoff_flags_a_superset(self, tmp_path):
        art = crafted_score_artifact(tmp_path)
        flagged = {}
        for k_s in ("4", "2"):
            out = tmp_path / f"n{k_s}"
            assert main(["update", "--artifact", str(art), "--k-s", k_s, "--out", str(out)]) == 0
            payload = json.loads((out / "artifact.json").read_text())
            flagged[k_s] = {i for i, f in enumerate(payload["detection"]["flags"]) if f}
        assert flagged["4"] <= flagged["2"]

    def test_update_does_not_refit(self, tmp_path):
        art = crafted_score_artifact(tmp_path)
        before = json.loads(art.read_text())["fits"]
        out = tmp_path / "u"
        assert main(["update", "--artifact", str(art), "--k-s", "4", "--out", str(out)]) == 0
        after = json.loads((out / "artifact.json").read_text())["fits"]
        assert after == before

    def test_update_on_bundled_run_matches_direct_detect(self, deferred_run, tmp_path, capsys):
        art = deferred_run / "artifact.json"
        out = tmp_path / "upd"
        assert main(["update", "--artifact", str(art), "--k-s", "4", "--out", str(out)]) == 0
        report = capsys.readouterr().out
        assert "# of outliers detected: 6" in report

    def test_wrong_method_is_a_usage_error(self, tmp_path, capsys):
        out = tmp_path / "box"
        assert main(detect_args(out, "--method", "boxplot")) == 0
        capsys.readouterr()
        rc = main(["update", "--artifact", str(out / "artifact.json"), "--k-s", "4"])
        assert rc == 2
        assert "boxplot" in capsys.readouterr().err

    def test_changed_data_file_is_rejected(self, tmp_path, capsys):
        csv = tmp_path / "mini.csv"
        art = crafted_score_artifact(tmp_path)
        csv.write_text(csv.read_text() + "9.9,1\n")
        rc = main(["update", "--artifact", str(art), "--k-s", "4"])
        assert rc == 3
        assert "changed since" in capsys.readouterr().err

    def test_missing_artifact_is_a_data_error(self, tmp_path, capsys):
        rc = main(["update", "--artifact", str(tmp_path / "nope.json"), "--k-s", "4"])
        assert rc == 3


class TestExitCodes:
    def test_missing_required_flag_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["detect", "--data", BUNDLED, "--status-col", "status"])
        assert exc.value.code == 2
        assert "--time-col" in capsys.readouterr().err

    def test_unknown_method_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(detect_args("x", "--method", "fence"))
        assert exc.value.code == 2

    def test_bad_bandwidth_is_a_usage_error(self, tmp_path, capsys):
        rc = main(detect_args(tmp_path / "o", "--h", "0"))
        assert rc == 2
        assert "censout: error:" in capsys.readouterr().err

    def test_missing_data_file_is_a_data_error(self, tmp_path, capsys):
        rc = main(
            [
                "detect",
                "--data",
                str(tmp_path / "absent.csv"),
                "--time-col",
                "time",
                "--status-col",
                "status",
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert rc == 3
        assert "data error" in capsys.readouterr().err

    def test_constant_covariate_is_a_numerical_error(self, tmp_path, capsys):
        csv = tmp_path / "flat.csv"
        csv.write_text("time,status,x\n" + "".join(f"{t},1,5\n" for t in (1, 2, 3, 4, 5)))
        rc = main(
            [
                "detect",
                "--data",
                str(csv),
                "--time-col",
                "time",
                "--status-col",
                "status",
                "--covariates",
                "x",
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert rc == 4
        err = capsys.readouterr().err
        assert "numerical error" in err
        assert "'x'" in err

    def test_simulate_scoring_requires_cutoff(self, tmp_path, capsys):
        rc = main(["simulate", "--method", "score", "--out", str(tmp_path / "s")])
        assert rc == 2
        assert "--k-s" in capsys.readouterr().err


class TestArtifactSerialization:
    def test_json_round_trip_is_byte_identical(self, scored_run):
        raw = (scored_run / "artifact.json").read_bytes()
        assert artifact_to_json(artifact_from_json(raw)) == raw

    def test_detect_twice_is_byte_identical(self, scored_run, tmp_path, capsys):
        again = tmp_path / "again"
        assert main(detect_args(again, "--k-s", "4")) == 0
        for name in ("artifact.json", "report.txt", "scores.svg"):
            assert (again / name).read_bytes() == (scored_run / name).read_bytes()

    def test_loaded_artifact_matches_live_objects(self, scored_run):
        art = load_artifact(scored_run / "artifact.json")
        assert art.detector.method == "score"
        assert art.detector.k_s == 4.0
        assert sorted(art.fits) == sorted(COEF_LEVELS)
        assert art.detection.n_outliers == 6
        assert art.data.scaling == ((1.0, 20.0),)
        fit = art.fits[0.5]
        assert fit.tau == 0.5
        assert len(fit.beta) == 2


class TestCoefCommand:
    def test_table_layout_on_bundled_fit(self, deferred_run, capsys):
        rc = main(["coef", "--artifact", str(deferred_run / "artifact.json")])
        assert rc == 0
        out = capsys.readouterr().out
        lines = out.strip().split("\n")
        assert lines[0].split() == ["q10", "q25", "q50", "q75", "q90"]
        assert lines[1].startswith("(Intercept)")
        assert lines[2].startswith("x")
        intercepts = [float(v) for v in lines[1].split()[1:]]
        assert intercepts == sorted(intercepts)  # quantile curves do not cross here
        assert len(lines) == 3

    def test_fast_artifact_cannot_print_coefs(self, tmp_path, capsys):
        out = tmp_path / "fast"
        assert main(detect_args(out, "--fast")) == 0
        capsys.readouterr()
        rc = main(["coef", "--artifact", str(out / "artifact.json")])
        assert rc == 3
        assert "re-run detect without --fast" in capsys.readouterr().err

    def test_constant_response_gives_constant_cells(self):
        fits = {t: manual_fit(t, [7.0]) for t in COEF_LEVELS}
        table = coef_table(fits)
        for line in table.strip().split("\n")[1:]:
            assert line.split()[1:] == ["7.000"] * 5

    def test_missing_level_raises(self):
        fits = {t: manual_fit(t, [7.0]) for t in (0.25, 0.5, 0.75)}
        with pytest.raises(MissingFit) as exc:
            coef_table(fits)
        assert exc.value.taus == (0.1, 0.9)


class TestPlotCommand:
    def test_plot_writes_svg(self, scored_run, tmp_path, capsys):
        out = tmp_path / "plot.svg"
        rc = main(["plot", "--artifact", str(scored_run / "artifact.json"), "--out", str(out)])
        assert rc == 0
        assert f"wrote {out}" in capsys.readouterr().out
        body = out.read_text()
        assert body.startswith("<svg ")
        assert 'data-k-s="4"' in body

    def test_plot_transfers_override_cutoff(self, deferred_run, tmp_path):
        out = tmp_path / "plot.svg"
        rc = main(
            [
                "plot",
                "--artifact",
                str(deferred_run / "artifact.json"),
                "--k-s",
                "3.5",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert 'data-k-s="3.5"' in out.read_text()

    def test_plot_rejects_non_scoring_artifacts(self, tmp_path, capsys):
        out = tmp_path / "box"
        assert main(detect_args(out, "--method", "boxplot")) == 0
        capsys.readouterr()
        rc = main(["plot", "--artifact", str(out / "artifact.json")])
        assert rc == 2


def glyph_positions(svg: bytes):
    """(kind, cx, cy) for every plotted point, parsed from data attributes."""
    text = svg.decode("ascii")
    out = []
    for kind, cx, cy in re.findall(
        r'class="(event|censored)".*?data-cx="([-0-9.e]+)" data-cy="([-0-9.e]+)"', text
    ):
        out.append((kind, float(cx), float(cy)))
    return out


class TestQqPlot:
    def test_glyphs_partition_by_status(self):
        r = np.random.default_rng(4)
        scores = r.uniform(0, 5, 30)
        statuses = r.integers(0, 2, 30)
        svg = render_qq_svg(scores, statuses)
        points = glyph_positions(svg)
        assert len(points) == 30
        kinds = [k for k, _, _ in points]
        assert kinds.count("event") == int(np.sum(statuses == 1))
        assert kinds.count("censored") == int(np.sum(statuses == 0))

    def test_single_point_has_no_reference_line(self):
        svg = render_qq_svg([2.5], [1]).decode("ascii")
        assert 'class="reference"' not in svg
        assert svg.count('class="event"') == 1

    def test_standard_normal_scores_give_unit_line(self):
        from censout.gaussian import norm_ppf

        n = 101
        scores = norm_ppf((np.arange(1, n + 1) - 0.5) / n)
        svg = render_qq_svg(scores, np.ones(n, dtype=int)).decode("ascii")
        slope = float(re.search(r'data-slope="([-0-9.e]+)"', svg).group(1))
        intercept = float(re.search(r'data-intercept="([-0-9.e]+)"', svg).group(1))
        assert slope == pytest.approx(1.0, abs=1e-9)
        assert intercept == pytest.approx(0.0, abs=1e-9)

    def test_exactly_two_glyphs_above_threshold(self):
        scores = np.array(SECTION_SCORES)
        svg = render_qq_svg(scores, np.ones(len(scores), dtype=int), k_s=4.0)
        text = svg.decode("ascii")
        threshold_y = float(re.search(r'class="threshold"[^/]*y1="([-0-9.e]+)"', text).group(1))
        above = [cy for _, _, cy in glyph_positions(svg) if cy < threshold_y]
        assert len(above) == 2  # pixel y decreases upward

    def test_deterministic_bytes(self):
        scores = np.array([1.0, 3.0, 2.0])
        statuses = np.array([1, 0, 1])
        assert render_qq_svg(scores, statuses, 2.0) == render_qq_svg(scores, statuses, 2.0)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            render_qq_svg([], [])
        with pytest.raises(ValueError):
            render_qq_svg([1.0, np.nan], [1, 1])
        with pytest.raises(ValueError):
            render_qq_svg([1.0, 2.0], [1])


class TestSimulateCommand:
    def test_single_replicate_is_deterministic(self, tmp_path, capsys):
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc = main(
                [
                    "simulate",
                    "--method",
                    "boxplot",
                    "--k-b",
                    "1.5",
                    "--replicates",
                    "1",
                    "--seed",
                    "7",
                    "--workers",
                    "1",
                    "--out",
                    str(out),
                ]
            )
            assert rc == 0
            outputs.append(
                ((out / "study.csv").read_bytes(), (out / "study.txt").read_bytes())
            )
        assert outputs[0] == outputs[1]
        text = capsys.readouterr().out
        assert "boxplot" in text
        assert "Mean clean-row censoring fraction:" in text


class TestReportRendering:
    def test_truncated_listing_counts_honestly(self):
        # Ten rows, eight above the cut-off: the table shows the top six and
        # the closing line reconciles the display with the full count.
        scores = np.array([9.0, 8.5, 8.0, 7.5, 7.0, 6.5, 6.0, 5.5, 1.0, 0.5])
        d = make_dataset(np.arange(1.0, 11.0))
        res = detect_score(scores, DetectorConfig(method="score", k_s=5.0), statuses=d.status)
        report = render_report("toy.csv", d, res)
        assert "# of outliers detected: 8" in report
        assert report.count("*") == 6
        assert "6 of all 8 outliers were displayed." in report

    def test_rows_sorted_by_evidence(self):
        scores = np.array([1.0, 9.0, 5.0])
        d = make_dataset([10.0, 20.0, 30.0])
        res = detect_score(scores, DetectorConfig(method="score", k_s=4.0), statuses=d.status)
        report = render_report("toy.csv", d, res)
        body = [ln for ln in report.split("\n") if re.match(r"\s+\d+\s", ln)]
        shown = [int(ln.split()[0]) for ln in body]
        assert shown == [2, 3, 1]  # 1-based original rows, descending score

    def test_boxplot_rows_ranked_by_exceedance(self):
        # Fences are the evidence, but ranking uses response minus fence.
        d = make_dataset([10.0, 4.0, 7.0])
        res = detect_boxplot(
            d,
            manual_fit(0.25, [1.0]),
            manual_fit(0.75, [3.0]),
            DetectorConfig(method="boxplot", k_b=1.0),
        )
        report = render_report("toy.csv", d, res)
        body = [ln for ln in report.split("\n") if re.match(r"\s+\d+\s", ln)]
        shown = [int(ln.split()[0]) for ln in body]
        assert shown == [1, 3, 2]
        assert "Top 3 upper-fence exceedances:" in report

    def test_covariates_shown_on_original_scale(self, scored_run):
        report = (scored_run / "report.txt").read_text()
        body = [ln for ln in report.split("\n") if re.match(r"\s+\d+\s", ln)]
        for line in body:
            x_value = float(line.split()[1])
            assert x_value == int(x_value)
            assert 1 <= x_value <= 20
