"""Chart rendering and the command-line interface."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from crowdkit import CollectError, load_gexf
from crowdkit.charts import (
    CHART_KINDS,
    extract_series,
    render_chart,
    write_chart,
)
from crowdkit.cli import main

runner = CliRunner()


def invoke(*args):
    return runner.invoke(main, [str(a) for a in args])


TINY = """
name: tiny
structure:
  random:
    type: random-regular
    count: 6
    degree: 2
definitions:
  pd-model:
    name: custom
    nodetypes:
      A:
        random-with-weight:
          initial-weight: 0.5
      B:
        random-with-weight:
          initial-weight: 0.5
    network-parameters:
      pressure: 0.0
"""

SWEEP_TAIL = """
sweep:
  definitions.network-parameters.pressure:
    - 0.1
    - 0.2
    - 0.3
"""


def write_tiny(tmp_path: Path, sweep: bool = False) -> Path:
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY + (SWEEP_TAIL if sweep else ""), encoding="utf-8")
    return path


def scalar_doc(name: str, values) -> dict:
    return {
        "name": name,
        "entries": [{"iteration": i, "value": v} for i, v in enumerate(values)],
    }


def write_doc(path: Path, doc: dict) -> Path:
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Chart series extraction
# ---------------------------------------------------------------------------


class TestExtractSeries:
    def test_scalar_document(self):
        series = extract_series(scalar_doc("temp", [1.0, 2.0, 4.0]))
        assert series == [("temp", [(0.0, 1.0), (1.0, 2.0), (2.0, 4.0)])]

    def test_map_document_fans_out_per_key(self):
        doc = {
            "name": "node_counts",
            "entries": [
                {"iteration": 0, "value": {"S": 9, "I": 1}},
                {"iteration": 1, "value": {"S": 8, "I": 2}},
            ],
        }
        series = dict(extract_series(doc))
        assert set(series) == {"S", "I"}
        assert series["S"] == [(0.0, 9.0), (1.0, 8.0)]
        assert series["I"] == [(0.0, 1.0), (1.0, 2.0)]

    def test_labeled_document(self):
        doc = {
            "name": "spread",
            "aggregation": "labeled",
            "series": [
                {"label": "a", "entries": [{"iteration": 0, "value": 1.0}]},
                {"label": "b", "entries": [{"iteration": 0, "value": 2.0}]},
            ],
        }
        series = extract_series(doc)
        assert [label for label, _ in series] == ["a", "b"]

    def test_labeled_map_entries_get_dotted_labels(self):
        doc = {
            "aggregation": "labeled",
            "series": [
                {"label": "run1", "entries": [{"iteration": 0, "value": {"S": 1, "I": 2}}]},
            ],
        }
        labels = [label for label, _ in extract_series(doc)]
        assert labels == ["run1.S", "run1.I"]

    def test_empty_entries_yield_empty_series(self):
        assert extract_series({"name": "x", "entries": []}) == [("x", [])]

    def test_mixed_scalar_and_map_rejected(self):
        doc = {
            "name": "x",
            "entries": [
                {"iteration": 0, "value": 1.0},
                {"iteration": 1, "value": {"S": 1}},
            ],
        }
        with pytest.raises(CollectError):
            extract_series(doc)

    def test_missing_map_key_rejected(self):
        doc = {
            "name": "x",
            "entries": [
                {"iteration": 0, "value": {"S": 1, "I": 2}},
                {"iteration": 1, "value": {"S": 1}},
            ],
        }
        with pytest.raises(CollectError, match="I"):
            extract_series(doc)

    def test_unrecognized_shapes_rejected(self):
        with pytest.raises(CollectError):
            extract_series({"no": "entries"})
        with pytest.raises(CollectError):
            extract_series(["not", "a", "dict"])


# ---------------------------------------------------------------------------
# Chart rendering
# ---------------------------------------------------------------------------


class TestRenderChart:
    def test_each_kind_draws_its_mark(self):
        series = [("s", [(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)])]
        assert "<polyline" in render_chart(series, "line")
        assert "<polygon" in render_chart(series, "area")
        assert "<circle" in render_chart(series, "scatter")
        bar = render_chart(series, "bar")
        line = render_chart(series, "line")
        assert bar.count("<rect") > line.count("<rect")

    def test_unknown_kind_rejected(self):
        with pytest.raises(CollectError, match="kind"):
            render_chart([("s", [(0.0, 1.0)])], "pie")

    def test_empty_series_still_renders_axes(self):
        svg = render_chart([("ghost", [])], "line")
        assert svg.startswith("<svg")
        assert "<polyline" not in svg
        assert "ghost" in svg  # legend still names the series
        assert "iteration" in svg

    def test_legend_lists_every_series(self):
        series = [(name, [(0.0, 1.0)]) for name in ("alpha", "beta", "gamma")]
        svg = render_chart(series, "scatter")
        for name in ("alpha", "beta", "gamma"):
            assert name in svg

    def test_title_escaped(self):
        svg = render_chart([("s", [(0.0, 1.0)])], "line", title="a < b & c")
        assert "a &lt; b &amp; c" in svg


class TestWriteChart:
    def test_svg_and_html_by_extension(self, tmp_path):
        doc = write_doc(tmp_path / "t.json", scalar_doc("t", [1.0, 2.0]))
        svg_path = write_chart([doc], "line", tmp_path / "chart.svg")
        html_path = write_chart([doc], "line", tmp_path / "chart.html")
        assert svg_path.read_text().startswith("<svg")
        html = html_path.read_text()
        assert html.startswith("<!doctype html>")
        assert "<svg" in html

    def test_byte_deterministic(self, tmp_path):
        doc = write_doc(tmp_path / "t.json", scalar_doc("t", [3.0, 1.0, 2.0]))
        a = write_chart([doc], "area", tmp_path / "a.svg")
        first = a.read_bytes()
        again = write_chart([doc], "area", tmp_path / "a.svg")
        assert again.read_bytes() == first

    def test_missing_input_rejected(self, tmp_path):
        with pytest.raises(CollectError, match="no such chart input"):
            write_chart([tmp_path / "absent.json"], "line", tmp_path / "o.svg")

    def test_invalid_json_rejected(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope", encoding="utf-8")
        with pytest.raises(CollectError, match="invalid JSON"):
            write_chart([bad], "line", tmp_path / "o.svg")

    def test_multiple_inputs_combine(self, tmp_path):
        d1 = write_doc(tmp_path / "a.json", scalar_doc("a", [1.0]))
        d2 = write_doc(tmp_path / "b.json", scalar_doc("b", [2.0]))
        out = write_chart([d1, d2], "scatter", tmp_path / "o.svg")
        svg = out.read_text()
        assert "a" in svg and "b" in svg

    def test_kinds_constant_matches_cli_choices(self):
        assert set(CHART_KINDS) == {"line", "bar", "area", "scatter"}


# ---------------------------------------------------------------------------
# CLI: projects
# ---------------------------------------------------------------------------


class TestProjectCommands:
    def test_new_then_list(self, project_home):
        res = invoke("project-new", "demo")
        assert res.exit_code == 0
        assert (project_home / "demo").is_dir()
        assert res.output.strip().endswith("demo")
        listing = invoke("project-list")
        assert listing.exit_code == 0
        assert "demo" in listing.output

    def test_duplicate_project_is_usage_error(self, project_home):
        assert invoke("project-new", "demo").exit_code == 0
        res = invoke("project-new", "demo")
        assert res.exit_code == 2
        assert "demo" in res.output

    def test_empty_listing_mentions_root(self, project_home):
        res = invoke("project-list")
        assert res.exit_code == 0
        assert str(project_home) in res.output

    def test_version_flag(self):
        res = invoke("--version")
        assert res.exit_code == 0
        assert "0.1.0" in res.output


# ---------------------------------------------------------------------------
# CLI: run
# ---------------------------------------------------------------------------


def run_tiny(tmp_path, project_home, *extra) -> Path:
    """Run the tiny config and return the batch-0 directory."""
    cfg = write_tiny(tmp_path)
    res = invoke("run", "--config", cfg, "--epochs", 5, *extra)
    assert res.exit_code == 0, res.output
    lines = [line for line in res.output.splitlines() if line.strip()]
    return Path(lines[0])


class TestRunCommand:
    def test_scenario_fixture_run_writes_snapshots(self, project_home):
        res = invoke("run", "--scenario", "sir", "--epochs", 10, "--snapshot", 1,
                     "--seed", 4)
        assert res.exit_code == 0, res.output
        run_dir = Path(res.output.strip().splitlines()[-1])
        assert run_dir.name == "batch-0"
        snaps = sorted((run_dir / "snapshots").glob("iter_*.json"))
        assert len(snaps) == 11
        assert (run_dir / "collectors" / "percentage_infected.json").is_file()

    def test_batches_create_one_directory_each(self, tmp_path, project_home):
        cfg = write_tiny(tmp_path)
        res = invoke("run", "--config", cfg, "--epochs", 3, "--batches", 3)
        assert res.exit_code == 0
        dirs = [Path(line) for line in res.output.splitlines() if line.strip()]
        assert [d.name for d in dirs] == ["batch-0", "batch-1", "batch-2"]
        assert all(d.is_dir() for d in dirs)
        assert dirs[0].parent == dirs[1].parent

    def test_repeat_run_gets_suffixed_directory(self, tmp_path, project_home):
        first = run_tiny(tmp_path, project_home)
        second = run_tiny(tmp_path, project_home)
        assert first.parent.name == "tiny"
        assert second.parent.name == "tiny-2"

    def test_missing_config_is_usage_error(self, project_home):
        res = invoke("run", "--config", "/nope/absent.yaml")
        assert res.exit_code == 2
        assert "absent.yaml" in res.output

    def test_no_config_no_scenario_is_usage_error(self, project_home):
        res = invoke("run")
        assert res.exit_code == 2
        assert "--config" in res.output

    def test_bad_epochs_is_usage_error(self, tmp_path, project_home):
        cfg = write_tiny(tmp_path)
        assert invoke("run", "--config", cfg, "--epochs", 0).exit_code == 2
        assert invoke("run", "--config", cfg, "--batches", 0).exit_code == 2
        assert invoke("run", "--config", cfg, "--epochs", 5,
                      "--snapshot", 9).exit_code == 2

    def test_invalid_config_lists_violations(self, tmp_path, project_home):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text(TINY.replace("initial-weight: 0.5", "initial-weight: 0.4", 1),
                       encoding="utf-8")
        res = invoke("run", "--config", cfg)
        assert res.exit_code == 2
        assert "invalid config" in res.output

    def test_hook_failure_exits_runtime_code(self, tmp_path, project_home):
        # stay-home hooks on a config with no location attribute
        cfg = write_tiny(tmp_path)
        res = invoke("run", "--config", cfg, "--scenario", "stayhome", "--epochs", 2)
        assert res.exit_code == 3
        assert "FAILED" in res.output
        assert "location" in res.output


# ---------------------------------------------------------------------------
# CLI: sweep
# ---------------------------------------------------------------------------


class TestSweepCommand:
    def test_sweep_runs_every_variant(self, tmp_path, project_home):
        cfg = write_tiny(tmp_path, sweep=True)
        res = invoke("sweep", "--config", cfg, "--epochs", 3, "--batches", 2)
        assert res.exit_code == 0, res.output
        for label in ("pressure=0.1", "pressure=0.2", "pressure=0.3"):
            assert f"[{label}]" in res.output
            variant = project_home / "default" / "tiny" / label
            assert (variant / "batch-0").is_dir()
            assert (variant / "batch-1").is_dir()

    def test_sweep_without_section_is_usage_error(self, tmp_path, project_home):
        cfg = write_tiny(tmp_path)
        res = invoke("sweep", "--config", cfg)
        assert res.exit_code == 2
        assert "sweep" in res.output


# ---------------------------------------------------------------------------
# CLI: merge
# ---------------------------------------------------------------------------


class TestMergeCommand:
    def test_mean_merge_writes_merged_files(self, tmp_path, project_home):
        cfg = write_tiny(tmp_path)
        res = invoke("run", "--config", cfg, "--epochs", 4, "--batches", 3)
        assert res.exit_code == 0
        parent = Path(res.output.splitlines()[0]).parent
        merged = invoke("merge", "mean", parent, "--json")
        assert merged.exit_code == 0, merged.output
        payload = json.loads(merged.output)
        assert payload["written"]
        written = [Path(p) for p in payload["written"]]
        assert any(p.name == "node_counts.json" for p in written)
        doc = json.loads(next(p for p in written if p.name == "node_counts.json")
                         .read_text())
        assert doc["aggregation"] == "mean"
        assert doc["sources"] == ["batch-0", "batch-1", "batch-2"]

    def test_mean_merge_mismatch_exits_data_code(self, tmp_path):
        parent = tmp_path / "parent"
        for index, values in ((0, [1.0, 2.0]), (1, [1.0, 2.0, 3.0])):
            cdir = parent / f"batch-{index}" / "collectors"
            cdir.mkdir(parents=True)
            write_doc(cdir / "x.json", scalar_doc("x", values))
        res = invoke("merge", "mean", parent)
        assert res.exit_code == 4
        assert "batch-1" in res.output

    def test_mean_merge_needs_exactly_one_dir(self, tmp_path):
        res = invoke("merge", "mean", tmp_path, tmp_path)
        assert res.exit_code == 2

    def test_labeled_merge_with_explicit_labels(self, tmp_path, project_home):
        cfg = write_tiny(tmp_path)
        out = invoke("run", "--config", cfg, "--epochs", 3, "--batches", 2)
        dirs = [line for line in out.output.splitlines() if line.strip()]
        target = tmp_path / "labeled.json"
        res = invoke("merge", "labeled", dirs[0], dirs[1],
                     "--name", "node_counts", "--labels", "first,second",
                     "--out", target)
        assert res.exit_code == 0, res.output
        doc = json.loads(target.read_text())
        assert doc["aggregation"] == "labeled"
        assert [s["label"] for s in doc["series"]] == ["first", "second"]

    def test_labeled_merge_default_labels_from_parents(self, tmp_path, project_home):
        cfg = write_tiny(tmp_path)
        a = invoke("run", "--config", cfg, "--epochs", 3, "--name", "sim-a")
        b = invoke("run", "--config", cfg, "--epochs", 3, "--name", "sim-b")
        dir_a = a.output.strip().splitlines()[-1]
        dir_b = b.output.strip().splitlines()[-1]
        target = tmp_path / "combo.json"
        res = invoke("merge", "labeled", dir_a, dir_b,
                     "--name", "node_counts", "--out", target)
        assert res.exit_code == 0, res.output
        doc = json.loads(target.read_text())
        assert [s["label"] for s in doc["series"]] == ["sim-a", "sim-b"]

    def test_labeled_merge_requires_name(self, tmp_path):
        res = invoke("merge", "labeled", tmp_path)
        assert res.exit_code == 2
        assert "--name" in res.output

    def test_labeled_merge_label_count_mismatch(self, tmp_path):
        res = invoke("merge", "labeled", tmp_path, "--name", "x",
                     "--labels", "a,b,c")
        assert res.exit_code == 2


# ---------------------------------------------------------------------------
# CLI: chart
# ---------------------------------------------------------------------------


class TestChartCommand:
    def test_area_chart_from_epidemic_counts(self, tmp_path, project_home):
        res = invoke("run", "--scenario", "sir", "--epochs", 10, "--seed", 2)
        run_dir = Path(res.output.strip().splitlines()[-1])
        counts = run_dir / "collectors" / "node_counts.json"
        out = tmp_path / "sir.svg"
        chart = invoke("chart", counts, "--kind", "area", "--out", out)
        assert chart.exit_code == 0, chart.output
        svg = out.read_text()
        for label in ("Susceptible", "Infected", "Recovered"):
            assert label in svg
        assert "<polygon" in svg

    def test_chart_bytes_are_reproducible(self, tmp_path):
        doc = write_doc(tmp_path / "t.json", scalar_doc("t", [5.0, 2.0, 8.0]))
        out = tmp_path / "t.svg"
        assert invoke("chart", doc, "--kind", "line", "--out", out).exit_code == 0
        first = out.read_bytes()
        assert invoke("chart", doc, "--kind", "line", "--out", out).exit_code == 0
        assert out.read_bytes() == first

    def test_html_output(self, tmp_path):
        doc = write_doc(tmp_path / "t.json", scalar_doc("t", [1.0]))
        out = tmp_path / "t.html"
        assert invoke("chart", doc, "--out", out).exit_code == 0
        assert out.read_text().startswith("<!doctype html>")

    def test_empty_series_chart_succeeds(self, tmp_path):
        doc = write_doc(tmp_path / "empty.json", scalar_doc("empty", []))
        out = tmp_path / "empty.svg"
        res = invoke("chart", doc, "--kind", "bar", "--out", out)
        assert res.exit_code == 0
        assert out.read_text().startswith("<svg")

    def test_missing_input_exits_data_code(self, tmp_path):
        res = invoke("chart", tmp_path / "absent.json", "--out", tmp_path / "o.svg")
        assert res.exit_code == 4

    def test_unknown_kind_rejected_by_usage(self, tmp_path):
        doc = write_doc(tmp_path / "t.json", scalar_doc("t", [1.0]))
        res = invoke("chart", doc, "--kind", "pie", "--out", tmp_path / "o.svg")
        assert res.exit_code == 2


# ---------------------------------------------------------------------------
# CLI: inspect and export
# ---------------------------------------------------------------------------


@pytest.fixture()
def sir_run_dir(project_home):
    res = invoke("run", "--scenario", "sir", "--epochs", 5, "--seed", 11)
    assert res.exit_code == 0, res.output
    return Path(res.output.strip().splitlines()[-1])


class TestInspectCommand:
    def test_human_readable_output(self, sir_run_dir):
        res = invoke("inspect", sir_run_dir, "--node", 0)
        assert res.exit_code == 0, res.output
        assert "node 0 at iteration 0" in res.output
        assert "type:" in res.output
        assert "age" in res.output
        assert "neighbors (4)" in res.output  # degree-4 regular graph

    def test_json_output(self, sir_run_dir):
        res = invoke("inspect", sir_run_dir, "--node", 3, "--json")
        assert res.exit_code == 0
        payload = json.loads(res.output)
        assert payload["node"] == 3
        assert payload["type"] in {"Susceptible", "Infected", "Recovered"}
        assert "age" in payload["attributes"]
        assert len(payload["neighbors"]) == 4
        assert all(set(n) == {"node", "type"} for n in payload["neighbors"])

    def test_missing_node_is_usage_error(self, sir_run_dir):
        res = invoke("inspect", sir_run_dir, "--node", 999)
        assert res.exit_code == 2
        assert "999" in res.output

    def test_missing_snapshot_is_usage_error(self, sir_run_dir):
        res = invoke("inspect", sir_run_dir, "--iteration", 3, "--node", 0)
        assert res.exit_code == 2
        assert "iteration 3" in res.output


class TestExportCommand:
    def test_default_output_round_trips(self, sir_run_dir):
        res = invoke("export", sir_run_dir)
        assert res.exit_code == 0, res.output
        out = sir_run_dir / "export-iter_0.gexf"
        assert Path(res.output.strip()) == out
        graph, states, attrs = load_gexf(out)
        assert graph.num_nodes == 100
        assert graph.num_edges == 200
        assert set(states.values()) <= {"Susceptible", "Infected", "Recovered"}
        assert "age" in attrs.node

    def test_explicit_output_path(self, sir_run_dir, tmp_path):
        target = tmp_path / "snap.gexf"
        res = invoke("export", sir_run_dir, "--out", target)
        assert res.exit_code == 0
        assert target.is_file()

    def test_unknown_format_is_usage_error(self, sir_run_dir):
        res = invoke("export", sir_run_dir, "--format", "png")
        assert res.exit_code == 2
        assert "png" in res.output

    def test_missing_run_dir_is_usage_error(self, tmp_path):
        res = invoke("export", tmp_path / "nothing-here")
        assert res.exit_code == 2
