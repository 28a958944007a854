"""Series recording, JSON persistence, snapshots, and batch merging."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from crowdkit import (
    AttributeTable,
    CollectError,
    Graph,
    SeriesRecorder,
    list_snapshots,
    merge_batches,
    merge_labeled,
    merge_parent_directory,
    merge_simulations,
    read_collector,
    read_snapshot,
    write_snapshot,
)
from crowdkit.collect import (
    COLLECTOR_DIR,
    batch_dirs,
    read_summary,
    write_collectors,
    write_summary,
)


def series_doc(name: str, values: list) -> dict:
    rec = SeriesRecorder(name)
    for i, v in enumerate(values):
        rec.record(i, v)
    return rec.as_document()


# ---------------------------------------------------------------------------
# SeriesRecorder
# ---------------------------------------------------------------------------


class TestSeriesRecorder:
    def test_fifty_scalars(self):
        rec = SeriesRecorder("wealth")
        for i in range(50):
            rec.record(i, float(i) * 1.5)
        doc = rec.as_document()
        assert doc["name"] == "wealth"
        assert len(doc["entries"]) == 50
        assert doc["entries"][7] == {"iteration": 7, "value": 10.5}

    def test_map_values(self):
        rec = SeriesRecorder("counts")
        rec.record(0, {"I": 10, "S": 90})
        rec.record(1, {"S": 85, "I": 15})
        doc = rec.as_document()
        assert doc["entries"][1]["value"] == {"S": 85, "I": 15}

    def test_shape_change_rejected(self):
        rec = SeriesRecorder("counts")
        rec.record(0, {"I": 1, "T": 2, "U": 3})
        with pytest.raises(CollectError):
            rec.record(1, 42.0)

    def test_map_key_change_rejected(self):
        rec = SeriesRecorder("counts")
        rec.record(0, {"I": 1, "T": 2})
        with pytest.raises(CollectError):
            rec.record(1, {"I": 1, "U": 2})

    def test_iterations_strictly_increase(self):
        rec = SeriesRecorder("x")
        rec.record(3, 1.0)
        with pytest.raises(CollectError):
            rec.record(3, 2.0)
        with pytest.raises(CollectError):
            rec.record(2, 2.0)

    def test_bool_rejected(self):
        rec = SeriesRecorder("x")
        with pytest.raises(CollectError):
            rec.record(0, True)

    def test_non_finite_rejected(self):
        rec = SeriesRecorder("x")
        with pytest.raises(CollectError):
            rec.record(0, float("nan"))
        with pytest.raises(CollectError):
            rec.record(1, float("inf"))

    def test_non_numeric_rejected(self):
        rec = SeriesRecorder("x")
        with pytest.raises(CollectError):
            rec.record(0, "fast")

    def test_numpy_scalars_coerced(self):
        rec = SeriesRecorder("x")
        rec.record(0, np.float64(1.25))
        rec.record(1, np.int64(4))
        doc = rec.as_document()
        assert doc["entries"][0]["value"] == 1.25
        assert isinstance(doc["entries"][0]["value"], float)
        assert doc["entries"][1]["value"] == 4
        assert isinstance(doc["entries"][1]["value"], int)

    def test_empty_series_still_has_document(self):
        doc = SeriesRecorder("quiet").as_document()
        assert doc == {"name": "quiet", "entries": []}


# ---------------------------------------------------------------------------
# Collector file round-trip
# ---------------------------------------------------------------------------


class TestCollectorFiles:
    def test_write_and_read(self, tmp_path):
        rec = SeriesRecorder("signal")
        rec.record(0, 1.0)
        rec.record(1, 2.0)
        paths = write_collectors([rec], tmp_path)
        assert len(paths) == 1
        assert paths[0] == tmp_path / COLLECTOR_DIR / "signal.json"
        doc = read_collector(paths[0])
        assert doc == rec.as_document()

    def test_empty_series_written(self, tmp_path):
        paths = write_collectors([SeriesRecorder("quiet")], tmp_path)
        doc = read_collector(paths[0])
        assert doc["entries"] == []

    def test_read_rejects_malformed(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"nope": 1}))
        with pytest.raises(CollectError):
            read_collector(bad)

    def test_summary_round_trip(self, tmp_path):
        write_summary({"epochs": 50, "final": {"S": 1, "I": 0}}, tmp_path)
        doc = read_summary(tmp_path)
        assert doc == {"epochs": 50, "final": {"S": 1, "I": 0}}


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------


class TestSnapshots:
    def build(self):
        g = Graph(4)
        g.add_edge(0, 1)
        g.add_edge(1, 2)
        g.add_edge(2, 3)
        states = {0: "A", 1: "B", 2: "A", 3: "B"}
        attrs = AttributeTable()
        attrs.set_node(0, "age", 12.5)
        attrs.set_node(3, "age", 60.0)
        attrs.set_edge(0, 1, "influence_prob", 0.5)
        attrs.set_edge(1, 0, "influence_prob", 0.25)
        params = {"R_T": 6.0, "r_UT": 0.5}
        return g, states, attrs, params

    def test_round_trip_identity(self, tmp_path):
        g, states, attrs, params = self.build()
        json_path, gexf_path = write_snapshot(17, g, states, attrs, params, tmp_path)
        assert json_path.name == "iter_17.json"
        assert gexf_path.name == "iter_17.gexf"
        it, g2, states2, attrs2, params2 = read_snapshot(json_path)
        assert it == 17
        assert sorted(g2.edges()) == sorted(g.edges())
        assert g2.num_nodes == 4
        assert states2 == states
        assert attrs2 == attrs
        assert params2 == params

    def test_gexf_twin_loads(self, tmp_path):
        from crowdkit import load_gexf

        g, states, attrs, params = self.build()
        _, gexf_path = write_snapshot(0, g, states, attrs, params, tmp_path)
        g2, states2, attrs2 = load_gexf(gexf_path)
        assert sorted(g2.edges()) == sorted(g.edges())
        assert states2 == states
        assert attrs2.get_edge(0, 1, "influence_prob") == 0.5
        assert attrs2.get_edge(1, 0, "influence_prob") == 0.25

    def test_list_snapshots_numeric_order(self, tmp_path):
        g, states, attrs, params = self.build()
        for it in [0, 5, 10, 2]:
            write_snapshot(it, g, states, attrs, params, tmp_path)
        paths = list_snapshots(tmp_path)
        assert [p.name for p in paths] == [
            "iter_0.json",
            "iter_2.json",
            "iter_5.json",
            "iter_10.json",
        ]

    def test_list_snapshots_missing_dir(self, tmp_path):
        assert list_snapshots(tmp_path) == []

    def test_malformed_snapshot_rejected(self, tmp_path):
        bad = tmp_path / "iter_0.json"
        bad.write_text(json.dumps({"iteration": 0}))
        with pytest.raises(CollectError):
            read_snapshot(bad)


# ---------------------------------------------------------------------------
# Merging batches (mean aggregation)
# ---------------------------------------------------------------------------


class TestMergeBatches:
    def test_pointwise_mean(self):
        merged = merge_batches(
            [series_doc("x", [1.0, 2.0, 3.0]), series_doc("x", [3.0, 4.0, 5.0])]
        )
        assert merged["name"] == "x"
        assert merged["aggregation"] == "mean"
        assert [e["value"] for e in merged["entries"]] == [2.0, 3.0, 4.0]
        assert [e["iteration"] for e in merged["entries"]] == [0, 1, 2]

    def test_single_batch_identity(self):
        doc = series_doc("x", [1.5, 2.5])
        merged = merge_batches([doc])
        assert [e["value"] for e in merged["entries"]] == [1.5, 2.5]

    def test_map_values_merged_per_key(self):
        a = series_doc("c", [{"S": 90, "I": 10}])
        b = series_doc("c", [{"S": 80, "I": 20}])
        merged = merge_batches([a, b])
        assert merged["entries"][0]["value"] == {"S": 85.0, "I": 15.0}

    def test_mean_matches_independent_oracle(self):
        # 50 synthetic batches; compare against math.fsum means at 1e-12.
        rng = np.random.default_rng(20260816)
        batches = [series_doc("y", rng.uniform(-1e6, 1e6, size=40).tolist()) for _ in range(50)]
        merged = merge_batches(batches)
        for i, entry in enumerate(merged["entries"]):
            column = [b["entries"][i]["value"] for b in batches]
            expected = math.fsum(column) / len(column)
            denom = max(abs(expected), 1.0)
            assert abs(entry["value"] - expected) / denom <= 1e-12

    def test_permutation_invariant(self):
        rng = np.random.default_rng(7)
        batches = [series_doc("y", rng.uniform(0, 1, size=10).tolist()) for _ in range(8)]
        forward = merge_batches(list(batches))
        backward = merge_batches(list(reversed(batches)))
        for e1, e2 in zip(forward["entries"], backward["entries"]):
            assert e1["value"] == pytest.approx(e2["value"], rel=1e-12)

    def test_name_mismatch_names_source(self):
        a = series_doc("x", [1.0])
        b = series_doc("z", [1.0])
        with pytest.raises(CollectError) as exc:
            merge_batches([a, b], sources=["batch-0", "batch-1"])
        assert "batch-1" in str(exc.value)

    def test_length_mismatch_names_source(self):
        a = series_doc("x", [1.0, 2.0])
        b = series_doc("x", [1.0])
        with pytest.raises(CollectError) as exc:
            merge_batches([a, b], sources=["batch-0", "batch-1"])
        assert "batch-1" in str(exc.value)

    def test_scalar_vs_map_mismatch(self):
        a = series_doc("x", [1.0])
        b = series_doc("x", [{"k": 1.0}])
        with pytest.raises(CollectError):
            merge_batches([a, b])

    def test_map_key_mismatch(self):
        a = series_doc("x", [{"S": 1.0}])
        b = series_doc("x", [{"I": 1.0}])
        with pytest.raises(CollectError):
            merge_batches([a, b])

    def test_empty_input_rejected(self):
        with pytest.raises(CollectError):
            merge_batches([])


# ---------------------------------------------------------------------------
# Labeled comparison merge
# ---------------------------------------------------------------------------


class TestMergeLabeled:
    def test_four_labeled_series(self):
        docs = [series_doc("spread", [float(i), float(i) + 1]) for i in range(4)]
        labels = [f"run-{i}" for i in range(4)]
        merged = merge_labeled(docs, labels)
        assert merged["name"] == "spread"
        assert merged["aggregation"] == "labeled"
        assert [s["label"] for s in merged["series"]] == labels
        assert merged["series"][2]["entries"][0]["value"] == 2.0

    def test_label_count_mismatch(self):
        with pytest.raises(CollectError):
            merge_labeled([series_doc("x", [1.0])], ["a", "b"])

    def test_single_series(self):
        merged = merge_labeled([series_doc("x", [9.0])], ["only"])
        assert len(merged["series"]) == 1


# ---------------------------------------------------------------------------
# Directory-level merge workflows
# ---------------------------------------------------------------------------


def write_batch_dir(parent, index, values_by_name):
    run_dir = parent / f"batch-{index}"
    recs = []
    for name, values in values_by_name.items():
        rec = SeriesRecorder(name)
        for i, v in enumerate(values):
            rec.record(i, v)
        recs.append(rec)
    write_collectors(recs, run_dir)
    return run_dir


class TestDirectoryMerge:
    def test_batch_dirs_sorted_numerically(self, tmp_path):
        for i in [0, 2, 10, 1]:
            write_batch_dir(tmp_path, i, {"x": [1.0]})
        dirs = batch_dirs(tmp_path)
        assert [d.name for d in dirs] == ["batch-0", "batch-1", "batch-2", "batch-10"]

    def test_merge_parent_directory(self, tmp_path):
        write_batch_dir(tmp_path, 0, {"x": [1.0, 2.0], "y": [0.0, 0.0]})
        write_batch_dir(tmp_path, 1, {"x": [3.0, 4.0], "y": [2.0, 2.0]})
        out_paths = merge_parent_directory(tmp_path)
        names = sorted(p.name for p in out_paths)
        assert names == ["x.json", "y.json"]
        assert all(p.parent == tmp_path / "merged" for p in out_paths)
        doc = read_collector(tmp_path / "merged" / "x.json")
        assert [e["value"] for e in doc["entries"]] == [2.0, 3.0]

    def test_merge_single_collector_by_name(self, tmp_path):
        write_batch_dir(tmp_path, 0, {"x": [1.0], "y": [5.0]})
        write_batch_dir(tmp_path, 1, {"x": [3.0], "y": [7.0]})
        out_paths = merge_parent_directory(tmp_path, collector_name="y")
        assert [p.name for p in out_paths] == ["y.json"]
        doc = read_collector(out_paths[0])
        assert doc["entries"][0]["value"] == 6.0

    def test_no_batches_rejected(self, tmp_path):
        with pytest.raises(CollectError):
            merge_parent_directory(tmp_path)

    def test_mismatched_batch_named_in_error(self, tmp_path):
        write_batch_dir(tmp_path, 0, {"x": [1.0, 2.0]})
        write_batch_dir(tmp_path, 1, {"x": [1.0]})
        with pytest.raises(CollectError) as exc:
            merge_parent_directory(tmp_path)
        assert "batch-1" in str(exc.value)

    def test_merge_simulations_labeled(self, tmp_path):
        run_a = write_batch_dir(tmp_path, 0, {"spread": [1.0, 2.0]})
        run_b = write_batch_dir(tmp_path, 1, {"spread": [3.0, 4.0]})
        out = tmp_path / "compare.json"
        merge_simulations([run_a, run_b], ["low", "high"], "spread", out)
        doc = json.loads(out.read_text())
        assert doc["aggregation"] == "labeled"
        assert [s["label"] for s in doc["series"]] == ["low", "high"]
