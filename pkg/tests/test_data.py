"""Bundle round-trips, malformed-input diagnostics, and split protocols."""

import json
import math
import os

import numpy as np
import pytest
import scipy.sparse as sp

from cagnn.data import (
    SplitSpec,
    dataset_info,
    load_dataset,
    load_split,
    make_split,
    save_split,
    semi_supervised_split,
    supervised_split,
    write_dataset,
)
from cagnn.errors import DataError
from cagnn.graph import Graph, build_adjacency
from cagnn.rng import make_rng
from conftest import random_graph


def write_minimal_bundle(path, edges="0\t1\n", features="0\t0\t1.0\n1\t1\t2.0\n",
                         labels="0\t0\n1\t1\n", meta=None):
    os.makedirs(path, exist_ok=True)
    meta = meta or {"name": "tiny", "num_nodes": 2, "num_features": 2, "num_classes": 2}
    with open(os.path.join(path, "meta.json"), "w") as fh:
        json.dump(meta, fh)
    for filename, content in (("edges.tsv", edges), ("features.tsv", features), ("labels.tsv", labels)):
        with open(os.path.join(path, filename), "w") as fh:
            fh.write(content)


# ---------------------------------------------------------------------------
# bundle loading
# ---------------------------------------------------------------------------


def test_minimal_bundle_round_trips(tmp_path):
    src = tmp_path / "tiny"
    write_minimal_bundle(src)
    graph = load_dataset(str(src))
    assert graph.num_nodes == 2 and graph.num_edges == 1
    dst = tmp_path / "copy"
    write_dataset(graph, str(dst))
    again = load_dataset(str(dst))
    assert (graph.adjacency != again.adjacency).nnz == 0
    assert np.array_equal(graph.labels, again.labels)
    np.testing.assert_array_equal(
        np.asarray(graph.features.todense()), np.asarray(again.features.todense())
    )


def test_random_graph_round_trips_exactly(tmp_path):
    graph = random_graph(3, n=15, d=6)
    dense = Graph(
        adjacency=graph.adjacency,
        features=sp.csr_matrix(graph.features),
        labels=graph.labels,
        num_classes=graph.num_classes,
        name="roundtrip",
    )
    write_dataset(dense, str(tmp_path / "bundle"))
    again = load_dataset(str(tmp_path / "bundle"))
    assert (dense.adjacency != again.adjacency).nnz == 0
    assert np.array_equal(np.asarray(dense.features.todense()), np.asarray(again.features.todense()))
    assert np.array_equal(dense.labels, again.labels)
    assert again.name == "roundtrip"


def test_duplicate_edge_lines_collapse(tmp_path):
    write_minimal_bundle(tmp_path / "b", edges="0\t1\n1\t0\n0\t1\n")
    assert load_dataset(str(tmp_path / "b")).num_edges == 1


def test_self_loop_lines_are_dropped(tmp_path):
    write_minimal_bundle(tmp_path / "b", edges="0\t1\n1\t1\n")
    graph = load_dataset(str(tmp_path / "b"))
    assert graph.num_edges == 1
    assert graph.adjacency.diagonal().sum() == 0.0


def test_malformed_edge_line_names_file_and_line(tmp_path):
    write_minimal_bundle(tmp_path / "b", edges="0\t1\nnot-a-number\t0\n")
    with pytest.raises(DataError, match=r"edges\.tsv:2"):
        load_dataset(str(tmp_path / "b"))


def test_out_of_range_feature_index_is_rejected(tmp_path):
    write_minimal_bundle(tmp_path / "b", features="0\t7\t1.0\n")
    with pytest.raises(DataError, match=r"features\.tsv:1"):
        load_dataset(str(tmp_path / "b"))


def test_out_of_range_label_and_duplicate_label(tmp_path):
    write_minimal_bundle(tmp_path / "a", labels="0\t0\n1\t5\n")
    with pytest.raises(DataError, match=r"labels\.tsv:2"):
        load_dataset(str(tmp_path / "a"))
    write_minimal_bundle(tmp_path / "c", labels="0\t0\n0\t1\n")
    with pytest.raises(DataError, match="twice"):
        load_dataset(str(tmp_path / "c"))


def test_missing_descriptor_and_missing_label_count(tmp_path):
    with pytest.raises(DataError, match="descriptor"):
        load_dataset(str(tmp_path / "nowhere"))
    write_minimal_bundle(tmp_path / "b", labels="0\t0\n")
    with pytest.raises(DataError, match="1 labeled"):
        load_dataset(str(tmp_path / "b"))


def test_dataset_info_statistics():
    graph = random_graph(0, n=10, d=5)
    info = dataset_info(graph)
    assert info["nodes"] == 10
    assert info["attributes"] == 5
    assert info["classes"] == 3
    assert info["edges"] == graph.num_edges
    assert info["average_degree"] == pytest.approx(2 * graph.num_edges / 10)


# ---------------------------------------------------------------------------
# split protocols
# ---------------------------------------------------------------------------


def test_supervised_split_takes_ceil_half():
    even = supervised_split(random_graph(0, n=4), seed=0)
    assert len(even.train) == 2 and len(even.test) == 2
    odd = supervised_split(random_graph(0, n=5), seed=0)
    assert len(odd.train) == 3 and len(odd.test) == 2
    assert len(odd.validation) == 0


def test_supervised_split_is_deterministic_and_disjoint():
    graph = random_graph(1, n=20)
    a = supervised_split(graph, seed=7)
    b = supervised_split(graph, seed=7)
    assert np.array_equal(a.train, b.train) and np.array_equal(a.test, b.test)
    assert set(a.train).isdisjoint(a.test)
    assert set(a.train) | set(a.test) == set(range(20))


def test_semi_split_sizes_and_disjointness():
    rng = make_rng(0, 90)
    n, c = 2000, 4
    labels = rng.integers(0, c, size=n).astype(np.int64)
    graph = Graph(
        adjacency=build_adjacency(np.array([[i, (i + 1) % n] for i in range(n)]), n),
        features=rng.standard_normal((n, 3)),
        labels=labels,
        num_classes=c,
        name="semi",
    )
    split = semi_supervised_split(graph, seed=0)
    assert len(split.train) == 20 * c
    assert len(split.validation) == 500
    assert len(split.test) == 1000
    for k in range(c):
        assert np.sum(labels[split.train] == k) == 20
    train, val, test = set(split.train), set(split.validation), set(split.test)
    assert train.isdisjoint(val) and train.isdisjoint(test) and val.isdisjoint(test)


def test_semi_split_small_class_contributes_five():
    rng = make_rng(0, 91)
    n = 2000
    labels = rng.integers(0, 3, size=n).astype(np.int64)
    labels[labels == 2] = 0
    labels[:12] = 2  # class 2 has exactly 12 members
    graph = Graph(
        adjacency=build_adjacency(np.array([[i, (i + 1) % n] for i in range(n)]), n),
        features=rng.standard_normal((n, 3)),
        labels=labels,
        num_classes=3,
        name="small-class",
    )
    split = semi_supervised_split(graph, seed=1)
    assert np.sum(labels[split.train] == 2) == 5
    assert np.sum(labels[split.train] == 0) == 20


def test_semi_split_errors_on_tiny_class_or_small_remainder():
    graph = random_graph(0, n=30, num_classes=3)
    graph.labels[:] = np.arange(30) % 3
    graph.labels[0:28] = np.arange(28) % 2  # class 2 has at most 2 members
    with pytest.raises(DataError):
        semi_supervised_split(graph, seed=0)
    balanced = random_graph(1, n=50, num_classes=2)
    balanced.labels[:] = np.arange(50) % 2
    with pytest.raises(DataError, match="remain"):
        semi_supervised_split(balanced, seed=0)  # 10 remain, 1500 needed


def test_semi_split_determinism():
    graph = random_graph(2, n=300, num_classes=3)
    graph.labels[:] = np.arange(300) % 3
    a = semi_supervised_split(graph, seed=4, val_size=50, test_size=100)
    b = semi_supervised_split(graph, seed=4, val_size=50, test_size=100)
    assert np.array_equal(a.train, b.train)
    assert np.array_equal(a.validation, b.validation)
    assert np.array_equal(a.test, b.test)


def test_split_spec_validation_rejects_overlap_and_out_of_range():
    with pytest.raises(DataError):
        SplitSpec(mode="supervised", train=np.array([0, 1]), validation=np.array([], dtype=int),
                  test=np.array([1, 2])).validate(4)
    with pytest.raises(DataError):
        SplitSpec(mode="supervised", train=np.array([0]), validation=np.array([], dtype=int),
                  test=np.array([9])).validate(4)


def test_split_file_round_trip(tmp_path):
    graph = random_graph(3, n=40)
    split = make_split(graph, "supervised", seed=3)
    path = tmp_path / "split.json"
    save_split(split, str(path))
    again = load_split(str(path), graph.num_nodes)
    assert again.mode == "supervised"
    assert np.array_equal(split.train, again.train)
    assert np.array_equal(split.test, again.test)
