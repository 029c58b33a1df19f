#!/usr/bin/env python3
"""Convert a LINQS citation dataset into a bundle directory.

The LINQS archives (Cora, CiteSeer, and friends) ship two files:

  <name>.content   one line per paper: id, attribute values, class label
  <name>.cites     one line per citation: cited id, citing id

This script maps the string ids to contiguous node numbers in .content
order, turns the class labels into integers by sorted name, and writes
the bundle that ``cagnn.data.load_dataset`` reads. Citations whose
endpoints never appear in .content (CiteSeer has a few) are dropped
with a note.

Usage:
  python3 scripts/convert_planetoid.py cora.content cora.cites --out data/cora
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cagnn.data import write_dataset
from cagnn.graph import Graph, build_adjacency


def parse_content(path: Path):
    ids, rows, labels = [], [], []
    with open(path) as fh:
        for line in fh:
            fields = line.rstrip("\n").split("\t")
            if len(fields) < 3:
                raise SystemExit(f"{path}: expected id, attributes, label; got {len(fields)} fields")
            ids.append(fields[0])
            rows.append(np.array(fields[1:-1], dtype=np.float64))
            labels.append(fields[-1])
    return ids, np.vstack(rows), labels


def parse_cites(path: Path, index: dict) -> tuple[np.ndarray, int]:
    edges, dropped = [], 0
    with open(path) as fh:
        for line in fh:
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                raise SystemExit(f"{path}: expected two ids per line, got {line.rstrip()!r}")
            cited, citing = fields
            if cited in index and citing in index:
                edges.append((index[cited], index[citing]))
            else:
                dropped += 1
    return np.array(edges, dtype=np.int64).reshape(-1, 2), dropped


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("content", type=Path, help="the <name>.content file")
    parser.add_argument("cites", type=Path, help="the <name>.cites file")
    parser.add_argument("--out", type=Path, required=True, help="bundle directory to create")
    parser.add_argument("--name", default=None, help="dataset name (default: from the content file)")
    args = parser.parse_args(argv)

    ids, features, raw_labels = parse_content(args.content)
    if len(set(ids)) != len(ids):
        raise SystemExit(f"{args.content}: duplicate node ids")
    index = {node_id: i for i, node_id in enumerate(ids)}
    classes = sorted(set(raw_labels))
    labels = np.array([classes.index(label) for label in raw_labels], dtype=np.int64)

    edges, dropped = parse_cites(args.cites, index)
    graph = Graph(
        adjacency=build_adjacency(edges, len(ids)),
        features=sp.csr_matrix(features),
        labels=labels,
        num_classes=len(classes),
        name=args.name or args.content.stem,
    )
    write_dataset(graph, str(args.out))

    print(f"wrote {args.out}: {graph.num_nodes} nodes, {graph.num_edges} edges, "
          f"{graph.num_features} attributes, {graph.num_classes} classes")
    for i, name in enumerate(classes):
        print(f"  class {i}: {name}")
    if dropped:
        print(f"dropped {dropped} citation(s) with unknown endpoints")
    return 0


if __name__ == "__main__":
    sys.exit(main())
