"""Serialisation of panels, results and run manifests.

Result JSON is deterministic: keys are sorted, floats use the shortest
round-trip representation and nothing time- or path-dependent is embedded,
so identical results give identical bytes. CSV files use ``,`` separators,
``.`` decimals, ``\\n`` line endings and UTF-8.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .copula import SamplePanel
from .errors import ContractViolation
from .solver import SolutionPath
from .tasks import BipartiteCausalGraph, Segmentation

_COLUMN = re.compile(r"^([xy])([1-9][0-9]*)$")


def panel_header(n: int) -> list[str]:
    return [f"x{t}" for t in range(1, n + 1)] + [f"y{t}" for t in range(1, n + 1)]


def _column_order(header: list[str]) -> np.ndarray:
    """Permutation taking the file's columns to ``x1..xn, y1..yn``."""
    names = [h.strip().lower() for h in header]
    if len(names) == 0 or len(names) % 2:
        raise ContractViolation(f"expected an even, nonzero number of columns, got {len(names)}")
    expected = panel_header(len(names) // 2)
    if sorted(names) != sorted(expected):
        bad = [h for h in names if not _COLUMN.match(h)]
        hint = f"; unrecognised names {bad[:5]}" if bad else ""
        raise ContractViolation(f"CSV header must name columns x1..xn and y1..yn{hint}")
    pos = {name: k for k, name in enumerate(names)}
    return np.array([pos[name] for name in expected])


def read_panel_csv(path) -> SamplePanel:
    """Panel from a CSV whose header names the columns ``x1..xn, y1..yn``.

    Columns may appear in any order; they are rearranged into block layout.
    """
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ContractViolation(f"{path}: empty CSV")
    order = _column_order(rows[0])
    width = len(rows[0])
    data = np.empty((len(rows) - 1, width))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ContractViolation(f"{path}: line {r} has {len(row)} fields, expected {width}")
        try:
            data[r - 2] = [float(cell) for cell in row]
        except ValueError:
            raise ContractViolation(f"{path}: line {r} contains a non-numeric field") from None
    return SamplePanel(data[:, order])


def _num(x: float) -> str:
    return repr(float(x))


def write_panel_csv(panel: SamplePanel, path) -> None:
    lines = [",".join(panel_header(panel.n))]
    lines += [",".join(map(_num, row)) for row in panel.values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def dumps(doc: Any) -> str:
    """Canonical JSON text (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _scored(members: Mapping[int, float]) -> list[dict]:
    return [{"t": int(t), "score": float(s)} for t, s in sorted(members.items())]


def _threshold_doc(threshold):
    if threshold is None:
        return None
    if isinstance(threshold, Mapping):
        return {str(k): float(v) for k, v in threshold.items()}
    return float(threshold)


def segmentation_doc(seg: Segmentation) -> dict:
    return {
        "n": seg.n,
        "x_out": _scored(seg.x_out),
        "x_in": _scored(seg.x_in),
        "x_eq": _scored(seg.x_eq),
        "threshold": _threshold_doc(seg.threshold_used),
        "objectives": {k: float(v) for k, v in seg.objective_totals.items()},
    }


def _opt(x):
    return None if x is None else float(x)


def bipartite_doc(graph: BipartiteCausalGraph, threshold=None) -> dict:
    return {
        "n": graph.n,
        "arrows_x_to_y": [[j, i, float(s)] for j, i, s in graph.arrows_x_to_y],
        "arrows_y_to_x": [[j, i, float(s)] for j, i, s in graph.arrows_y_to_x],
        "couplings": [[i, _opt(sx), _opt(sy)] for i, sx, sy in graph.coupling_edges],
        "threshold": _threshold_doc(threshold),
    }


def bipartite_from_doc(doc: Mapping) -> BipartiteCausalGraph:
    return BipartiteCausalGraph(
        n=int(doc["n"]),
        arrows_x_to_y=tuple(tuple(a) for a in doc["arrows_x_to_y"]),
        arrows_y_to_x=tuple(tuple(a) for a in doc["arrows_y_to_x"]),
        coupling_edges=tuple(tuple(e) for e in doc["couplings"]),
    )


def path_csv(path: SolutionPath) -> str:
    """``step,kappa,coordinate,objective`` with 1-based coordinates; step 0 is ``d = 0``."""
    lines = ["step,kappa,coordinate,objective", f"0,0.0,,{_num(path.initial_objective)}"]
    for s, (k, c, v) in enumerate(zip(path.kappas, path.coordinates, path.objectives), start=1):
        lines.append(f"{s},{_num(round(k, 12))},{int(c) + 1},{_num(v)}")
    return "\n".join(lines) + "\n"


def null_scores_csv(scores: Mapping[str, np.ndarray]) -> str:
    lines = ["family,score"]
    for fam in sorted(scores):
        lines += [f"{fam},{_num(s)}" for s in scores[fam]]
    return "\n".join(lines) + "\n"


def _penwidth(score: float, top: float) -> str:
    if not (top > 0 and math.isfinite(score)):
        return "1.0"
    return f"{1.0 + 4.0 * max(score, 0.0) / top:.3f}"


def graph_to_dot(graph: BipartiteCausalGraph, name: str = "causal") -> str:
    """Graphviz digraph: X on the top row, Y below, penwidth scaled by score."""
    n = graph.n
    scores = [s for _, _, s in graph.arrows_x_to_y + graph.arrows_y_to_x]
    scores += [s for _, sx, sy in graph.coupling_edges for s in (sx, sy) if s is not None]
    top = max(scores, default=0.0)
    out = [f"digraph {name} {{", "  node [shape=circle];"]
    for row in "xy":
        nodes = "; ".join(f"{row}{t}" for t in range(1, n + 1))
        out.append(f"  {{ rank=same; {nodes}; }}")
    for j, i, s in graph.arrows_x_to_y:
        out.append(f"  x{j} -> y{i} [penwidth={_penwidth(s, top)}];")
    for j, i, s in graph.arrows_y_to_x:
        out.append(f"  y{j} -> x{i} [penwidth={_penwidth(s, top)}];")
    for i, sx, sy in graph.coupling_edges:
        s = max(v for v in (sx, sy) if v is not None) if (sx is not None or sy is not None) else 0.0
        out.append(f"  x{i} -> y{i} [dir=none, penwidth={_penwidth(s, top)}];")
    out.append("}")
    return "\n".join(out) + "\n"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
