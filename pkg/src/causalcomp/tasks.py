"""Causal segmentation and bipartite graph retrieval built on the solver.

Time indices in results are 1-based. Thresholds are either one number used
for every objective or a mapping keyed by objective family: ``"out"``,
``"in"``, ``"eq"`` (segmentation and couplings) and ``"arrow"`` (per-target
problems of the bipartite graph).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Union

from .errors import ContractViolation
from .gaussian_info import INCOMING, INSTANTANEOUS, OUTGOING, CovarianceModel, ObjectiveKind
from .solver import SolutionPath, SolverConfig, information_scores, stagewise_solve

Threshold = Union[float, Mapping[str, float]]


def threshold_for(threshold: Threshold, family: str) -> float:
    if isinstance(threshold, Mapping):
        try:
            value = float(threshold[family])
        except KeyError:
            raise ContractViolation(f"no threshold given for objective family {family!r}") from None
    else:
        value = float(threshold)
    if value < 0:
        raise ContractViolation("thresholds must be nonnegative")
    return value


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _members(path: SolutionPath, threshold: float) -> dict[int, float]:
    scores = information_scores(path).above(threshold)
    return {j + 1: s for j, s in sorted(scores.items())}


@dataclass(frozen=True)
class Segmentation:
    """Scored time points of X with outgoing, incoming and instantaneous flow.

    Sets map 1-based time index to information score and may overlap.
    """

    n: int
    x_out: dict[int, float]
    x_in: dict[int, float]
    x_eq: dict[int, float]
    threshold_used: Threshold | None = None
    objective_totals: dict[str, float] = field(default_factory=dict)
    paths: dict[str, SolutionPath] = field(default_factory=dict, repr=False, compare=False)

    def sets(self) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
        return frozenset(self.x_out), frozenset(self.x_in), frozenset(self.x_eq)


def segment(
    cov: CovarianceModel,
    config: SolverConfig | None = None,
    threshold: Threshold = 0.0,
    workers: int = 1,
) -> Segmentation:
    """Compress X three times (outgoing, incoming, instantaneous objectives).

    To segment Y instead, pass ``cov.swapped()``.
    """
    config = config or SolverConfig()
    thr = {f: threshold_for(threshold, f) for f in ("out", "in", "eq")}
    kinds = {"out": OUTGOING, "in": INCOMING, "eq": INSTANTANEOUS}
    paths = dict(zip(kinds, _map(lambda k: stagewise_solve(cov, k, config), kinds.values(), workers)))
    return Segmentation(
        n=cov.n,
        x_out=_members(paths["out"], thr["out"]),
        x_in=_members(paths["in"], thr["in"]),
        x_eq=_members(paths["eq"], thr["eq"]),
        threshold_used=dict(threshold) if isinstance(threshold, Mapping) else float(threshold),
        objective_totals={f: p.final_objective for f, p in paths.items()},
        paths=paths,
    )


@dataclass(frozen=True)
class BipartiteCausalGraph:
    """Arrows between time points of X and Y plus same-time coupling edges.

    ``arrows_x_to_y`` holds ``(j, i, score)`` for ``X_j -> Y_i``;
    ``arrows_y_to_x`` holds ``(j, i, score)`` for ``Y_j -> X_i``;
    ``coupling_edges`` holds ``(i, score_x, score_y)`` for ``X_i -- Y_i``.
    """

    n: int
    arrows_x_to_y: tuple[tuple[int, int, float], ...] = ()
    arrows_y_to_x: tuple[tuple[int, int, float], ...] = ()
    coupling_edges: tuple[tuple[int, float | None, float | None], ...] = ()

    def __post_init__(self):
        for name in ("arrows_x_to_y", "arrows_y_to_x"):
            arrows = tuple(sorted((int(j), int(i), float(s)) for j, i, s in getattr(self, name)))
            for j, i, _ in arrows:
                if not 1 <= j < i <= self.n:
                    raise ContractViolation(f"{name}: arrow ({j}, {i}) must point forward in time")
            if len({(j, i) for j, i, _ in arrows}) != len(arrows):
                raise ContractViolation(f"{name}: duplicate arrow")
            object.__setattr__(self, name, arrows)
        edges = tuple(sorted(((int(e[0]), e[1], e[2]) for e in self.coupling_edges), key=lambda e: e[0]))
        for i, _, _ in edges:
            if not 1 <= i <= self.n:
                raise ContractViolation(f"coupling index {i} outside 1..{self.n}")
        if len({e[0] for e in edges}) != len(edges):
            raise ContractViolation("duplicate coupling edge")
        object.__setattr__(self, "coupling_edges", edges)

    def arrow_set(self) -> tuple[frozenset, frozenset]:
        return (
            frozenset((j, i) for j, i, _ in self.arrows_x_to_y),
            frozenset((j, i) for j, i, _ in self.arrows_y_to_x),
        )


def bipartite(
    cov: CovarianceModel,
    config: SolverConfig | None = None,
    threshold: Threshold = 0.0,
    one_sided_couplings: bool = False,
    workers: int = 1,
) -> BipartiteCausalGraph:
    """Per-target compressions for arrows, two instantaneous ones for couplings.

    With ``one_sided_couplings`` an edge needs to survive in only one of the
    two compressions instead of both.
    """
    config = config or SolverConfig()
    n = cov.n
    t_arrow = threshold_for(threshold, "arrow")
    t_eq = threshold_for(threshold, "eq")
    jobs = [ObjectiveKind.per_target_outgoing(i) for i in range(2, n + 1)]
    jobs += [ObjectiveKind.per_target_incoming(i) for i in range(2, n + 1)]
    jobs += [INSTANTANEOUS]
    swapped = cov.swapped()

    def run(job):
        kind, model = job
        return stagewise_solve(model, kind, config)

    paths = _map(run, [(k, cov) for k in jobs] + [(INSTANTANEOUS, swapped)], workers)
    x_to_y, y_to_x = [], []
    for kind, path in zip(jobs, paths):
        if not kind.is_per_target:
            continue
        arrows = x_to_y if kind.tag.value == "per_target_outgoing" else y_to_x
        for j, s in _members(path, t_arrow).items():
            arrows.append((j, kind.target, s))
    x_eq = _members(paths[-2], t_eq)
    y_eq = _members(paths[-1], t_eq)
    keep = (set(x_eq) | set(y_eq)) if one_sided_couplings else (set(x_eq) & set(y_eq))
    edges = [(i, x_eq.get(i), y_eq.get(i)) for i in sorted(keep)]
    return BipartiteCausalGraph(n, tuple(x_to_y), tuple(y_to_x), tuple(edges))


def graph_to_segmentation(g: BipartiteCausalGraph) -> Segmentation:
    """Segmentation of X implied by a bipartite graph (max score per node)."""
    x_out: dict[int, float] = {}
    for j, _, s in g.arrows_x_to_y:
        x_out[j] = max(s, x_out.get(j, s))
    x_in: dict[int, float] = {}
    for _, i, s in g.arrows_y_to_x:
        x_in[i] = max(s, x_in.get(i, s))
    x_eq = {i: (sx if sx is not None else sy) for i, sx, sy in g.coupling_edges}
    return Segmentation(
        n=g.n,
        x_out=dict(sorted(x_out.items())),
        x_in=dict(sorted(x_in.items())),
        x_eq=x_eq,
    )
