"""Map an objective's log-determinant terms onto conditioning sweeps.

Each sweep conditions the posterior of ``X`` on a sequence of ``T`` / ``Y``
variables one at a time. After ``p`` steps the running log-pivot sum is
``log|Cov(prefix)|`` and the running diagonal is ``Var(X_j | prefix)``.

Three orders cover every prefix pair an objective needs::

    A: T1, Y1, T2, Y2, ...   -> (k, k-1) after T_k, (k, k) after Y_k
    B: Y1, T1, Y2, T2, ...   -> (m-1, m) after Y_m, (k, k) after T_k
    C: T1, T2, ...           -> (k, 0)   after T_k
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import ContractViolation
from ..gaussian_info import CovarianceModel, ObjectiveKind, _cholesky, objective_terms

VAR_T = 0
VAR_Y = 1


@dataclass(frozen=True)
class Sweep:
    vtype: np.ndarray  # int8, VAR_T / VAR_Y
    vidx: np.ndarray  # intp, 0-based time index of the variable
    coef: np.ndarray  # float64, weight of the prefix ending at this step


def _order(name: str, n: int) -> tuple[list[int], list[int]]:
    if name == "A":
        return [VAR_T, VAR_Y] * n, [i for i in range(n) for _ in (0, 1)]
    if name == "B":
        return [VAR_Y, VAR_T] * n, [i for i in range(n) for _ in (0, 1)]
    return [VAR_T] * n, list(range(n))


@lru_cache(maxsize=1024)
def sweep_plan(kind: ObjectiveKind, n: int) -> tuple[tuple[Sweep, ...], tuple[tuple[float, int], ...]]:
    """Sweeps for ``kind`` plus the ``(coef, m)`` pairs of its ``Y``-only constant."""
    terms = objective_terms(kind, n)
    need_b = any(m == k + 1 for _, k, m in terms)
    coefs = {name: np.zeros(2 * n if name != "C" else n) for name in "ABC"}
    const = []
    for c, k, m in terms:
        if m == 0:
            coefs["C"][k - 1] += c
        elif k == m + 1:
            coefs["A"][2 * k - 2] += c
        elif m == k + 1:
            coefs["B"][2 * m - 2] += c
        elif k == m:
            coefs["B" if need_b else "A"][2 * k - 1] += c
        else:
            raise ContractViolation(f"no sweep covers prefix pair ({k}, {m})")
        if m:
            const.append((c, m))
    sweeps = []
    for name in "ABC":
        nz = np.flatnonzero(coefs[name])
        if nz.size == 0:
            continue
        length = int(nz[-1]) + 1
        vtype, vidx = _order(name, n)
        sweeps.append(
            Sweep(
                np.ascontiguousarray(vtype[:length], dtype=np.int8),
                np.ascontiguousarray(vidx[:length], dtype=np.intp),
                np.ascontiguousarray(coefs[name][:length]),
            )
        )
    return tuple(sweeps), tuple(const)


class Problem:
    """An objective bound to one covariance model, ready for kernel calls."""

    def __init__(self, cov: CovarianceModel, kind: ObjectiveKind):
        n = cov.n
        self.n = n
        self.kind = kind
        self.sx = np.ascontiguousarray(cov.sigma_x)
        self.sxy = np.ascontiguousarray(cov.sigma_xy)
        self.sy = np.ascontiguousarray(cov.sigma_y)
        self.sweeps, const_terms = sweep_plan(kind, n)
        # -1/2 log|S_{Y^m}| parts; independent of the weights. One factor
        # serves every prefix: its leading m x m block factors S_{Y^m}.
        ly = np.r_[0.0, 2.0 * np.cumsum(np.log(np.diag(_cholesky(self.sy, "Sigma_Y"))))] if const_terms else None
        self.const = -0.5 * sum(c * ly[m] for c, m in const_terms)
        self.candidates = np.ones(n, dtype=np.int8)
        if kind.is_per_target:
            self.candidates[kind.target - 1 :] = 0
