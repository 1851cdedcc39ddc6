"""Pure NumPy/LAPACK kernels; used when the compiled extension is missing.

A sequence of rank-one conditioning updates is exactly a Cholesky
factorisation of the conditioning block, so each sweep is one ``cholesky``
plus one triangular solve.
"""

import numpy as np
from scipy import linalg

from ..errors import SingularityError
from ._plan import VAR_T

NAME = "python"

BUDGET, NONPOSITIVE, MAX_STEPS = 0, 1, 2


def _sweep(prob, s, sweep, value_grad):
    is_t = sweep.vtype == VAR_T
    idx = sweep.vidx
    scale = np.where(is_t, s[idx], 1.0)
    # joint covariance of the ordered conditioning variables
    blk = np.empty((idx.size, idx.size))
    tt = np.ix_(is_t, is_t)
    blk[tt] = prob.sx[np.ix_(idx[is_t], idx[is_t])]
    blk[np.ix_(is_t, ~is_t)] = prob.sxy[np.ix_(idx[is_t], idx[~is_t])]
    blk[np.ix_(~is_t, is_t)] = prob.sxy[np.ix_(idx[is_t], idx[~is_t])].T
    blk[np.ix_(~is_t, ~is_t)] = prob.sy[np.ix_(idx[~is_t], idx[~is_t])]
    blk *= scale[:, None] * scale[None, :]
    blk[np.flatnonzero(is_t), np.flatnonzero(is_t)] += 1.0
    cross = np.where(is_t[None, :], prob.sx[:, idx], prob.sxy[:, idx]) * scale[None, :]

    try:
        chol = linalg.cholesky(blk, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularityError("conditioning covariance is numerically singular") from exc
    logdet = np.cumsum(2.0 * np.log(np.diag(chol)))
    proj = linalg.solve_triangular(chol, cross.T, lower=True, check_finite=False)
    var = np.diag(prob.sx)[None, :] - np.cumsum(proj * proj, axis=0)

    kdim = np.cumsum(is_t)
    live = sweep.coef != 0.0
    coef = sweep.coef[live]
    value_grad[0] += 0.5 * float(coef @ logdet[live])
    mask = np.arange(prob.n)[None, :] < kdim[live][:, None]
    value_grad[1] += 0.5 * ((coef[:, None] * mask) * var[live]).sum(axis=0)


def evaluate(prob, d):
    """Objective value and gradient at weights ``d``."""
    s = np.sqrt(np.asarray(d, dtype=float))
    acc = [prob.const, np.zeros(prob.n)]
    for sweep in prob.sweeps:
        _sweep(prob, s, sweep, acc)
    return acc[0], acc[1]


def stagewise(prob, epsilon, budget_steps, max_steps, tol):
    """Monotone stagewise-forward loop.

    Returns ``(initial_value, coords, values, status)``.
    """
    counts = np.zeros(prob.n, dtype=np.int64)
    value, grad = evaluate(prob, counts * epsilon)
    initial = value
    cand = prob.candidates.astype(bool)
    coords, values = [], []
    while True:
        step = len(coords)
        if step >= budget_steps:
            status = BUDGET
            break
        if step >= max_steps:
            status = MAX_STEPS
            break
        g = np.where(cand, grad, -np.inf)
        j = int(np.argmax(g))
        if not g[j] > tol:
            status = NONPOSITIVE
            break
        counts[j] += 1
        value, grad = evaluate(prob, counts * epsilon)
        coords.append(j)
        values.append(value)
    return initial, np.asarray(coords, dtype=np.intp), np.asarray(values, dtype=float), status
