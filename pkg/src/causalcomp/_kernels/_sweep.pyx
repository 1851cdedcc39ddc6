# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled conditioning-sweep kernels.

Each sweep applies one rank-one (Sherman-Morrison) conditioning update per
variable to the running covariance of the not-yet-conditioned variables and
to the cross-covariance with ``X``.  Weights that are zero make their ``T``
variable independent unit noise, so those steps are skipped outright.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt
from libc.stdlib cimport malloc, free

from ..errors import SingularityError

cnp.import_array()

NAME = "cython"

cdef enum:
    VAR_T = 0

cdef enum:
    BUDGET = 0
    NONPOSITIVE = 1
    MAX_STEPS = 2


cdef struct SweepView:
    Py_ssize_t length
    const signed char *vtype
    const Py_ssize_t *vidx
    const double *coef


cdef int _run_sweep(
    SweepView sw, Py_ssize_t n,
    const double *sx, const double *sxy, const double *sy, const double *s,
    double *G, double *H, double *v, double *w,
    double *value, double *grad,
) noexcept nogil:
    """Accumulate one sweep into value/grad; returns -1 on a nonpositive pivot."""
    cdef Py_ssize_t L = sw.length
    cdef Py_ssize_t p, q, r, j, a, b, k = 0
    cdef double piv, inv, h, logdet = 0.0, c, sa, sb
    cdef bint ta, tb

    # conditioning block (upper triangle) and cross-covariance with X
    for p in range(L):
        ta = sw.vtype[p] == VAR_T
        a = sw.vidx[p]
        sa = s[a] if ta else 1.0
        for q in range(p, L):
            tb = sw.vtype[q] == VAR_T
            b = sw.vidx[q]
            sb = s[b] if tb else 1.0
            if ta and tb:
                c = sx[a * n + b]
            elif ta:
                c = sxy[a * n + b]
            elif tb:
                c = sxy[b * n + a]
            else:
                c = sy[a * n + b]
            G[p * L + q] = sa * sb * c
        if ta:
            G[p * L + p] += 1.0
        for j in range(n):
            H[j * L + p] = sa * (sx[j * n + a] if ta else sxy[j * n + a])
    for j in range(n):
        v[j] = sx[j * n + j]

    for p in range(L):
        ta = sw.vtype[p] == VAR_T
        if ta:
            k += 1
        if not (ta and s[sw.vidx[p]] == 0.0):
            piv = G[p * L + p]
            if not piv > 0.0:
                return -1
            logdet += log(piv)
            inv = 1.0 / piv
            for q in range(p + 1, L):
                w[q] = G[p * L + q]
            for q in range(p + 1, L):
                h = w[q] * inv
                if h != 0.0:
                    for r in range(q, L):
                        G[q * L + r] -= h * w[r]
            for j in range(n):
                h = H[j * L + p]
                if h != 0.0:
                    v[j] -= h * h * inv
                    h *= inv
                    for q in range(p + 1, L):
                        H[j * L + q] -= h * w[q]
        c = sw.coef[p]
        if c != 0.0:
            value[0] += 0.5 * c * logdet
            for j in range(k):
                grad[j] += 0.5 * c * v[j]
    return 0


cdef class _Kernel:
    """Buffers and sweep descriptors for repeated evaluation of one problem."""

    cdef Py_ssize_t n, nsweeps, maxlen
    cdef double const_
    cdef SweepView *views
    cdef const double[:, ::1] sx
    cdef const double[:, ::1] sxy
    cdef const double[:, ::1] sy
    cdef list _keep
    cdef double *G
    cdef double *H
    cdef double *v
    cdef double *w
    cdef double *s

    def __cinit__(self, prob):
        cdef Py_ssize_t i
        self.n = prob.n
        self.sx = prob.sx
        self.sxy = prob.sxy
        self.sy = prob.sy
        self.const_ = prob.const
        self.nsweeps = len(prob.sweeps)
        self._keep = []
        self.views = <SweepView *> malloc(max(self.nsweeps, 1) * sizeof(SweepView))
        self.maxlen = 1
        cdef const signed char[::1] vt
        cdef const Py_ssize_t[::1] vi
        cdef const double[::1] cf
        for i, sw in enumerate(prob.sweeps):
            vt = sw.vtype
            vi = sw.vidx
            cf = sw.coef
            self._keep.append((vt, vi, cf))
            self.views[i].length = vt.shape[0]
            self.views[i].vtype = &vt[0]
            self.views[i].vidx = &vi[0]
            self.views[i].coef = &cf[0]
            self.maxlen = max(self.maxlen, vt.shape[0])
        L = self.maxlen
        self.G = <double *> malloc(L * L * sizeof(double))
        self.H = <double *> malloc(self.n * L * sizeof(double))
        self.v = <double *> malloc(self.n * sizeof(double))
        self.w = <double *> malloc(L * sizeof(double))
        self.s = <double *> malloc(self.n * sizeof(double))
        if not (self.views and self.G and self.H and self.v and self.w and self.s):
            raise MemoryError()

    def __dealloc__(self):
        free(self.views)
        free(self.G)
        free(self.H)
        free(self.v)
        free(self.w)
        free(self.s)

    cdef int eval_into(self, const double *d, double *value, double *grad) noexcept nogil:
        cdef Py_ssize_t i
        for i in range(self.n):
            self.s[i] = sqrt(d[i])
            grad[i] = 0.0
        value[0] = self.const_
        for i in range(self.nsweeps):
            if _run_sweep(self.views[i], self.n, &self.sx[0, 0], &self.sxy[0, 0], &self.sy[0, 0],
                          self.s, self.G, self.H, self.v, self.w, value, grad) < 0:
                return -1
        return 0


def _kernel_for(prob):
    ker = getattr(prob, "_cython_kernel", None)
    if ker is None:
        ker = _Kernel(prob)
        prob._cython_kernel = ker
    return ker


def evaluate(prob, d):
    """Objective value and gradient at weights ``d``."""
    cdef _Kernel ker = _kernel_for(prob)
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    grad = np.zeros(ker.n)
    cdef double[::1] gv = grad
    cdef double value = 0.0
    cdef int rc
    with nogil:
        rc = ker.eval_into(&dv[0], &value, &gv[0])
    if rc < 0:
        raise SingularityError("conditioning covariance is numerically singular")
    return value, grad


def stagewise(prob, double epsilon, Py_ssize_t budget_steps, Py_ssize_t max_steps, double tol):
    """Monotone stagewise-forward loop.

    Returns ``(initial_value, coords, values, status)``.
    """
    cdef _Kernel ker = _kernel_for(prob)
    cdef Py_ssize_t n = ker.n
    cdef Py_ssize_t cap = min(budget_steps, max_steps)
    if cap < 0:
        cap = 0
    coords = np.empty(cap, dtype=np.intp)
    values = np.empty(cap, dtype=np.float64)
    cdef Py_ssize_t[::1] cv = coords
    cdef double[::1] vv = values
    cdef long long[::1] counts = np.zeros(n, dtype=np.int64)
    cdef double[::1] d = np.zeros(n)
    cdef double[::1] grad = np.zeros(n)
    cdef const signed char[::1] cand = prob.candidates
    cdef double value = 0.0, initial = 0.0, best = 0.0
    cdef Py_ssize_t step = 0, j, jbest
    cdef int status = NONPOSITIVE, rc

    with nogil:
        rc = ker.eval_into(&d[0], &value, &grad[0])
        initial = value
        while rc == 0:
            if step >= budget_steps:
                status = BUDGET
                break
            if step >= max_steps:
                status = MAX_STEPS
                break
            jbest = -1
            for j in range(n):
                if cand[j] and (jbest < 0 or grad[j] > best):
                    jbest = j
                    best = grad[j]
            if jbest < 0 or not best > tol:
                status = NONPOSITIVE
                break
            counts[jbest] += 1
            d[jbest] = counts[jbest] * epsilon
            rc = ker.eval_into(&d[0], &value, &grad[0])
            cv[step] = jbest
            vv[step] = value
            step += 1
    if rc < 0:
        raise SingularityError("conditioning covariance is numerically singular")
    return initial, coords[:step].copy(), values[:step].copy(), status
