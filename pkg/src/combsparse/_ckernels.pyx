# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_pykernels``; same contracts."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY
from scipy.linalg.cython_blas cimport dgemv, ddot, daxpy, dtrsv

cnp.import_array()

cdef enum:
    RESIDUAL = 0
    CAP = 1
    STALLED = 2
    LAMBDA_ZERO = 3

cdef double DEPENDENCE_TOL = 1e-10
cdef double GRAM_PIVOT_TOL = 1e-14
cdef double RESIDUAL_AIM = 0.999


cdef inline void _at_x(const double[::1, :] A, const double* x, double* out, double alpha, double beta) noexcept nogil:
    # out = alpha * A^T x + beta * out
    cdef int m = A.shape[0], n = A.shape[1], one = 1
    cdef char t = b'T'
    dgemv(&t, &m, &n, &alpha, <double*>&A[0, 0], &m, <double*>x, &one, &beta, out, &one)


cdef inline double _dot(int n, const double* a, const double* b) noexcept nogil:
    cdef int one = 1
    return ddot(&n, <double*>a, &one, <double*>b, &one)


cdef inline void _axpy(int n, double a, const double* x, double* y) noexcept nogil:
    cdef int one = 1
    daxpy(&n, &a, <double*>x, &one, y, &one)


def greedy_pursuit(A, norms, y, Py_ssize_t kx, Py_ssize_t max_iters, double eps):
    cdef const double[::1, :] Av = np.asfortranarray(A, dtype=np.float64)
    cdef const double[::1] nv = np.ascontiguousarray(norms, dtype=np.float64)
    cdef int M = Av.shape[0], K = Av.shape[1]
    cdef double[::1] r = np.array(y, dtype=np.float64)
    cdef Py_ssize_t cap = min(max_iters, M, K)
    cdef double[::1, :] Q = np.zeros((M, max(cap, 1)), order="F")
    cdef double[::1, :] R = np.zeros((max(cap, 1), max(cap, 1)), order="F")
    cdef double[::1] z = np.zeros(max(cap, 1))
    cdef double[::1] pi = np.empty(K)
    cdef double[::1] q = np.empty(M)
    cdef cnp.uint8_t[::1] chosen = np.zeros(K, dtype=np.uint8)
    cdef cnp.intp_t[::1] order = np.empty(max(cap, 1), dtype=np.intp)
    cdef Py_ssize_t t = 0, i, p, k, i_hat, j_hat, rep
    cdef int status = CAP
    cdef double rnorm, vx, vd, v, h, nq, an, val
    with nogil:
        rnorm = sqrt(_dot(M, &r[0], &r[0]))
        while True:
            if rnorm <= eps:
                status = RESIDUAL
                break
            if t >= max_iters:
                status = CAP
                break
            if t >= cap:
                status = STALLED
                break
            _at_x(Av, &r[0], &pi[0], 1.0, 0.0)
            vx = -1.0
            vd = -1.0
            i_hat = -1
            j_hat = -1
            for i in range(K):
                if chosen[i]:
                    continue
                val = pi[i] / nv[i]
                if i < kx:
                    if i_hat < 0 or val > vx:
                        vx = val
                        i_hat = i
                else:
                    if val < 0:
                        val = -val
                    if j_hat < 0 or val > vd:
                        vd = val
                        j_hat = i
            if i_hat >= 0 and vx < 0.0:
                vx = 0.0
            if vx >= vd:
                k = i_hat
                v = vx
            else:
                k = j_hat
                v = vd
            if v <= 0.0:
                status = STALLED
                break
            for i in range(M):
                q[i] = Av[i, k]
            an = sqrt(_dot(M, &q[0], &q[0]))
            for rep in range(2):
                for p in range(t):
                    h = _dot(M, &Q[0, p], &q[0])
                    _axpy(M, -h, &Q[0, p], &q[0])
                    R[p, t] += h
            nq = sqrt(_dot(M, &q[0], &q[0]))
            if nq <= DEPENDENCE_TOL * an:
                for p in range(t):
                    R[p, t] = 0.0
                status = STALLED
                break
            for i in range(M):
                Q[i, t] = q[i] / nq
            R[t, t] = nq
            z[t] = _dot(M, &Q[0, t], &r[0])
            _axpy(M, -z[t], &Q[0, t], &r[0])
            rnorm = sqrt(_dot(M, &r[0], &r[0]))
            chosen[k] = 1
            order[t] = k
            t += 1
    coef = np.zeros(t)
    cdef double[::1] cv = coef
    cdef int n_t = <int>t, one = 1, lda = R.shape[0]
    cdef char up = b'U', nt = b'N', nu = b'N'
    if t:
        for i in range(t):
            cv[i] = z[i]
        dtrsv(&up, &nt, &nu, &n_t, &R[0, 0], &lda, &cv[0], &one)
    return np.asarray(order[:t]).copy(), coef, float(rnorm), int(t), int(status)


cdef int _chol_append(double[::1, :] L, int s, double[::1] w, double akk) noexcept nogil:
    # L[:s, :s] lower; w holds L^{-1} a on entry. Returns 0 on success.
    cdef int i
    cdef double dk = akk - _dot(s, &w[0], &w[0]) if s > 0 else akk
    if dk <= GRAM_PIVOT_TOL * akk:
        return 1
    for i in range(s):
        L[s, i] = w[i]
    L[s, s] = sqrt(dk)
    return 0


cdef int _chol_rebuild(const double[::1, :] A, int[::1] active, int s, double[::1, :] L) noexcept nogil:
    cdef int i, j, k
    cdef double v
    for i in range(s):
        for j in range(i + 1):
            v = _dot(A.shape[0], &A[0, active[i]], &A[0, active[j]])
            for k in range(j):
                v -= L[i, k] * L[j, k]
            if i == j:
                if v <= 0.0:
                    return 1
                L[i, i] = sqrt(v)
            else:
                L[i, j] = v / L[j, j]
    return 0


cdef void _lsolve(double[::1, :] L, int s, double* v, bint trans) noexcept nogil:
    cdef int one = 1, lda = L.shape[0]
    cdef char lo = b'L', tr = b'T' if trans else b'N', nu = b'N'
    dtrsv(&lo, &tr, &nu, &s, &L[0, 0], &lda, v, &one)


def nn_homotopy(A, y, double eps, Py_ssize_t max_breakpoints, trace=None):
    cdef const double[::1, :] Av = np.asfortranarray(A, dtype=np.float64)
    cdef int M = Av.shape[0], K = Av.shape[1]
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    x_out = np.zeros(K)
    cdef double[::1] x = x_out
    cdef double[::1] r = np.array(yv)
    cdef double[::1] c = np.empty(K)
    cdef double[::1] b = np.empty(K)
    cdef double[::1] u = np.empty(M)
    cdef int smax = min(M, K) + 1
    cdef double[::1, :] L = np.zeros((smax, smax), order="F")
    cdef double[::1] d = np.empty(smax)
    cdef double[::1] w = np.empty(smax)
    cdef int[::1] active = np.empty(smax, dtype=np.intc)
    cdef cnp.uint8_t[::1] in_active = np.zeros(K, dtype=np.uint8)
    cdef int s, i, j, p, j0, who, event, last_added, last_dropped, status = CAP
    cdef Py_ssize_t nb = 0
    cdef double lam, gamma, g, rnorm, uu, ru, disc, akk

    rnorm = sqrt(_dot(M, &r[0], &r[0]))
    _at_x(Av, &r[0], &c[0], 1.0, 0.0)
    if rnorm <= eps:
        return x_out, 0.0, float(rnorm), 0, RESIDUAL
    j0 = 0
    for j in range(1, K):
        if c[j] > c[j0]:
            j0 = j
    lam = c[j0]
    if lam <= 0.0:
        return x_out, 0.0, float(rnorm), 0, LAMBDA_ZERO
    s = 1
    active[0] = j0
    in_active[j0] = 1
    L[0, 0] = sqrt(_dot(M, &Av[0, j0], &Av[0, j0]))
    last_added = j0
    last_dropped = -1
    while True:
        if trace is not None:
            act = [int(active[p]) for p in range(s)]
            trace.append((lam, act, np.array([x[a] for a in act])))
        if nb >= max_breakpoints:
            status = CAP
            break
        with nogil:
            for p in range(s):
                d[p] = 1.0
            _lsolve(L, s, &d[0], False)
            _lsolve(L, s, &d[0], True)
            for i in range(M):
                u[i] = 0.0
            for p in range(s):
                _axpy(M, d[p], &Av[0, active[p]], &u[0])
            _at_x(Av, &u[0], &b[0], 1.0, 0.0)

            gamma = lam
            event = 0
            who = -1
            for j in range(K):
                if in_active[j] or j == last_dropped or not (b[j] < 1.0 - 1e-12):
                    continue
                g = (lam - c[j]) / (1.0 - b[j])
                if g < 0.0:
                    g = 0.0
                if g < gamma:
                    gamma = g
                    event = 1
                    who = j
            for p in range(s):
                if d[p] < 0.0 and not (active[p] == last_added and x[active[p]] <= 0.0):
                    g = -x[active[p]] / d[p]
                    if g < gamma:
                        gamma = g
                        event = 2
                        who = p
            uu = _dot(M, &u[0], &u[0])
            ru = _dot(M, &r[0], &u[0])
            disc = ru * ru - uu * (rnorm * rnorm - RESIDUAL_AIM * RESIDUAL_AIM * eps * eps)
            if uu > 0.0 and disc >= 0.0:
                g = (ru - sqrt(disc)) / uu
                if 0.0 <= g <= gamma:
                    gamma = g
                    event = 3

            for p in range(s):
                x[active[p]] += gamma * d[p]
            lam -= gamma
            nb += 1
            if event == 2:
                x[active[who]] = 0.0
            for i in range(M):
                r[i] = yv[i]
            for p in range(s):
                _axpy(M, -x[active[p]], &Av[0, active[p]], &r[0])
            rnorm = sqrt(_dot(M, &r[0], &r[0]))
            _at_x(Av, &r[0], &c[0], 1.0, 0.0)

            # a join or drop can coincide with the residual or lambda stop
            if event == 3 or rnorm <= eps:
                status = RESIDUAL
                event = 3
            elif event == 0 or lam <= 0.0:
                status = LAMBDA_ZERO
                event = 0
            elif event == 1:
                if s + 1 >= smax:
                    status = STALLED
                else:
                    for p in range(s):
                        w[p] = _dot(M, &Av[0, active[p]], &Av[0, who])
                    _lsolve(L, s, &w[0], False)
                    akk = _dot(M, &Av[0, who], &Av[0, who])
                    if _chol_append(L, s, w, akk):
                        status = STALLED
                    else:
                        active[s] = who
                        s += 1
                        in_active[who] = 1
                        last_added = who
                        last_dropped = -1
                        event = -1
            else:
                j = active[who]
                for p in range(who, s - 1):
                    active[p] = active[p + 1]
                s -= 1
                in_active[j] = 0
                last_added = -1
                last_dropped = j
                if s == 0 or _chol_rebuild(Av, active, s, L):
                    status = STALLED
                else:
                    event = -1
        if event != -1:
            break
    if trace is not None and status != CAP:
        act = [int(active[p]) for p in range(s)]
        trace.append((lam, act, np.array([x[a] for a in act])))
    return x_out, float(max(lam, 0.0)), float(rnorm), int(nb), int(status)
