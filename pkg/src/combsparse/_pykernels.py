"""Pure-numpy versions of the two hot loops.

``_ckernels.pyx`` mirrors these line for line; keep the two in sync. Status
codes: 0 residual reached, 1 iteration/breakpoint cap, 2 stalled,
3 regularization exhausted (path reached lambda = 0 above tolerance).
"""

import numpy as np
from scipy.linalg import solve_triangular

RESIDUAL, CAP, STALLED, LAMBDA_ZERO = 0, 1, 2, 3

# Relative norm below which a new atom counts as linearly dependent.
DEPENDENCE_TOL = 1e-10
# Same test on the squared Cholesky pivot of the homotopy Gram matrix.
GRAM_PIVOT_TOL = 1e-14
# The homotopy aims its last step at this fraction of eps: the closed-form
# step length loses relative accuracy when ||r|| >> eps, and landing exactly
# on the sphere could leave the residual a hair above eps.
RESIDUAL_AIM = 0.999


def greedy_pursuit(A, norms, y, kx, max_iters, eps):
    """Combined OMP with unconstrained least-squares updates.

    Atoms ``< kx`` compete with their positive correlation, the rest with
    the absolute one; ``kx = 0`` is plain OMP. Returns
    ``(order, coef, residual_norm, iterations, status)``.
    """
    M, K = A.shape
    r = np.array(y, dtype=float)
    chosen = np.zeros(K, dtype=bool)
    cap = min(max_iters, M, K)
    Q = np.zeros((M, cap))
    R = np.zeros((cap, cap))
    z = np.zeros(cap)
    order = []
    t = 0
    status = CAP
    rnorm = np.sqrt(r @ r)
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
        pi = (A.T @ r) / norms
        vx = -1.0
        vd = -1.0
        i_hat = j_hat = -1
        if kx > 0:
            px = np.where(chosen[:kx], -np.inf, pi[:kx])
            i_hat = int(np.argmax(px))
            if np.isfinite(px[i_hat]):
                vx = max(px[i_hat], 0.0)
        if kx < K:
            pd = np.where(chosen[kx:], -np.inf, np.abs(pi[kx:]))
            j_hat = int(np.argmax(pd))
            if np.isfinite(pd[j_hat]):
                vd = pd[j_hat]
                j_hat += kx
        if vx >= vd:
            k, v = i_hat, vx
        else:
            k, v = j_hat, vd
        if v <= 0.0:
            status = STALLED
            break
        a = A[:, k]
        q = a.copy()
        for _ in range(2):
            h = Q[:, :t].T @ q
            q -= Q[:, :t] @ h
            R[:t, t] += h
        nq = np.sqrt(q @ q)
        if nq <= DEPENDENCE_TOL * np.sqrt(a @ a):
            R[:t, t] = 0.0
            status = STALLED
            break
        q /= nq
        Q[:, t] = q
        R[t, t] = nq
        z[t] = q @ r
        r -= z[t] * q
        rnorm = np.sqrt(r @ r)
        chosen[k] = True
        order.append(k)
        t += 1
    coef = solve_triangular(R[:t, :t], z[:t]) if t else np.zeros(0)
    return np.array(order, dtype=np.intp), coef, float(rnorm), t, status


def nn_homotopy(A, y, eps, max_breakpoints, trace=None):
    """Non-negative LASSO path from ``lambda_max`` down to ``||y - A x|| <= eps``.

    Follows ``min 0.5 ||y - A x||^2 + lam * sum(x)`` s.t. ``x >= 0`` with the
    active-set rule ``A_I^T r = lam`` and ``A_j^T r <= lam`` off the active
    set. Returns ``(x, lam, residual_norm, breakpoints, status)``. When
    ``trace`` is a list, ``(lam, active, x_active)`` is appended at every
    breakpoint.
    """
    M, K = A.shape
    y = np.asarray(y, dtype=float)
    x = np.zeros(K)
    r = y.copy()
    rnorm = np.sqrt(r @ r)
    c = A.T @ r
    if rnorm <= eps:
        return x, 0.0, float(rnorm), 0, RESIDUAL
    j0 = int(np.argmax(c))
    lam = float(c[j0])
    if lam <= 0.0:
        return x, 0.0, float(rnorm), 0, LAMBDA_ZERO
    active = [j0]
    in_active = np.zeros(K, dtype=bool)
    in_active[j0] = True
    L = np.array([[np.sqrt(A[:, j0] @ A[:, j0])]])
    last_added, last_dropped = j0, -1
    nb = 0
    status = CAP
    while True:
        if trace is not None:
            trace.append((lam, list(active), x[active].copy()))
        if nb >= max_breakpoints:
            status = CAP
            break
        s = len(active)
        ones = np.ones(s)
        d = solve_triangular(L, solve_triangular(L, ones, lower=True), lower=True, trans=1)
        u = A[:, active] @ d
        b = A.T @ u

        gamma = lam
        event = 0  # 0 lambda hits zero, 1 join, 2 drop, 3 residual
        who = -1
        # joins
        cand = (~in_active) & (b < 1.0 - 1e-12)
        if last_dropped >= 0:
            cand[last_dropped] = False
        idx = np.flatnonzero(cand)
        if idx.size:
            g = (lam - c[idx]) / (1.0 - b[idx])
            g = np.maximum(g, 0.0)
            m = int(np.argmin(g))
            if g[m] < gamma:
                gamma, event, who = float(g[m]), 1, int(idx[m])
        # drops
        xa = x[active]
        for p in range(s):
            if d[p] < 0.0 and not (active[p] == last_added and xa[p] <= 0.0):
                g = -xa[p] / d[p]
                if g < gamma:
                    gamma, event, who = g, 2, p
        # residual reaches eps
        uu = u @ u
        ru = r @ u
        aim = RESIDUAL_AIM * eps
        disc = ru * ru - uu * (rnorm * rnorm - aim * aim)
        if uu > 0.0 and disc >= 0.0:
            g = (ru - np.sqrt(disc)) / uu
            if 0.0 <= g <= gamma:
                gamma, event = g, 3

        x[active] = xa + gamma * d
        lam -= gamma
        nb += 1
        if event == 2:
            x[active[who]] = 0.0
        r = y - A[:, active] @ x[active]
        rnorm = np.sqrt(r @ r)
        c = A.T @ r

        # a join or drop can coincide with the residual or lambda stop
        if event == 3 or rnorm <= eps:
            status = RESIDUAL
            break
        if event == 0 or lam <= 0.0:
            status = LAMBDA_ZERO
            break
        if event == 1:
            a = A[:, who]
            w = solve_triangular(L, A[:, active].T @ a, lower=True)
            dk = a @ a - w @ w
            if dk <= GRAM_PIVOT_TOL * (a @ a):
                status = STALLED
                break
            Ln = np.zeros((s + 1, s + 1))
            Ln[:s, :s] = L
            Ln[s, :s] = w
            Ln[s, s] = np.sqrt(dk)
            L = Ln
            active.append(who)
            in_active[who] = True
            last_added, last_dropped = who, -1
        else:
            j = active.pop(who)
            in_active[j] = False
            last_added, last_dropped = -1, j
            if not active:
                status = STALLED
                break
            Aa = A[:, active]
            try:
                L = np.linalg.cholesky(Aa.T @ Aa)
            except np.linalg.LinAlgError:
                status = STALLED
                break
    if trace is not None and status != CAP:
        trace.append((lam, list(active), x[active].copy()))
    return x, float(max(lam, 0.0)), float(rnorm), nb, status
