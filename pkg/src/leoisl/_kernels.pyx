# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled greedy matching loops; see ``_kernels_py`` for the contract."""

import numpy as np

from libc.math cimport fabs, log2, sin


cdef inline double _min(double a, double b) noexcept nogil:
    return a if a < b else b


cdef inline double _dir_rate(double s0, double s1, double i0, double i1, double margin) noexcept nogil:
    return log2(1.0 + _min(s0 / (1.0 + i0), s1 / (1.0 + i1)) / margin)


cdef inline double _dirichlet_sq(double x, int K) noexcept nogil:
    cdef double s = sin(0.5 * x)
    cdef double t
    if fabs(s) < 1e-9:
        return <double>(K * K)
    t = sin(0.5 * K * x) / s
    return t * t


cdef void _port_weight(Py_ssize_t e, const double[:, :, :, ::1] S, double[:, :, :, ::1] Ib,
                       double[:, :, :, ::1] Ia, const long long[::1] fa, const long long[::1] fb,
                       int P, double bandwidth, double margin, double[::1] weight,
                       long long[::1] best_a, long long[::1] best_b) noexcept nogil:
    cdef int x, y, i, j, bi = 0, bj = 0
    cdef double w, best = -1.0
    for x in range(P):
        i = x if fa[e] == 0 else P - 1 - x
        for y in range(P):
            j = y if fb[e] == 0 else P - 1 - y
            w = bandwidth * (
                _dir_rate(S[e, i, j, 0], S[e, i, j, 1], Ib[e, i, j, 0], Ib[e, i, j, 1], margin)
                + _dir_rate(S[e, i, j, 0], S[e, i, j, 1], Ia[e, i, j, 0], Ia[e, i, j, 1], margin))
            if w > best:
                best = w
                bi = i
                bj = j
    weight[e] = best
    best_a[e] = bi
    best_b[e] = bj


cdef Py_ssize_t _select(const unsigned char[::1] alive, const double[::1] weight) noexcept nogil:
    cdef Py_ssize_t e, best = -1
    cdef double bw = -1.0
    for e in range(alive.shape[0]):
        if alive[e] and weight[e] > bw:
            bw = weight[e]
            best = e
    return best


def greedy_ports(const long long[::1] ea, const long long[::1] eb, const long long[::1] fa,
                 const long long[::1] fb, const double[:, :, :, ::1] S, const double[:, :, ::1] A,
                 const double[:, :, :, ::1] G, double bandwidth, double margin,
                 bint update_weights, bint restore):
    cdef Py_ssize_t E = ea.shape[0]
    cdef int P = S.shape[1] if E else G.shape[2] // 2
    cdef Py_ssize_t N = A.shape[0]
    Ib_arr = np.zeros((E, P, P, 2))
    Ia_arr = np.zeros((E, P, P, 2))
    cdef double[:, :, :, ::1] Ib = Ib_arr
    cdef double[:, :, :, ::1] Ia = Ia_arr
    alive_arr = np.ones(E, dtype=np.uint8)
    cdef unsigned char[::1] alive = alive_arr
    face_arr = np.zeros((N, 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] face_used = face_arr
    weight_arr = np.zeros(E)
    cdef double[::1] weight = weight_arr
    ba_arr = np.zeros(E, dtype=np.int64)
    bb_arr = np.zeros(E, dtype=np.int64)
    cdef long long[::1] best_a = ba_arr
    cdef long long[::1] best_b = bb_arr
    pruned_arr = np.zeros(E, dtype=np.int64)
    cdef long long[::1] pruned = pruned_arr
    # committed directed links: transmitter, receiver, receive port, slot
    cap = 2 * N + 2
    mtx_arr = np.zeros(cap, dtype=np.int64)
    mrx_arr = np.zeros(cap, dtype=np.int64)
    mpr_arr = np.zeros(cap, dtype=np.int64)
    Im_arr = np.zeros((N + 1, 2, 2))
    cdef long long[::1] mtx = mtx_arr
    cdef long long[::1] mrx = mrx_arr
    cdef long long[::1] mpr = mpr_arr
    cdef double[:, :, ::1] Im = Im_arr

    cdef Py_ssize_t e, f, k, n_pruned, n_dir = 0, commits = 0, iterations = 0
    cdef long long evals = 0, before
    cdef long long u, v, du, dv, pu, pv, a, b, i, pi, ia, ib
    cdef int beam, tau, x, y, cu, cv
    cdef double tb, ta, cb, ca, term
    links = []
    per_commit = []

    for e in range(E):
        _port_weight(e, S, Ib, Ia, fa, fb, P, bandwidth, margin, weight, best_a, best_b)

    while True:
        e = _select(alive, weight)
        if e < 0:
            break
        iterations += 1
        u = ea[e]
        v = eb[e]
        du = fa[e]
        dv = fb[e]
        pu = du + best_a[e]
        pv = dv + best_b[e]
        n_pruned = 0
        for f in range(E):
            if alive[f] and ((ea[f] == u and fa[f] == du) or (eb[f] == u and fb[f] == du)
                             or (ea[f] == v and fa[f] == dv) or (eb[f] == v and fb[f] == dv)):
                alive[f] = 0
                pruned[n_pruned] = f
                n_pruned += 1
        cu = 0 if du == 0 else 1
        cv = 0 if dv == 0 else 1
        if face_used[u, cu] or face_used[v, cv]:
            if restore:
                for k in range(n_pruned):
                    if pruned[k] != e:
                        alive[pruned[k]] = 1
            continue
        face_used[u, cu] = 1
        face_used[v, cv] = 1
        links.append((e, int(best_a[e]), int(best_b[e])))
        for tau in range(2):
            Im[commits, 0, tau] = Ib[e, best_a[e], best_b[e], tau]
            Im[commits, 1, tau] = Ia[e, best_a[e], best_b[e], tau]
        mtx[n_dir] = u
        mrx[n_dir] = v
        mpr[n_dir] = pv
        mtx[n_dir + 1] = v
        mrx[n_dir + 1] = u
        mpr[n_dir + 1] = pu
        n_dir += 2
        commits += 1
        before = evals

        for beam in range(2):
            i = u if beam == 0 else v
            pi = pu if beam == 0 else pv
            for tau in range(2):
                for f in range(E):
                    if not alive[f]:
                        continue
                    a = ea[f]
                    b = eb[f]
                    if a != i and b != u and b != v:
                        tb = A[i, b, tau] * G[i, b, pi, tau]
                        if tb != 0.0:
                            for y in range(P):
                                cb = tb * G[b, i, fb[f] + y, tau]
                                for x in range(P):
                                    Ib[f, x, y, tau] += cb
                    if b != i and a != u and a != v:
                        ta = A[i, a, tau] * G[i, a, pi, tau]
                        if ta != 0.0:
                            for x in range(P):
                                ca = ta * G[a, i, fa[f] + x, tau]
                                for y in range(P):
                                    Ia[f, x, y, tau] += ca
                    evals += 2 * P * P
                for k in range(n_dir):
                    if mtx[k] != i and mrx[k] != u and mrx[k] != v:
                        term = A[i, mrx[k], tau] * G[i, mrx[k], pi, tau] * G[mrx[k], i, mpr[k], tau]
                        Im[k // 2, k % 2, tau] += term
                evals += n_dir
        per_commit.append(evals - before)
        if update_weights:
            for f in range(E):
                if alive[f]:
                    _port_weight(f, S, Ib, Ia, fa, fb, P, bandwidth, margin, weight, best_a, best_b)

    stats = {"commits": commits, "iterations": iterations, "gain_evaluations": evals,
             "per_commit": per_commit}
    return {"links": links, "interference": Im_arr[:commits].copy(), "stats": stats}


cdef inline double _steer(const double[:, :, ::1] SP, const double[:, :, ::1] CT,
                          const double[:, :, ::1] CP, long long i, long long j, long long w,
                          long long face, int tau, int K, double c) noexcept nogil:
    if CP[i, w, tau] * face <= 0:
        return 0.0
    return (_dirichlet_sq(c * (SP[i, w, tau] - SP[i, j, tau]), K)
            * _dirichlet_sq(c * (CT[i, w, tau] - CT[i, j, tau]), K)) / <double>(K * K)


def greedy_steer(const long long[::1] ea, const long long[::1] eb, const long long[::1] fa,
                 const long long[::1] fb, const double[:, ::1] S, const double[:, :, ::1] A,
                 const double[:, :, ::1] SP, const double[:, :, ::1] CT, const double[:, :, ::1] CP,
                 int K, double c, double bandwidth, double margin, bint restore):
    cdef Py_ssize_t E = ea.shape[0]
    cdef Py_ssize_t N = A.shape[0]
    Ib_arr = np.zeros((E, 2))
    Ia_arr = np.zeros((E, 2))
    cdef double[:, ::1] Ib = Ib_arr
    cdef double[:, ::1] Ia = Ia_arr
    alive_arr = np.ones(E, dtype=np.uint8)
    cdef unsigned char[::1] alive = alive_arr
    face_arr = np.zeros((N, 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] face_used = face_arr
    weight_arr = np.zeros(E)
    cdef double[::1] weight = weight_arr
    pruned_arr = np.zeros(E, dtype=np.int64)
    cdef long long[::1] pruned = pruned_arr
    cap = 2 * N + 2
    mtx_arr = np.zeros(cap, dtype=np.int64)
    mrx_arr = np.zeros(cap, dtype=np.int64)
    mfr_arr = np.zeros(cap, dtype=np.int64)
    Im_arr = np.zeros((N + 1, 2, 2))
    cdef long long[::1] mtx = mtx_arr
    cdef long long[::1] mrx = mrx_arr
    cdef long long[::1] mfr = mfr_arr
    cdef double[:, :, ::1] Im = Im_arr

    cdef Py_ssize_t e, f, k, n_pruned, n_dir = 0, commits = 0, iterations = 0
    cdef long long evals = 0, before
    cdef long long u, v, du, dv, a, b, i, j, fi
    cdef double g
    cdef int beam, tau, cu, cv
    links = []
    per_commit = []

    for e in range(E):
        weight[e] = bandwidth * (_dir_rate(S[e, 0], S[e, 1], 0.0, 0.0, margin)
                                 + _dir_rate(S[e, 0], S[e, 1], 0.0, 0.0, margin))

    while True:
        e = _select(alive, weight)
        if e < 0:
            break
        iterations += 1
        u = ea[e]
        v = eb[e]
        du = fa[e]
        dv = fb[e]
        n_pruned = 0
        for f in range(E):
            if alive[f] and ((ea[f] == u and fa[f] == du) or (eb[f] == u and fb[f] == du)
                             or (ea[f] == v and fa[f] == dv) or (eb[f] == v and fb[f] == dv)):
                alive[f] = 0
                pruned[n_pruned] = f
                n_pruned += 1
        cu = 0 if du > 0 else 1
        cv = 0 if dv > 0 else 1
        if face_used[u, cu] or face_used[v, cv]:
            if restore:
                for k in range(n_pruned):
                    if pruned[k] != e:
                        alive[pruned[k]] = 1
            continue
        face_used[u, cu] = 1
        face_used[v, cv] = 1
        links.append((e, 0, 0))
        for tau in range(2):
            Im[commits, 0, tau] = Ib[e, tau]
            Im[commits, 1, tau] = Ia[e, tau]
        mtx[n_dir] = u
        mrx[n_dir] = v
        mfr[n_dir] = dv
        mtx[n_dir + 1] = v
        mrx[n_dir + 1] = u
        mfr[n_dir + 1] = du
        n_dir += 2
        commits += 1
        before = evals

        for beam in range(2):
            i = u if beam == 0 else v
            j = v if beam == 0 else u
            fi = du if beam == 0 else dv
            for tau in range(2):
                for f in range(E):
                    if not alive[f]:
                        continue
                    a = ea[f]
                    b = eb[f]
                    if a != i and b != u and b != v:
                        g = A[i, b, tau] * _steer(SP, CT, CP, i, j, b, fi, tau, K, c)
                        if g != 0.0:
                            Ib[f, tau] += g * _steer(SP, CT, CP, b, a, i, fb[f], tau, K, c)
                    if b != i and a != u and a != v:
                        g = A[i, a, tau] * _steer(SP, CT, CP, i, j, a, fi, tau, K, c)
                        if g != 0.0:
                            Ia[f, tau] += g * _steer(SP, CT, CP, a, b, i, fa[f], tau, K, c)
                    evals += 4
                for k in range(n_dir):
                    if mtx[k] != i and mrx[k] != u and mrx[k] != v:
                        g = A[i, mrx[k], tau] * _steer(SP, CT, CP, i, j, mrx[k], fi, tau, K, c)
                        if g != 0.0:
                            Im[k // 2, k % 2, tau] += g * _steer(SP, CT, CP, mrx[k], mtx[k], i,
                                                                 mfr[k], tau, K, c)
                evals += 2 * n_dir
        per_commit.append(evals - before)

    stats = {"commits": commits, "iterations": iterations, "gain_evaluations": evals,
             "per_commit": per_commit}
    return {"links": links, "interference": Im_arr[:commits].copy(), "stats": stats}
