"""NumPy implementation of the greedy matching loops.

Same inputs, outputs and floating-point operation order as the compiled
``_kernels`` module; used when the extension is not built.

Port modes
    ``fa``/``fb`` are port offsets (0 for face +1, P for face -1) into the
    gain table ``G[i, w, p, tau]``; ``S[e, i, j, tau]`` is the SNR of edge e
    through port i of its first endpoint and port j of its second.
Steering
    ``fa``/``fb`` are the faces (+1/-1); beams are steered at the partner at
    each end of the period and gains are evaluated on the fly.

Both return ``{"links": [(e, i, j), ...], "interference": (M, 2, 2),
"stats": {...}}`` where interference[m, 0] is the bound at the second
endpoint (receiving) and interference[m, 1] at the first.
"""

from __future__ import annotations

import numpy as np


def _link_rates(S, Ib, Ia, bandwidth, margin):
    rb = np.log2(1.0 + np.minimum(S[..., 0] / (1.0 + Ib[..., 0]), S[..., 1] / (1.0 + Ib[..., 1])) / margin)
    ra = np.log2(1.0 + np.minimum(S[..., 0] / (1.0 + Ia[..., 0]), S[..., 1] / (1.0 + Ia[..., 1])) / margin)
    return bandwidth * (rb + ra)


def _port_weights(S, Ib, Ia, fa, fb, P, bandwidth, margin):
    """Best pair weight per edge with ties to the smallest signed (k_a, k_b)."""
    W = _link_rates(S, Ib, Ia, bandwidth, margin)  # (E, P, P)
    E = W.shape[0]
    weight = np.zeros(E)
    best_a = np.zeros(E, dtype=np.int64)
    best_b = np.zeros(E, dtype=np.int64)
    asc = np.arange(P)
    desc = asc[::-1]
    for off_a in (0, P):
        for off_b in (0, P):
            sel = np.flatnonzero((fa == off_a) & (fb == off_b))
            if sel.size == 0:
                continue
            oa = asc if off_a == 0 else desc
            ob = asc if off_b == 0 else desc
            sub = W[sel][:, oa][:, :, ob].reshape(sel.size, P * P)
            flat = sub.argmax(axis=1)
            weight[sel] = sub[np.arange(sel.size), flat]
            best_a[sel] = oa[flat // P]
            best_b[sel] = ob[flat % P]
    return weight, best_a, best_b


def _select(alive, weight):
    idx = np.flatnonzero(alive)
    if idx.size == 0:
        return -1
    return int(idx[np.argmax(weight[idx])])


def _prune(alive, ea, eb, fa, fb, u, v, du, dv):
    hit = alive & (((ea == u) & (fa == du)) | ((eb == u) & (fb == du))
                   | ((ea == v) & (fa == dv)) | ((eb == v) & (fb == dv)))
    alive &= ~hit
    return np.flatnonzero(hit)


def greedy_ports(ea, eb, fa, fb, S, A, G, bandwidth, margin, update_weights, restore):
    E = len(ea)
    P = S.shape[1] if E else G.shape[2] // 2
    N = A.shape[0]
    Ib = np.zeros((E, P, P, 2))
    Ia = np.zeros((E, P, P, 2))
    alive = np.ones(E, dtype=bool)
    face_used = np.zeros((N, 2), dtype=bool)  # column 0: +1, column 1: -1
    weight, best_a, best_b = _port_weights(S, Ib, Ia, fa, fb, P, bandwidth, margin)

    m_e, m_i, m_j = [], [], []
    m_tx, m_rx, m_pt, m_pr = [], [], [], []  # per direction for committed links
    Im = []
    commits = iterations = evals = 0
    per_commit = []
    while True:
        e = _select(alive, weight)
        if e < 0:
            break
        iterations += 1
        u, v = int(ea[e]), int(eb[e])
        du, dv = int(fa[e]), int(fb[e])
        pu, pv = du + int(best_a[e]), dv + int(best_b[e])
        pruned = _prune(alive, ea, eb, fa, fb, u, v, du, dv)
        if face_used[u, du // P] or face_used[v, dv // P]:
            if restore:
                back = pruned[pruned != e]
                alive[back] = True
            continue
        face_used[u, du // P] = True
        face_used[v, dv // P] = True
        m_e.append(e)
        m_i.append(int(best_a[e]))
        m_j.append(int(best_b[e]))
        Im.append(np.stack([Ib[e, best_a[e], best_b[e]], Ia[e, best_a[e], best_b[e]]]))
        # committed link as two directed receivers: u->v (rx v) and v->u (rx u)
        m_tx += [u, v]
        m_rx += [v, u]
        m_pt += [pu, pv]
        m_pr += [pv, pu]
        commits += 1
        before = evals

        idx = np.flatnonzero(alive)
        a, b = ea[idx], eb[idx]
        oa, ob = fa[idx], fb[idx]
        mtx, mrx = np.array(m_tx), np.array(m_rx)
        mpr = np.array(m_pr)
        for i, pi in ((u, pu), (v, pv)):
            for tau in range(2):
                # candidates: receiver b hears a; receiver a hears b
                okb = (a != i) & (b != u) & (b != v)
                tb = A[i, b, tau] * G[i, b, pi, tau]
                cb = tb[:, None] * G[b[:, None], i, ob[:, None] + np.arange(P)[None, :], tau]
                cb = np.where(okb[:, None], cb, 0.0)
                Ib[idx, :, :, tau] += cb[:, None, :]
                oka = (b != i) & (a != u) & (a != v)
                ta = A[i, a, tau] * G[i, a, pi, tau]
                ca = ta[:, None] * G[a[:, None], i, oa[:, None] + np.arange(P)[None, :], tau]
                ca = np.where(oka[:, None], ca, 0.0)
                Ia[idx, :, :, tau] += ca[:, :, None]
                evals += 2 * P * P * int(idx.size)
                # committed links (directed): interference at their receivers
                ok = (mtx != i) & (mrx != u) & (mrx != v)
                term = A[i, mrx, tau] * G[i, mrx, pi, tau] * G[mrx, i, mpr, tau]
                term = np.where(ok, term, 0.0)
                for k in range(len(Im)):
                    Im[k][0, tau] += term[2 * k]
                    Im[k][1, tau] += term[2 * k + 1]
                evals += len(mtx)
        per_commit.append(evals - before)
        if update_weights and idx.size:
            w, ba, bb = _port_weights(S[idx], Ib[idx], Ia[idx], fa[idx], fb[idx], P, bandwidth, margin)
            weight[idx], best_a[idx], best_b[idx] = w, ba, bb

    links = list(zip(m_e, m_i, m_j))
    interference = np.array(Im) if Im else np.zeros((0, 2, 2))
    stats = {"commits": commits, "iterations": iterations, "gain_evaluations": evals,
             "per_commit": per_commit}
    return {"links": links, "interference": interference, "stats": stats}


def dirichlet_sq(x, K):
    s = np.sin(0.5 * x)
    small = np.abs(s) < 1e-9
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(0.5 * K * x) / s
    out = out * out
    return np.where(small, float(K * K), out)


def _steer(SP, CT, CP, i, j, w, face, tau, K, c):
    """Gain of i's beam (steered at j, on ``face``) towards w; arrays over w and/or j."""
    g = (dirichlet_sq(c * (SP[i, w, tau] - SP[i, j, tau]), K)
         * dirichlet_sq(c * (CT[i, w, tau] - CT[i, j, tau]), K)) / float(K * K)
    return np.where(CP[i, w, tau] * face > 0, g, 0.0)


def greedy_steer(ea, eb, fa, fb, S, A, SP, CT, CP, K, c, bandwidth, margin, restore):
    E = len(ea)
    N = A.shape[0]
    Ib = np.zeros((E, 2))
    Ia = np.zeros((E, 2))
    alive = np.ones(E, dtype=bool)
    face_used = np.zeros((N, 2), dtype=bool)
    weight = _link_rates(S, Ib, Ia, bandwidth, margin)
    col = lambda f: 0 if f > 0 else 1  # noqa: E731

    m_e, Im = [], []
    m_tx, m_rx, m_fr = [], [], []
    commits = iterations = evals = 0
    per_commit = []
    while True:
        e = _select(alive, weight)
        if e < 0:
            break
        iterations += 1
        u, v = int(ea[e]), int(eb[e])
        du, dv = int(fa[e]), int(fb[e])
        pruned = _prune(alive, ea, eb, fa, fb, u, v, du, dv)
        if face_used[u, col(du)] or face_used[v, col(dv)]:
            if restore:
                back = pruned[pruned != e]
                alive[back] = True
            continue
        face_used[u, col(du)] = True
        face_used[v, col(dv)] = True
        m_e.append(e)
        Im.append(np.stack([Ib[e].copy(), Ia[e].copy()]))
        m_tx += [u, v]
        m_rx += [v, u]
        m_fr += [dv, du]
        commits += 1
        before = evals

        idx = np.flatnonzero(alive)
        a, b = ea[idx], eb[idx]
        oa, ob = fa[idx], fb[idx]
        mtx, mrx, mfr = np.array(m_tx), np.array(m_rx), np.array(m_fr)
        for i, j, fi in ((u, v, du), (v, u, dv)):
            for tau in range(2):
                okb = (a != i) & (b != u) & (b != v)
                txb = A[i, b, tau] * _steer(SP, CT, CP, i, j, b, fi, tau, K, c)
                gb = _steer(SP, CT, CP, b, a, i, ob, tau, K, c)
                Ib[idx, tau] += np.where(okb, txb * gb, 0.0)
                oka = (b != i) & (a != u) & (a != v)
                txa = A[i, a, tau] * _steer(SP, CT, CP, i, j, a, fi, tau, K, c)
                ga = _steer(SP, CT, CP, a, b, i, oa, tau, K, c)
                Ia[idx, tau] += np.where(oka, txa * ga, 0.0)
                evals += 4 * int(idx.size)
                ok = (mtx != i) & (mrx != u) & (mrx != v)
                txr = A[i, mrx, tau] * _steer(SP, CT, CP, i, j, mrx, fi, tau, K, c)
                gr = _steer(SP, CT, CP, mrx, mtx, i, mfr, tau, K, c)
                term = np.where(ok, txr * gr, 0.0)
                for k in range(len(Im)):
                    Im[k][0, tau] += term[2 * k]
                    Im[k][1, tau] += term[2 * k + 1]
                evals += 2 * len(mtx)
        per_commit.append(evals - before)

    links = [(e, 0, 0) for e in m_e]
    interference = np.array(Im) if Im else np.zeros((0, 2, 2))
    stats = {"commits": commits, "iterations": iterations, "gain_evaluations": evals,
             "per_commit": per_commit}
    return {"links": links, "interference": interference, "stats": stats}
