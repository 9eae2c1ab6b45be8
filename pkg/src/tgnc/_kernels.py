"""Hot numeric kernels: biased random walks and skip-gram training.

Every kernel is written once in nopython-compatible style and compiled
with numba when available. Setting ``TGNC_DISABLE_NUMBA=1`` (or any
value other than ``0``) selects the pure-Python/numpy fallback, which
runs the identical source interpreted: slower, same arithmetic, same
draws. ``benchmarks/bench_kernels.py`` compares the two paths.

RNG: splitmix64, threaded through a 2-element uint64 array (state,
scratch). All state arithmetic happens via in-place array ops so that
wrapping is silent and identical in both execution modes.
"""

import math
import os

import numpy as np

_env = os.environ.get("TGNC_DISABLE_NUMBA", "0")
NUMBA_REQUESTED = _env in ("", "0")

if NUMBA_REQUESTED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


_JIT = {"cache": True, "nogil": True}

_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_DOUBLE_SCALE = 1.0 / 9007199254740992.0  # 2^-53


@njit(**_JIT)
def _mix64(rng):
    # rng: uint64[2] = (state, scratch); advances state, returns next raw u64
    rng[0:1] += _SM_GAMMA
    rng[1] = rng[0]
    z = rng[1:2]
    z ^= z >> _S30
    z *= _SM_M1
    z ^= z >> _S27
    z *= _SM_M2
    z ^= z >> _S31
    return rng[1]


@njit(**_JIT)
def _rand_unit(rng):
    return float(_mix64(rng) >> _S11) * _DOUBLE_SCALE


@njit(**_JIT)
def _alias_fill(w, prob, alias, scaled, small, large):
    """Vose alias construction into prob/alias, deterministic LIFO order."""
    K = w.shape[0]
    total = 0.0
    for i in range(K):
        total += w[i]
    for i in range(K):
        scaled[i] = w[i] * K / total
    ns = 0
    nl = 0
    for i in range(K):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        g = large[nl]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] - (1.0 - scaled[s])
        if scaled[g] < 1.0:
            small[ns] = g
            ns += 1
        else:
            large[nl] = g
            nl += 1
    while nl > 0:
        nl -= 1
        g = large[nl]
        prob[g] = 1.0
        alias[g] = g
    while ns > 0:
        ns -= 1
        s = small[ns]
        prob[s] = 1.0
        alias[s] = s


@njit(**_JIT)
def _alias_draw(prob, alias, base, K, rng):
    u1 = _rand_unit(rng)
    u2 = _rand_unit(rng)
    i = int(u1 * K)
    if u2 < prob[base + i]:
        return i
    return int(alias[base + i])


@njit(**_JIT)
def _alias_sample_many(prob, alias, seed, n):
    """n draws from one alias table; exposed for distribution tests."""
    rng = np.empty(2, dtype=np.uint64)
    rng[0] = seed
    K = prob.shape[0]
    out = np.empty(n, dtype=np.int32)
    for i in range(n):
        out[i] = _alias_draw(prob, alias, 0, K, rng)
    return out


@njit(**_JIT)
def _node_tables(indptr, weights, nprob, nalias, max_deg):
    n = indptr.shape[0] - 1
    scaled = np.empty(max_deg, dtype=np.float64)
    small = np.empty(max_deg, dtype=np.int64)
    large = np.empty(max_deg, dtype=np.int64)
    for v in range(n):
        base = indptr[v]
        deg = indptr[v + 1] - base
        if deg == 0:
            continue
        _alias_fill(
            weights[base:base + deg],
            nprob[base:base + deg],
            nalias[base:base + deg],
            scaled, small, large,
        )


@njit(**_JIT)
def _has_edge(indptr, indices, t, x):
    lo = indptr[t]
    hi = indptr[t + 1] - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        v = indices[mid]
        if v == x:
            return True
        if v < x:
            lo = mid + 1
        else:
            hi = mid - 1
    return False


@njit(**_JIT)
def _edge_tables(indptr, indices, weights, inv_p, inv_q, edge_off, eprob, ealias, max_deg):
    """Second-order alias tables, one per directed edge (t -> v).

    Table entry k reweights v's k-th out-edge (v -> x) by 1/p when x
    returns to t, by 1 when t -> x exists, by 1/q otherwise.
    """
    n = indptr.shape[0] - 1
    wbuf = np.empty(max_deg, dtype=np.float64)
    scaled = np.empty(max_deg, dtype=np.float64)
    small = np.empty(max_deg, dtype=np.int64)
    large = np.empty(max_deg, dtype=np.int64)
    for t in range(n):
        for e in range(indptr[t], indptr[t + 1]):
            v = indices[e]
            vbase = indptr[v]
            deg = indptr[v + 1] - vbase
            if deg == 0:
                continue
            for k in range(deg):
                x = indices[vbase + k]
                if x == t:
                    a = inv_p
                elif _has_edge(indptr, indices, t, x):
                    a = 1.0
                else:
                    a = inv_q
                wbuf[k] = weights[vbase + k] * a
            base = edge_off[e]
            _alias_fill(
                wbuf[:deg],
                eprob[base:base + deg],
                ealias[base:base + deg],
                scaled, small, large,
            )


@njit(**_JIT)
def _walk_kernel(indptr, indices, nprob, nalias, eprob, ealias, edge_off, seeds, r, l, use_second):
    """r walks of length <= l from every node; -1 pads ended walks.

    Each start node consumes its own splitmix64 stream, so the output
    is independent of any cross-node scheduling. With use_second False
    (p == q == 1) every step draws from the current node's first-order
    table, which is exactly what the second-order table degenerates to.
    """
    n = indptr.shape[0] - 1
    out = np.full((n * r, l), -1, dtype=np.int32)
    rng = np.empty(2, dtype=np.uint64)
    for v0 in range(n):
        rng[0] = seeds[v0]
        row0 = v0 * r
        for w in range(r):
            out[row0 + w, 0] = v0
            cur = v0
            prev_edge = -1
            for step in range(1, l):
                base = indptr[cur]
                deg = indptr[cur + 1] - base
                if deg == 0:
                    break
                if prev_edge < 0 or not use_second:
                    idx = _alias_draw(nprob, nalias, base, deg, rng)
                else:
                    idx = _alias_draw(eprob, ealias, edge_off[prev_edge], deg, rng)
                e = base + idx
                nxt = indices[e]
                out[row0 + w, step] = nxt
                prev_edge = e
                cur = int(nxt)
    return out


@njit(**_JIT)
def _sigmoid(f):
    if f > 35.0:
        f = 35.0
    elif f < -35.0:
        f = -35.0
    return 1.0 / (1.0 + math.exp(-f))


@njit(**_JIT)
def _sgns_kernel(W, C, toks, offs, window, n_neg, neg_prob, neg_alias, lr0, lr_min, epochs, seed):
    """In-place skip-gram negative-sampling SGD over an encoded corpus.

    For each center/context pair: one positive update plus n_neg
    negative draws from the unigram^0.75 alias table (draws equal to the
    positive target are skipped). The input-vector gradient accumulates
    over the positive-plus-negatives group before being applied. The
    learning rate decays linearly per processed center token.
    """
    k = W.shape[1]
    V = neg_prob.shape[0]
    rng = np.empty(2, dtype=np.uint64)
    rng[0] = seed
    err = np.empty(k, dtype=np.float64)
    n_seq = offs.shape[0] - 1
    total = float(toks.shape[0]) * epochs
    done = 0.0
    for _ in range(epochs):
        for s in range(n_seq):
            s_lo = offs[s]
            s_hi = offs[s + 1]
            for i in range(s_lo, s_hi):
                c = toks[i]
                alpha = lr0 + (lr_min - lr0) * (done / total)
                done += 1.0
                lo = i - window
                if lo < s_lo:
                    lo = s_lo
                hi = i + window
                if hi > s_hi - 1:
                    hi = s_hi - 1
                for j in range(lo, hi + 1):
                    if j == i:
                        continue
                    o = toks[j]
                    for d in range(k):
                        err[d] = 0.0
                    # positive pair
                    f = 0.0
                    for d in range(k):
                        f += W[c, d] * C[o, d]
                    g = (1.0 - _sigmoid(f)) * alpha
                    for d in range(k):
                        err[d] += g * C[o, d]
                        C[o, d] += g * W[c, d]
                    # negatives
                    for _n in range(n_neg):
                        t = _alias_draw(neg_prob, neg_alias, 0, V, rng)
                        if t == o:
                            continue
                        f = 0.0
                        for d in range(k):
                            f += W[c, d] * C[t, d]
                        g = -_sigmoid(f) * alpha
                        for d in range(k):
                            err[d] += g * C[t, d]
                            C[t, d] += g * W[c, d]
                    for d in range(k):
                        W[c, d] += err[d]
