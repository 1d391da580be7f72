"""JIT-compiled CDCL kernel.

Two-watched-literal propagation, first-UIP learning, non-chronological
backjumping, Luby restarts and MiniSat-style assumptions.  Decisions take the
lowest-index unassigned variable with phase false, so runs are deterministic.

Internal literal encoding: ``2*(v-1) + neg``; ``lit ^ 1`` negates.
The kernel also does projected enumeration with blocking clauses so that a
whole cell measurement runs without returning to the interpreter.
"""

import numpy as np
from numba import njit

UNSAT = 0
SAT = 1
UNKNOWN = 2

_LUBY_UNIT = 64


def encode_lit(lit: int) -> int:
    return 2 * (abs(lit) - 1) + (lit < 0)


def flatten(clauses):
    """Clauses of signed ints -> (lits int32, starts int64); drops tautologies and repeated literals."""
    lits: list[int] = []
    starts = [0]
    for clause in clauses:
        uniq = dict.fromkeys(clause)
        if any(-l in uniq for l in uniq):
            continue
        lits.extend(2 * (abs(l) - 1) + (l < 0) for l in uniq)
        starts.append(len(lits))
    return np.asarray(lits, dtype=np.int32), np.asarray(starts, dtype=np.int64)


@njit(cache=True)
def _grow(a, n):
    b = np.empty(n, a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _luby(i):
    # i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,...
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    x = i
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return 1 << seq


@njit(cache=True, inline="always")
def _val(assign, lit):
    a = assign[lit >> 1]
    if a < 0:
        return -1
    return a ^ (lit & 1)


@njit(cache=True, inline="always")
def _enqueue(lit, c, assign, level, reason, trail, st):
    v = lit >> 1
    assign[v] = 1 - (lit & 1)
    level[v] = st[2]
    reason[v] = c
    trail[st[0]] = lit
    st[0] += 1


@njit(cache=True)
def _propagate(cl, cstart, clen, wnext, whead, assign, level, reason, trail, st):
    while st[1] < st[0]:
        p = trail[st[1]]
        st[1] += 1
        false_lit = p ^ 1
        prev = -1
        e = whead[false_lit]
        while e != -1:
            c = e >> 1
            i = e & 1
            nxt = wnext[e]
            base = cstart[c]
            other = cl[base + 1 - i]
            if _val(assign, other) == 1:
                prev = e
                e = nxt
                continue
            moved = False
            for k in range(2, clen[c]):
                lk = cl[base + k]
                if _val(assign, lk) != 0:
                    cl[base + k] = false_lit
                    cl[base + i] = lk
                    if prev == -1:
                        whead[false_lit] = nxt
                    else:
                        wnext[prev] = nxt
                    wnext[e] = whead[lk]
                    whead[lk] = e
                    moved = True
                    break
            if moved:
                e = nxt
                continue
            if _val(assign, other) == 0:
                st[1] = st[0]
                return c
            _enqueue(other, c, assign, level, reason, trail, st)
            prev = e
            e = nxt
    return -1


@njit(cache=True)
def _analyze(confl, cl, cstart, clen, level, reason, trail, seen, buf, st):
    """First-UIP learning.  Fills buf[0:n] (asserting literal first); returns (n, backjump level)."""
    n = 1
    path = 0
    p = -1
    idx = st[0] - 1
    c = confl
    cur = st[2]
    while True:
        base = cstart[c]
        for k in range(clen[c]):
            q = cl[base + k]
            if q == p:
                continue
            v = q >> 1
            if seen[v] == 0 and level[v] > 0:
                seen[v] = 1
                if level[v] >= cur:
                    path += 1
                else:
                    buf[n] = q
                    n += 1
        while seen[trail[idx] >> 1] == 0:
            idx -= 1
        p = trail[idx]
        idx -= 1
        seen[p >> 1] = 0
        path -= 1
        if path == 0:
            break
        c = reason[p >> 1]
    buf[0] = p ^ 1
    bt = 0
    best = 1
    for k in range(1, n):
        seen[buf[k] >> 1] = 0
        lv = level[buf[k] >> 1]
        if lv > bt:
            bt = lv
            best = k
    if n > 1:
        tmp = buf[1]
        buf[1] = buf[best]
        buf[best] = tmp
    return n, bt


@njit(cache=True)
def _backtrack(lvl, assign, reason, trail, tlim, st):
    if st[2] <= lvl:
        return
    pos = tlim[lvl]
    for i in range(st[0] - 1, pos - 1, -1):
        v = trail[i] >> 1
        assign[v] = -1
        reason[v] = -1
    st[0] = pos
    st[1] = pos
    st[2] = lvl


@njit(cache=True)
def enumerate_models(nvars, lits, starts, proj, cutoff, assumptions, budget):
    """Find up to ``cutoff`` models with pairwise distinct projections onto ``proj`` (0-based vars).

    Returns (status, models, conflicts).  status SAT means the cutoff was hit,
    UNSAT means every projection was found, UNKNOWN means the conflict budget
    (``budget`` > 0) ran out first.
    """
    nin = starts.shape[0] - 1
    ccap = 2 * nin + 64
    lcap = 2 * lits.shape[0] + 256
    cl = np.empty(lcap, np.int32)
    cstart = np.empty(ccap, np.int64)
    clen = np.empty(ccap, np.int32)
    wnext = np.full(2 * ccap, -1, np.int64)
    whead = np.full(2 * nvars + 2, -1, np.int64)
    nclauses = 0
    nlits = 0

    assign = np.full(nvars + 1, -1, np.int8)
    level = np.zeros(nvars + 1, np.int32)
    reason = np.full(nvars + 1, -1, np.int64)
    trail = np.empty(nvars + 1, np.int32)
    tlim = np.empty(nvars + 2, np.int64)
    seen = np.zeros(nvars + 1, np.uint8)
    buf = np.empty(nvars + 2, np.int32)
    tmp = np.empty(nvars + 2, np.int32)
    st = np.zeros(3, np.int64)  # trail size, propagation head, decision level

    mcap = 16
    if cutoff < mcap:
        mcap = max(cutoff, 1)
    models = np.empty((mcap, nvars), np.uint8)
    nmodels = 0
    nassump = assumptions.shape[0]

    # load input clauses at level 0
    for c in range(nin):
        k = 0
        sat = False
        for j in range(starts[c], starts[c + 1]):
            q = lits[j]
            vq = _val(assign, q)
            if vq == 1:
                sat = True
                break
            if vq == -1:
                tmp[k] = q
                k += 1
        if sat:
            continue
        if k == 0:
            return UNSAT, models[:0], 0
        if k == 1:
            _enqueue(tmp[0], -1, assign, level, reason, trail, st)
            continue
        if nclauses >= ccap:
            ccap *= 2
            cstart = _grow(cstart, ccap)
            clen = _grow(clen, ccap)
            wn = np.full(2 * ccap, -1, np.int64)
            wn[: 2 * nclauses] = wnext[: 2 * nclauses]
            wnext = wn
        while nlits + k > lcap:
            lcap *= 2
            cl = _grow(cl, lcap)
        cstart[nclauses] = nlits
        clen[nclauses] = k
        for j in range(k):
            cl[nlits + j] = tmp[j]
        nlits += k
        wnext[2 * nclauses] = whead[tmp[0]]
        whead[tmp[0]] = 2 * nclauses
        wnext[2 * nclauses + 1] = whead[tmp[1]]
        whead[tmp[1]] = 2 * nclauses + 1
        nclauses += 1

    conflicts = 0
    restart_idx = 0
    restart_limit = _LUBY_UNIT * _luby(0)
    since_restart = 0
    dptr = 0

    while True:
        confl = _propagate(cl, cstart, clen, wnext, whead, assign, level, reason, trail, st)
        if confl != -1:
            conflicts += 1
            since_restart += 1
            if st[2] == 0:
                return UNSAT, models[:nmodels], conflicts
            n, bt = _analyze(confl, cl, cstart, clen, level, reason, trail, seen, buf, st)
            _backtrack(bt, assign, reason, trail, tlim, st)
            dptr = 0
            if n == 1:
                _enqueue(buf[0], -1, assign, level, reason, trail, st)
            else:
                if nclauses >= ccap:
                    ccap *= 2
                    cstart = _grow(cstart, ccap)
                    clen = _grow(clen, ccap)
                    wn = np.full(2 * ccap, -1, np.int64)
                    wn[: 2 * nclauses] = wnext[: 2 * nclauses]
                    wnext = wn
                while nlits + n > lcap:
                    lcap *= 2
                    cl = _grow(cl, lcap)
                cstart[nclauses] = nlits
                clen[nclauses] = n
                for j in range(n):
                    cl[nlits + j] = buf[j]
                nlits += n
                wnext[2 * nclauses] = whead[buf[0]]
                whead[buf[0]] = 2 * nclauses
                wnext[2 * nclauses + 1] = whead[buf[1]]
                whead[buf[1]] = 2 * nclauses + 1
                _enqueue(buf[0], nclauses, assign, level, reason, trail, st)
                nclauses += 1
            if budget > 0 and conflicts >= budget:
                return UNKNOWN, models[:nmodels], conflicts
            if since_restart >= restart_limit:
                _backtrack(0, assign, reason, trail, tlim, st)
                dptr = 0
                restart_idx += 1
                restart_limit = _LUBY_UNIT * _luby(restart_idx)
                since_restart = 0
            continue

        if st[2] < nassump:
            a = assumptions[st[2]]
            va = _val(assign, a)
            if va == 0:
                return UNSAT, models[:nmodels], conflicts
            tlim[st[2]] = st[0]
            st[2] += 1
            if va == -1:
                _enqueue(a, -1, assign, level, reason, trail, st)
            continue

        while dptr < nvars and assign[dptr] >= 0:
            dptr += 1
        if dptr < nvars:
            tlim[st[2]] = st[0]
            st[2] += 1
            _enqueue(2 * dptr + 1, -1, assign, level, reason, trail, st)
            continue

        # full model
        if nmodels >= mcap:
            mcap *= 2
            nm = np.empty((mcap, nvars), np.uint8)
            nm[:nmodels] = models[:nmodels]
            models = nm
        for v in range(nvars):
            models[nmodels, v] = assign[v]
        nmodels += 1
        if nmodels >= cutoff:
            return SAT, models[:nmodels], conflicts
        if proj.shape[0] == 0:
            return UNSAT, models[:nmodels], conflicts

        # block this projection and backtrack just below its highest level
        k = 0
        hl = 0
        for j in range(proj.shape[0]):
            v = proj[j]
            tmp[k] = 2 * v + assign[v]
            k += 1
            if level[v] > hl:
                hl = level[v]
        if hl == 0:
            return UNSAT, models[:nmodels], conflicts
        if k == 1:
            _backtrack(0, assign, reason, trail, tlim, st)
            dptr = 0
            _enqueue(tmp[0], -1, assign, level, reason, trail, st)
            continue
        _backtrack(hl - 1, assign, reason, trail, tlim, st)
        dptr = 0
        u = 0
        for j in range(k):
            if assign[tmp[j] >> 1] < 0:
                q = tmp[j]
                tmp[j] = tmp[u]
                tmp[u] = q
                u += 1
        if u == 1:
            best = 1
            for j in range(2, k):
                if level[tmp[j] >> 1] > level[tmp[best] >> 1]:
                    best = j
            q = tmp[1]
            tmp[1] = tmp[best]
            tmp[best] = q
        if nclauses >= ccap:
            ccap *= 2
            cstart = _grow(cstart, ccap)
            clen = _grow(clen, ccap)
            wn = np.full(2 * ccap, -1, np.int64)
            wn[: 2 * nclauses] = wnext[: 2 * nclauses]
            wnext = wn
        while nlits + k > lcap:
            lcap *= 2
            cl = _grow(cl, lcap)
        cstart[nclauses] = nlits
        clen[nclauses] = k
        for j in range(k):
            cl[nlits + j] = tmp[j]
        nlits += k
        wnext[2 * nclauses] = whead[tmp[0]]
        whead[tmp[0]] = 2 * nclauses
        wnext[2 * nclauses + 1] = whead[tmp[1]]
        whead[tmp[1]] = 2 * nclauses + 1
        if u == 1:
            _enqueue(tmp[0], nclauses, assign, level, reason, trail, st)
        nclauses += 1


@njit(cache=True)
def _emit_parity(vs, w, parity, lits, n, starts, nc):
    # clauses forbidding each wrong-parity assignment of vs[0:w] (0-based vars)
    for code in range(1 << w):
        ones = 0
        for j in range(w):
            ones += (code >> (w - 1 - j)) & 1
        if (ones & 1) == parity:
            continue
        for j in range(w):
            b = (code >> (w - 1 - j)) & 1
            lits[n] = 2 * vs[j] + b
            n += 1
        nc += 1
        starts[nc] = n
    return n, nc


@njit(cache=True)
def encode_xors(xvars, xstarts, xparity, nvars):
    """Kernel twin of :func:`hashsat.solver.encode_xor` applied to a batch.

    ``xvars`` holds sorted 0-based variables per constraint.  Returns
    (lits, starts, total variable count).
    """
    nx = xstarts.shape[0] - 1
    cap_c = 1
    cap_l = 1
    for i in range(nx):
        w = xstarts[i + 1] - xstarts[i]
        pieces = 1 if w <= 3 else w - 2
        cap_c += 4 * pieces + 1
        cap_l += 12 * pieces + 3
    lits = np.empty(cap_l, np.int32)
    starts = np.zeros(cap_c, np.int64)
    n = 0
    nc = 0
    top = nvars
    piece = np.empty(3, np.int64)
    for i in range(nx):
        a = xstarts[i]
        w = xstarts[i + 1] - a
        par = xparity[i]
        if w == 0:
            if par == 1:
                nc += 1
                starts[nc] = n
            continue
        if w <= 3:
            for j in range(w):
                piece[j] = xvars[a + j]
            n, nc = _emit_parity(piece, w, par, lits, n, starts, nc)
            continue
        acc = xvars[a]
        j = 1
        while w - j > 2:
            t = top
            top += 1
            piece[0] = acc
            piece[1] = xvars[a + j]
            piece[2] = t
            n, nc = _emit_parity(piece, 3, 0, lits, n, starts, nc)
            acc = t
            j += 1
        piece[0] = acc
        piece[1] = xvars[a + j]
        piece[2] = xvars[a + j + 1]
        n, nc = _emit_parity(piece, 3, par, lits, n, starts, nc)
    return lits[:n], starts[: nc + 1], top
