"""Exact minimum-weight perfect matching on small dense graphs.

The solver is the classic primal-dual blossom algorithm for maximum-weight
matching (Galil's O(n^3) formulation, following van Rantwijk's reference
implementation), written against flat numpy arrays so numba can JIT it for
the Monte Carlo hot loop; the same code runs as plain Python when numba is
unavailable.  Minimum-weight perfect matching is obtained by the standard
shift: maximise ``LARGE - w`` with ``LARGE`` large enough that every extra
matched edge dominates any weight rearrangement, which forces maximum
cardinality and turns the maximum into the minimum total weight.

Exactness is enforced by tests against factorial brute-force enumeration
and against an independent library implementation.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def _mwm_kernel(n_vertex, edge_i, edge_j, edge_wt):  # noqa: C901
    """Maximum-weight matching; returns mate-vertex array (-1 = unmatched).

    Vertex duals start at the maximum edge weight; each stage grows
    alternating trees from free vertices, shrinking odd alternating cycles
    into blossoms, until an augmenting path appears or the duals prove that
    no improvement is possible.
    """
    n_edge = len(edge_wt)
    nb = 2 * n_vertex

    max_weight = 0.0
    for k in range(n_edge):
        if edge_wt[k] > max_weight:
            max_weight = edge_wt[k]

    # endpoint[p] = vertex at endpoint p; edge k owns endpoints 2k, 2k+1
    endpoint = np.empty(2 * n_edge, dtype=np.int64)
    for k in range(n_edge):
        endpoint[2 * k] = edge_i[k]
        endpoint[2 * k + 1] = edge_j[k]

    # remote endpoints incident to each vertex, CSR layout
    nb_count = np.zeros(n_vertex + 1, dtype=np.int64)
    for k in range(n_edge):
        nb_count[edge_i[k] + 1] += 1
        nb_count[edge_j[k] + 1] += 1
    nb_start = np.cumsum(nb_count)
    nb_flat = np.empty(2 * n_edge, dtype=np.int64)
    fill = nb_start[:-1].copy()
    for k in range(n_edge):
        i, j = edge_i[k], edge_j[k]
        nb_flat[fill[i]] = 2 * k + 1
        fill[i] += 1
        nb_flat[fill[j]] = 2 * k
        fill[j] += 1

    mate = np.full(n_vertex, -1, dtype=np.int64)
    label = np.zeros(nb, dtype=np.int64)
    labelend = np.full(nb, -1, dtype=np.int64)
    inblossom = np.arange(n_vertex, dtype=np.int64)
    blossomparent = np.full(nb, -1, dtype=np.int64)
    blossombase = np.full(nb, -1, dtype=np.int64)
    for v in range(n_vertex):
        blossombase[v] = v
    child_cap = n_vertex + 2
    blossomchilds = np.full((nb, child_cap), -1, dtype=np.int64)
    childcount = np.full(nb, -1, dtype=np.int64)       # -1 means "no list"
    blossomendps = np.full((nb, child_cap), -1, dtype=np.int64)
    bestedge = np.full(nb, -1, dtype=np.int64)
    bestedges_list = np.full((nb, nb), -1, dtype=np.int64)
    bestedges_count = np.full(nb, -1, dtype=np.int64)  # -1 means "no list"
    unused = np.empty(n_vertex + 1, dtype=np.int64)
    for i in range(n_vertex):
        unused[i] = n_vertex + i
    u_state = np.zeros(1, dtype=np.int64)
    u_state[0] = n_vertex
    dualvar = np.zeros(nb, dtype=np.float64)
    for v in range(n_vertex):
        dualvar[v] = max_weight
    allowedge = np.zeros(max(n_edge, 1), dtype=np.bool_)

    q_cap = 3 * n_vertex * n_vertex + 16 * n_vertex + 16
    queue = np.empty(q_cap, dtype=np.int64)
    q_state = np.zeros(1, dtype=np.int64)

    leaves_buf = np.empty(max(n_vertex, 1), dtype=np.int64)
    leaf_stack = np.empty(nb + 2, dtype=np.int64)
    scan_path = np.empty(nb + 2, dtype=np.int64)

    def slack(k):
        return dualvar[edge_i[k]] + dualvar[edge_j[k]] - 2.0 * edge_wt[k]

    def collect_leaves(b):
        """Vertices inside blossom b, written to leaves_buf; returns count."""
        if b < n_vertex:
            leaves_buf[0] = b
            return 1
        count = 0
        top = 0
        leaf_stack[top] = b
        top += 1
        while top > 0:
            top -= 1
            cur = leaf_stack[top]
            if cur < n_vertex:
                leaves_buf[count] = cur
                count += 1
            else:
                for ci in range(childcount[cur]):
                    leaf_stack[top] = blossomchilds[cur, ci]
                    top += 1
        return count

    def assign_label(w0, t0, p0):
        w, t, p = w0, t0, p0
        while True:
            b = inblossom[w]
            label[w] = t
            label[b] = t
            labelend[w] = p
            labelend[b] = p
            bestedge[w] = -1
            bestedge[b] = -1
            if t == 1:
                cnt = collect_leaves(b)
                for li in range(cnt):
                    queue[q_state[0]] = leaves_buf[li]
                    q_state[0] += 1
                return
            base = blossombase[b]
            # a T-label propagates an S-label to the base's mate
            w = endpoint[mate[base]]
            t = 1
            p = mate[base] ^ 1

    def scan_blossom(v0, w0):
        """Trace alternating trees from v and w; returns the base of a new
        blossom, or -1 when the trees have different roots (augmenting)."""
        v, w = v0, w0
        path_len = 0
        base = -1
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            scan_path[path_len] = b
            path_len += 1
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = endpoint[labelend[b]]
                b = inblossom[v]
                v = endpoint[labelend[b]]
            if w != -1:
                v, w = w, v
        for pi in range(path_len):
            label[scan_path[pi]] = 1
        return base

    def consider_best(b, k2, bestedgeto):
        i2 = edge_i[k2]
        j2 = edge_j[k2]
        if inblossom[j2] == b:
            j2 = i2
        bj = inblossom[j2]
        if bj != b and label[bj] == 1 and (
                bestedgeto[bj] == -1 or slack(k2) < slack(bestedgeto[bj])):
            bestedgeto[bj] = k2

    def add_blossom(base, k):
        v = edge_i[k]
        w = edge_j[k]
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        u_state[0] -= 1
        b = unused[u_state[0]]
        blossombase[b] = base
        blossomparent[b] = -1
        blossomparent[bb] = b

        path = np.empty(child_cap, dtype=np.int64)
        endps = np.empty(child_cap, dtype=np.int64)
        n_path = 0
        while bv != bb:
            blossomparent[bv] = b
            path[n_path] = bv
            endps[n_path] = labelend[bv]
            n_path += 1
            v = endpoint[labelend[bv]]
            bv = inblossom[v]
        path[n_path] = bb
        n_path += 1
        for ii in range(n_path // 2):
            tmp = path[ii]
            path[ii] = path[n_path - 1 - ii]
            path[n_path - 1 - ii] = tmp
        for ii in range((n_path - 1) // 2):
            tmp = endps[ii]
            endps[ii] = endps[n_path - 2 - ii]
            endps[n_path - 2 - ii] = tmp
        endps[n_path - 1] = 2 * k
        n_endps = n_path
        while bw != bb:
            blossomparent[bw] = b
            path[n_path] = bw
            n_path += 1
            endps[n_endps] = labelend[bw] ^ 1
            n_endps += 1
            w = endpoint[labelend[bw]]
            bw = inblossom[w]

        label[b] = 1
        labelend[b] = labelend[bb]
        dualvar[b] = 0.0
        for ci in range(n_path):
            blossomchilds[b, ci] = path[ci]
            blossomendps[b, ci] = endps[ci]
        childcount[b] = n_path

        cnt = collect_leaves(b)
        for li in range(cnt):
            lv = leaves_buf[li]
            if label[inblossom[lv]] == 2:
                queue[q_state[0]] = lv
                q_state[0] += 1
            inblossom[lv] = b

        bestedgeto = np.full(nb, -1, dtype=np.int64)
        for ci in range(n_path):
            bv2 = path[ci]
            if bestedges_count[bv2] < 0:
                lcnt = collect_leaves(bv2)
                for li in range(lcnt):
                    lv = leaves_buf[li]
                    for pi in range(nb_start[lv], nb_start[lv + 1]):
                        consider_best(b, nb_flat[pi] // 2, bestedgeto)
            else:
                for ei in range(bestedges_count[bv2]):
                    consider_best(b, bestedges_list[bv2, ei], bestedgeto)
            bestedges_count[bv2] = -1
            bestedge[bv2] = -1
        cnt2 = 0
        for bj in range(nb):
            if bestedgeto[bj] != -1:
                bestedges_list[b, cnt2] = bestedgeto[bj]
                cnt2 += 1
        bestedges_count[b] = cnt2
        bestedge[b] = -1
        for ei in range(cnt2):
            k3 = bestedges_list[b, ei]
            if bestedge[b] == -1 or slack(k3) < slack(bestedge[b]):
                bestedge[b] = k3

    def expand_blossom(b0, endstage):
        work = np.empty(nb + 2, dtype=np.int64)
        work[0] = b0
        n_work = 1
        while n_work > 0:
            n_work -= 1
            b = work[n_work]
            nchild = childcount[b]
            for ci in range(nchild):
                s = blossomchilds[b, ci]
                blossomparent[s] = -1
                if s < n_vertex:
                    inblossom[s] = s
                elif endstage and dualvar[s] == 0.0:
                    work[n_work] = s
                    n_work += 1
                else:
                    lcnt = collect_leaves(s)
                    for li in range(lcnt):
                        inblossom[leaves_buf[li]] = s
            if (not endstage) and label[b] == 2:
                # relabel the sub-blossoms along the path from the entry
                # child to the base, re-using the freed alternating edges
                entrychild = inblossom[endpoint[labelend[b] ^ 1]]
                j = 0
                for ci in range(nchild):
                    if blossomchilds[b, ci] == entrychild:
                        j = ci
                        break
                if j & 1:
                    j -= nchild
                    jstep = 1
                    endptrick = 0
                else:
                    jstep = -1
                    endptrick = 1
                p = labelend[b]
                while j != 0:
                    label[endpoint[p ^ 1]] = 0
                    label[endpoint[blossomendps[b, (j - endptrick) % nchild] ^ endptrick ^ 1]] = 0
                    assign_label(endpoint[p ^ 1], 2, p)
                    allowedge[blossomendps[b, (j - endptrick) % nchild] // 2] = True
                    j += jstep
                    p = blossomendps[b, (j - endptrick) % nchild] ^ endptrick
                    allowedge[p // 2] = True
                    j += jstep
                bv = blossomchilds[b, j % nchild]
                label[endpoint[p ^ 1]] = 2
                label[bv] = 2
                labelend[endpoint[p ^ 1]] = p
                labelend[bv] = p
                bestedge[bv] = -1
                j += jstep
                while blossomchilds[b, j % nchild] != entrychild:
                    bv = blossomchilds[b, j % nchild]
                    if label[bv] == 1:
                        j += jstep
                        continue
                    lcnt = collect_leaves(bv)
                    lv = -1
                    for li in range(lcnt):
                        if label[leaves_buf[li]] != 0:
                            lv = leaves_buf[li]
                            break
                    if lv >= 0:
                        label[lv] = 0
                        label[endpoint[mate[blossombase[bv]]]] = 0
                        assign_label(lv, 2, labelend[lv])
                    j += jstep
            label[b] = -1
            labelend[b] = -1
            childcount[b] = -1
            blossombase[b] = -1
            bestedges_count[b] = -1
            bestedge[b] = -1
            unused[u_state[0]] = b
            u_state[0] += 1

    def augment_blossom(b0, v0):
        # Worklist replaces the recursion: sub-tasks touch disjoint mates
        # and only their own child lists, so order is irrelevant.
        task_b = np.empty(4 * nb + 4, dtype=np.int64)
        task_v = np.empty(4 * nb + 4, dtype=np.int64)
        task_b[0] = b0
        task_v[0] = v0
        n_task = 1
        while n_task > 0:
            n_task -= 1
            b = task_b[n_task]
            v = task_v[n_task]
            t = v
            while blossomparent[t] != b:
                t = blossomparent[t]
            if t >= n_vertex:
                task_b[n_task] = t
                task_v[n_task] = v
                n_task += 1
            nchild = childcount[b]
            i = 0
            for ci in range(nchild):
                if blossomchilds[b, ci] == t:
                    i = ci
                    break
            j = i
            if i & 1:
                j -= nchild
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            while j != 0:
                j += jstep
                t2 = blossomchilds[b, j % nchild]
                p = blossomendps[b, (j - endptrick) % nchild] ^ endptrick
                if t2 >= n_vertex:
                    task_b[n_task] = t2
                    task_v[n_task] = endpoint[p]
                    n_task += 1
                j += jstep
                t2 = blossomchilds[b, j % nchild]
                if t2 >= n_vertex:
                    task_b[n_task] = t2
                    task_v[n_task] = endpoint[p ^ 1]
                    n_task += 1
                mate[endpoint[p]] = p ^ 1
                mate[endpoint[p ^ 1]] = p
            if i > 0:
                tmp_c = np.empty(nchild, dtype=np.int64)
                tmp_e = np.empty(nchild, dtype=np.int64)
                for ci in range(nchild):
                    tmp_c[ci] = blossomchilds[b, (ci + i) % nchild]
                    tmp_e[ci] = blossomendps[b, (ci + i) % nchild]
                for ci in range(nchild):
                    blossomchilds[b, ci] = tmp_c[ci]
                    blossomendps[b, ci] = tmp_e[ci]
            blossombase[b] = v

    def augment_matching(k):
        for side in range(2):
            if side == 0:
                s = edge_i[k]
                p = 2 * k + 1
            else:
                s = edge_j[k]
                p = 2 * k
            while True:
                bs = inblossom[s]
                if bs >= n_vertex:
                    augment_blossom(bs, s)
                mate[s] = p
                if labelend[bs] == -1:
                    break
                t = endpoint[labelend[bs]]
                bt = inblossom[t]
                s = endpoint[labelend[bt]]
                jv = endpoint[labelend[bt] ^ 1]
                if bt >= n_vertex:
                    augment_blossom(bt, jv)
                mate[jv] = labelend[bt]
                p = labelend[bt] ^ 1

    for _stage in range(n_vertex):
        for b in range(nb):
            label[b] = 0
            labelend[b] = -1
            bestedge[b] = -1
            bestedges_count[b] = -1
        for k in range(n_edge):
            allowedge[k] = False
        q_state[0] = 0

        for v in range(n_vertex):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, 1, -1)

        augmented = False
        while True:
            while q_state[0] > 0 and not augmented:
                q_state[0] -= 1
                v = queue[q_state[0]]
                for pi in range(nb_start[v], nb_start[v + 1]):
                    p = nb_flat[pi]
                    k = p // 2
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = 0.0
                    if not allowedge[k]:
                        kslack = slack(k)
                        if kslack <= 0.0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            assign_label(w, 2, p ^ 1)
                        elif label[inblossom[w]] == 1:
                            base = scan_blossom(v, w)
                            if base >= 0:
                                add_blossom(base, k)
                            else:
                                augment_matching(k)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < slack(bestedge[b]):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < slack(bestedge[w]):
                            bestedge[w] = k
            if augmented:
                break

            # dual adjustment
            deltatype = 1
            delta = dualvar[0]
            for v in range(1, n_vertex):
                if dualvar[v] < delta:
                    delta = dualvar[v]
            deltaedge = -1
            deltablossom = -1
            for v in range(n_vertex):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = slack(bestedge[v])
                    if d < delta:
                        delta = d
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(nb):
                if (blossomparent[b] == -1 and label[b] == 1
                        and bestedge[b] != -1):
                    d = slack(bestedge[b]) / 2.0
                    if d < delta:
                        delta = d
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(n_vertex, nb):
                if (blossombase[b] >= 0 and blossomparent[b] == -1
                        and label[b] == 2 and dualvar[b] < delta):
                    delta = dualvar[b]
                    deltatype = 4
                    deltablossom = b

            for v in range(n_vertex):
                lab = label[inblossom[v]]
                if lab == 1:
                    dualvar[v] -= delta
                elif lab == 2:
                    dualvar[v] += delta
            for b in range(n_vertex, nb):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta

            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = True
                iv = edge_i[deltaedge]
                if label[inblossom[iv]] == 0:
                    iv = edge_j[deltaedge]
                queue[q_state[0]] = iv
                q_state[0] += 1
            elif deltatype == 3:
                allowedge[deltaedge] = True
                queue[q_state[0]] = edge_i[deltaedge]
                q_state[0] += 1
            else:
                expand_blossom(deltablossom, False)

        if not augmented:
            break

        for b in range(n_vertex, nb):
            if (blossombase[b] >= 0 and blossomparent[b] == -1
                    and label[b] == 1 and dualvar[b] == 0.0):
                expand_blossom(b, True)

    out = np.full(n_vertex, -1, dtype=np.int64)
    for v in range(n_vertex):
        if mate[v] >= 0:
            out[v] = endpoint[mate[v]]
    return out


def max_weight_matching(n: int, edges: list[tuple[int, int, float]]) -> np.ndarray:
    """Maximum-weight matching of an edge list; returns mate array."""
    if n == 0 or not edges:
        return np.full(n, -1, dtype=np.int64)
    m = len(edges)
    edge_i = np.empty(m, dtype=np.int64)
    edge_j = np.empty(m, dtype=np.int64)
    edge_wt = np.empty(m, dtype=np.float64)
    for k, (i, j, w) in enumerate(edges):
        if i == j:
            raise ValueError("self-loops are not allowed")
        edge_i[k], edge_j[k], edge_wt[k] = i, j, w
    return _mwm_kernel(n, edge_i, edge_j, edge_wt)


class UnmatchablePairingError(ValueError):
    """No perfect matching exists on the given terminals."""


def min_weight_perfect_matching(weights: np.ndarray) -> list[tuple[int, int]]:
    """Exact minimum-weight perfect matching of a dense weight matrix.

    ``weights`` is a symmetric (n, n) matrix; ``inf`` entries mark forbidden
    pairs.  Raises UnmatchablePairingError for odd n or when the finite
    edges admit no perfect matching.
    """
    w = np.asarray(weights, dtype=np.float64)
    n = w.shape[0]
    if n == 0:
        return []
    if n % 2 == 1:
        raise UnmatchablePairingError(f"odd terminal count {n}")

    iu, ju = np.triu_indices(n, k=1)
    wts = w[iu, ju]
    keep = np.isfinite(wts)
    edge_i = iu[keep].astype(np.int64)
    edge_j = ju[keep].astype(np.int64)
    wts = wts[keep]
    if len(wts) == 0:
        raise UnmatchablePairingError("no finite-weight edges")
    wmax = float(np.max(np.abs(wts)))
    large = (n + 2.0) * (wmax + 1.0)
    mate = _mwm_kernel(n, edge_i, edge_j, large - wts)
    if np.any(mate < 0):
        raise UnmatchablePairingError("terminals admit no perfect matching")
    return [(i, int(mate[i])) for i in range(n) if i < mate[i]]


def matching_weight(weights: np.ndarray, pairs: list[tuple[int, int]]) -> float:
    """Total weight of a pairing, summed in canonical (sorted-pair) order."""
    return float(sum(weights[i, j] for i, j in sorted(pairs)))
